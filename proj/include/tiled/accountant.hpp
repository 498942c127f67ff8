#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>

namespace tiled {

enum class BufferTag : int { Models = 0, Features = 1, Maps = 2, MergeBuffer = 3 };

inline const char* tag_name(BufferTag tag) {
    switch (tag) {
        case BufferTag::Models: return "models";
        case BufferTag::Features: return "features";
        case BufferTag::Maps: return "maps";
        case BufferTag::MergeBuffer: return "merge_buffer";
    }
    return "?";
}

// Tracks logical buffer bytes by tag. Measures the algorithmic working set
// deterministically instead of OS RSS. register/release must pair exactly;
// audit mode turns imbalance into an error.
class BufferAccountant {
public:
    void register_bytes(BufferTag tag, std::size_t bytes) {
        std::lock_guard lock(mutex_);
        current_[idx(tag)] += bytes;
        total_current_ += bytes;
        peak_by_tag_[idx(tag)] = std::max(peak_by_tag_[idx(tag)], current_[idx(tag)]);
        peak_total_ = std::max(peak_total_, total_current_);
        const std::size_t working = total_current_ - current_[idx(BufferTag::MergeBuffer)];
        peak_working_ = std::max(peak_working_, working);
    }

    void release_bytes(BufferTag tag, std::size_t bytes) {
        std::lock_guard lock(mutex_);
        if (current_[idx(tag)] < bytes || total_current_ < bytes) {
            if (audit_)
                throw std::logic_error(std::string("BufferAccountant: release of ") +
                                       tag_name(tag) + " exceeds registered bytes");
            bytes = current_[idx(tag)];
        }
        current_[idx(tag)] -= bytes;
        total_current_ -= bytes;
    }

    void set_audit(bool on) { audit_ = on; }

    std::size_t current_total() const {
        std::lock_guard lock(mutex_);
        return total_current_;
    }
    std::size_t peak_total() const {
        std::lock_guard lock(mutex_);
        return peak_total_;
    }
    // Peak of everything except the merge buffer (model + working set).
    std::size_t peak_working() const {
        std::lock_guard lock(mutex_);
        return peak_working_;
    }
    std::size_t peak_for(BufferTag tag) const {
        std::lock_guard lock(mutex_);
        return peak_by_tag_[idx(tag)];
    }
    std::size_t current_for(BufferTag tag) const {
        std::lock_guard lock(mutex_);
        return current_[idx(tag)];
    }

    void reset() {
        std::lock_guard lock(mutex_);
        if (audit_ && total_current_ != 0)
            throw std::logic_error("BufferAccountant: reset with live buffers");
        current_.fill(0);
        peak_by_tag_.fill(0);
        total_current_ = 0;
        peak_total_ = 0;
        peak_working_ = 0;
    }

private:
    static constexpr std::size_t idx(BufferTag tag) { return static_cast<std::size_t>(tag); }

    mutable std::mutex mutex_;
    std::array<std::size_t, 4> current_{};
    std::array<std::size_t, 4> peak_by_tag_{};
    std::size_t total_current_ = 0;
    std::size_t peak_total_ = 0;
    std::size_t peak_working_ = 0;
    bool audit_ = false;
};

// RAII registration for a buffer's lifetime. Accountant may be null (untracked).
class ScopedBuffer {
public:
    ScopedBuffer() = default;
    ScopedBuffer(BufferAccountant* acc, BufferTag tag, std::size_t bytes)
        : acc_(acc), tag_(tag), bytes_(bytes) {
        if (acc_) acc_->register_bytes(tag_, bytes_);
    }
    ScopedBuffer(const ScopedBuffer&) = delete;
    ScopedBuffer& operator=(const ScopedBuffer&) = delete;
    ScopedBuffer(ScopedBuffer&& other) noexcept { swap(other); }
    ScopedBuffer& operator=(ScopedBuffer&& other) noexcept {
        release();
        swap(other);
        return *this;
    }
    ~ScopedBuffer() { release(); }

    void release() {
        if (acc_) acc_->release_bytes(tag_, bytes_);
        acc_ = nullptr;
        bytes_ = 0;
    }

private:
    void swap(ScopedBuffer& other) {
        std::swap(acc_, other.acc_);
        std::swap(tag_, other.tag_);
        std::swap(bytes_, other.bytes_);
    }
    BufferAccountant* acc_ = nullptr;
    BufferTag tag_ = BufferTag::Models;
    std::size_t bytes_ = 0;
};

}  // namespace tiled
