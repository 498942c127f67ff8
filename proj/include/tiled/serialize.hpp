#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "tiled/errors.hpp"
#include "tiled/scorer.hpp"

namespace tiled {

// Binary model container. All scalars little-endian; tensors are 64-bit
// IEEE floats. Layout:
//   magic "TILEMODL" (8 bytes), u32 format version, u8 scorer kind,
//   fingerprint (u32 length + bytes), then kind-specific header + tensors.
inline constexpr char kModelMagic[8] = {'T', 'I', 'L', 'E', 'M', 'O', 'D', 'L'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

template <typename T>
void write_le(std::ostream& out, T value) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t a = 0, b = sizeof(T) - 1; a < b; ++a, --b) std::swap(buf[a], buf[b]);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in) throw CorruptFileError("model file truncated");
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t a = 0, b = sizeof(T) - 1; a < b; ++a, --b) std::swap(buf[a], buf[b]);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
    const auto len = read_le<std::uint32_t>(in);
    if (len > (1u << 20)) throw CorruptFileError("model file: implausible string length");
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw CorruptFileError("model file truncated");
    return s;
}

inline void write_tensor(std::ostream& out, const std::vector<double>& t) {
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(t.size()));
    for (double v : t) write_le<double>(out, v);
}

inline std::vector<double> read_tensor(std::istream& in) {
    const auto n = read_le<std::uint64_t>(in);
    if (n > (1ull << 32)) throw CorruptFileError("model file: implausible tensor size");
    std::vector<double> t(static_cast<std::size_t>(n));
    for (double& v : t) v = read_le<double>(in);
    return t;
}

}  // namespace detail

inline void save_tile_model(const TileModel& model, std::ostream& out) {
    out.write(kModelMagic, sizeof(kModelMagic));
    detail::write_le<std::uint32_t>(out, kModelFormatVersion);
    detail::write_le<std::uint8_t>(
        out, model.kind() == ScorerKind::Gaussian ? std::uint8_t{0} : std::uint8_t{1});
    detail::write_string(out, model.fingerprint());
    if (const auto* g = std::get_if<GaussianPatchModel>(&model.model)) {
        detail::write_le<std::int32_t>(out, g->grid_h);
        detail::write_le<std::int32_t>(out, g->grid_w);
        detail::write_le<std::int32_t>(out, g->dim);
        detail::write_le<double>(out, g->epsilon);
        detail::write_tensor(out, g->means);
        detail::write_tensor(out, g->covariances);
    } else {
        const auto& m = std::get<MemoryBankModel>(model.model);
        detail::write_le<std::int32_t>(out, m.dim);
        detail::write_le<double>(out, m.coreset_ratio);
        detail::write_tensor(out, m.bank);
    }
}

inline TileModel load_tile_model(std::istream& in, const std::string& expected_fingerprint = {}) {
    char magic[sizeof(kModelMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
        throw CorruptFileError("model file: bad magic");
    const auto version = detail::read_le<std::uint32_t>(in);
    if (version != kModelFormatVersion)
        throw VersionMismatchError("model file: unsupported format version " +
                                   std::to_string(version));
    const auto kind = detail::read_le<std::uint8_t>(in);
    const std::string fingerprint = detail::read_string(in);
    if (!expected_fingerprint.empty() && fingerprint != expected_fingerprint)
        throw FingerprintMismatchError("model file: extractor fingerprint '" + fingerprint +
                                       "' does not match expected '" + expected_fingerprint +
                                       "'");
    if (kind == 0) {
        GaussianPatchModel g;
        g.fingerprint = fingerprint;
        g.grid_h = detail::read_le<std::int32_t>(in);
        g.grid_w = detail::read_le<std::int32_t>(in);
        g.dim = detail::read_le<std::int32_t>(in);
        g.epsilon = detail::read_le<double>(in);
        g.means = detail::read_tensor(in);
        g.covariances = detail::read_tensor(in);
        if (g.grid_h <= 0 || g.grid_w <= 0 || g.dim <= 0 ||
            g.means.size() != static_cast<std::size_t>(g.cell_count()) * g.dim ||
            g.covariances.size() != static_cast<std::size_t>(g.cell_count()) * g.dim * g.dim)
            throw CorruptFileError("model file: inconsistent gaussian tensors");
        return TileModel{std::move(g)};
    }
    if (kind == 1) {
        MemoryBankModel m;
        m.fingerprint = fingerprint;
        m.dim = detail::read_le<std::int32_t>(in);
        m.coreset_ratio = detail::read_le<double>(in);
        m.bank = detail::read_tensor(in);
        if (m.dim <= 0 || m.bank.empty() || m.bank.size() % static_cast<std::size_t>(m.dim) != 0)
            throw CorruptFileError("model file: inconsistent memory bank tensor");
        return TileModel{std::move(m)};
    }
    throw CorruptFileError("model file: unknown scorer kind");
}

inline void save_tile_model(const TileModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    save_tile_model(model, out);
    if (!out) throw DataError("write failed: " + path.string());
}

inline TileModel load_tile_model(const std::filesystem::path& path,
                                 const std::string& expected_fingerprint = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path.string());
    return load_tile_model(in, expected_fingerprint);
}

}  // namespace tiled
