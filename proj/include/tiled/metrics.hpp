#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tiled/image.hpp"

namespace tiled {

struct LabeledSample {
    double score = 0.0;
    bool anomalous = false;
};

// Image-level AUROC as the Mann-Whitney rank statistic; ties count 1/2.
inline double auroc(const std::vector<LabeledSample>& samples) {
    std::size_t n_pos = 0, n_neg = 0;
    for (const LabeledSample& s : samples) (s.anomalous ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auroc: both classes must be present");

    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return samples[a].score < samples[b].score;
    });

    // Sum of average ranks of the positive class (1-based, ties averaged).
    double rank_sum = 0.0;
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t end = k;
        while (end + 1 < order.size() &&
               samples[order[end + 1]].score == samples[order[k]].score)
            ++end;
        const double avg_rank = (static_cast<double>(k + 1) + static_cast<double>(end + 1)) / 2.0;
        for (std::size_t t = k; t <= end; ++t)
            if (samples[order[t]].anomalous) rank_sum += avg_rank;
        k = end + 1;
    }
    const double u = rank_sum - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

struct GroundTruthMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;

    GroundTruthMask() = default;
    GroundTruthMask(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

    std::uint8_t at(int y, int x) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
};

struct RegionLabeling {
    int height = 0;
    int width = 0;
    int region_count = 0;
    std::vector<int> labels;  // 0 = background, regions 1..k in first-touch raster order

    int at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

// 8-connected components, labels assigned in raster order of first touch.
inline RegionLabeling connected_components(const GroundTruthMask& mask) {
    RegionLabeling out;
    out.height = mask.height;
    out.width = mask.width;
    out.labels.assign(static_cast<std::size_t>(mask.height) * mask.width, 0);

    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) {
            if (mask.at(y, x) == 0 || out.at(y, x) != 0) continue;
            const int label = ++out.region_count;
            out.labels[static_cast<std::size_t>(y) * mask.width + x] = label;
            queue.emplace_back(y, x);
            while (!queue.empty()) {
                const auto [cy, cx] = queue.front();
                queue.pop_front();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int ny = cy + dy, nx = cx + dx;
                        if (ny < 0 || ny >= mask.height || nx < 0 || nx >= mask.width) continue;
                        if (mask.at(ny, nx) == 0 || out.at(ny, nx) != 0) continue;
                        out.labels[static_cast<std::size_t>(ny) * mask.width + nx] = label;
                        queue.emplace_back(ny, nx);
                    }
            }
        }
    return out;
}

// Per-region-overlap curve area. Thresholds sweep all distinct map values
// (predicted positive = value >= tau). PRO at a threshold is the mean,
// pooled over all regions of all images, of the in-region true-positive
// fraction; FPR is global over all normal pixels. The traced curve is
// integrated by trapezoid over FPR up to fpr_limit (interpolated at the
// limit), then normalized by fpr_limit.
inline double aupro(const std::vector<std::pair<ScalarMap, GroundTruthMask>>& pairs,
                    double fpr_limit = 0.3) {
    if (fpr_limit <= 0.0 || fpr_limit > 1.0)
        throw std::invalid_argument("aupro: fpr_limit must be in (0, 1]");

    // Flatten: per pixel, its map value, its region id (global across
    // images) and whether it is a normal pixel.
    struct Pixel {
        double value;
        int region;  // global region id, -1 outside regions
    };
    std::vector<Pixel> pixels;
    std::vector<std::int64_t> region_sizes;
    std::int64_t n_normal = 0;

    for (const auto& [map, mask] : pairs) {
        if (map.height != mask.height || map.width != mask.width)
            throw std::invalid_argument("aupro: map/mask dimension mismatch");
        const RegionLabeling regions = connected_components(mask);
        const int base = static_cast<int>(region_sizes.size());
        region_sizes.resize(region_sizes.size() + static_cast<std::size_t>(regions.region_count),
                            0);
        for (int y = 0; y < map.height; ++y)
            for (int x = 0; x < map.width; ++x) {
                const int label = regions.at(y, x);
                const int region = label == 0 ? -1 : base + label - 1;
                if (region >= 0)
                    region_sizes[static_cast<std::size_t>(region)]++;
                else
                    n_normal++;
                pixels.push_back({map.at(y, x), region});
            }
    }
    if (region_sizes.empty())
        throw std::invalid_argument("aupro: no anomalous region in ground truth");
    if (n_normal == 0) throw std::invalid_argument("aupro: no normal pixel in ground truth");

    // Descending threshold sweep with incremental counting.
    std::sort(pixels.begin(), pixels.end(),
              [](const Pixel& a, const Pixel& b) { return a.value > b.value; });

    std::vector<std::int64_t> region_tp(region_sizes.size(), 0);
    std::int64_t fp = 0;
    std::vector<std::pair<double, double>> curve;  // (fpr, pro), fpr nondecreasing
    std::size_t k = 0;
    while (k < pixels.size()) {
        const double tau = pixels[k].value;
        while (k < pixels.size() && pixels[k].value == tau) {
            if (pixels[k].region >= 0)
                region_tp[static_cast<std::size_t>(pixels[k].region)]++;
            else
                fp++;
            ++k;
        }
        double pro = 0.0;
        for (std::size_t r = 0; r < region_sizes.size(); ++r)
            pro += static_cast<double>(region_tp[r]) / static_cast<double>(region_sizes[r]);
        pro /= static_cast<double>(region_sizes.size());
        const double fpr = static_cast<double>(fp) / static_cast<double>(n_normal);
        curve.emplace_back(fpr, pro);
    }

    // Anchor at FPR 0 by carrying the lowest-FPR PRO value leftward.
    if (curve.front().first > 0.0) curve.insert(curve.begin(), {0.0, curve.front().second});

    double area = 0.0;
    for (std::size_t t = 1; t < curve.size(); ++t) {
        auto [fpr0, pro0] = curve[t - 1];
        auto [fpr1, pro1] = curve[t];
        if (fpr0 >= fpr_limit) break;
        if (fpr1 > fpr_limit) {
            // Interpolate the PRO value at the integration limit.
            const double w = (fpr_limit - fpr0) / (fpr1 - fpr0);
            pro1 = pro0 + w * (pro1 - pro0);
            fpr1 = fpr_limit;
        }
        area += 0.5 * (pro0 + pro1) * (fpr1 - fpr0);
    }
    // If the curve never reaches the limit, extend flat from the last point.
    if (curve.back().first < fpr_limit)
        area += curve.back().second * (fpr_limit - curve.back().first);

    return area / fpr_limit;
}

// Exhaustive F1 sweep over midpoints of sorted distinct scores (predicted
// positive = score >= tau). Single distinct score degenerates to tau = that
// score. Ties break toward smaller tau.
inline std::pair<double, double> f1_sweep(const std::vector<LabeledSample>& samples) {
    std::size_t n_pos = 0, n_neg = 0;
    for (const LabeledSample& s : samples) (s.anomalous ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("f1_sweep: both classes must be present");

    std::vector<double> distinct;
    distinct.reserve(samples.size());
    for (const LabeledSample& s : samples) distinct.push_back(s.score);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> candidates;
    if (distinct.size() == 1) {
        candidates.push_back(distinct.front());
    } else {
        for (std::size_t k = 1; k < distinct.size(); ++k)
            candidates.push_back(0.5 * (distinct[k - 1] + distinct[k]));
    }

    double best_tau = candidates.front();
    double best_f1 = -1.0;
    for (double tau : candidates) {
        std::int64_t tp = 0, fp = 0, fn = 0;
        for (const LabeledSample& s : samples) {
            const bool pred = s.score >= tau;
            if (pred && s.anomalous) tp++;
            else if (pred && !s.anomalous) fp++;
            else if (!pred && s.anomalous) fn++;
        }
        const double f1 =
            tp == 0 ? 0.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
        if (f1 > best_f1) {
            best_f1 = f1;
            best_tau = tau;
        }
    }
    return {best_tau, best_f1};
}

// Mean anomalous-pixel ratio over defective-image masks.
inline double anomaly_size_stats(const std::vector<GroundTruthMask>& masks) {
    if (masks.empty()) throw std::invalid_argument("anomaly_size_stats: empty input");
    double total = 0.0;
    for (const GroundTruthMask& mask : masks) {
        std::int64_t anomalous = 0;
        for (std::uint8_t v : mask.data) anomalous += v != 0;
        total += static_cast<double>(anomalous) / static_cast<double>(mask.data.size());
    }
    return total / static_cast<double>(masks.size());
}

}  // namespace tiled
