#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiled/image.hpp"

namespace tiled {

// Classical per-cell descriptor: channel means, channel standard deviations
// (population), and an orientation histogram of luminance gradients.
struct ExtractorConfig {
    int cell_size = 8;
    int orientation_bins = 4;
    int channels = 1;

    int dim() const { return 2 * channels + orientation_bins; }

    std::string fingerprint() const {
        return "feat-v1:cell=" + std::to_string(cell_size) +
               ":bins=" + std::to_string(orientation_bins) +
               ":channels=" + std::to_string(channels);
    }
};

struct FeatureMap {
    int grid_h = 0;
    int grid_w = 0;
    int dim = 0;
    std::vector<double> data;  // row-major d-vectors, one per cell

    FeatureMap() = default;
    FeatureMap(int gh, int gw, int d)
        : grid_h(gh), grid_w(gw), dim(d),
          data(static_cast<std::size_t>(gh) * gw * d, 0.0) {}

    double* cell(int gy, int gx) {
        return data.data() + (static_cast<std::size_t>(gy) * grid_w + gx) * dim;
    }
    const double* cell(int gy, int gx) const {
        return data.data() + (static_cast<std::size_t>(gy) * grid_w + gx) * dim;
    }

    int cell_count() const { return grid_h * grid_w; }
    std::size_t bytes() const { return data.size() * sizeof(double); }
};

inline FeatureMap extract_features(const Image& tile, const ExtractorConfig& cfg) {
    if (cfg.cell_size <= 0 || cfg.orientation_bins <= 0)
        throw std::invalid_argument("extract_features: bad extractor config");
    if (tile.channels != cfg.channels)
        throw std::invalid_argument("extract_features: channel count does not match config");
    if (tile.height % cfg.cell_size != 0 || tile.width % cfg.cell_size != 0)
        throw std::invalid_argument("extract_features: tile dims not divisible by cell size");

    const int cs = cfg.cell_size;
    const int gh = tile.height / cs;
    const int gw = tile.width / cs;
    FeatureMap fm(gh, gw, cfg.dim());

    // Luminance = channel mean; gradients by central differences, clamped
    // at the tile border.
    auto lum = [&](int y, int x) {
        double v = 0.0;
        for (int c = 0; c < tile.channels; ++c) v += tile.at(y, x, c);
        return v / tile.channels;
    };

    for (int gy = 0; gy < gh; ++gy)
        for (int gx = 0; gx < gw; ++gx) {
            double* f = fm.cell(gy, gx);
            const int y0 = gy * cs, x0 = gx * cs;
            const double inv_n = 1.0 / (static_cast<double>(cs) * cs);

            for (int c = 0; c < tile.channels; ++c) {
                double sum = 0.0, sq = 0.0;
                for (int y = y0; y < y0 + cs; ++y)
                    for (int x = x0; x < x0 + cs; ++x) {
                        const double v = tile.at(y, x, c);
                        sum += v;
                        sq += v * v;
                    }
                const double mean = sum * inv_n;
                const double var = std::max(0.0, sq * inv_n - mean * mean);
                f[c] = mean;
                f[tile.channels + c] = std::sqrt(var);
            }

            double* hist = f + 2 * tile.channels;
            for (int y = y0; y < y0 + cs; ++y)
                for (int x = x0; x < x0 + cs; ++x) {
                    const double gxv = lum(y, std::min(x + 1, tile.width - 1)) -
                                       lum(y, std::max(x - 1, 0));
                    const double gyv = lum(std::min(y + 1, tile.height - 1), x) -
                                       lum(std::max(y - 1, 0), x);
                    const double mag = std::hypot(gxv, gyv);
                    if (mag == 0.0) continue;
                    double theta = std::atan2(gyv, gxv);  // [-pi, pi]
                    if (theta < 0.0) theta += std::numbers::pi;
                    int bin = static_cast<int>(theta / std::numbers::pi * cfg.orientation_bins);
                    if (bin >= cfg.orientation_bins) bin = cfg.orientation_bins - 1;
                    hist[bin] += mag;
                }
            for (int b = 0; b < cfg.orientation_bins; ++b) hist[b] *= inv_n;
        }
    return fm;
}

}  // namespace tiled
