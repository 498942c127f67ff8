#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tiled/blur.hpp"
#include "tiled/image.hpp"
#include "tiled/tiling.hpp"

namespace tiled {

struct SmoothingConfig {
    bool enabled = true;
    double band_fraction = 0.10;  // of tile width/height, per side of a seam
    double sigma = 0.0;           // 0 -> band_width / 4
    double kernel_trunc = 4.0;
};

// Interior seam coordinates along one axis: every tile edge that falls
// strictly inside the image. A seam at coordinate c sits between samples
// c-1 and c.
inline std::vector<int> seam_positions(int n_tiles, int tile, int stride, int image_dim) {
    std::vector<int> seams;
    for (int t = 0; t < n_tiles; ++t) {
        const int lead = stride * t;
        if (lead > 0 && lead < image_dim) seams.push_back(lead);
        const int trail = stride * t + tile;
        if (trail > 0 && trail < image_dim) seams.push_back(trail);
    }
    std::sort(seams.begin(), seams.end());
    seams.erase(std::unique(seams.begin(), seams.end()), seams.end());
    return seams;
}

// Replace pixels within the seam bands by their Gaussian-filtered value.
// The filter is computed over the full map with reflected borders; pixels
// outside every band are returned bit-identical.
inline ScalarMap smooth_seams(const ScalarMap& map, const TileGrid& grid,
                              const SmoothingConfig& cfg) {
    if (map.height != grid.image_h || map.width != grid.image_w)
        throw std::invalid_argument("smooth_seams: map dims do not match grid");
    if (cfg.band_fraction < 0.0 || cfg.band_fraction > 0.5)
        throw std::invalid_argument("smooth_seams: band_fraction must be in [0, 0.5]");

    const int band_h = static_cast<int>(std::lround(cfg.band_fraction * grid.tile_h));
    const int band_w = static_cast<int>(std::lround(cfg.band_fraction * grid.tile_w));
    const std::vector<int> row_seams =
        seam_positions(grid.n_rows, grid.tile_h, grid.stride_h, grid.image_h);
    const std::vector<int> col_seams =
        seam_positions(grid.n_cols, grid.tile_w, grid.stride_w, grid.image_w);

    if (!cfg.enabled) return map;

    std::vector<char> row_in_band(static_cast<std::size_t>(map.height), 0);
    std::vector<char> col_in_band(static_cast<std::size_t>(map.width), 0);
    bool any_band = false;
    if (band_h > 0)
        for (int seam : row_seams)
            for (int y = std::max(0, seam - band_h); y < std::min(map.height, seam + band_h);
                 ++y) {
                row_in_band[static_cast<std::size_t>(y)] = 1;
                any_band = true;
            }
    if (band_w > 0)
        for (int seam : col_seams)
            for (int x = std::max(0, seam - band_w); x < std::min(map.width, seam + band_w);
                 ++x) {
                col_in_band[static_cast<std::size_t>(x)] = 1;
                any_band = true;
            }
    if (!any_band) return map;

    const double sigma = cfg.sigma > 0.0
                             ? cfg.sigma
                             : std::max(band_h, band_w) / 4.0;
    const ScalarMap blurred = gaussian_blur(map, sigma, cfg.kernel_trunc);

    ScalarMap out = map;
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x)
            if (row_in_band[static_cast<std::size_t>(y)] ||
                col_in_band[static_cast<std::size_t>(x)])
                out.at(y, x) = blurred.at(y, x);
    return out;
}

}  // namespace tiled
