#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tiled/image.hpp"

namespace tiled {

struct TileIndex {
    int i = 0;
    int j = 0;
    friend bool operator==(const TileIndex&, const TileIndex&) = default;
};

// Tiling geometry against a zero-padded canvas. Padded dims are the
// smallest values >= image dims with (padded - tile) divisible by stride.
struct TileGrid {
    int image_h = 0, image_w = 0;
    int tile_h = 0, tile_w = 0;
    int stride_h = 0, stride_w = 0;
    int n_rows = 0, n_cols = 0;
    int padded_h = 0, padded_w = 0;

    int tile_count() const { return n_rows * n_cols; }
    friend bool operator==(const TileGrid&, const TileGrid&) = default;
};

struct PixelSpan {
    int row_begin = 0, row_end = 0;  // half-open
    int col_begin = 0, col_end = 0;
};

inline TileGrid compute_grid(int image_h, int image_w, int tile_h, int tile_w,
                             int stride_h, int stride_w) {
    if (image_h <= 0 || image_w <= 0 || tile_h <= 0 || tile_w <= 0 ||
        stride_h <= 0 || stride_w <= 0)
        throw std::invalid_argument("compute_grid: all dimensions must be positive");
    if (stride_h > tile_h || stride_w > tile_w)
        throw std::invalid_argument("compute_grid: stride larger than tile leaves coverage gaps");

    auto axis = [](int dim, int tile, int stride) {
        int n = dim <= tile ? 1 : (dim - tile + stride - 1) / stride + 1;
        int padded = (n - 1) * stride + tile;
        return std::pair{n, padded};
    };
    TileGrid g;
    g.image_h = image_h;
    g.image_w = image_w;
    g.tile_h = tile_h;
    g.tile_w = tile_w;
    g.stride_h = stride_h;
    g.stride_w = stride_w;
    std::tie(g.n_rows, g.padded_h) = axis(image_h, tile_h, stride_h);
    std::tie(g.n_cols, g.padded_w) = axis(image_w, tile_w, stride_w);
    return g;
}

inline bool valid_index(const TileGrid& grid, TileIndex idx) {
    return idx.i >= 0 && idx.i < grid.n_rows && idx.j >= 0 && idx.j < grid.n_cols;
}

// Span on the padded canvas: rows [s_h*i, s_h*i + tile_h), cols likewise.
inline PixelSpan tile_pixel_span(const TileGrid& grid, TileIndex idx) {
    if (!valid_index(grid, idx))
        throw std::out_of_range("tile_pixel_span: tile index out of range");
    return PixelSpan{grid.stride_h * idx.i, grid.stride_h * idx.i + grid.tile_h,
                     grid.stride_w * idx.j, grid.stride_w * idx.j + grid.tile_w};
}

// Cut one tile; pixels beyond the original image are zero.
inline Image extract_tile(const Image& image, const TileGrid& grid, TileIndex idx) {
    if (image.height != grid.image_h || image.width != grid.image_w)
        throw std::invalid_argument("extract_tile: image dims do not match grid");
    const PixelSpan span = tile_pixel_span(grid, idx);
    Image out(grid.tile_h, grid.tile_w, image.channels);
    for (int y = span.row_begin; y < std::min(span.row_end, image.height); ++y)
        for (int x = span.col_begin; x < std::min(span.col_end, image.width); ++x)
            for (int c = 0; c < image.channels; ++c)
                out.at(y - span.row_begin, x - span.col_begin, c) = image.at(y, x, c);
    return out;
}

// All tiles in row-major index order (i major, j minor).
inline std::vector<std::pair<TileIndex, Image>> tile_image(const Image& image,
                                                           const TileGrid& grid) {
    std::vector<std::pair<TileIndex, Image>> tiles;
    tiles.reserve(static_cast<std::size_t>(grid.tile_count()));
    for (int i = 0; i < grid.n_rows; ++i)
        for (int j = 0; j < grid.n_cols; ++j)
            tiles.emplace_back(TileIndex{i, j}, extract_tile(image, grid, TileIndex{i, j}));
    return tiles;
}

// Streaming merge accumulator: per-pixel running sum and coverage count on
// the padded canvas. Tiles may be added in any order; finalize() divides in
// one canonical pass, so the result only depends on the multiset of tiles
// added per pixel in index order (add_in_order keeps that canonical).
struct MergeAccumulator {
    TileGrid grid;
    ScalarMap sum;
    ScalarMap count;

    explicit MergeAccumulator(const TileGrid& g)
        : grid(g), sum(g.padded_h, g.padded_w), count(g.padded_h, g.padded_w) {}

    void add(TileIndex idx, const ScalarMap& map) {
        if (map.height != grid.tile_h || map.width != grid.tile_w)
            throw std::invalid_argument("MergeAccumulator: tile map has wrong size");
        const PixelSpan span = tile_pixel_span(grid, idx);
        for (int y = 0; y < grid.tile_h; ++y)
            for (int x = 0; x < grid.tile_w; ++x) {
                sum.at(span.row_begin + y, span.col_begin + x) += map.at(y, x);
                count.at(span.row_begin + y, span.col_begin + x) += 1.0;
            }
    }

    // Mean per pixel, cropped back to the original image size.
    ScalarMap finalize() const {
        ScalarMap out(grid.image_h, grid.image_w);
        for (int y = 0; y < grid.image_h; ++y)
            for (int x = 0; x < grid.image_w; ++x)
                out.at(y, x) = sum.at(y, x) / count.at(y, x);
        return out;
    }

    std::size_t bytes() const { return sum.bytes() + count.bytes(); }
};

// Reassemble tile maps into an image-sized map with overlap averaging.
// Input order is irrelevant: tiles are committed in row-major index order.
inline ScalarMap untile(const std::vector<std::pair<TileIndex, ScalarMap>>& maps,
                        const TileGrid& grid) {
    const int n = grid.tile_count();
    std::vector<const ScalarMap*> by_index(static_cast<std::size_t>(n), nullptr);
    for (const auto& [idx, map] : maps) {
        if (!valid_index(grid, idx))
            throw std::invalid_argument("untile: tile index out of range");
        auto& slot = by_index[static_cast<std::size_t>(idx.i) * grid.n_cols + idx.j];
        if (slot != nullptr) throw std::invalid_argument("untile: duplicate tile index");
        slot = &map;
    }
    MergeAccumulator acc(grid);
    for (int i = 0; i < grid.n_rows; ++i)
        for (int j = 0; j < grid.n_cols; ++j) {
            const ScalarMap* map = by_index[static_cast<std::size_t>(i) * grid.n_cols + j];
            if (map == nullptr) throw std::invalid_argument("untile: missing tile index");
            acc.add(TileIndex{i, j}, *map);
        }
    return acc.finalize();
}

}  // namespace tiled
