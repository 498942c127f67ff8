#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tiled {

// Dense row-major raster, samples in [0,1], channel-interleaved.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, fill) {
        if (h <= 0 || w <= 0 || c <= 0)
            throw std::invalid_argument("Image: dimensions must be positive");
    }

    double& at(int y, int x, int ch) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
    }
    double at(int y, int x, int ch) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
    }

    std::size_t size() const { return data.size(); }
    std::size_t bytes() const { return data.size() * sizeof(double); }
};

// Single-channel scalar raster (anomaly values, masks, ...).
struct ScalarMap {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    ScalarMap() = default;
    ScalarMap(int h, int w, double fill = 0.0)
        : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {
        if (h <= 0 || w <= 0)
            throw std::invalid_argument("ScalarMap: dimensions must be positive");
    }

    double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }

    std::size_t size() const { return data.size(); }
    std::size_t bytes() const { return data.size() * sizeof(double); }
};

inline bool same_shape(const ScalarMap& a, const ScalarMap& b) {
    return a.height == b.height && a.width == b.width;
}

// Corner-aligned bilinear interpolation shared by map upsampling and
// image resizing.
inline double bilinear_sample(const std::vector<double>& src, int src_h, int src_w,
                              int stride, int offset, double y, double x) {
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const int y1 = y0 + 1 < src_h ? y0 + 1 : y0;
    const int x1 = x0 + 1 < src_w ? x0 + 1 : x0;
    const double fy = y - y0;
    const double fx = x - x0;
    auto v = [&](int yy, int xx) {
        return src[(static_cast<std::size_t>(yy) * src_w + xx) * stride + offset];
    };
    const double top = v(y0, x0) * (1.0 - fx) + v(y0, x1) * fx;
    const double bot = v(y1, x0) * (1.0 - fx) + v(y1, x1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

inline ScalarMap resize_bilinear(const ScalarMap& src, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0)
        throw std::invalid_argument("resize_bilinear: degenerate target size");
    if (out_h == src.height && out_w == src.width) return src;
    ScalarMap out(out_h, out_w);
    // Corner-aligned; a size-1 output axis samples the source center.
    const double sy = out_h > 1 ? static_cast<double>(src.height - 1) / (out_h - 1) : 0.0;
    const double sx = out_w > 1 ? static_cast<double>(src.width - 1) / (out_w - 1) : 0.0;
    const double oy = out_h > 1 ? 0.0 : (src.height - 1) / 2.0;
    const double ox = out_w > 1 ? 0.0 : (src.width - 1) / 2.0;
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x)
            out.at(y, x) = bilinear_sample(src.data, src.height, src.width, 1, 0,
                                           y * sy + oy, x * sx + ox);
    return out;
}

inline Image resize_bilinear(const Image& src, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0)
        throw std::invalid_argument("resize_bilinear: degenerate target size");
    if (out_h == src.height && out_w == src.width) return src;
    Image out(out_h, out_w, src.channels);
    const double sy = out_h > 1 ? static_cast<double>(src.height - 1) / (out_h - 1) : 0.0;
    const double sx = out_w > 1 ? static_cast<double>(src.width - 1) / (out_w - 1) : 0.0;
    const double oy = out_h > 1 ? 0.0 : (src.height - 1) / 2.0;
    const double ox = out_w > 1 ? 0.0 : (src.width - 1) / 2.0;
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x)
            for (int c = 0; c < src.channels; ++c)
                out.at(y, x, c) = bilinear_sample(src.data, src.height, src.width,
                                                  src.channels, c, y * sy + oy, x * sx + ox);
    return out;
}

}  // namespace tiled
