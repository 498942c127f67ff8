#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tiled/image.hpp"

namespace tiled {

// Normalized 1-D Gaussian kernel truncated at trunc*sigma.
inline std::vector<double> gaussian_kernel(double sigma, double trunc = 4.0) {
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
    const int radius = std::max(1, static_cast<int>(std::ceil(trunc * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        k[static_cast<std::size_t>(t + radius)] = std::exp(-0.5 * (t * t) / (sigma * sigma));
        total += k[static_cast<std::size_t>(t + radius)];
    }
    for (double& v : k) v /= total;
    return k;
}

// Mirror index i into [0, n); the edge sample is repeated (reflect border).
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// Separable Gaussian filter over the full map with reflected borders.
inline ScalarMap gaussian_blur(const ScalarMap& src, double sigma, double trunc = 4.0) {
    const std::vector<double> kernel = gaussian_kernel(sigma, trunc);
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;

    ScalarMap tmp(src.height, src.width);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += kernel[static_cast<std::size_t>(t + radius)] *
                       src.at(y, reflect_index(x + t, src.width));
            tmp.at(y, x) = acc;
        }
    ScalarMap out(src.height, src.width);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += kernel[static_cast<std::size_t>(t + radius)] *
                       tmp.at(reflect_index(y + t, src.height), x);
            out.at(y, x) = acc;
        }
    return out;
}

}  // namespace tiled
