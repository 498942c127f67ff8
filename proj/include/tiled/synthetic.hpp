#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "tiled/blur.hpp"
#include "tiled/dataio.hpp"
#include "tiled/errors.hpp"
#include "tiled/image.hpp"
#include "tiled/metrics.hpp"

namespace tiled {

// Desk-scale synthetic dataset: band-limited noise textures, anomalies as
// elliptical intensity blobs with exact masks.
struct SyntheticSpec {
    int image_size = 128;
    std::uint64_t seed = 0;
    int train_count = 60;
    int test_normal_count = 20;
    int test_anomalous_count = 20;
    int anomaly_count_min = 1;
    int anomaly_count_max = 2;
    int anomaly_area_min = 8;    // pixels
    int anomaly_area_max = 33;   // pixels
    double anomaly_contrast = 0.5;
    double texture_sigma = 4.0;

    void validate() const {
        if (image_size <= 0) throw ValidationError("synthetic: image size must be positive");
        if (train_count <= 0 || test_normal_count < 0 || test_anomalous_count < 0)
            throw ValidationError("synthetic: bad sample counts");
        if (anomaly_area_min <= 0 || anomaly_area_max < anomaly_area_min)
            throw ValidationError("synthetic: anomaly area range must be positive");
        if (anomaly_area_max > image_size * image_size)
            throw ValidationError("synthetic: anomaly area exceeds image area");
        if (anomaly_count_min <= 0 || anomaly_count_max < anomaly_count_min)
            throw ValidationError("synthetic: anomaly count range must be positive");
    }
};

struct SyntheticSample {
    Image image;
    GroundTruthMask mask;
    bool anomalous = false;
};

struct SyntheticDataset {
    std::vector<Image> train;
    std::vector<SyntheticSample> test;
};

namespace detail {

inline Image noise_texture(int size, double sigma, std::mt19937_64& rng) {
    ScalarMap noise(size, size);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double& v : noise.data) v = uni(rng);
    ScalarMap smooth = gaussian_blur(noise, sigma);
    const auto [lo, hi] = std::minmax_element(smooth.data.begin(), smooth.data.end());
    const double span = *hi > *lo ? *hi - *lo : 1.0;
    Image img(size, size, 1);
    // Mid-range texture leaves headroom for blob contrast in both directions.
    for (std::size_t k = 0; k < smooth.data.size(); ++k)
        img.data[k] = 0.25 + 0.5 * (smooth.data[k] - *lo) / span;
    return img;
}

// A pixel belongs to the blob iff its center lies inside the rotated ellipse.
inline void stamp_ellipse(Image& img, GroundTruthMask& mask, double cy, double cx,
                          double semi_a, double semi_b, double angle, double delta) {
    const double ca = std::cos(angle), sa = std::sin(angle);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - semi_a - semi_b)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + semi_a + semi_b)));
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - semi_a - semi_b)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + semi_a + semi_b)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double dy = y - cy, dx = x - cx;
            const double u = (dx * ca + dy * sa) / semi_a;
            const double v = (-dx * sa + dy * ca) / semi_b;
            if (u * u + v * v <= 1.0) {
                img.at(y, x, 0) = std::clamp(img.at(y, x, 0) + delta, 0.0, 1.0);
                mask.at(y, x) = 1;
            }
        }
}

inline SyntheticSample make_anomalous(const SyntheticSpec& spec, std::mt19937_64& rng) {
    SyntheticSample sample;
    sample.image = noise_texture(spec.image_size, spec.texture_sigma, rng);
    sample.mask = GroundTruthMask(spec.image_size, spec.image_size);
    sample.anomalous = true;

    std::uniform_int_distribution<int> count_dist(spec.anomaly_count_min,
                                                  spec.anomaly_count_max);
    std::uniform_int_distribution<int> area_dist(spec.anomaly_area_min, spec.anomaly_area_max);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int blobs = count_dist(rng);
    for (int b = 0; b < blobs; ++b) {
        const double area = area_dist(rng);
        const double aspect = 0.5 + 1.5 * uni(rng);
        const double semi_b = std::sqrt(area / (std::numbers::pi * aspect));
        const double semi_a = aspect * semi_b;
        const double margin =
            std::min(semi_a + semi_b + 1.0, spec.image_size / 2.0);
        const double span = std::max(0.0, spec.image_size - 2.0 * margin);
        const double cy = margin + span * uni(rng);
        const double cx = margin + span * uni(rng);
        const double angle = std::numbers::pi * uni(rng);
        const double sign = uni(rng) < 0.5 ? -1.0 : 1.0;
        detail::stamp_ellipse(sample.image, sample.mask, cy, cx, semi_a, semi_b, angle,
                              sign * spec.anomaly_contrast);
    }
    return sample;
}

}  // namespace detail

inline SyntheticDataset generate_synthetic_in_memory(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    SyntheticDataset ds;
    ds.train.reserve(static_cast<std::size_t>(spec.train_count));
    for (int k = 0; k < spec.train_count; ++k)
        ds.train.push_back(detail::noise_texture(spec.image_size, spec.texture_sigma, rng));
    for (int k = 0; k < spec.test_normal_count; ++k) {
        SyntheticSample sample;
        sample.image = detail::noise_texture(spec.image_size, spec.texture_sigma, rng);
        sample.mask = GroundTruthMask(spec.image_size, spec.image_size);
        ds.test.push_back(std::move(sample));
    }
    for (int k = 0; k < spec.test_anomalous_count; ++k)
        ds.test.push_back(detail::make_anomalous(spec, rng));
    return ds;
}

// Materialize an MVTec-style category directory named "synthetic".
inline void generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& root,
                               const std::string& category = "synthetic") {
    const SyntheticDataset ds = generate_synthetic_in_memory(spec);
    const auto base = root / category;
    std::filesystem::create_directories(base / "train" / "good");
    std::filesystem::create_directories(base / "test" / "good");
    std::filesystem::create_directories(base / "test" / "blob");
    std::filesystem::create_directories(base / "ground_truth" / "blob");

    char name[32];
    for (std::size_t k = 0; k < ds.train.size(); ++k) {
        std::snprintf(name, sizeof(name), "%03zu.png", k);
        save_image_png(ds.train[k], base / "train" / "good" / name);
    }
    std::size_t good = 0, blob = 0;
    for (const SyntheticSample& sample : ds.test) {
        if (!sample.anomalous) {
            std::snprintf(name, sizeof(name), "%03zu.png", good++);
            save_image_png(sample.image, base / "test" / "good" / name);
        } else {
            std::snprintf(name, sizeof(name), "%03zu.png", blob);
            save_image_png(sample.image, base / "test" / "blob" / name);
            std::snprintf(name, sizeof(name), "%03zu_mask.png", blob++);
            save_mask_png(sample.mask, base / "ground_truth" / "blob" / name);
        }
    }
}

}  // namespace tiled
