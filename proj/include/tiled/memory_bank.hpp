#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiled/features.hpp"
#include "tiled/image.hpp"

namespace tiled {

// Coreset-subsampled bank of patch embeddings for nearest-neighbour scoring.
struct MemoryBankModel {
    int dim = 0;
    double coreset_ratio = 1.0;
    std::string fingerprint;
    std::vector<double> bank;  // bank_size x dim

    std::size_t bank_size() const {
        return dim > 0 ? bank.size() / static_cast<std::size_t>(dim) : 0;
    }
    const double* vec(std::size_t k) const {
        return bank.data() + k * static_cast<std::size_t>(dim);
    }
    std::size_t tensor_bytes() const { return bank.size() * sizeof(double); }
};

inline double squared_distance(const double* a, const double* b, int d) {
    double acc = 0.0;
    for (int k = 0; k < d; ++k) {
        const double diff = a[k] - b[k];
        acc += diff * diff;
    }
    return acc;
}

// Greedy farthest-point selection. Deterministic: selection starts at
// candidate 0, ties resolve to the smallest index.
inline MemoryBankModel coreset_subsample(const std::vector<double>& candidates, int dim,
                                         double ratio,
                                         const std::string& fingerprint = {}) {
    if (dim <= 0 || candidates.empty() || candidates.size() % static_cast<std::size_t>(dim) != 0)
        throw std::invalid_argument("coreset_subsample: empty or malformed candidate set");
    if (ratio <= 0.0 || ratio > 1.0)
        throw std::invalid_argument("coreset_subsample: ratio must be in (0, 1]");

    const std::size_t n = candidates.size() / static_cast<std::size_t>(dim);
    const std::size_t k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));

    MemoryBankModel model;
    model.dim = dim;
    model.coreset_ratio = ratio;
    model.fingerprint = fingerprint;
    model.bank.reserve(k * static_cast<std::size_t>(dim));

    std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
    std::size_t next = 0;
    for (std::size_t picked = 0; picked < k; ++picked) {
        const double* sel = candidates.data() + next * static_cast<std::size_t>(dim);
        model.bank.insert(model.bank.end(), sel, sel + dim);
        if (picked + 1 == k) break;
        std::size_t best = 0;
        double best_dist = -1.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double dist = squared_distance(
                candidates.data() + c * static_cast<std::size_t>(dim), sel, dim);
            if (dist < min_dist[c]) min_dist[c] = dist;
            if (min_dist[c] > best_dist) {
                best_dist = min_dist[c];
                best = c;
            }
        }
        next = best;
    }
    return model;
}

// Per cell, Euclidean distance to the nearest bank vector.
inline ScalarMap score_knn(const MemoryBankModel& model, const FeatureMap& features) {
    if (features.dim != model.dim)
        throw std::invalid_argument("score_knn: feature dimension mismatch");
    if (model.bank.empty())
        throw std::invalid_argument("score_knn: empty memory bank");

    const std::size_t bank_size = model.bank_size();
    ScalarMap out(features.grid_h, features.grid_w);
    for (int gy = 0; gy < features.grid_h; ++gy)
        for (int gx = 0; gx < features.grid_w; ++gx) {
            const double* f = features.cell(gy, gx);
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < bank_size; ++b)
                best = std::min(best, squared_distance(f, model.vec(b), model.dim));
            out.at(gy, gx) = std::sqrt(best);
        }
    return out;
}

}  // namespace tiled
