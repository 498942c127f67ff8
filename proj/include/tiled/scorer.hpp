#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tiled/accountant.hpp"
#include "tiled/features.hpp"
#include "tiled/gaussian.hpp"
#include "tiled/image.hpp"
#include "tiled/memory_bank.hpp"

namespace tiled {

enum class ScorerKind { Gaussian, MemoryBank };

inline std::string to_string(ScorerKind kind) {
    return kind == ScorerKind::Gaussian ? "gaussian" : "knn";
}

inline ScorerKind scorer_kind_from_string(const std::string& s) {
    if (s == "gaussian") return ScorerKind::Gaussian;
    if (s == "knn") return ScorerKind::MemoryBank;
    throw std::invalid_argument("unknown scorer kind: " + s);
}

struct ScorerConfig {
    ScorerKind kind = ScorerKind::Gaussian;
    ExtractorConfig extractor;
    double epsilon = 0.01;        // gaussian regularizer
    double coreset_ratio = 0.1;   // knn bank subsampling
};

// One trained per-tile-location anomaly model.
struct TileModel {
    std::variant<GaussianPatchModel, MemoryBankModel> model;

    ScorerKind kind() const {
        return std::holds_alternative<GaussianPatchModel>(model) ? ScorerKind::Gaussian
                                                                 : ScorerKind::MemoryBank;
    }
    const std::string& fingerprint() const {
        if (const auto* g = std::get_if<GaussianPatchModel>(&model)) return g->fingerprint;
        return std::get<MemoryBankModel>(model).fingerprint;
    }
    std::size_t tensor_bytes() const {
        if (const auto* g = std::get_if<GaussianPatchModel>(&model)) return g->tensor_bytes();
        return std::get<MemoryBankModel>(model).tensor_bytes();
    }
};

struct TilePrediction {
    ScalarMap map;   // tile-sized
    double score = 0.0;  // max over map
};

inline double tile_score(const ScalarMap& map) {
    if (map.data.empty()) throw std::invalid_argument("tile_score: empty map");
    double best = map.data[0];
    for (double v : map.data) best = std::max(best, v);
    return best;
}

inline ScalarMap upsample_map(const ScalarMap& patch_map, int tile_h, int tile_w) {
    if (tile_h < patch_map.height || tile_w < patch_map.width)
        throw std::invalid_argument("upsample_map: target smaller than source");
    return resize_bilinear(patch_map, tile_h, tile_w);
}

// Fit one model on the feature maps of all training tiles for a location.
inline TileModel fit_tile_model(const std::vector<FeatureMap>& features,
                                const ScorerConfig& cfg) {
    if (features.empty()) throw std::invalid_argument("fit_tile_model: empty training set");
    if (cfg.kind == ScorerKind::Gaussian)
        return TileModel{fit_gaussian(features, cfg.epsilon, cfg.extractor.fingerprint())};

    const FeatureMap& first = features.front();
    std::vector<double> candidates;
    candidates.reserve(features.size() * first.data.size());
    for (const FeatureMap& fm : features) {
        if (fm.dim != first.dim)
            throw std::invalid_argument("fit_tile_model: feature dimension mismatch");
        candidates.insert(candidates.end(), fm.data.begin(), fm.data.end());
    }
    return TileModel{coreset_subsample(candidates, first.dim, cfg.coreset_ratio,
                                       cfg.extractor.fingerprint())};
}

inline ScalarMap score_features(const TileModel& model, const FeatureMap& features) {
    if (const auto* g = std::get_if<GaussianPatchModel>(&model.model))
        return score_gaussian(*g, features);
    return score_knn(std::get<MemoryBankModel>(model.model), features);
}

// Full per-tile inference: extract, score at patch resolution, upsample to
// tile resolution, take the map maximum as the tile score. All intermediate
// buffers are registered with the accountant when one is supplied.
inline TilePrediction predict_tile(const TileModel& model, const Image& tile,
                                   const ExtractorConfig& extractor,
                                   BufferAccountant* acc = nullptr) {
    FeatureMap features = extract_features(tile, extractor);
    ScopedBuffer feat_guard(acc, BufferTag::Features, features.bytes());

    ScalarMap patch_map = score_features(model, features);
    ScopedBuffer patch_guard(acc, BufferTag::Maps, patch_map.bytes());
    feat_guard.release();

    TilePrediction pred;
    pred.map = upsample_map(patch_map, tile.height, tile.width);
    ScopedBuffer map_guard(acc, BufferTag::Maps, pred.map.bytes());
    pred.score = tile_score(pred.map);
    map_guard.release();
    return pred;
}

}  // namespace tiled
