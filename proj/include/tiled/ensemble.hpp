#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tiled/accountant.hpp"
#include "tiled/errors.hpp"
#include "tiled/image.hpp"
#include "tiled/scorer.hpp"
#include "tiled/serialize.hpp"
#include "tiled/smoothing.hpp"
#include "tiled/tiling.hpp"

namespace tiled {

enum class EnsembleMode { PerLocation, Shared };
enum class MergeStrategy { Average, Max };

inline std::string to_string(EnsembleMode mode) {
    return mode == EnsembleMode::PerLocation ? "per_location" : "shared";
}
inline std::string to_string(MergeStrategy s) {
    return s == MergeStrategy::Average ? "avg" : "max";
}
inline MergeStrategy merge_strategy_from_string(const std::string& s) {
    if (s == "avg") return MergeStrategy::Average;
    if (s == "max") return MergeStrategy::Max;
    throw ValidationError("unknown merge strategy: " + s);
}

// Min/max of training-set predictions, used for min-max post-processing.
struct NormalizationStats {
    bool valid = false;
    double map_min = 0.0, map_max = 0.0;
    double score_min = 0.0, score_max = 0.0;
};

struct EnsembleModel {
    TileGrid grid;
    EnsembleMode mode = EnsembleMode::PerLocation;
    ScorerConfig scorer;
    std::vector<TileModel> models;  // N (per-location, row-major) or 1 (shared)
    NormalizationStats stats;

    const TileModel& model_at(TileIndex idx) const {
        if (!valid_index(grid, idx)) throw std::out_of_range("model_at: bad tile index");
        if (mode == EnsembleMode::Shared) return models.at(0);
        return models.at(static_cast<std::size_t>(idx.i) * grid.n_cols + idx.j);
    }
};

struct Prediction {
    ScalarMap map;  // image-sized
    double score = 0.0;
    std::vector<double> tile_scores;  // row-major tile order
};

struct PredictOptions {
    MergeStrategy merge = MergeStrategy::Average;
    SmoothingConfig smoothing;
    bool normalize = false;
};

inline double merge_scores(const std::vector<double>& scores, MergeStrategy strategy) {
    if (scores.empty()) throw std::invalid_argument("merge_scores: empty score set");
    if (strategy == MergeStrategy::Max) return *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (double s : scores) sum += s;
    return sum / static_cast<double>(scores.size());
}

inline double normalize_value(double v, double lo, double hi) {
    if (!(hi > lo)) return 0.5;
    return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

inline Prediction normalize(Prediction pred, const NormalizationStats& stats) {
    if (!stats.valid) throw ValidationError("normalize: missing normalization stats");
    for (double& v : pred.map.data) v = normalize_value(v, stats.map_min, stats.map_max);
    pred.score = normalize_value(pred.score, stats.score_min, stats.score_max);
    for (double& s : pred.tile_scores) s = normalize_value(s, stats.score_min, stats.score_max);
    return pred;
}

inline ScalarMap apply_threshold(const ScalarMap& map, double tau) {
    ScalarMap mask(map.height, map.width);
    for (std::size_t k = 0; k < map.data.size(); ++k)
        mask.data[k] = map.data[k] >= tau ? 1.0 : 0.0;
    return mask;
}

inline bool apply_threshold(double score, double tau) { return score >= tau; }

// Streaming inference core. `load` materializes the model for one tile
// location; the model and the per-tile working buffers are released before
// the next tile is processed, so the accounted working set stays at
// single-tile scale while tile maps accumulate into the merge buffer.
inline Prediction predict_streaming(const TileGrid& grid, const ScorerConfig& scorer,
                                    const std::function<TileModel(TileIndex)>& load,
                                    const Image& image, const PredictOptions& opt,
                                    const NormalizationStats& stats,
                                    BufferAccountant* acc = nullptr) {
    if (image.height != grid.image_h || image.width != grid.image_w)
        throw ValidationError("predict: image dims do not match ensemble grid");

    MergeAccumulator merger(grid);
    ScopedBuffer merge_guard(acc, BufferTag::MergeBuffer, merger.bytes());

    Prediction pred;
    pred.tile_scores.reserve(static_cast<std::size_t>(grid.tile_count()));
    for (int i = 0; i < grid.n_rows; ++i)
        for (int j = 0; j < grid.n_cols; ++j) {
            const TileIndex idx{i, j};
            Image tile = extract_tile(image, grid, idx);
            ScopedBuffer tile_guard(acc, BufferTag::Maps, tile.bytes());
            TileModel model = load(idx);
            ScopedBuffer model_guard(acc, BufferTag::Models, model.tensor_bytes());
            TilePrediction tp = predict_tile(model, tile, scorer.extractor, acc);
            merger.add(idx, tp.map);
            pred.tile_scores.push_back(tp.score);
        }

    pred.map = merger.finalize();
    merge_guard.release();
    ScopedBuffer map_guard(acc, BufferTag::Maps, pred.map.bytes());
    pred.map = smooth_seams(pred.map, grid, opt.smoothing);
    pred.score = merge_scores(pred.tile_scores, opt.merge);
    if (opt.normalize) pred = normalize(std::move(pred), stats);
    return pred;
}

inline Prediction predict(const EnsembleModel& ensemble, const Image& image,
                          const PredictOptions& opt, BufferAccountant* acc = nullptr) {
    return predict_streaming(
        ensemble.grid, ensemble.scorer,
        [&](TileIndex idx) { return ensemble.model_at(idx); }, image, opt, ensemble.stats,
        acc);
}

namespace detail {

// Fixed-size worker pool over [0, n); items are claimed atomically and
// results land in caller-owned slots, so the outcome is schedule-free.
inline void parallel_for(int n, int workers, const std::function<void(int)>& body) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int k = 0; k < n; ++k) body(k);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (int k = next.fetch_add(1); k < n; k = next.fetch_add(1)) {
            try {
                body(k);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(run);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

struct TrainOptions {
    EnsembleMode mode = EnsembleMode::PerLocation;
    ScorerConfig scorer;
    int workers = 1;
};

// Train one model per tile location (or a single shared model on all tiles
// stacked). Locations are independent jobs; the result does not depend on
// the worker schedule.
inline EnsembleModel train_ensemble(const std::vector<Image>& train_images,
                                    const TileGrid& grid, const TrainOptions& opt,
                                    BufferAccountant* acc = nullptr) {
    if (train_images.empty()) throw ValidationError("train_ensemble: empty training set");
    for (const Image& img : train_images)
        if (img.height != grid.image_h || img.width != grid.image_w ||
            img.channels != opt.scorer.extractor.channels)
            throw ValidationError("train_ensemble: image dims do not match grid/config");

    EnsembleModel ensemble;
    ensemble.grid = grid;
    ensemble.mode = opt.mode;
    ensemble.scorer = opt.scorer;

    auto features_for_location = [&](TileIndex idx) {
        std::vector<FeatureMap> features;
        features.reserve(train_images.size());
        for (const Image& img : train_images) {
            Image tile = extract_tile(img, grid, idx);
            features.push_back(extract_features(tile, opt.scorer.extractor));
        }
        return features;
    };

    if (opt.mode == EnsembleMode::Shared) {
        std::vector<FeatureMap> features;
        features.reserve(train_images.size() * static_cast<std::size_t>(grid.tile_count()));
        for (const Image& img : train_images)
            for (int i = 0; i < grid.n_rows; ++i)
                for (int j = 0; j < grid.n_cols; ++j) {
                    Image tile = extract_tile(img, grid, TileIndex{i, j});
                    features.push_back(extract_features(tile, opt.scorer.extractor));
                }
        std::size_t feat_bytes = 0;
        for (const FeatureMap& fm : features) feat_bytes += fm.bytes();
        ScopedBuffer feat_guard(acc, BufferTag::Features, feat_bytes);
        ensemble.models.push_back(fit_tile_model(features, opt.scorer));
        if (acc)
            acc->register_bytes(BufferTag::Models, ensemble.models.back().tensor_bytes());
    } else {
        const int n = grid.tile_count();
        ensemble.models.resize(static_cast<std::size_t>(n));
        detail::parallel_for(n, opt.workers, [&](int k) {
            const TileIndex idx{k / grid.n_cols, k % grid.n_cols};
            std::vector<FeatureMap> features = features_for_location(idx);
            std::size_t feat_bytes = 0;
            for (const FeatureMap& fm : features) feat_bytes += fm.bytes();
            ScopedBuffer feat_guard(acc, BufferTag::Features, feat_bytes);
            ensemble.models[static_cast<std::size_t>(k)] = fit_tile_model(features, opt.scorer);
        });
        if (acc)
            for (const TileModel& m : ensemble.models)
                acc->register_bytes(BufferTag::Models, m.tensor_bytes());
    }
    return ensemble;
}

// Min/max of un-normalized predictions over the training set.
inline NormalizationStats compute_normalization_stats(const EnsembleModel& ensemble,
                                                      const std::vector<Image>& train_images,
                                                      const PredictOptions& base_opt) {
    if (train_images.empty())
        throw ValidationError("compute_normalization_stats: empty training set");
    PredictOptions opt = base_opt;
    opt.normalize = false;
    NormalizationStats stats;
    bool first = true;
    for (const Image& img : train_images) {
        Prediction p = predict(ensemble, img, opt);
        const auto [lo, hi] = std::minmax_element(p.map.data.begin(), p.map.data.end());
        if (first) {
            stats.map_min = *lo;
            stats.map_max = *hi;
            stats.score_min = stats.score_max = p.score;
            first = false;
        } else {
            stats.map_min = std::min(stats.map_min, *lo);
            stats.map_max = std::max(stats.map_max, *hi);
            stats.score_min = std::min(stats.score_min, p.score);
            stats.score_max = std::max(stats.score_max, p.score);
        }
    }
    stats.valid = true;
    return stats;
}

// ---------------------------------------------------------------------------
// Ensemble directory format: manifest.txt (key = value lines) plus one model
// file per location named r{i}_c{j}.bin (per-location mode) or shared.bin.

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline constexpr int kManifestVersion = 1;

inline std::string model_file_name(EnsembleMode mode, TileIndex idx) {
    if (mode == EnsembleMode::Shared) return "shared.bin";
    return "r" + std::to_string(idx.i) + "_c" + std::to_string(idx.j) + ".bin";
}

inline void save_ensemble(const EnsembleModel& ensemble, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.txt");
    if (!manifest) throw DataError("cannot write manifest: " + (dir / "manifest.txt").string());
    const auto& g = ensemble.grid;
    manifest << "format_version = " << kManifestVersion << "\n"
             << "image_h = " << g.image_h << "\n"
             << "image_w = " << g.image_w << "\n"
             << "tile_h = " << g.tile_h << "\n"
             << "tile_w = " << g.tile_w << "\n"
             << "stride_h = " << g.stride_h << "\n"
             << "stride_w = " << g.stride_w << "\n"
             << "mode = " << to_string(ensemble.mode) << "\n"
             << "scorer = " << to_string(ensemble.scorer.kind) << "\n"
             << "cell_size = " << ensemble.scorer.extractor.cell_size << "\n"
             << "orientation_bins = " << ensemble.scorer.extractor.orientation_bins << "\n"
             << "channels = " << ensemble.scorer.extractor.channels << "\n"
             << "epsilon = " << format_double(ensemble.scorer.epsilon) << "\n"
             << "coreset_ratio = " << format_double(ensemble.scorer.coreset_ratio) << "\n"
             << "fingerprint = " << ensemble.scorer.extractor.fingerprint() << "\n"
             << "stats_valid = " << (ensemble.stats.valid ? 1 : 0) << "\n";
    if (ensemble.stats.valid)
        manifest << "map_min = " << format_double(ensemble.stats.map_min) << "\n"
                 << "map_max = " << format_double(ensemble.stats.map_max) << "\n"
                 << "score_min = " << format_double(ensemble.stats.score_min) << "\n"
                 << "score_max = " << format_double(ensemble.stats.score_max) << "\n";
    manifest.close();

    if (ensemble.mode == EnsembleMode::Shared) {
        save_tile_model(ensemble.models.at(0), dir / model_file_name(ensemble.mode, {0, 0}));
        return;
    }
    for (int i = 0; i < g.n_rows; ++i)
        for (int j = 0; j < g.n_cols; ++j)
            save_tile_model(ensemble.model_at({i, j}),
                            dir / model_file_name(ensemble.mode, {i, j}));
}

inline std::map<std::string, std::string> parse_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path.string());
    std::map<std::string, std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CorruptFileError("malformed line in " + path.string() + ": " + line);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return entries;
}

// Manifest plus lazily loadable per-location models; the unit of the
// load-score-release inference loop.
class EnsembleReader {
public:
    explicit EnsembleReader(std::filesystem::path dir) : dir_(std::move(dir)) {
        auto kv = parse_key_values(dir_ / "manifest.txt");
        auto need = [&](const std::string& key) -> const std::string& {
            auto it = kv.find(key);
            if (it == kv.end())
                throw CorruptFileError("manifest missing key '" + key + "'");
            return it->second;
        };
        if (std::stoi(need("format_version")) != kManifestVersion)
            throw VersionMismatchError("unsupported manifest version " +
                                       need("format_version"));
        grid_ = compute_grid(std::stoi(need("image_h")), std::stoi(need("image_w")),
                             std::stoi(need("tile_h")), std::stoi(need("tile_w")),
                             std::stoi(need("stride_h")), std::stoi(need("stride_w")));
        mode_ = need("mode") == "shared" ? EnsembleMode::Shared : EnsembleMode::PerLocation;
        scorer_.kind = scorer_kind_from_string(need("scorer"));
        scorer_.extractor.cell_size = std::stoi(need("cell_size"));
        scorer_.extractor.orientation_bins = std::stoi(need("orientation_bins"));
        scorer_.extractor.channels = std::stoi(need("channels"));
        scorer_.epsilon = std::stod(need("epsilon"));
        scorer_.coreset_ratio = std::stod(need("coreset_ratio"));
        if (need("fingerprint") != scorer_.extractor.fingerprint())
            throw FingerprintMismatchError("manifest fingerprint does not match config: " +
                                           need("fingerprint"));
        if (std::stoi(need("stats_valid")) != 0) {
            stats_.valid = true;
            stats_.map_min = std::stod(need("map_min"));
            stats_.map_max = std::stod(need("map_max"));
            stats_.score_min = std::stod(need("score_min"));
            stats_.score_max = std::stod(need("score_max"));
        }
    }

    const TileGrid& grid() const { return grid_; }
    EnsembleMode mode() const { return mode_; }
    const ScorerConfig& scorer() const { return scorer_; }
    const NormalizationStats& stats() const { return stats_; }

    TileModel load_model(TileIndex idx) const {
        const auto path = dir_ / model_file_name(mode_, idx);
        return load_tile_model(path, scorer_.extractor.fingerprint());
    }

    Prediction predict(const Image& image, const PredictOptions& opt,
                       BufferAccountant* acc = nullptr) const {
        return predict_streaming(
            grid_, scorer_, [&](TileIndex idx) { return load_model(idx); }, image, opt,
            stats_, acc);
    }

    // Full in-memory load (training-side round trips and tests).
    EnsembleModel load_all() const {
        EnsembleModel ensemble;
        ensemble.grid = grid_;
        ensemble.mode = mode_;
        ensemble.scorer = scorer_;
        ensemble.stats = stats_;
        if (mode_ == EnsembleMode::Shared) {
            ensemble.models.push_back(load_model({0, 0}));
        } else {
            for (int i = 0; i < grid_.n_rows; ++i)
                for (int j = 0; j < grid_.n_cols; ++j)
                    ensemble.models.push_back(load_model({i, j}));
        }
        return ensemble;
    }

private:
    std::filesystem::path dir_;
    TileGrid grid_;
    EnsembleMode mode_ = EnsembleMode::PerLocation;
    ScorerConfig scorer_;
    NormalizationStats stats_;
};

inline EnsembleModel load_ensemble(const std::filesystem::path& dir) {
    return EnsembleReader(dir).load_all();
}

}  // namespace tiled
