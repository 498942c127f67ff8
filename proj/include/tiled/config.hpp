#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

#include "tiled/ensemble.hpp"
#include "tiled/errors.hpp"
#include "tiled/synthetic.hpp"
#include "tiled/tiling.hpp"

namespace tiled {

inline constexpr int kConfigVersion = 1;

// Declarative pipeline configuration. File format: one "key = value" per
// line, '#' comments; unknown keys are hard errors.
struct PipelineConfig {
    std::string dataset_root;
    std::string category = "synthetic";

    int image_h = 128, image_w = 128, channels = 1;
    int tile_h = 64, tile_w = 64;
    int stride_h = 64, stride_w = 64;
    EnsembleMode mode = EnsembleMode::PerLocation;

    ScorerConfig scorer;
    MergeStrategy merge = MergeStrategy::Average;
    SmoothingConfig smoothing;
    double fpr_limit = 0.3;
    std::uint64_t seed = 0;
    int workers = 1;
    int batch_size = 8;
    int bench_repetitions = 5;

    SyntheticSpec synth;

    TileGrid grid() const {
        return compute_grid(image_h, image_w, tile_h, tile_w, stride_h, stride_w);
    }

    void validate() const {
        try {
            (void)grid();
        } catch (const std::exception& e) {
            throw ValidationError(std::string("invalid tiling geometry: ") + e.what() +
                                  " (tile must divide coverage: choose stride <= tile size "
                                  "and positive dimensions)");
        }
        if (tile_h % scorer.extractor.cell_size != 0 ||
            tile_w % scorer.extractor.cell_size != 0)
            throw ValidationError(
                "tile size must be divisible by cell_size (" +
                std::to_string(scorer.extractor.cell_size) + "); adjust tile_h/tile_w or "
                "cell_size");
        if (scorer.extractor.channels != channels)
            throw ValidationError("extractor channels must equal input channels");
        if (scorer.epsilon <= 0.0) throw ValidationError("epsilon must be positive");
        if (scorer.coreset_ratio <= 0.0 || scorer.coreset_ratio > 1.0)
            throw ValidationError("coreset_ratio must be in (0, 1]");
        if (smoothing.band_fraction < 0.0 || smoothing.band_fraction > 0.5)
            throw ValidationError("smoothing band_fraction must be in [0, 0.5]");
        if (fpr_limit <= 0.0 || fpr_limit > 1.0)
            throw ValidationError("fpr_limit must be in (0, 1]");
        if (workers < 1) throw ValidationError("workers must be >= 1");
        if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    }
};

// Named setup templates. SM = single model, ENS = per-location tiled
// ensemble, ST = single shared model on stacked tiles.
inline void apply_preset(PipelineConfig& cfg, const std::string& name) {
    auto geometry = [&](int image, int tile, int stride, EnsembleMode mode) {
        cfg.image_h = cfg.image_w = image;
        cfg.tile_h = cfg.tile_w = tile;
        cfg.stride_h = cfg.stride_w = stride;
        cfg.mode = mode;
    };
    if (name == "SM256")
        geometry(256, 256, 256, EnsembleMode::PerLocation);
    else if (name == "SM512")
        geometry(512, 512, 512, EnsembleMode::PerLocation);
    else if (name == "ENS4")
        geometry(512, 256, 256, EnsembleMode::PerLocation);
    else if (name == "ENS9")
        geometry(512, 256, 128, EnsembleMode::PerLocation);
    else if (name == "ST4")
        geometry(512, 256, 256, EnsembleMode::Shared);
    else if (name == "ST9")
        geometry(512, 256, 128, EnsembleMode::Shared);
    else
        throw ValidationError("unknown preset: " + name +
                              " (expected SM256|SM512|ENS4|ENS9|ST4|ST9)");
}

inline PipelineConfig load_config(const std::filesystem::path& path,
                                  PipelineConfig cfg = {}) {
    auto kv = parse_key_values(path);
    auto version = kv.find("config_version");
    if (version == kv.end())
        throw ValidationError("config missing config_version");
    if (std::stoi(version->second) != kConfigVersion)
        throw ValidationError("unsupported config_version " + version->second);
    kv.erase(version);

    auto to_bool = [](const std::string& v) {
        if (v == "on" || v == "true" || v == "1") return true;
        if (v == "off" || v == "false" || v == "0") return false;
        throw ValidationError("expected on/off, got '" + v + "'");
    };

    for (const auto& [key, value] : kv) {
        try {
            if (key == "dataset_root") cfg.dataset_root = value;
            else if (key == "category") cfg.category = value;
            else if (key == "image_h") cfg.image_h = std::stoi(value);
            else if (key == "image_w") cfg.image_w = std::stoi(value);
            else if (key == "channels") cfg.channels = std::stoi(value);
            else if (key == "tile_h") cfg.tile_h = std::stoi(value);
            else if (key == "tile_w") cfg.tile_w = std::stoi(value);
            else if (key == "stride_h") cfg.stride_h = std::stoi(value);
            else if (key == "stride_w") cfg.stride_w = std::stoi(value);
            else if (key == "mode")
                cfg.mode = value == "shared" ? EnsembleMode::Shared
                         : value == "per_location"
                             ? EnsembleMode::PerLocation
                             : throw ValidationError("unknown mode: " + value);
            else if (key == "scorer") cfg.scorer.kind = scorer_kind_from_string(value);
            else if (key == "cell_size") cfg.scorer.extractor.cell_size = std::stoi(value);
            else if (key == "orientation_bins")
                cfg.scorer.extractor.orientation_bins = std::stoi(value);
            else if (key == "epsilon") cfg.scorer.epsilon = std::stod(value);
            else if (key == "coreset_ratio") cfg.scorer.coreset_ratio = std::stod(value);
            else if (key == "merge") cfg.merge = merge_strategy_from_string(value);
            else if (key == "smoothing") cfg.smoothing.enabled = to_bool(value);
            else if (key == "band_fraction") cfg.smoothing.band_fraction = std::stod(value);
            else if (key == "sigma") cfg.smoothing.sigma = std::stod(value);
            else if (key == "fpr_limit") cfg.fpr_limit = std::stod(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "workers") cfg.workers = std::stoi(value);
            else if (key == "batch_size") cfg.batch_size = std::stoi(value);
            else if (key == "bench_repetitions") cfg.bench_repetitions = std::stoi(value);
            else if (key == "synth_image_size") cfg.synth.image_size = std::stoi(value);
            else if (key == "synth_train") cfg.synth.train_count = std::stoi(value);
            else if (key == "synth_test_normal")
                cfg.synth.test_normal_count = std::stoi(value);
            else if (key == "synth_test_anomalous")
                cfg.synth.test_anomalous_count = std::stoi(value);
            else if (key == "synth_anomaly_count_min")
                cfg.synth.anomaly_count_min = std::stoi(value);
            else if (key == "synth_anomaly_count_max")
                cfg.synth.anomaly_count_max = std::stoi(value);
            else if (key == "synth_anomaly_area_min")
                cfg.synth.anomaly_area_min = std::stoi(value);
            else if (key == "synth_anomaly_area_max")
                cfg.synth.anomaly_area_max = std::stoi(value);
            else if (key == "synth_anomaly_contrast")
                cfg.synth.anomaly_contrast = std::stod(value);
            else if (key == "synth_texture_sigma")
                cfg.synth.texture_sigma = std::stod(value);
            else
                throw ValidationError("unknown config key: " + key);
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            throw ValidationError("bad value for config key '" + key + "': " + value);
        }
    }
    cfg.scorer.extractor.channels = cfg.channels;
    cfg.synth.seed = cfg.seed;
    return cfg;
}

}  // namespace tiled
