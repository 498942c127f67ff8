#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tiled/accountant.hpp"
#include "tiled/config.hpp"
#include "tiled/dataio.hpp"
#include "tiled/ensemble.hpp"
#include "tiled/errors.hpp"
#include "tiled/metrics.hpp"

namespace tiled {

// Nearest-neighbour, corner-aligned resize keeps ground-truth masks binary.
inline GroundTruthMask resize_mask_nearest(const GroundTruthMask& src, int out_h, int out_w) {
    if (src.height == out_h && src.width == out_w) return src;
    GroundTruthMask out(out_h, out_w);
    const double sy = out_h > 1 ? static_cast<double>(src.height - 1) / (out_h - 1) : 0.0;
    const double sx = out_w > 1 ? static_cast<double>(src.width - 1) / (out_w - 1) : 0.0;
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x)
            out.at(y, x) = src.at(static_cast<int>(std::lround(y * sy)),
                                  static_cast<int>(std::lround(x * sx)));
    return out;
}

inline Image load_input_image(const std::filesystem::path& path, const PipelineConfig& cfg) {
    Image img = load_image(path);
    img = convert_channels(img, cfg.channels);
    return resize_bilinear(img, cfg.image_h, cfg.image_w);
}

struct TrainResult {
    std::filesystem::path ensemble_dir;
    double train_seconds = 0.0;
    std::size_t peak_bytes = 0;
    int n_models = 0;
};

inline TrainResult run_train(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    if (cfg.dataset_root.empty()) throw ValidationError("dataset_root is required for train");

    const DatasetIndex index = scan_dataset(cfg.dataset_root, cfg.category);
    if (index.train.empty())
        throw DataError("no training images in " + cfg.dataset_root + "/" + cfg.category);

    std::vector<Image> train_images;
    train_images.reserve(index.train.size());
    for (const auto& path : index.train) train_images.push_back(load_input_image(path, cfg));

    BufferAccountant accountant;
    const auto t0 = std::chrono::steady_clock::now();
    TrainOptions opt{cfg.mode, cfg.scorer, cfg.workers};
    EnsembleModel ensemble = train_ensemble(train_images, cfg.grid(), opt, &accountant);

    PredictOptions predict_opt{cfg.merge, cfg.smoothing, false};
    ensemble.stats = compute_normalization_stats(ensemble, train_images, predict_opt);
    const auto t1 = std::chrono::steady_clock::now();

    TrainResult result;
    result.ensemble_dir = out_dir / "ensemble";
    result.train_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.peak_bytes = accountant.peak_total();
    result.n_models = static_cast<int>(ensemble.models.size());
    save_ensemble(ensemble, result.ensemble_dir);

    std::filesystem::create_directories(out_dir);
    std::ofstream report(out_dir / "train_report.txt");
    report << "category = " << cfg.category << "\n"
           << "mode = " << to_string(cfg.mode) << "\n"
           << "scorer = " << to_string(cfg.scorer.kind) << "\n"
           << "seed = " << cfg.seed << "\n"
           << "workers = " << cfg.workers << "\n"
           << "n_models = " << result.n_models << "\n"
           << "peak_bytes = " << result.peak_bytes << "\n"
           << "train_seconds = " << format_double(result.train_seconds) << "\n";
    return result;
}

struct PredictRunResult {
    std::vector<PredictionRecord> records;
    std::vector<GroundTruthMask> masks;  // parallel to records, image-sized
    double mean_latency_seconds = 0.0;
    std::size_t peak_bytes = 0;
    std::size_t peak_working_bytes = 0;
};

inline PredictRunResult run_predict(const PipelineConfig& cfg,
                                    const std::filesystem::path& model_dir,
                                    const std::filesystem::path& out_dir,
                                    bool write_files = true) {
    cfg.validate();
    if (cfg.dataset_root.empty()) throw ValidationError("dataset_root is required for predict");

    const EnsembleReader reader(model_dir);
    if (reader.grid().image_h != cfg.image_h || reader.grid().image_w != cfg.image_w ||
        reader.grid().tile_h != cfg.tile_h || reader.grid().tile_w != cfg.tile_w ||
        reader.grid().stride_h != cfg.stride_h || reader.grid().stride_w != cfg.stride_w)
        throw ValidationError("ensemble grid does not match config geometry");

    const DatasetIndex index = scan_dataset(cfg.dataset_root, cfg.category);
    if (index.test.empty())
        throw DataError("no test images in " + cfg.dataset_root + "/" + cfg.category);

    PredictOptions opt{cfg.merge, cfg.smoothing, true};
    BufferAccountant accountant;
    PredictRunResult result;
    double total_seconds = 0.0;
    for (const TestSample& sample : index.test) {
        const Image image = load_input_image(sample.path, cfg);
        const auto t0 = std::chrono::steady_clock::now();
        Prediction pred = reader.predict(image, opt, &accountant);
        const auto t1 = std::chrono::steady_clock::now();
        total_seconds += std::chrono::duration<double>(t1 - t0).count();

        PredictionRecord rec;
        rec.name = sample.defect_type + "_" + sample.path.stem().string();
        rec.anomalous = sample.anomalous;
        rec.prediction = std::move(pred);
        result.records.push_back(std::move(rec));

        GroundTruthMask mask =
            sample.mask_path ? load_mask(*sample.mask_path)
                             : GroundTruthMask(cfg.image_h, cfg.image_w);
        result.masks.push_back(resize_mask_nearest(mask, cfg.image_h, cfg.image_w));
    }
    result.mean_latency_seconds = total_seconds / static_cast<double>(index.test.size());
    result.peak_bytes = accountant.peak_total();
    result.peak_working_bytes = accountant.peak_working();
    if (write_files) {
        std::filesystem::create_directories(out_dir);
        write_outputs(result.records, out_dir);
    }
    return result;
}

struct EvalReport {
    std::string category;
    std::string setup;
    double auroc = 0.0;
    double aupro = 0.0;
    double fpr_limit = 0.3;
    double best_f1 = 0.0;
    double threshold = 0.0;
    double anomalous_pixel_ratio = 0.0;
    double mean_latency_seconds = 0.0;
    double throughput_ips = 0.0;
    std::size_t peak_bytes = 0;
    std::uint64_t seed = 0;
};

inline void write_eval_report(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path.string());
    out << "category = " << report.category << "\n"
        << "setup = " << report.setup << "\n"
        << "auroc = " << format_double(report.auroc) << "\n"
        << "aupro = " << format_double(report.aupro) << "\n"
        << "fpr_limit = " << format_double(report.fpr_limit) << "\n"
        << "best_f1 = " << format_double(report.best_f1) << "\n"
        << "threshold = " << format_double(report.threshold) << "\n"
        << "anomalous_pixel_ratio = " << format_double(report.anomalous_pixel_ratio) << "\n"
        << "peak_bytes = " << report.peak_bytes << "\n"
        << "seed = " << report.seed << "\n"
        << "mean_latency_seconds = " << format_double(report.mean_latency_seconds) << "\n"
        << "throughput_ips = " << format_double(report.throughput_ips) << "\n";
}

inline EvalReport evaluate_records(const PredictRunResult& run, const PipelineConfig& cfg,
                                   const std::string& setup_name) {
    std::vector<LabeledSample> samples;
    std::vector<std::pair<ScalarMap, GroundTruthMask>> pairs;
    std::vector<GroundTruthMask> anomalous_masks;
    for (std::size_t k = 0; k < run.records.size(); ++k) {
        const PredictionRecord& rec = run.records[k];
        samples.push_back({rec.prediction.score, rec.anomalous});
        pairs.emplace_back(rec.prediction.map, run.masks[k]);
        if (rec.anomalous) anomalous_masks.push_back(run.masks[k]);
    }

    EvalReport report;
    report.category = cfg.category;
    report.setup = setup_name;
    report.fpr_limit = cfg.fpr_limit;
    report.seed = cfg.seed;
    report.auroc = auroc(samples);
    report.aupro = aupro(pairs, cfg.fpr_limit);
    const auto [tau, f1] = f1_sweep(samples);
    report.threshold = tau;
    report.best_f1 = f1;
    if (!anomalous_masks.empty())
        report.anomalous_pixel_ratio = anomaly_size_stats(anomalous_masks);
    report.mean_latency_seconds = run.mean_latency_seconds;
    report.throughput_ips =
        run.mean_latency_seconds > 0.0 ? 1.0 / run.mean_latency_seconds : 0.0;
    report.peak_bytes = run.peak_bytes;
    return report;
}

inline EvalReport run_eval(const PipelineConfig& cfg, const std::filesystem::path& model_dir,
                           const std::filesystem::path& out_dir,
                           const std::string& setup_name = "custom") {
    PredictRunResult run = run_predict(cfg, model_dir, out_dir, true);
    EvalReport report = evaluate_records(run, cfg, setup_name);
    write_eval_report(report, out_dir / "report.txt");
    return report;
}

}  // namespace tiled
