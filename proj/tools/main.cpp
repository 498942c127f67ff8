// Command-line driver for the tiled-ensemble anomaly-detection pipeline.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tiled/config.hpp"
#include "tiled/pipeline.hpp"
#include "tiled/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
};

tiled::PipelineConfig build_config(const CommonArgs& args) {
    tiled::PipelineConfig cfg;
    if (!args.preset.empty()) tiled::apply_preset(cfg, args.preset);
    if (!args.config_path.empty()) {
        cfg = tiled::load_config(args.config_path, cfg);
        if (!args.preset.empty()) tiled::apply_preset(cfg, args.preset);
    }
    if (args.seed_set) {
        cfg.seed = args.seed;
        cfg.synth.seed = args.seed;
    }
    if (args.workers > 0) cfg.workers = args.workers;
    cfg.scorer.extractor.channels = cfg.channels;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Pipeline config file (key = value)");
    cmd->add_option("--preset", args.preset, "Setup template: SM256|SM512|ENS4|ENS9|ST4|ST9");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.seed, "Random seed")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--workers", args.workers, "Worker threads for training");
}

void write_run_manifest(const fs::path& out_dir, const std::string& command,
                        const tiled::PipelineConfig& cfg, const std::string& preset) {
    fs::create_directories(out_dir);
    std::ofstream manifest(out_dir / "run_manifest.txt");
    manifest << "command = " << command << "\n"
             << "preset = " << (preset.empty() ? "none" : preset) << "\n"
             << "category = " << cfg.category << "\n"
             << "image_h = " << cfg.image_h << "\n"
             << "image_w = " << cfg.image_w << "\n"
             << "tile_h = " << cfg.tile_h << "\n"
             << "tile_w = " << cfg.tile_w << "\n"
             << "stride_h = " << cfg.stride_h << "\n"
             << "stride_w = " << cfg.stride_w << "\n"
             << "mode = " << tiled::to_string(cfg.mode) << "\n"
             << "scorer = " << tiled::to_string(cfg.scorer.kind) << "\n"
             << "merge = " << tiled::to_string(cfg.merge) << "\n"
             << "seed = " << cfg.seed << "\n"
             << "workers = " << cfg.workers << "\n";
}

struct BenchRow {
    std::string setup;
    double train_seconds;
    double latency_ms;
    double throughput_ips;
    std::size_t peak_working_bytes;
    std::size_t peak_total_bytes;
};

BenchRow bench_setup(const tiled::PipelineConfig& cfg, const std::string& setup,
                     const fs::path& work_dir) {
    using clock = std::chrono::steady_clock;
    BenchRow row{setup, 0, 0, 0, 0, 0};

    const auto t0 = clock::now();
    tiled::TrainResult trained = tiled::run_train(cfg, work_dir);
    row.train_seconds = std::chrono::duration<double>(clock::now() - t0).count();

    const tiled::EnsembleReader reader(trained.ensemble_dir);
    const tiled::DatasetIndex index = tiled::scan_dataset(cfg.dataset_root, cfg.category);
    if (index.test.empty()) throw tiled::DataError("bench: dataset has no test images");
    const tiled::Image image = tiled::load_input_image(index.test.front().path, cfg);
    tiled::PredictOptions opt{cfg.merge, cfg.smoothing, true};

    tiled::BufferAccountant accountant;
    (void)reader.predict(image, opt, &accountant);  // warm-up

    std::vector<double> latencies;
    for (int r = 0; r < cfg.bench_repetitions; ++r) {
        const auto s = clock::now();
        (void)reader.predict(image, opt, &accountant);
        latencies.push_back(std::chrono::duration<double>(clock::now() - s).count());
    }
    std::sort(latencies.begin(), latencies.end());
    row.latency_ms = latencies[latencies.size() / 2] * 1000.0;

    const auto b0 = clock::now();
    for (int k = 0; k < cfg.batch_size; ++k) (void)reader.predict(image, opt, &accountant);
    const double batch_seconds = std::chrono::duration<double>(clock::now() - b0).count();
    row.throughput_ips = batch_seconds > 0.0 ? cfg.batch_size / batch_seconds : 0.0;

    row.peak_working_bytes = accountant.peak_working();
    row.peak_total_bytes = accountant.peak_total();
    return row;
}

int dispatch(const std::string& command, const CommonArgs& args, const std::string& model_dir,
             const std::vector<std::string>& bench_setups) {
    tiled::PipelineConfig cfg = build_config(args);
    const fs::path out_dir = args.out_dir;

    if (command == "synth") {
        cfg.synth.validate();
        // --out is the dataset root; point dataset_root at it to train on it.
        tiled::generate_synthetic(cfg.synth, out_dir, cfg.category);
        std::cout << "synthetic dataset written to " << (out_dir / cfg.category) << "\n";
        write_run_manifest(out_dir, command, cfg, args.preset);
        return 0;
    }
    if (command == "train") {
        tiled::TrainResult result = tiled::run_train(cfg, out_dir);
        write_run_manifest(out_dir, command, cfg, args.preset);
        std::cout << "trained " << result.n_models << " model(s) in "
                  << result.train_seconds << " s, peak accounted bytes "
                  << result.peak_bytes << "\n"
                  << "ensemble saved to " << result.ensemble_dir << "\n";
        return 0;
    }
    if (command == "predict") {
        if (model_dir.empty()) throw tiled::ValidationError("predict requires --model");
        tiled::PredictRunResult run = tiled::run_predict(cfg, model_dir, out_dir, true);
        write_run_manifest(out_dir, command, cfg, args.preset);
        std::cout << "predicted " << run.records.size() << " image(s), mean latency "
                  << run.mean_latency_seconds * 1000.0 << " ms, peak accounted bytes "
                  << run.peak_bytes << "\n";
        return 0;
    }
    if (command == "eval") {
        if (model_dir.empty()) throw tiled::ValidationError("eval requires --model");
        tiled::EvalReport report = tiled::run_eval(cfg, model_dir, out_dir,
                                                   args.preset.empty() ? "custom" : args.preset);
        write_run_manifest(out_dir, command, cfg, args.preset);
        std::printf("category=%s auroc=%.4f aupro=%.4f best_f1=%.4f tau=%.4f\n",
                    report.category.c_str(), report.auroc, report.aupro, report.best_f1,
                    report.threshold);
        return 0;
    }
    if (command == "bench") {
        std::vector<std::string> setups = bench_setups;
        if (setups.empty()) setups.push_back("BASE");
        fs::create_directories(out_dir);
        std::ofstream csv(out_dir / "bench.csv");
        csv << "setup,train_seconds,latency_ms,throughput_ips,peak_working_bytes,"
               "peak_total_bytes\r\n";
        std::printf("%-8s %12s %12s %12s %16s %16s\n", "setup", "train_s", "latency_ms",
                    "ips", "peak_working", "peak_total");
        for (const std::string& setup : setups) {
            tiled::PipelineConfig setup_cfg = cfg;
            if (setup != "BASE") tiled::apply_preset(setup_cfg, setup);
            setup_cfg.scorer.extractor.channels = setup_cfg.channels;
            BenchRow row = bench_setup(setup_cfg, setup, out_dir / ("bench_" + setup));
            csv << row.setup << ',' << tiled::format_double(row.train_seconds) << ','
                << tiled::format_double(row.latency_ms) << ','
                << tiled::format_double(row.throughput_ips) << ',' << row.peak_working_bytes
                << ',' << row.peak_total_bytes << "\r\n";
            std::printf("%-8s %12.3f %12.3f %12.3f %16zu %16zu\n", row.setup.c_str(),
                        row.train_seconds, row.latency_ms, row.throughput_ips,
                        row.peak_working_bytes, row.peak_total_bytes);
        }
        write_run_manifest(out_dir, command, cfg, args.preset);
        return 0;
    }
    throw tiled::ValidationError("unknown command: " + command);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tiled-ensemble anomaly detection pipeline"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string model_dir;
    std::vector<std::string> bench_setups;

    CLI::App* train = app.add_subcommand("train", "Train an ensemble on a dataset");
    add_common(train, args);
    CLI::App* predict = app.add_subcommand("predict", "Run inference, write heatmaps + CSV");
    add_common(predict, args);
    predict->add_option("--model", model_dir, "Trained ensemble directory")->required();
    CLI::App* eval = app.add_subcommand("eval", "Predict and evaluate AUROC/AUPRO/F1");
    add_common(eval, args);
    eval->add_option("--model", model_dir, "Trained ensemble directory")->required();
    CLI::App* bench = app.add_subcommand("bench", "Compare setups: latency/throughput/memory");
    add_common(bench, args);
    bench->add_option("--setups", bench_setups,
                      "Setups to benchmark (BASE or preset names)")
        ->delimiter(',');
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    add_common(synth, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // bad usage is a validation error
    }

    try {
        return dispatch(app.get_subcommands().front()->get_name(), args, model_dir,
                        bench_setups);
    } catch (const tiled::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const tiled::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
