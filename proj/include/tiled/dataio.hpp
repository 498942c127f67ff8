#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "tiled/ensemble.hpp"
#include "tiled/errors.hpp"
#include "tiled/image.hpp"
#include "tiled/metrics.hpp"

namespace tiled {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// MVTec-style dataset layout:
//   root/category/train/good/*.png
//   root/category/test/<type>/*.png
//   root/category/ground_truth/<type>/<stem>_mask.png   (anomalous types only)

struct TestSample {
    fs::path path;
    std::string defect_type;
    std::optional<fs::path> mask_path;  // absent for normal samples
    bool anomalous = false;
};

struct DatasetIndex {
    std::string category;
    std::vector<fs::path> train;
    std::vector<TestSample> test;
};

namespace detail {

inline std::vector<fs::path> list_pngs(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            out.push_back(entry.path());
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return out;
}

inline std::vector<std::string> list_subdirs(const fs::path& dir) {
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) out.push_back(entry.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace detail

inline DatasetIndex scan_dataset(const fs::path& root, const std::string& category) {
    const fs::path base = root / category;
    const fs::path train_dir = base / "train" / "good";
    if (!fs::is_directory(train_dir))
        throw DataError("dataset missing train/good directory: " + train_dir.string());

    DatasetIndex index;
    index.category = category;
    index.train = detail::list_pngs(train_dir);

    const fs::path test_dir = base / "test";
    if (fs::is_directory(test_dir)) {
        for (const std::string& type : detail::list_subdirs(test_dir)) {
            for (const fs::path& img : detail::list_pngs(test_dir / type)) {
                TestSample sample;
                sample.path = img;
                sample.defect_type = type;
                sample.anomalous = type != "good";
                if (sample.anomalous) {
                    const fs::path mask = base / "ground_truth" / type /
                                          (img.stem().string() + "_mask.png");
                    if (!fs::is_regular_file(mask))
                        throw DataError("anomalous sample without ground-truth mask: " +
                                        img.string() + " (expected " + mask.string() + ")");
                    sample.mask_path = mask;
                }
                index.test.push_back(std::move(sample));
            }
        }
    }
    return index;
}

// ---------------------------------------------------------------------------
// PNG in/out. 8- and 16-bit grayscale/RGB; samples scaled to [0,1].

inline Image load_image(const fs::path& path) {
    cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (mat.empty()) throw DataError("cannot decode image: " + path.string());
    if (mat.channels() != 1 && mat.channels() != 3)
        throw DataError("unsupported channel count in " + path.string() +
                        " (grayscale or RGB only)");

    const int c = mat.channels();
    double scale;
    if (mat.depth() == CV_8U)
        scale = 1.0 / 255.0;
    else if (mat.depth() == CV_16U)
        scale = 1.0 / 65535.0;
    else
        throw DataError("unsupported bit depth in " + path.string());

    Image out(mat.rows, mat.cols, c);
    for (int y = 0; y < mat.rows; ++y)
        for (int x = 0; x < mat.cols; ++x)
            for (int ch = 0; ch < c; ++ch) {
                // OpenCV stores BGR; flip to RGB.
                const int src_ch = c == 3 ? 2 - ch : ch;
                const double v = mat.depth() == CV_8U
                                     ? mat.ptr<std::uint8_t>(y)[x * c + src_ch]
                                     : mat.ptr<std::uint16_t>(y)[x * c + src_ch];
                out.at(y, x, ch) = v * scale;
            }
    return out;
}

inline GroundTruthMask load_mask(const fs::path& path) {
    cv::Mat mat = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (mat.empty()) throw DataError("cannot decode mask: " + path.string());
    GroundTruthMask mask(mat.rows, mat.cols);
    for (int y = 0; y < mat.rows; ++y)
        for (int x = 0; x < mat.cols; ++x)
            mask.at(y, x) = mat.ptr<std::uint8_t>(y)[x] != 0 ? 1 : 0;
    return mask;
}

inline void save_image_png(const Image& image, const fs::path& path) {
    cv::Mat mat(image.height, image.width, CV_MAKETYPE(CV_8U, image.channels));
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            for (int c = 0; c < image.channels; ++c) {
                const int dst_ch = image.channels == 3 ? 2 - c : c;
                const double v = std::clamp(image.at(y, x, c), 0.0, 1.0);
                mat.ptr<std::uint8_t>(y)[x * image.channels + dst_ch] =
                    static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
    if (!cv::imwrite(path.string(), mat))
        throw DataError("cannot write image: " + path.string());
}

// 16-bit grayscale heatmap of a normalized map.
inline void save_heatmap_png(const ScalarMap& map, const fs::path& path) {
    cv::Mat mat(map.height, map.width, CV_16UC1);
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) {
            const double v = std::clamp(map.at(y, x), 0.0, 1.0);
            mat.ptr<std::uint16_t>(y)[x] = static_cast<std::uint16_t>(std::lround(v * 65535.0));
        }
    if (!cv::imwrite(path.string(), mat))
        throw DataError("cannot write heatmap: " + path.string());
}

inline ScalarMap load_heatmap_png(const fs::path& path) {
    cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (mat.empty() || mat.type() != CV_16UC1)
        throw DataError("cannot decode heatmap: " + path.string());
    ScalarMap map(mat.rows, mat.cols);
    for (int y = 0; y < mat.rows; ++y)
        for (int x = 0; x < mat.cols; ++x)
            map.at(y, x) = mat.ptr<std::uint16_t>(y)[x] / 65535.0;
    return map;
}

inline void save_mask_png(const GroundTruthMask& mask, const fs::path& path) {
    cv::Mat mat(mask.height, mask.width, CV_8UC1);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            mat.ptr<std::uint8_t>(y)[x] = mask.at(y, x) ? 255 : 0;
    if (!cv::imwrite(path.string(), mat))
        throw DataError("cannot write mask: " + path.string());
}

// Channel adaptation: 3->1 averages, 1->3 replicates.
inline Image convert_channels(const Image& image, int channels) {
    if (image.channels == channels) return image;
    Image out(image.height, image.width, channels);
    if (image.channels == 3 && channels == 1) {
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x)
                out.at(y, x, 0) =
                    (image.at(y, x, 0) + image.at(y, x, 1) + image.at(y, x, 2)) / 3.0;
        return out;
    }
    if (image.channels == 1 && channels == 3) {
        for (int y = 0; y < image.height; ++y)
            for (int x = 0; x < image.width; ++x)
                for (int c = 0; c < 3; ++c) out.at(y, x, c) = image.at(y, x, 0);
        return out;
    }
    throw DataError("unsupported channel conversion");
}

// ---------------------------------------------------------------------------
// Prediction artifacts: per-image heatmap PNG + a scores CSV.

struct PredictionRecord {
    std::string name;  // unique stem, e.g. "good_000"
    bool anomalous = false;
    Prediction prediction;
};

inline std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

inline void write_outputs(const std::vector<PredictionRecord>& records, const fs::path& out_dir) {
    fs::create_directories(out_dir / "heatmaps");
    std::ofstream csv(out_dir / "scores.csv");
    if (!csv) throw DataError("cannot write: " + (out_dir / "scores.csv").string());

    const std::size_t n_tiles =
        records.empty() ? 0 : records.front().prediction.tile_scores.size();
    csv << "image,label,score";
    for (std::size_t t = 0; t < n_tiles; ++t) csv << ",tile_" << t;
    csv << "\r\n";
    for (const PredictionRecord& rec : records) {
        csv << csv_quote(rec.name) << ',' << (rec.anomalous ? 1 : 0) << ','
            << format_double(rec.prediction.score);
        for (double s : rec.prediction.tile_scores) csv << ',' << format_double(s);
        csv << "\r\n";
        save_heatmap_png(rec.prediction.map, out_dir / "heatmaps" / (rec.name + ".png"));
    }
}

}  // namespace tiled
