#pragma once

// Desk-scale trainable baselines: a logistic pixel segmenter over local
// features and a softmax image classifier over pooled intensity statistics.
// Both train with Adam; training is single-threaded and fully determined by
// (seed, data, hyperparameters).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "otbench/adam.hpp"
#include "otbench/augment.hpp"
#include "otbench/batching.hpp"
#include "otbench/features.hpp"
#include "otbench/losses.hpp"
#include "otbench/metrics.hpp"

namespace otbench {

inline constexpr int kModelFormatVersion = 1;

inline double sigmoid(double z) noexcept
{
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

namespace detail {

inline std::string exact_decimal(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline nlohmann::json encode_params(const ParamVector& p)
{
    auto arr = nlohmann::json::array();
    for (double v : p) arr.push_back(exact_decimal(v));
    return arr;
}

inline ParamVector decode_params(const nlohmann::json& arr)
{
    ParamVector p;
    for (const auto& s : arr) p.push_back(std::stod(s.get<std::string>()));
    return p;
}

inline void check_header(const nlohmann::json& j, const std::string& kind)
{
    require(j.value("format", "") == "otbench-model", "model: not an otbench model file");
    require(j.value("version", 0) == kModelFormatVersion, "model: unsupported format version");
    require(j.value("kind", "") == kind, "model: expected kind '" + kind + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// pixel segmenter

struct PixelSegmenterModel {
    ParamVector params = ParamVector(kPixelFeatureCount + 1, 0.0);  ///< weights then bias
    std::size_t feature_window = kPixelFeatureWindow;
    double threshold = 0.5;

    std::vector<double> predict_proba(const FeatureMatrix& f) const
    {
        std::vector<double> p(f.rows);
        for (std::size_t r = 0; r < f.rows; ++r) {
            const double* x = f.row(r);
            double z = params[kPixelFeatureCount];
            for (std::size_t c = 0; c < kPixelFeatureCount; ++c) z += params[c] * x[c];
            p[r] = sigmoid(z);
        }
        return p;
    }

    std::vector<double> predict_proba(const ImagePlane& img) const
    {
        return predict_proba(extract_pixel_features(img, feature_window));
    }

    nlohmann::json to_json() const
    {
        return {{"format", "otbench-model"},
                {"version", kModelFormatVersion},
                {"kind", "pixel_segmenter"},
                {"shape", {kPixelFeatureCount + 1}},
                {"weights", detail::encode_params(params)},
                {"feature_config", {{"features", {"intensity", "local_mean", "local_std", "sobel_magnitude"}},
                                    {"window", feature_window},
                                    {"standardize", "per_image"}}},
                {"threshold", detail::exact_decimal(threshold)}};
    }

    static PixelSegmenterModel from_json(const nlohmann::json& j)
    {
        detail::check_header(j, "pixel_segmenter");
        PixelSegmenterModel m;
        m.params = detail::decode_params(j.at("weights"));
        detail::require(m.params.size() == kPixelFeatureCount + 1, "model: wrong weight count");
        m.feature_window = j.at("feature_config").at("window").get<std::size_t>();
        m.threshold = std::stod(j.at("threshold").get<std::string>());
        return m;
    }
};

inline BinaryMask mask_from_proba(const std::vector<double>& proba, std::size_t w, std::size_t h, double threshold)
{
    BinaryMask m(w, h);
    for (std::size_t i = 0; i < proba.size(); ++i) m.set(i, proba[i] >= threshold);
    return m;
}

inline BinaryMask predict_mask(const PixelSegmenterModel& model, const ImagePlane& img, double threshold = 0.5)
{
    return mask_from_proba(model.predict_proba(img), img.width(), img.height(), threshold);
}

struct SegmenterTrainOptions {
    SegLoss loss = SegLoss::dice;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    double lr = 1e-4;
    double smoothing = kDefaultSmoothing;
    double threshold = 0.5;
    std::uint64_t seed = 0;
};

struct SegmenterTrainResult {
    PixelSegmenterModel model;
    std::vector<double> epoch_loss;      ///< mean per-image training loss
    std::vector<double> val_dice;        ///< empty without a validation set
    std::size_t best_epoch = 0;          ///< 0-based epoch whose parameters were kept
};

/// A training or validation image with its mask, features precomputed.
struct PixelSample {
    FeatureMatrix features;
    BinaryMask mask;
    std::size_t width = 0, height = 0;
};

inline PixelSample make_pixel_sample(const ImagePlane& img, const BinaryMask& mask,
                                     std::size_t window = kPixelFeatureWindow)
{
    detail::require(mask.same_shape(img), "pixel sample: mask dimensions differ from image");
    return {extract_pixel_features(img, window), mask, img.width(), img.height()};
}

/// Trains the logistic pixel model with Adam on shuffled mini-batches of
/// whole images (loss per image, averaged over the batch). With a
/// validation set, mean validation Dice is tracked after every epoch and the
/// parameters of the best epoch are kept (earliest on ties).
inline SegmenterTrainResult train_pixel_segmenter(const std::vector<PixelSample>& train,
                                                  const SegmenterTrainOptions& opt,
                                                  const std::vector<PixelSample>& validation = {})
{
    if (train.empty()) throw ValidationError("train_pixel_segmenter: empty training set");
    detail::require(opt.epochs >= 1 && opt.batch_size >= 1, "train_pixel_segmenter: epochs and batch size must be >= 1");

    std::mt19937_64 rng(opt.seed);
    SegmenterTrainResult res;
    res.model.threshold = opt.threshold;
    std::normal_distribution<double> init(0.0, 0.01);
    for (std::size_t c = 0; c < kPixelFeatureCount; ++c) res.model.params[c] = init(rng);
    res.model.params[kPixelFeatureCount] = 0.0;

    ParamVector params = res.model.params;
    AdamState adam(params.size(), AdamConfig{.lr = opt.lr});
    std::vector<std::size_t> order(train.size());
    double best_dice = -1.0;
    constexpr std::size_t nf = kPixelFeatureCount;

    PixelSegmenterModel current = res.model;
    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
            const std::size_t stop = std::min(order.size(), start + opt.batch_size);
            std::vector<double> grad(nf + 1, 0.0);
            current.params = params;
            for (std::size_t k = start; k < stop; ++k) {
                const PixelSample& s = train[order[k]];
                const std::vector<double> p = current.predict_proba(s.features);
                const LossValue lv = segmentation_loss(opt.loss, p, s.mask.bits(), opt.smoothing);
                if (!std::isfinite(lv.loss)) throw TrainingError("train_pixel_segmenter: non-finite loss");
                loss_sum += lv.loss;
                for (std::size_t r = 0; r < s.features.rows; ++r) {
                    const double dz = lv.grad[r] * p[r] * (1.0 - p[r]);
                    const double* x = s.features.row(r);
                    for (std::size_t c = 0; c < nf; ++c) grad[c] += dz * x[c];
                    grad[nf] += dz;
                }
            }
            const auto batch_n = static_cast<double>(stop - start);
            for (double& g : grad) g /= batch_n;
            adam_step(params, grad, adam);
        }
        res.epoch_loss.push_back(loss_sum / static_cast<double>(train.size()));
        current.params = params;

        if (validation.empty()) continue;
        double dice_sum = 0.0;
        for (const PixelSample& v : validation) {
            const BinaryMask pred = mask_from_proba(current.predict_proba(v.features), v.width, v.height, opt.threshold);
            dice_sum += dice_score(pred, v.mask);
        }
        const double mean_dice = dice_sum / static_cast<double>(validation.size());
        res.val_dice.push_back(mean_dice);
        if (mean_dice > best_dice) {
            best_dice = mean_dice;
            res.best_epoch = epoch;
            res.model.params = params;
        }
    }
    if (validation.empty()) {
        res.model.params = params;
        res.best_epoch = opt.epochs - 1;
    }
    return res;
}

// ---------------------------------------------------------------------------
// image classifier

struct ImageClassifierModel {
    std::size_t num_classes = 2;
    std::vector<double> feature_mean = std::vector<double>(kImageFeatureCount, 0.0);
    std::vector<double> feature_scale = std::vector<double>(kImageFeatureCount, 1.0);
    /// num_classes rows of (kImageFeatureCount weights, bias)
    ParamVector params;

    std::vector<double> standardized(const std::vector<double>& raw) const
    {
        std::vector<double> x(raw.size());
        for (std::size_t c = 0; c < raw.size(); ++c) x[c] = (raw[c] - feature_mean[c]) / feature_scale[c];
        return x;
    }

    std::vector<double> logits(const std::vector<double>& x) const
    {
        constexpr std::size_t stride = kImageFeatureCount + 1;
        std::vector<double> z(num_classes);
        for (std::size_t k = 0; k < num_classes; ++k) {
            z[k] = params[k * stride + kImageFeatureCount];
            for (std::size_t c = 0; c < kImageFeatureCount; ++c) z[k] += params[k * stride + c] * x[c];
        }
        return z;
    }

    std::vector<double> predict_proba(const ImagePlane& img) const
    {
        return softmax(logits(standardized(image_features(img))));
    }

    nlohmann::json to_json() const
    {
        std::vector<double> mean = feature_mean, scale = feature_scale;
        return {{"format", "otbench-model"},
                {"version", kModelFormatVersion},
                {"kind", "image_classifier"},
                {"shape", {num_classes, kImageFeatureCount + 1}},
                {"weights", detail::encode_params(params)},
                {"feature_config", {{"features", {"mean", "std", "q10", "q50", "q90"}},
                                    {"mean", detail::encode_params(mean)},
                                    {"scale", detail::encode_params(scale)}}}};
    }

    static ImageClassifierModel from_json(const nlohmann::json& j)
    {
        detail::check_header(j, "image_classifier");
        ImageClassifierModel m;
        m.num_classes = j.at("shape").at(0).get<std::size_t>();
        m.params = detail::decode_params(j.at("weights"));
        detail::require(m.params.size() == m.num_classes * (kImageFeatureCount + 1), "model: wrong weight count");
        m.feature_mean = detail::decode_params(j.at("feature_config").at("mean"));
        m.feature_scale = detail::decode_params(j.at("feature_config").at("scale"));
        return m;
    }
};

struct Prediction {
    std::size_t label = 0;
    std::vector<double> probabilities;
};

inline Prediction predict_label(const ImageClassifierModel& model, const ImagePlane& img)
{
    Prediction p{0, model.predict_proba(img)};
    p.label = static_cast<std::size_t>(std::max_element(p.probabilities.begin(), p.probabilities.end()) -
                                       p.probabilities.begin());
    return p;
}

struct ClassifierTrainOptions {
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    double lr = 1e-4;
    std::uint64_t seed = 0;
};

struct ClassifierTrainResult {
    ImageClassifierModel model;
    std::vector<double> epoch_loss;
};

/// Softmax regression on standardised pooled features, trained with SCCE on
/// class-balanced mini-batches. Labels are 0..C-1.
inline ClassifierTrainResult train_image_classifier(const std::vector<ImagePlane>& images,
                                                    const std::vector<std::size_t>& labels,
                                                    const ClassifierTrainOptions& opt)
{
    detail::require(images.size() == labels.size(), "train_image_classifier: image/label count mismatch");
    detail::require(!images.empty(), "train_image_classifier: empty training set");
    std::size_t num_classes = 0;
    for (std::size_t l : labels) num_classes = std::max(num_classes, l + 1);
    {
        std::vector<bool> seen(num_classes, false);
        for (std::size_t l : labels) seen[l] = true;
        const auto present = std::count(seen.begin(), seen.end(), true);
        detail::require(present >= 2, "train_image_classifier: training set must contain at least 2 classes");
    }

    // pooled features, standardised with training statistics
    std::vector<std::vector<double>> raw;
    raw.reserve(images.size());
    for (const auto& img : images) raw.push_back(image_features(img));

    ClassifierTrainResult res;
    ImageClassifierModel& model = res.model;
    model.num_classes = num_classes;
    const auto n = static_cast<double>(raw.size());
    for (std::size_t c = 0; c < kImageFeatureCount; ++c) {
        double mean = 0.0;
        for (const auto& r : raw) mean += r[c];
        mean /= n;
        double ss = 0.0;
        for (const auto& r : raw) ss += (r[c] - mean) * (r[c] - mean);
        const double sd = std::sqrt(ss / n);
        model.feature_mean[c] = mean;
        model.feature_scale[c] = sd < 1e-12 ? 1.0 : sd;
    }
    std::vector<std::vector<double>> xs;
    xs.reserve(raw.size());
    for (const auto& r : raw) xs.push_back(model.standardized(r));

    constexpr std::size_t stride = kImageFeatureCount + 1;
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> init(0.0, 0.01);
    model.params.assign(num_classes * stride, 0.0);
    for (std::size_t k = 0; k < num_classes; ++k)
        for (std::size_t c = 0; c < kImageFeatureCount; ++c) model.params[k * stride + c] = init(rng);

    AdamState adam(model.params.size(), AdamConfig{.lr = opt.lr});
    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
        const auto batches = balanced_batches(labels, opt.batch_size, rng());
        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (const auto& batch : batches) {
            std::vector<double> grad(model.params.size(), 0.0);
            for (std::size_t idx : batch) {
                const LossValue lv = scce_loss(model.logits(xs[idx]), labels[idx]);
                loss_sum += lv.loss;
                for (std::size_t k = 0; k < num_classes; ++k) {
                    for (std::size_t c = 0; c < kImageFeatureCount; ++c) grad[k * stride + c] += lv.grad[k] * xs[idx][c];
                    grad[k * stride + kImageFeatureCount] += lv.grad[k];
                }
            }
            for (double& g : grad) g /= static_cast<double>(batch.size());
            adam_step(model.params, grad, adam);
            seen += batch.size();
        }
        res.epoch_loss.push_back(loss_sum / static_cast<double>(seen));
    }
    return res;
}

}  // namespace otbench
