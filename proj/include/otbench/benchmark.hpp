#pragma once

// Five-fold benchmark loops for image classification and lesion
// segmentation over pluggable models.
//
// Per fold: the training split is augmented (originals plus six
// derivatives each), the validation split never is; the model is fitted on
// the training split and scored on the validation split. Folds run
// concurrently when allowed; each owns its RNG stream (derived from the
// master seed and the fold index) and its model, and results are merged in
// fold order, so reports do not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "otbench/augment.hpp"
#include "otbench/dataset.hpp"
#include "otbench/io.hpp"
#include "otbench/metrics.hpp"
#include "otbench/models.hpp"
#include "otbench/pipeline.hpp"
#include "otbench/report.hpp"

namespace otbench {

enum class Task { classify, segment };

inline std::string to_string(Task t) { return t == Task::classify ? "classify" : "segment"; }

struct BenchmarkConfig {
    Task task = Task::classify;
    SegLoss loss = SegLoss::dice;
    std::size_t batch_size = 32;
    double lr = 1e-4;
    std::size_t epochs = 200;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    std::string model = "baseline";
    double threshold = 0.5;
    bool augment = true;
    bool zoom = false;
    bool preprocess = true;
    PreprocessConfig pipeline{};
    std::size_t threads = 0;  ///< 0: OTBENCH_THREADS, else hardware concurrency
    bool record_timestamps = false;

    ordered_json to_json() const
    {
        ordered_json j;
        j["task"] = to_string(task);
        j["model"] = model;
        if (task == Task::segment) {
            j["loss"] = to_string(loss);
            j["threshold"] = threshold;
        } else {
            j["loss"] = "sparse_categorical_crossentropy";
        }
        j["optimizer"] = "adam";
        j["batch_size"] = batch_size;
        j["lr"] = lr;
        j["epochs"] = epochs;
        j["folds"] = folds;
        j["seed"] = seed;
        j["augment"] = augment;
        j["zoom"] = zoom;
        ordered_json pre;
        pre["enabled"] = preprocess;
        pre["stages"] = pipeline.stage_names();
        pre["background_window"] = pipeline.background_window;
        pre["gaussian_window"] = pipeline.gaussian_window;
        pre["gaussian_sigma"] = pipeline.effective_sigma();
        pre["clahe"] = {{"clip_limit", pipeline.clahe.clip_limit},
                        {"tile_rows", pipeline.clahe.tile_rows},
                        {"tile_cols", pipeline.clahe.tile_cols},
                        {"bins", pipeline.clahe.bins}};
        if (pipeline.denoiser == Denoiser::nlmd)
            pre["nlmd"] = {{"search_radius", pipeline.nlmd.search_radius},
                           {"patch_radius", pipeline.nlmd.patch_radius},
                           {"strength", pipeline.nlmd.strength}};
        j["preprocess"] = pre;
        return j;
    }
};

/// One dataset entry in memory.
struct DatasetItem {
    std::string id;
    RgbImage image;
    ClassLabel label = ClassLabel::healthy;
    LesionType lesion_type = LesionType::none;
    std::optional<BinaryMask> mask;
};

/// A preprocessed sample as seen by models. `label` is 0 = healthy,
/// 1 = diseased.
struct PreparedSample {
    std::string id;
    ImagePlane plane;
    std::size_t label = 0;
    std::optional<BinaryMask> mask;
};

class ClassifierModel {
public:
    virtual ~ClassifierModel() = default;
    virtual void fit(const std::vector<PreparedSample>& train, std::uint64_t seed) = 0;
    virtual std::size_t predict(const PreparedSample& s) const = 0;
    virtual ordered_json fold_info() const { return ordered_json::object(); }
};

class SegmenterModel {
public:
    virtual ~SegmenterModel() = default;
    virtual void fit(const std::vector<PreparedSample>& train, const std::vector<PreparedSample>& validation,
                     std::uint64_t seed) = 0;
    virtual BinaryMask predict(const PreparedSample& s) const = 0;
    virtual ordered_json fold_info() const { return ordered_json::object(); }
};

using ClassifierFactory = std::function<std::unique_ptr<ClassifierModel>()>;
using SegmenterFactory = std::function<std::unique_ptr<SegmenterModel>()>;

// ---------------------------------------------------------------------------
// built-in models

/// Softmax regression over pooled image statistics.
class BaselineClassifier final : public ClassifierModel {
public:
    explicit BaselineClassifier(ClassifierTrainOptions opt) : opt_(opt) {}

    void fit(const std::vector<PreparedSample>& train, std::uint64_t seed) override
    {
        std::vector<ImagePlane> planes;
        std::vector<std::size_t> labels;
        for (const auto& s : train) {
            planes.push_back(s.plane);
            labels.push_back(s.label);
        }
        ClassifierTrainOptions o = opt_;
        o.seed = seed;
        auto res = train_image_classifier(planes, labels, o);
        model_ = std::move(res.model);
        final_loss_ = res.epoch_loss.back();
    }

    std::size_t predict(const PreparedSample& s) const override { return predict_label(model_, s.plane).label; }

    ordered_json fold_info() const override { return {{"final_train_loss", final_loss_}}; }

    const ImageClassifierModel& model() const noexcept { return model_; }

private:
    ClassifierTrainOptions opt_;
    ImageClassifierModel model_;
    double final_loss_ = 0.0;
};

/// Returns the ground-truth label; a harness smoke test.
class OracleClassifier final : public ClassifierModel {
public:
    void fit(const std::vector<PreparedSample>&, std::uint64_t) override {}
    std::size_t predict(const PreparedSample& s) const override { return s.label; }
};

/// Always predicts the most frequent training label (lower label on ties).
class MajorityClassifier final : public ClassifierModel {
public:
    void fit(const std::vector<PreparedSample>& train, std::uint64_t) override
    {
        std::map<std::size_t, std::size_t> counts;
        for (const auto& s : train) ++counts[s.label];
        std::size_t best = 0;
        for (const auto& [label, n] : counts)
            if (n > best) {
                best = n;
                label_ = label;
            }
    }
    std::size_t predict(const PreparedSample&) const override { return label_; }
    ordered_json fold_info() const override { return {{"predicted_label", label_}}; }

private:
    std::size_t label_ = 0;
};

/// Logistic pixel model with best-validation-epoch retention.
class BaselineSegmenter final : public SegmenterModel {
public:
    explicit BaselineSegmenter(SegmenterTrainOptions opt) : opt_(opt) {}

    void fit(const std::vector<PreparedSample>& train, const std::vector<PreparedSample>& validation,
             std::uint64_t seed) override
    {
        auto to_pixels = [](const std::vector<PreparedSample>& xs) {
            std::vector<PixelSample> out;
            out.reserve(xs.size());
            for (const auto& s : xs) {
                if (!s.mask) throw ValidationError("segmenter: sample '" + s.id + "' has no mask");
                out.push_back(make_pixel_sample(s.plane, *s.mask));
            }
            return out;
        };
        SegmenterTrainOptions o = opt_;
        o.seed = seed;
        result_ = train_pixel_segmenter(to_pixels(train), o, to_pixels(validation));
    }

    BinaryMask predict(const PreparedSample& s) const override
    {
        return predict_mask(result_.model, s.plane, opt_.threshold);
    }

    ordered_json fold_info() const override
    {
        ordered_json j;
        j["best_epoch"] = result_.best_epoch + 1;
        j["best_validation_dice"] = result_.val_dice.empty() ? 0.0 : result_.val_dice[result_.best_epoch];
        j["final_train_loss"] = result_.epoch_loss.back();
        return j;
    }

    const SegmenterTrainResult& result() const noexcept { return result_; }

private:
    SegmenterTrainOptions opt_;
    SegmenterTrainResult result_;
};

/// Returns the ground-truth mask.
class OracleSegmenter final : public SegmenterModel {
public:
    void fit(const std::vector<PreparedSample>&, const std::vector<PreparedSample>&, std::uint64_t) override {}
    BinaryMask predict(const PreparedSample& s) const override
    {
        if (!s.mask) throw ValidationError("oracle segmenter: sample '" + s.id + "' has no mask");
        return *s.mask;
    }
};

inline ClassifierFactory classifier_factory(const BenchmarkConfig& cfg)
{
    if (cfg.model == "baseline") {
        ClassifierTrainOptions o{cfg.epochs, cfg.batch_size, cfg.lr, cfg.seed};
        return [o] { return std::make_unique<BaselineClassifier>(o); };
    }
    if (cfg.model == "oracle") return [] { return std::make_unique<OracleClassifier>(); };
    if (cfg.model == "majority") return [] { return std::make_unique<MajorityClassifier>(); };
    throw ValidationError("unknown classifier model '" + cfg.model + "' (expected baseline|oracle|majority)");
}

inline SegmenterFactory segmenter_factory(const BenchmarkConfig& cfg)
{
    if (cfg.model == "baseline") {
        SegmenterTrainOptions o;
        o.loss = cfg.loss;
        o.epochs = cfg.epochs;
        o.batch_size = cfg.batch_size;
        o.lr = cfg.lr;
        o.threshold = cfg.threshold;
        return [o] { return std::make_unique<BaselineSegmenter>(o); };
    }
    if (cfg.model == "oracle") return [] { return std::make_unique<OracleSegmenter>(); };
    throw ValidationError("unknown segmenter model '" + cfg.model + "' (expected baseline|oracle)");
}

// ---------------------------------------------------------------------------
// data preparation

/// Reads every image (and mask, when present) referenced by the manifest.
inline std::vector<DatasetItem> load_items(const DatasetManifest& m)
{
    std::vector<DatasetItem> items;
    items.reserve(m.size());
    for (const auto& r : m.records) {
        DatasetItem it;
        it.id = r.image_path;
        it.image = io::read_rgb(m.resolve(r.image_path));
        it.label = r.label;
        it.lesion_type = r.lesion_type;
        if (r.mask_path) {
            it.mask = io::read_mask(m.resolve(*r.mask_path));
            if (!it.mask->same_shape(it.image.red))
                throw ValidationError("mask dimensions differ from image for " + r.image_path);
        }
        items.push_back(std::move(it));
    }
    return items;
}

inline PreparedSample prepare_sample(const DatasetItem& it, const BenchmarkConfig& cfg)
{
    PreparedSample s;
    s.id = it.id;
    s.plane = cfg.preprocess ? preprocess(it.image, cfg.pipeline) : it.image.green;
    s.label = static_cast<std::size_t>(it.label);
    s.mask = it.mask;
    return s;
}

/// Originals first, then each original's derivatives in augment_pair order.
inline std::vector<PreparedSample> augment_split(const std::vector<PreparedSample>& split, bool zoom)
{
    std::vector<PreparedSample> out = split;
    for (const auto& s : split) {
        for (auto& d : augment_pair(SamplePair(s.plane, s.mask), zoom)) {
            PreparedSample a;
            a.id = s.id + file_suffix(d.tag);
            a.plane = std::move(d.pair.image);
            a.mask = std::move(d.pair.mask);
            a.label = s.label;
            out.push_back(std::move(a));
        }
    }
    return out;
}

inline std::size_t resolve_thread_count(std::size_t requested, std::size_t folds)
{
    std::size_t n = requested;
    if (n == 0) {
        if (const char* env = std::getenv("OTBENCH_THREADS")) {
            try {
                n = static_cast<std::size_t>(std::stoul(env));
            } catch (const std::exception&) {
                throw ValidationError(std::string("OTBENCH_THREADS is not a number: ") + env);
            }
        }
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return std::clamp<std::size_t>(n, 1, folds);
}

namespace detail {

struct FoldOutcome {
    FoldSummary summary;
    ordered_json info;
};

/// Runs fold_fn(0..k-1) on up to `threads` workers. The first failing fold
/// (lowest index) is rethrown with its 1-based index in the message.
inline std::vector<FoldOutcome> run_folds(std::size_t k, std::size_t threads,
                                          const std::function<FoldOutcome(std::size_t)>& fold_fn)
{
    std::vector<std::optional<FoldOutcome>> results(k);
    std::vector<std::exception_ptr> errors(k);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t f = next++; f < k; f = next++) {
            try {
                results[f] = fold_fn(f);
            } catch (...) {
                errors[f] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (std::size_t f = 0; f < k; ++f) {
        if (!errors[f]) continue;
        const std::string where = "fold " + std::to_string(f + 1) + ": ";
        try {
            std::rethrow_exception(errors[f]);
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        } catch (const std::exception& e) {
            throw TrainingError(where + e.what());
        }
    }
    std::vector<FoldOutcome> out;
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
}

inline std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& xs, const std::vector<std::size_t>& idx)
{
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(xs[i]);
    return out;
}

inline BenchmarkReport assemble(const BenchmarkConfig& cfg, const std::vector<std::string>& metrics,
                                std::vector<FoldOutcome> outcomes, const std::string& started,
                                const FoldPlan& plan)
{
    BenchmarkReport r;
    r.config = cfg.to_json();
    r.metric_names = metrics;
    auto folds_meta = ordered_json::array();
    for (auto& o : outcomes) {
        r.folds.push_back(std::move(o.summary));
        folds_meta.push_back(std::move(o.info));
    }
    r.finalize();
    r.metadata["seed"] = cfg.seed;
    r.metadata["code_version"] = kCodeVersion;
    r.metadata["preprocess_stages"] = cfg.preprocess ? ordered_json(cfg.pipeline.stage_names()) : ordered_json::array();
    r.metadata["augmentation"] = {{"applied_to", cfg.augment ? "train" : "none"}, {"validation_augmented", false}};
    r.metadata["fold_assignment"] = plan.fold_of;
    r.metadata["folds"] = folds_meta;
    if (cfg.record_timestamps) {
        r.metadata["started_at"] = started;
        r.metadata["finished_at"] = utc_now();
    }
    return r;
}

inline void check_common(const BenchmarkConfig& cfg)
{
    require(cfg.folds >= 2, "benchmark: need at least 2 folds");
    require(cfg.epochs >= 1, "benchmark: epochs must be >= 1");
    require(cfg.batch_size >= 1, "benchmark: batch size must be >= 1");
    require(cfg.lr > 0.0, "benchmark: learning rate must be > 0");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// benchmark loops

inline BenchmarkReport run_classification_benchmark(const BenchmarkConfig& cfg, const std::vector<DatasetItem>& items,
                                                    ClassifierFactory factory = {})
{
    detail::check_common(cfg);
    if (!factory) factory = classifier_factory(cfg);
    const std::string started = detail::utc_now();

    std::vector<int> strata;
    for (const auto& it : items) strata.push_back(static_cast<int>(it.label));
    const FoldPlan plan = stratified_kfold(strata, cfg.folds, cfg.seed);

    std::vector<PreparedSample> prepared;
    prepared.reserve(items.size());
    for (const auto& it : items) prepared.push_back(prepare_sample(it, cfg));

    auto fold_fn = [&](std::size_t f) {
        const auto train = detail::pick(prepared, plan.train_indices(f));
        const auto val = detail::pick(prepared, plan.validation_indices(f));
        const auto train_aug = cfg.augment ? augment_split(train, cfg.zoom) : train;

        const std::uint64_t seed = fold_seed(cfg.seed, f);
        auto model = factory();
        model->fit(train_aug, seed);

        std::vector<std::size_t> pred, truth;
        for (const auto& s : val) {
            pred.push_back(model->predict(s));
            truth.push_back(s.label);
        }
        const std::vector<std::size_t> classes{0, 1};
        const ClassificationScores sc = classification_scores(pred, truth, classes, std::size_t{1});

        detail::FoldOutcome out;
        out.summary.fold = f + 1;
        out.summary.set(metric_names::accuracy, sc.accuracy);
        out.summary.set(metric_names::precision, sc.precision);
        out.summary.set(metric_names::recall, sc.recall);
        out.summary.set(metric_names::f1, sc.f1);
        out.info["fold"] = f + 1;
        out.info["fold_seed"] = seed;
        out.info["train_count"] = train.size();
        out.info["train_augmented_count"] = train_aug.size();
        out.info["validation_count"] = val.size();
        out.info["degenerate_metrics"] = sc.degenerate;
        out.info["model"] = model->fold_info();
        return out;
    };

    auto outcomes = detail::run_folds(cfg.folds, resolve_thread_count(cfg.threads, cfg.folds), fold_fn);
    return detail::assemble(cfg,
                            {metric_names::accuracy, metric_names::precision, metric_names::recall, metric_names::f1},
                            std::move(outcomes), started, plan);
}

/// Uses the diseased records only; each must carry a mask.
inline BenchmarkReport run_segmentation_benchmark(const BenchmarkConfig& cfg, const std::vector<DatasetItem>& items,
                                                  SegmenterFactory factory = {})
{
    detail::check_common(cfg);
    if (!factory) factory = segmenter_factory(cfg);
    const std::string started = detail::utc_now();

    std::vector<PreparedSample> prepared;
    for (const auto& it : items) {
        if (it.label != ClassLabel::diseased) continue;
        if (!it.mask) throw ValidationError("segmentation benchmark: '" + it.id + "' has no mask");
        prepared.push_back(prepare_sample(it, cfg));
    }
    detail::require(!prepared.empty(), "segmentation benchmark: no diseased records with masks");

    const std::vector<int> strata(prepared.size(), 1);
    const FoldPlan plan = stratified_kfold(strata, cfg.folds, cfg.seed);

    auto fold_fn = [&](std::size_t f) {
        const auto train = detail::pick(prepared, plan.train_indices(f));
        const auto val = detail::pick(prepared, plan.validation_indices(f));
        const auto train_aug = cfg.augment ? augment_split(train, cfg.zoom) : train;

        const std::uint64_t seed = fold_seed(cfg.seed, f);
        auto model = factory();
        model->fit(train_aug, val, seed);

        double acc = 0.0, dice = 0.0, iou = 0.0;
        for (const auto& s : val) {
            const BinaryMask pred = model->predict(s);
            acc += pixel_accuracy(pred, *s.mask);
            dice += dice_score(pred, *s.mask);
            iou += iou_score(pred, *s.mask);
        }
        const auto n = static_cast<double>(val.size());

        detail::FoldOutcome out;
        out.summary.fold = f + 1;
        out.summary.set(metric_names::pixel_accuracy, acc / n);
        out.summary.set(metric_names::dice, dice / n);
        out.summary.set(metric_names::iou, iou / n);
        out.info["fold"] = f + 1;
        out.info["fold_seed"] = seed;
        out.info["train_count"] = train.size();
        out.info["train_augmented_count"] = train_aug.size();
        out.info["validation_count"] = val.size();
        out.info["model"] = model->fold_info();
        return out;
    };

    auto outcomes = detail::run_folds(cfg.folds, resolve_thread_count(cfg.threads, cfg.folds), fold_fn);
    // fold_assignment indexes the diseased subset in manifest order
    return detail::assemble(cfg, {metric_names::pixel_accuracy, metric_names::dice, metric_names::iou},
                            std::move(outcomes), started, plan);
}

inline BenchmarkReport run_benchmark(const BenchmarkConfig& cfg, const DatasetManifest& m)
{
    const auto items = load_items(m);
    return cfg.task == Task::classify ? run_classification_benchmark(cfg, items)
                                      : run_segmentation_benchmark(cfg, items);
}

}  // namespace otbench
