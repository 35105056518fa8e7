#pragma once

// Classification and segmentation metrics plus fold aggregation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "otbench/error.hpp"
#include "otbench/image.hpp"

namespace otbench {

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// A metric value. `degenerate` marks a zero denominator, in which case the
/// value is 0.
struct Ratio {
    double value = 0.0;
    bool degenerate = false;

    operator double() const noexcept { return value; }
};

namespace detail {

inline Ratio safe_ratio(double num, double den) noexcept
{
    if (den == 0.0) return {0.0, true};
    return {num / den, false};
}

}  // namespace detail

template <typename Label>
ConfusionCounts confusion_counts(const std::vector<Label>& pred, const std::vector<Label>& truth,
                                 const Label& positive)
{
    detail::require(pred.size() == truth.size(), "confusion_counts: prediction/truth length mismatch");
    detail::require(!pred.empty(), "confusion_counts: empty input");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] == positive, t = truth[i] == positive;
        if (p && t) ++c.tp;
        else if (p) ++c.fp;
        else if (t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

inline Ratio precision(const ConfusionCounts& c) noexcept
{
    return detail::safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.fp + c.tp));
}

inline Ratio recall(const ConfusionCounts& c) noexcept
{
    return detail::safe_ratio(static_cast<double>(c.tp), static_cast<double>(c.fn + c.tp));
}

inline Ratio f1_score(const ConfusionCounts& c) noexcept
{
    return detail::safe_ratio(2.0 * static_cast<double>(c.tp), static_cast<double>(c.fp + 2 * c.tp + c.fn));
}

inline Ratio accuracy(const ConfusionCounts& c) noexcept
{
    return detail::safe_ratio(static_cast<double>(c.tn + c.tp), static_cast<double>(c.total()));
}

struct ClassificationScores {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    bool degenerate = false;
};

/// Binary labels reduce to the positive class. With more than two classes,
/// precision/recall/F1 are one-vs-rest per class and macro-averaged, and
/// accuracy is the exact-match rate.
template <typename Label>
ClassificationScores classification_scores(const std::vector<Label>& pred, const std::vector<Label>& truth,
                                           const std::vector<Label>& classes, const Label& positive)
{
    ClassificationScores s;
    const ConfusionCounts pos = confusion_counts(pred, truth, positive);
    s.accuracy = accuracy(pos);
    if (classes.size() <= 2) {
        const Ratio pr = precision(pos), re = recall(pos), f1 = f1_score(pos);
        s.precision = pr;
        s.recall = re;
        s.f1 = f1;
        s.degenerate = pr.degenerate || re.degenerate || f1.degenerate;
        return s;
    }
    for (const Label& c : classes) {
        const ConfusionCounts cc = confusion_counts(pred, truth, c);
        const Ratio pr = precision(cc), re = recall(cc), f1 = f1_score(cc);
        s.precision += pr;
        s.recall += re;
        s.f1 += f1;
        s.degenerate = s.degenerate || pr.degenerate || re.degenerate || f1.degenerate;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
    s.accuracy = static_cast<double>(hits) / static_cast<double>(pred.size());
    const auto n = static_cast<double>(classes.size());
    s.precision /= n;
    s.recall /= n;
    s.f1 /= n;
    return s;
}

// ---------------------------------------------------------------------------
// segmentation

struct OverlapCounts {
    std::size_t intersection = 0, pred = 0, truth = 0, agree = 0, total = 0;
};

inline OverlapCounts overlap_counts(const BinaryMask& pred, const BinaryMask& truth)
{
    detail::require(pred.same_shape(truth), "mask dimension mismatch");
    OverlapCounts o;
    o.total = pred.size();
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i], t = truth[i];
        o.intersection += p && t;
        o.pred += p;
        o.truth += t;
        o.agree += p == t;
    }
    return o;
}

/// 2|X n Y| / (|X| + |Y|); two empty masks score 1.
inline double dice_score(const BinaryMask& pred, const BinaryMask& truth)
{
    const OverlapCounts o = overlap_counts(pred, truth);
    if (o.pred + o.truth == 0) return 1.0;
    return 2.0 * static_cast<double>(o.intersection) / static_cast<double>(o.pred + o.truth);
}

/// |X n Y| / |X u Y|; two empty masks score 1.
inline double iou_score(const BinaryMask& pred, const BinaryMask& truth)
{
    const OverlapCounts o = overlap_counts(pred, truth);
    const std::size_t uni = o.pred + o.truth - o.intersection;
    if (uni == 0) return 1.0;
    return static_cast<double>(o.intersection) / static_cast<double>(uni);
}

inline double pixel_accuracy(const BinaryMask& pred, const BinaryMask& truth)
{
    const OverlapCounts o = overlap_counts(pred, truth);
    return static_cast<double>(o.agree) / static_cast<double>(o.total);
}

// ---------------------------------------------------------------------------
// aggregation

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  ///< population standard deviation
};

inline MeanStd aggregate_folds(const std::vector<double>& values)
{
    detail::require(!values.empty(), "aggregate_folds: empty list");
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

/// Canonical lowercase metric names used in reports.
namespace metric_names {
inline constexpr const char* accuracy = "accuracy";
inline constexpr const char* precision = "precision";
inline constexpr const char* recall = "recall";
inline constexpr const char* f1 = "f1";
inline constexpr const char* dice = "dice";
inline constexpr const char* iou = "iou";
inline constexpr const char* pixel_accuracy = "pixel_accuracy";
}  // namespace metric_names

/// One fold's row: metric name -> value, in insertion order.
struct FoldSummary {
    std::size_t fold = 0;
    std::vector<std::pair<std::string, double>> metrics;

    void set(const std::string& name, double v)
    {
        detail::require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "FoldSummary: metric '" + name + "' outside [0,1]");
        for (auto& [k, val] : metrics)
            if (k == name) {
                val = v;
                return;
            }
        metrics.emplace_back(name, v);
    }

    double get(const std::string& name) const
    {
        for (const auto& [k, v] : metrics)
            if (k == name) return v;
        throw ValidationError("FoldSummary: no metric '" + name + "'");
    }
};

}  // namespace otbench
