#pragma once

// Differentiable training losses. Each returns the scalar loss and its
// gradient with respect to the prediction vector (probabilities or logits).
// Sums run in index order so results are reproducible bit for bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "otbench/error.hpp"
#include "otbench/image.hpp"

namespace otbench {

struct LossValue {
    double loss = 0.0;
    std::vector<double> grad;
};

enum class SegLoss { dice, jaccard, bce };

inline std::string to_string(SegLoss l)
{
    switch (l) {
    case SegLoss::dice: return "dice";
    case SegLoss::jaccard: return "jaccard";
    case SegLoss::bce: return "bce";
    }
    return "?";
}

inline SegLoss parse_seg_loss(const std::string& s)
{
    if (s == "dice") return SegLoss::dice;
    if (s == "jaccard") return SegLoss::jaccard;
    if (s == "bce") return SegLoss::bce;
    throw ValidationError("unknown loss '" + s + "' (expected dice|jaccard|bce)");
}

inline constexpr double kDefaultSmoothing = 1.0;

namespace detail {

inline void check_loss_inputs(std::span<const double> p, std::span<const std::uint8_t> g, double eps)
{
    require(p.size() == g.size(), "loss: prediction/target length mismatch");
    require(eps > 0.0, "loss: smoothing must be > 0");
}

}  // namespace detail

/// L = 1 - (2 sum(p g) + eps) / (sum p + sum g + eps)
inline LossValue soft_dice_loss(std::span<const double> p, std::span<const std::uint8_t> g,
                                double eps = kDefaultSmoothing)
{
    detail::check_loss_inputs(p, g, eps);
    double inter = 0.0, sp = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i] ? 1.0 : 0.0;
        inter += p[i] * gi;
        sp += p[i];
        sg += gi;
    }
    const double num = 2.0 * inter + eps, den = sp + sg + eps;
    LossValue out{1.0 - num / den, std::vector<double>(p.size())};
    const double den2 = den * den;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i] ? 1.0 : 0.0;
        out.grad[i] = -(2.0 * gi * den - num) / den2;
    }
    return out;
}

inline LossValue soft_dice_loss(std::span<const double> p, const BinaryMask& g, double eps = kDefaultSmoothing)
{
    return soft_dice_loss(p, g.bits(), eps);
}

/// L = 1 - (sum(p g) + eps) / (sum p + sum g - sum(p g) + eps)
inline LossValue soft_jaccard_loss(std::span<const double> p, std::span<const std::uint8_t> g,
                                   double eps = kDefaultSmoothing)
{
    detail::check_loss_inputs(p, g, eps);
    double inter = 0.0, sp = 0.0, sg = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i] ? 1.0 : 0.0;
        inter += p[i] * gi;
        sp += p[i];
        sg += gi;
    }
    const double num = inter + eps, den = sp + sg - inter + eps;
    LossValue out{1.0 - num / den, std::vector<double>(p.size())};
    const double den2 = den * den;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = g[i] ? 1.0 : 0.0;
        // d(num)/dp = g, d(den)/dp = 1 - g
        out.grad[i] = -(gi * den - num * (1.0 - gi)) / den2;
    }
    return out;
}

inline LossValue soft_jaccard_loss(std::span<const double> p, const BinaryMask& g, double eps = kDefaultSmoothing)
{
    return soft_jaccard_loss(p, g.bits(), eps);
}

/// Mean binary cross-entropy over pixels. Probabilities are clamped away
/// from 0 and 1 by 1e-12.
inline LossValue binary_cross_entropy(std::span<const double> p, std::span<const std::uint8_t> g)
{
    detail::require(p.size() == g.size(), "loss: prediction/target length mismatch");
    detail::require(!p.empty(), "loss: empty prediction");
    constexpr double lo = 1e-12;
    const auto n = static_cast<double>(p.size());
    LossValue out{0.0, std::vector<double>(p.size())};
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double q = std::clamp(p[i], lo, 1.0 - lo);
        if (g[i]) {
            out.loss -= std::log(q);
            out.grad[i] = -1.0 / (q * n);
        } else {
            out.loss -= std::log(1.0 - q);
            out.grad[i] = 1.0 / ((1.0 - q) * n);
        }
    }
    out.loss /= n;
    return out;
}

inline LossValue segmentation_loss(SegLoss kind, std::span<const double> p, std::span<const std::uint8_t> g,
                                   double eps = kDefaultSmoothing)
{
    switch (kind) {
    case SegLoss::dice: return soft_dice_loss(p, g, eps);
    case SegLoss::jaccard: return soft_jaccard_loss(p, g, eps);
    case SegLoss::bce: return binary_cross_entropy(p, g);
    }
    throw ValidationError("segmentation_loss: unknown kind");
}

/// Numerically stable softmax.
inline std::vector<double> softmax(std::span<const double> logits)
{
    detail::require(!logits.empty(), "softmax: empty logits");
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

/// Sparse categorical cross-entropy: -log softmax(logits)[label].
/// Gradient w.r.t. logits is softmax - onehot(label).
inline LossValue scce_loss(std::span<const double> logits, std::size_t label)
{
    detail::require(label < logits.size(), "scce_loss: label out of range");
    // the max term contributes exactly 1; log1p keeps the rest when it is tiny
    const auto top = std::max_element(logits.begin(), logits.end());
    const double m = *top;
    double rest = 0.0;
    for (auto it = logits.begin(); it != logits.end(); ++it)
        if (it != top) rest += std::exp(*it - m);
    LossValue out{(m - logits[label]) + std::log1p(rest), softmax(logits)};
    out.grad[label] -= 1.0;
    return out;
}

}  // namespace otbench
