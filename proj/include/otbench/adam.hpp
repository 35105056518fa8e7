#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "otbench/error.hpp"

namespace otbench {

using ParamVector = std::vector<double>;

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig cfg;
    std::vector<double> m;
    std::vector<double> v;
    std::size_t t = 0;

    AdamState() = default;
    AdamState(std::size_t n, AdamConfig c = {}) : cfg(c), m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update, in place.
inline void adam_step(ParamVector& params, std::span<const double> grads, AdamState& state)
{
    detail::require(params.size() == grads.size(), "adam_step: parameter/gradient length mismatch");
    detail::require(state.m.size() == params.size() && state.v.size() == params.size(),
                    "adam_step: optimizer state length mismatch");
    for (double g : grads)
        if (!std::isfinite(g)) throw TrainingError("adam_step: non-finite gradient");

    const auto& c = state.cfg;
    ++state.t;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * grads[i];
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
}

}  // namespace otbench
