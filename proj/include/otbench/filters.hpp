#pragma once

// Channel operations, neighbourhood filters and intensity normalisation on
// ImagePlane. Every neighbourhood filter uses reflect padding (mirror about
// the edge pixel, edge not repeated: ... c b | a b c ... ).
//
// Separable passes accumulate symmetric tap pairs as w_d * (x[c-d] + x[c+d]),
// so filtering a flipped plane gives the flipped result bit for bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <tuple>
#include <vector>

#include "otbench/error.hpp"
#include "otbench/image.hpp"

namespace otbench {

/// Maps an out-of-range index into [0, n) by mirroring about the edge
/// pixels. Works for any offset, including windows wider than the image.
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) noexcept
{
    if (n == 1) return 0;
    const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
    i %= period;
    if (i < 0) i += period;
    if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
    return static_cast<std::size_t>(i);
}

/// Square k x k filter weights, row-major.
class Kernel {
public:
    Kernel(std::size_t k, std::vector<double> weights) : k_(k), weights_(std::move(weights))
    {
        detail::require(k % 2 == 1, "Kernel: size must be odd");
        detail::require(weights_.size() == k * k, "Kernel: weight count != k*k");
        double sum = 0.0;
        for (double w : weights_) {
            detail::require(w >= 0.0 && std::isfinite(w), "Kernel: weights must be finite and >= 0");
            sum += w;
        }
        detail::require(std::abs(sum - 1.0) <= 1e-9, "Kernel: weights must sum to 1");
    }

    std::size_t size() const noexcept { return k_; }
    std::size_t radius() const noexcept { return k_ / 2; }
    double at(std::size_t i, std::size_t j) const noexcept { return weights_[i * k_ + j]; }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    std::size_t k_;
    std::vector<double> weights_;
};

struct NlmdParams {
    std::size_t search_radius = 10;
    std::size_t patch_radius = 3;
    double strength = 0.1;  ///< h in exp(-d^2 / h^2)

    void validate() const
    {
        detail::require(search_radius >= patch_radius, "NLMD: search_radius must be >= patch_radius");
        detail::require(strength > 0.0 && std::isfinite(strength), "NLMD: strength must be > 0");
    }
};

// ---------------------------------------------------------------------------
// channel ops

inline std::tuple<ImagePlane, ImagePlane, ImagePlane> split_channels(const RgbImage& img)
{
    return {img.red, img.green, img.blue};
}

inline RgbImage merge_channels(ImagePlane r, ImagePlane g, ImagePlane b)
{
    return RgbImage(std::move(r), std::move(g), std::move(b));
}

/// 1 - x per pixel. Applying it twice returns the input exactly whenever the
/// intensities are multiples of 2^-53 (any 8-bit or 16-bit decode scaled by
/// a power of two qualifies); otherwise to within one ulp.
inline ImagePlane invert_channel(const ImagePlane& p)
{
    ImagePlane out = p;
    for (double& v : out.pixels()) v = 1.0 - v;
    return out;
}

inline ImagePlane clamp01(ImagePlane p)
{
    for (double& v : p.pixels()) v = std::clamp(v, 0.0, 1.0);
    return p;
}

/// Arithmetic mean, accumulated in row-major order.
inline double plane_mean(const ImagePlane& p) noexcept
{
    double s = 0.0;
    for (double v : p.pixels()) s += v;
    return s / static_cast<double>(p.size());
}

/// Population standard deviation.
inline double plane_std(const ImagePlane& p) noexcept
{
    const double m = plane_mean(p);
    double s = 0.0;
    for (double v : p.pixels()) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(p.size()));
}

inline double plane_max(const ImagePlane& p) noexcept
{
    return *std::max_element(p.pixels().begin(), p.pixels().end());
}

// ---------------------------------------------------------------------------
// separable convolution

namespace detail {

// taps[0] is the centre weight, taps[d] the weight at offset +-d.
inline ImagePlane convolve_rows(const ImagePlane& p, const std::vector<double>& taps)
{
    const std::size_t w = p.width(), h = p.height();
    const auto r = static_cast<std::ptrdiff_t>(taps.size() - 1);
    ImagePlane out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const auto xi = static_cast<std::ptrdiff_t>(x);
            double acc = taps[0] * p.at(y, x);
            for (std::ptrdiff_t d = 1; d <= r; ++d)
                acc += taps[d] * (p.at(y, reflect_index(xi - d, w)) + p.at(y, reflect_index(xi + d, w)));
            out.at(y, x) = acc;
        }
    }
    return out;
}

inline ImagePlane convolve_cols(const ImagePlane& p, const std::vector<double>& taps)
{
    const std::size_t w = p.width(), h = p.height();
    const auto r = static_cast<std::ptrdiff_t>(taps.size() - 1);
    ImagePlane out(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        const auto yi = static_cast<std::ptrdiff_t>(y);
        for (std::size_t x = 0; x < w; ++x) {
            double acc = taps[0] * p.at(y, x);
            for (std::ptrdiff_t d = 1; d <= r; ++d)
                acc += taps[d] * (p.at(reflect_index(yi - d, h), x) + p.at(reflect_index(yi + d, h), x));
            out.at(y, x) = acc;
        }
    }
    return out;
}

inline void require_odd_window(std::size_t k, const char* who)
{
    require(k >= 1 && k % 2 == 1, std::string(who) + ": window size must be odd and >= 1");
}

// Normalised half-profile of a centred 1-D Gaussian: taps[d] for d = 0..r.
inline std::vector<double> gaussian_taps(double sigma, std::size_t k)
{
    const std::size_t r = k / 2;
    std::vector<double> taps(r + 1);
    double sum = 0.0;
    for (std::size_t d = 0; d <= r; ++d) {
        const double dd = static_cast<double>(d);
        taps[d] = std::exp(-(dd * dd) / (2.0 * sigma * sigma));
        sum += d == 0 ? taps[d] : 2.0 * taps[d];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

}  // namespace detail

/// k x k box average under reflect padding.
inline ImagePlane mean_filter(const ImagePlane& p, std::size_t k)
{
    detail::require_odd_window(k, "mean_filter");
    const std::vector<double> ones(k / 2 + 1, 1.0);
    ImagePlane out = detail::convolve_cols(detail::convolve_rows(p, ones), ones);
    const double area = static_cast<double>(k * k);
    for (double& v : out.pixels()) v /= area;
    return out;
}

/// Centred discrete Gaussian, offsets i - (k-1)/2, renormalised to unit sum.
inline Kernel gaussian_kernel(double sigma, std::size_t k)
{
    detail::require(sigma > 0.0 && std::isfinite(sigma), "gaussian_kernel: sigma must be > 0");
    detail::require_odd_window(k, "gaussian_kernel");
    const auto c = static_cast<double>(k - 1) / 2.0;
    std::vector<double> w(k * k);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double di = static_cast<double>(i) - c, dj = static_cast<double>(j) - c;
            w[i * k + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
            sum += w[i * k + j];
        }
    for (double& v : w) v /= sum;
    return Kernel(k, std::move(w));
}

/// sigma = (k-1)/6, so the window spans +-3 sigma. Falls back to 1 for k = 1.
inline double default_gaussian_sigma(std::size_t k) noexcept
{
    return k > 1 ? static_cast<double>(k - 1) / 6.0 : 1.0;
}

/// 2-D Gaussian convolution, evaluated as two separable passes.
inline ImagePlane gaussian_filter(const ImagePlane& p, double sigma, std::size_t k)
{
    detail::require(sigma > 0.0 && std::isfinite(sigma), "gaussian_filter: sigma must be > 0");
    detail::require_odd_window(k, "gaussian_filter");
    const auto taps = detail::gaussian_taps(sigma, k);
    return detail::convolve_cols(detail::convolve_rows(p, taps), taps);
}

/// Background removal by mean-filter subtraction, recentred on the global
/// mean and clamped back into [0,1].
inline ImagePlane illumination_equalize(const ImagePlane& p, std::size_t k)
{
    detail::require_odd_window(k, "illumination_equalize");
    const ImagePlane background = mean_filter(p, k);
    const double u = plane_mean(p);
    ImagePlane out(p.width(), p.height());
    for (std::size_t i = 0; i < p.size(); ++i)
        out.pixels()[i] = std::clamp(p.pixels()[i] - background.pixels()[i] + u, 0.0, 1.0);
    return out;
}

/// Non-local means. Patches are compared as summed squared differences with
/// reflect padding; the search window is restricted to in-image pixels and
/// includes the centre pixel itself.
inline ImagePlane nlmd(const ImagePlane& p, const NlmdParams& params)
{
    params.validate();
    const std::size_t w = p.width(), h = p.height();
    const auto pr = static_cast<std::ptrdiff_t>(params.patch_radius);
    const auto sr = static_cast<std::ptrdiff_t>(params.search_radius);
    const std::size_t pw = w + 2 * params.patch_radius, ph = h + 2 * params.patch_radius;

    std::vector<double> padded(pw * ph);
    for (std::size_t y = 0; y < ph; ++y)
        for (std::size_t x = 0; x < pw; ++x)
            padded[y * pw + x] = p.at(reflect_index(static_cast<std::ptrdiff_t>(y) - pr, h),
                                      reflect_index(static_cast<std::ptrdiff_t>(x) - pr, w));

    const double inv_h2 = 1.0 / (params.strength * params.strength);
    auto patch_distance = [&](std::size_t y0, std::size_t x0, std::size_t y1, std::size_t x1) {
        // (y, x) in padded coordinates is the patch's top-left corner
        double d2 = 0.0;
        for (std::ptrdiff_t dy = 0; dy <= 2 * pr; ++dy) {
            const double* a = &padded[(y0 + dy) * pw + x0];
            const double* b = &padded[(y1 + dy) * pw + x1];
            for (std::ptrdiff_t dx = 0; dx <= 2 * pr; ++dx) {
                const double diff = a[dx] - b[dx];
                d2 += diff * diff;
            }
        }
        return d2;
    };

    ImagePlane out(w, h);
    const auto wi = static_cast<std::ptrdiff_t>(w), hi = static_cast<std::ptrdiff_t>(h);
    for (std::ptrdiff_t y = 0; y < hi; ++y) {
        for (std::ptrdiff_t x = 0; x < wi; ++x) {
            double num = 0.0, den = 0.0;
            for (std::ptrdiff_t sy = std::max<std::ptrdiff_t>(0, y - sr); sy <= std::min(hi - 1, y + sr); ++sy) {
                for (std::ptrdiff_t sx = std::max<std::ptrdiff_t>(0, x - sr); sx <= std::min(wi - 1, x + sr); ++sx) {
                    const double d2 = patch_distance(static_cast<std::size_t>(y), static_cast<std::size_t>(x),
                                                     static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
                    const double weight = std::exp(-d2 * inv_h2);
                    num += weight * p.at(static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
                    den += weight;
                }
            }
            out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = num / den;
        }
    }
    return out;
}

/// Divides by the global maximum. Throws DegenerateInputError when the
/// maximum is not positive.
inline ImagePlane normalize_max(const ImagePlane& p)
{
    const double m = plane_max(p);
    if (!(m > 0.0)) throw DegenerateInputError("normalize_max: plane maximum is not positive");
    ImagePlane out = p;
    for (double& v : out.pixels()) v /= m;
    return out;
}

/// Zero mean, unit population standard deviation. The result is not clamped.
inline ImagePlane normalize_gaussian(const ImagePlane& p)
{
    const auto [lo, hi] = std::minmax_element(p.pixels().begin(), p.pixels().end());
    if (*lo == *hi) throw DegenerateInputError("normalize_gaussian: plane has zero variance");
    const double m = plane_mean(p);
    const double s = plane_std(p);
    ImagePlane out = p;
    for (double& v : out.pixels()) v = (v - m) / s;
    return out;
}

}  // namespace otbench
