#pragma once

// Hand-crafted per-pixel and per-image features for the linear baselines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "otbench/filters.hpp"
#include "otbench/image.hpp"

namespace otbench {

/// Row-major feature matrix: one row per sample, `cols` features each.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double at(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
    const double* row(std::size_t r) const noexcept { return &data[r * cols]; }
};

inline constexpr std::size_t kPixelFeatureCount = 4;
inline constexpr std::size_t kPixelFeatureWindow = 5;

/// intensity, local mean, local std, Sobel magnitude; before standardisation.
inline FeatureMatrix pixel_features_raw(const ImagePlane& img, std::size_t window = kPixelFeatureWindow)
{
    const std::size_t w = img.width(), h = img.height();
    const ImagePlane local_mean = mean_filter(img, window);
    const auto r = static_cast<std::ptrdiff_t>(window / 2);

    FeatureMatrix f{img.size(), kPixelFeatureCount, std::vector<double>(img.size() * kPixelFeatureCount)};
    for (std::size_t y = 0; y < h; ++y) {
        const auto yi = static_cast<std::ptrdiff_t>(y);
        for (std::size_t x = 0; x < w; ++x) {
            const auto xi = static_cast<std::ptrdiff_t>(x);
            const std::size_t i = y * w + x;
            const double m = local_mean.at(y, x);

            double var = 0.0;
            for (std::ptrdiff_t dy = -r; dy <= r; ++dy)
                for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
                    const double d = img.at(reflect_index(yi + dy, h), reflect_index(xi + dx, w)) - m;
                    var += d * d;
                }
            var /= static_cast<double>(window * window);

            auto px = [&](std::ptrdiff_t dy, std::ptrdiff_t dx) {
                return img.at(reflect_index(yi + dy, h), reflect_index(xi + dx, w));
            };
            const double gx = (px(-1, 1) + 2.0 * px(0, 1) + px(1, 1)) - (px(-1, -1) + 2.0 * px(0, -1) + px(1, -1));
            const double gy = (px(1, -1) + 2.0 * px(1, 0) + px(1, 1)) - (px(-1, -1) + 2.0 * px(-1, 0) + px(-1, 1));

            f.at(i, 0) = img.at(y, x);
            f.at(i, 1) = m;
            f.at(i, 2) = std::sqrt(var);
            f.at(i, 3) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return f;
}

/// Z-scores each column in place. Columns whose spread is below 1e-12 are
/// set to zero.
inline void standardize_columns(FeatureMatrix& f)
{
    const auto n = static_cast<double>(f.rows);
    for (std::size_t c = 0; c < f.cols; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < f.rows; ++r) mean += f.at(r, c);
        mean /= n;
        double ss = 0.0;
        for (std::size_t r = 0; r < f.rows; ++r) ss += (f.at(r, c) - mean) * (f.at(r, c) - mean);
        const double sd = std::sqrt(ss / n);
        for (std::size_t r = 0; r < f.rows; ++r) f.at(r, c) = sd < 1e-12 ? 0.0 : (f.at(r, c) - mean) / sd;
    }
}

inline FeatureMatrix extract_pixel_features(const ImagePlane& img, std::size_t window = kPixelFeatureWindow)
{
    FeatureMatrix f = pixel_features_raw(img, window);
    standardize_columns(f);
    return f;
}

inline constexpr std::size_t kImageFeatureCount = 5;

/// Linear-interpolated quantile of an already sorted sequence.
inline double sorted_quantile(const std::vector<double>& sorted, double q)
{
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Globally pooled descriptor: mean, std, 10th/50th/90th percentiles.
inline std::vector<double> image_features(const ImagePlane& img)
{
    std::vector<double> sorted(img.pixels().begin(), img.pixels().end());
    std::sort(sorted.begin(), sorted.end());
    return {plane_mean(img), plane_std(img), sorted_quantile(sorted, 0.1), sorted_quantile(sorted, 0.5),
            sorted_quantile(sorted, 0.9)};
}

}  // namespace otbench
