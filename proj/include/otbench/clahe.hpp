#pragma once

// Contrast limited adaptive histogram equalisation.
//
// The plane is cut into a tile_rows x tile_cols grid. Each tile gets a
// histogram over [0,1]; bins above clip_limit * (tile pixels / bins) are cut
// and the excess is spread evenly over all bins; the normalised cumulative
// histogram is the tile's lookup table. Each pixel's output blends the LUTs
// of the (up to) four nearest tile centres bilinearly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "otbench/error.hpp"
#include "otbench/image.hpp"

namespace otbench {

struct ClaheParams {
    double clip_limit = 2.0;  ///< multiple of the uniform bin height; +inf disables clipping
    std::size_t tile_rows = 8;
    std::size_t tile_cols = 8;
    std::size_t bins = 256;

    void validate() const
    {
        detail::require(tile_rows >= 1 && tile_cols >= 1, "CLAHE: tile grid must be at least 1x1");
        detail::require(bins >= 2, "CLAHE: need at least 2 histogram bins");
        detail::require(clip_limit > 0.0, "CLAHE: clip_limit must be > 0");
    }
};

/// Clip of a transformed value against the ceiling L_clip.
constexpr double clip_transform(double transformed, double ceiling) noexcept
{
    return transformed <= ceiling ? transformed : ceiling;
}

class ClaheMapping {
public:
    ClaheMapping(const ImagePlane& p, const ClaheParams& params) : params_(params)
    {
        params.validate();
        detail::require(params.tile_rows <= p.height() && params.tile_cols <= p.width(),
                        "CLAHE: tile grid larger than image");
        row_start_ = edges(p.height(), params.tile_rows);
        col_start_ = edges(p.width(), params.tile_cols);
        luts_.resize(params.tile_rows * params.tile_cols * params.bins);
        for (std::size_t tr = 0; tr < params.tile_rows; ++tr)
            for (std::size_t tc = 0; tc < params.tile_cols; ++tc) build_lut(p, tr, tc);
    }

    std::size_t bin_of(double v) const noexcept
    {
        const double scaled = std::clamp(v, 0.0, 1.0) * static_cast<double>(params_.bins);
        return std::min(params_.bins - 1, static_cast<std::size_t>(scaled));
    }

    double lut(std::size_t tile_row, std::size_t tile_col, std::size_t bin) const noexcept
    {
        return luts_[(tile_row * params_.tile_cols + tile_col) * params_.bins + bin];
    }

    std::size_t tile_row_of(std::size_t y) const noexcept { return locate(row_start_, y); }
    std::size_t tile_col_of(std::size_t x) const noexcept { return locate(col_start_, x); }

    /// Interpolated output for intensity v at pixel (y, x).
    double apply(std::size_t y, std::size_t x, double v) const noexcept
    {
        const auto [r0, r1, fy] = neighbours(row_start_, y);
        const auto [c0, c1, fx] = neighbours(col_start_, x);
        const std::size_t b = bin_of(v);
        const double top = (1.0 - fx) * lut(r0, c0, b) + fx * lut(r0, c1, b);
        const double bottom = (1.0 - fx) * lut(r1, c0, b) + fx * lut(r1, c1, b);
        return std::clamp((1.0 - fy) * top + fy * bottom, 0.0, 1.0);
    }

    const ClaheParams& params() const noexcept { return params_; }

private:
    struct Blend {
        std::size_t lo, hi;
        double frac;
    };

    static std::vector<std::size_t> edges(std::size_t n, std::size_t tiles)
    {
        std::vector<std::size_t> e(tiles + 1);
        for (std::size_t t = 0; t <= tiles; ++t) e[t] = t * n / tiles;
        return e;
    }

    static double centre(const std::vector<std::size_t>& e, std::size_t t) noexcept
    {
        return (static_cast<double>(e[t]) + static_cast<double>(e[t + 1] - 1)) / 2.0;
    }

    static std::size_t locate(const std::vector<std::size_t>& e, std::size_t i) noexcept
    {
        const auto it = std::upper_bound(e.begin(), e.end(), i);
        return static_cast<std::size_t>(it - e.begin()) - 1;
    }

    static Blend neighbours(const std::vector<std::size_t>& e, std::size_t i) noexcept
    {
        const std::size_t tiles = e.size() - 1;
        const double pos = static_cast<double>(i);
        if (pos <= centre(e, 0)) return {0, 0, 0.0};
        if (pos >= centre(e, tiles - 1)) return {tiles - 1, tiles - 1, 0.0};
        std::size_t t = locate(e, i);
        if (pos < centre(e, t)) --t;
        const double c0 = centre(e, t), c1 = centre(e, t + 1);
        return {t, t + 1, (pos - c0) / (c1 - c0)};
    }

    void build_lut(const ImagePlane& p, std::size_t tr, std::size_t tc)
    {
        const std::size_t bins = params_.bins;
        std::vector<double> hist(bins, 0.0);
        for (std::size_t y = row_start_[tr]; y < row_start_[tr + 1]; ++y)
            for (std::size_t x = col_start_[tc]; x < col_start_[tc + 1]; ++x) hist[bin_of(p.at(y, x))] += 1.0;

        const double n = static_cast<double>((row_start_[tr + 1] - row_start_[tr]) *
                                             (col_start_[tc + 1] - col_start_[tc]));
        if (std::isfinite(params_.clip_limit)) {
            const double ceiling = params_.clip_limit * n / static_cast<double>(bins);
            double excess = 0.0;
            for (double& h : hist) {
                if (h > ceiling) {
                    excess += h - ceiling;
                    h = ceiling;
                }
            }
            const double share = excess / static_cast<double>(bins);
            for (double& h : hist) h += share;
        }

        double* lut = &luts_[(tr * params_.tile_cols + tc) * bins];
        double cdf = 0.0;
        for (std::size_t b = 0; b < bins; ++b) {
            cdf += hist[b];
            lut[b] = std::min(1.0, cdf / n);
        }
    }

    ClaheParams params_;
    std::vector<std::size_t> row_start_, col_start_;
    std::vector<double> luts_;
};

inline ImagePlane clahe(const ImagePlane& p, const ClaheParams& params = {})
{
    const ClaheMapping mapping(p, params);
    ImagePlane out(p.width(), p.height());
    for (std::size_t y = 0; y < p.height(); ++y)
        for (std::size_t x = 0; x < p.width(); ++x) out.at(y, x) = mapping.apply(y, x, p.at(y, x));
    return out;
}

}  // namespace otbench
