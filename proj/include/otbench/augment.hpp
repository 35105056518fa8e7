#pragma once

// Lossless geometric augmentation of image/mask pairs. Rotations are
// clockwise quarter turns.

#include <cmath>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "otbench/filters.hpp"
#include "otbench/image.hpp"

namespace otbench {

namespace detail {

template <typename Grid>
Grid make_like(std::size_t w, std::size_t h)
{
    return Grid(w, h);
}

template <typename Grid>
void copy_px(const Grid& src, std::size_t sy, std::size_t sx, Grid& dst, std::size_t dy, std::size_t dx)
{
    if constexpr (std::is_same_v<Grid, BinaryMask>)
        dst.set(dy, dx, src.at(sy, sx));
    else
        dst.at(dy, dx) = src.at(sy, sx);
}

}  // namespace detail

template <typename Grid>
concept PixelGrid = std::is_same_v<Grid, ImagePlane> || std::is_same_v<Grid, BinaryMask>;

template <PixelGrid Grid>
Grid flip_h(const Grid& g)
{
    Grid out = detail::make_like<Grid>(g.width(), g.height());
    for (std::size_t y = 0; y < g.height(); ++y)
        for (std::size_t x = 0; x < g.width(); ++x) detail::copy_px(g, y, g.width() - 1 - x, out, y, x);
    return out;
}

template <PixelGrid Grid>
Grid flip_v(const Grid& g)
{
    Grid out = detail::make_like<Grid>(g.width(), g.height());
    for (std::size_t y = 0; y < g.height(); ++y)
        for (std::size_t x = 0; x < g.width(); ++x) detail::copy_px(g, g.height() - 1 - y, x, out, y, x);
    return out;
}

/// Clockwise rotation by quarter_turns * 90 degrees; quarter_turns in {1,2,3}.
template <PixelGrid Grid>
Grid rotate90(const Grid& g, int quarter_turns)
{
    detail::require(quarter_turns >= 1 && quarter_turns <= 3,
                    "rotate90: only 1, 2 or 3 quarter turns are supported");
    const std::size_t w = g.width(), h = g.height();
    if (quarter_turns == 2) {
        Grid out = detail::make_like<Grid>(w, h);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) detail::copy_px(g, h - 1 - y, w - 1 - x, out, y, x);
        return out;
    }
    Grid out = detail::make_like<Grid>(h, w);
    for (std::size_t y = 0; y < w; ++y)
        for (std::size_t x = 0; x < h; ++x) {
            if (quarter_turns == 1)
                detail::copy_px(g, h - 1 - x, y, out, y, x);
            else
                detail::copy_px(g, x, w - 1 - y, out, y, x);
        }
    return out;
}

/// Centre crop to `fraction` of each side, nearest-neighbour resized back to
/// the original size. Only used when zoom augmentation is requested.
template <PixelGrid Grid>
Grid zoom_center(const Grid& g, double fraction = 0.9)
{
    detail::require(fraction > 0.0 && fraction <= 1.0, "zoom_center: fraction must be in (0,1]");
    const std::size_t w = g.width(), h = g.height();
    const auto cw = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * static_cast<double>(w))));
    const auto ch = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fraction * static_cast<double>(h))));
    const std::size_t x0 = (w - cw) / 2, y0 = (h - ch) / 2;
    Grid out = detail::make_like<Grid>(w, h);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t sy = y0 + std::min(ch - 1, y * ch / h);
            const std::size_t sx = x0 + std::min(cw - 1, x * cw / w);
            detail::copy_px(g, sy, sx, out, y, x);
        }
    return out;
}

struct SamplePair {
    ImagePlane image;
    std::optional<BinaryMask> mask;

    SamplePair() = default;
    SamplePair(ImagePlane img, std::optional<BinaryMask> m = std::nullopt)
        : image(std::move(img)), mask(std::move(m))
    {
        if (mask)
            detail::require(mask->same_shape(image), "SamplePair: mask dimensions differ from image");
    }
};

enum class AugmentTag { rot90, rot180, rot270, normalized, hflip, vflip, zoom };

inline std::string to_string(AugmentTag t)
{
    switch (t) {
    case AugmentTag::rot90: return "rot90";
    case AugmentTag::rot180: return "rot180";
    case AugmentTag::rot270: return "rot270";
    case AugmentTag::normalized: return "normalized";
    case AugmentTag::hflip: return "hflip";
    case AugmentTag::vflip: return "vflip";
    case AugmentTag::zoom: return "zoom";
    }
    return "?";
}

/// File-name suffix used when derived samples are written to disk.
inline std::string file_suffix(AugmentTag t)
{
    switch (t) {
    case AugmentTag::rot90: return "_r90";
    case AugmentTag::rot180: return "_r180";
    case AugmentTag::rot270: return "_r270";
    case AugmentTag::normalized: return "_norm";
    case AugmentTag::hflip: return "_hf";
    case AugmentTag::vflip: return "_vf";
    case AugmentTag::zoom: return "_zoom";
    }
    return "";
}

struct AugmentedPair {
    AugmentTag tag;
    SamplePair pair;
};

using AugmentSet = std::vector<AugmentedPair>;

/// The six derivatives of one sample, in order: three clockwise rotations,
/// a max-normalised copy (mask unchanged), horizontal flip, vertical flip.
/// The source pair itself is not included. `with_zoom` appends a seventh.
inline AugmentSet augment_pair(const SamplePair& s, bool with_zoom = false)
{
    if (s.mask) detail::require(s.mask->same_shape(s.image), "augment_pair: image/mask dimension mismatch");

    auto geometric = [&](AugmentTag tag, auto&& transform) {
        std::optional<BinaryMask> m;
        if (s.mask) m = transform(*s.mask);
        return AugmentedPair{tag, SamplePair(transform(s.image), std::move(m))};
    };

    AugmentSet out;
    out.reserve(with_zoom ? 7 : 6);
    out.push_back(geometric(AugmentTag::rot90, [](const auto& g) { return rotate90(g, 1); }));
    out.push_back(geometric(AugmentTag::rot180, [](const auto& g) { return rotate90(g, 2); }));
    out.push_back(geometric(AugmentTag::rot270, [](const auto& g) { return rotate90(g, 3); }));
    out.push_back(AugmentedPair{AugmentTag::normalized, SamplePair(normalize_max(s.image), s.mask)});
    out.push_back(geometric(AugmentTag::hflip, [](const auto& g) { return flip_h(g); }));
    out.push_back(geometric(AugmentTag::vflip, [](const auto& g) { return flip_v(g); }));
    if (with_zoom) out.push_back(geometric(AugmentTag::zoom, [](const auto& g) { return zoom_center(g); }));
    return out;
}

}  // namespace otbench

namespace otbench {

struct AugmentedRgb {
    AugmentTag tag;
    RgbImage image;
    std::optional<BinaryMask> mask;
};

/// augment_pair for colour images: geometric transforms apply to every
/// channel; the normalised copy divides all channels by the joint maximum.
inline std::vector<AugmentedRgb> augment_rgb(const RgbImage& img, const std::optional<BinaryMask>& mask,
                                             bool with_zoom = false)
{
    if (mask) detail::require(mask->same_shape(img.red), "augment_rgb: image/mask dimension mismatch");
    const auto r = augment_pair(SamplePair(img.red, mask), with_zoom);
    const auto g = augment_pair(SamplePair(img.green), with_zoom);
    const auto b = augment_pair(SamplePair(img.blue), with_zoom);

    const double joint = std::max({plane_max(img.red), plane_max(img.green), plane_max(img.blue)});
    if (!(joint > 0.0)) throw DegenerateInputError("augment_rgb: image is entirely black");

    std::vector<AugmentedRgb> out;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i].tag == AugmentTag::normalized) {
            auto scale = [joint](ImagePlane p) {
                for (double& v : p.pixels()) v /= joint;
                return p;
            };
            out.push_back({r[i].tag, RgbImage(scale(img.red), scale(img.green), scale(img.blue)), mask});
        } else {
            out.push_back({r[i].tag, RgbImage(r[i].pair.image, g[i].pair.image, b[i].pair.image), r[i].pair.mask});
        }
    }
    return out;
}

}  // namespace otbench
