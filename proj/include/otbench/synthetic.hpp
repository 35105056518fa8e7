#pragma once

// Seeded synthetic fundus stand-ins: dark noisy backgrounds with bright
// disk "lesions". Used by the tests, the acceptance suite and `otbench synth`.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "otbench/dataset.hpp"
#include "otbench/image.hpp"

namespace otbench::synth {

struct SyntheticSample {
    RgbImage image;
    ClassLabel label = ClassLabel::healthy;
    LesionType lesion_type = LesionType::none;
    std::optional<BinaryMask> mask;
};

struct DiskOptions {
    std::size_t size = 64;
    double background = 0.2;
    double lesion_gain = 0.5;  ///< added intensity inside the disk
    double noise_sigma = 0.05;
    std::size_t min_radius = 7;
    std::size_t max_radius = 13;
};

namespace detail {

inline RgbImage noisy_background(std::size_t n, const DiskOptions& o, std::mt19937_64& rng)
{
    std::normal_distribution<double> noise(0.0, o.noise_sigma);
    std::uniform_real_distribution<double> tint(-0.03, 0.03);
    const double level = o.background + tint(rng);
    ImagePlane r(n, n), g(n, n), b(n, n);
    for (std::size_t i = 0; i < n * n; ++i) {
        // channel gains loosely follow a fundus photograph: red bright, blue dark
        const double base = level + noise(rng);
        r.pixels()[i] = std::clamp(1.6 * base, 0.0, 1.0);
        g.pixels()[i] = std::clamp(base, 0.0, 1.0);
        b.pixels()[i] = std::clamp(0.5 * base, 0.0, 1.0);
    }
    return RgbImage(std::move(r), std::move(g), std::move(b));
}

inline BinaryMask paint_disk(RgbImage& img, const DiskOptions& o, std::mt19937_64& rng)
{
    const std::size_t n = img.width();
    std::uniform_int_distribution<std::size_t> radius_dist(o.min_radius, o.max_radius);
    const std::size_t radius = radius_dist(rng);
    std::uniform_int_distribution<std::size_t> centre_dist(radius + 1, n - radius - 2);
    const auto cy = static_cast<double>(centre_dist(rng)), cx = static_cast<double>(centre_dist(rng));
    const double r2 = static_cast<double>(radius * radius);

    BinaryMask mask(n, n);
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
            const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
            if (dy * dy + dx * dx > r2) continue;
            mask.set(y, x, true);
            img.red.at(y, x) = std::min(1.0, img.red.at(y, x) + o.lesion_gain);
            img.green.at(y, x) = std::min(1.0, img.green.at(y, x) + o.lesion_gain);
            img.blue.at(y, x) = std::min(1.0, img.blue.at(y, x) + o.lesion_gain);
        }
    return mask;
}

}  // namespace detail

/// `count` diseased images, each with one bright disk and its mask.
inline std::vector<SyntheticSample> bright_disk_dataset(std::size_t count, std::uint64_t seed,
                                                        const DiskOptions& opt = {})
{
    std::mt19937_64 rng(seed);
    std::vector<SyntheticSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        SyntheticSample s;
        s.image = detail::noisy_background(opt.size, opt, rng);
        s.mask = detail::paint_disk(s.image, opt, rng);
        s.label = ClassLabel::diseased;
        s.lesion_type = i % 2 == 0 ? LesionType::active : LesionType::inactive;
        out.push_back(std::move(s));
    }
    return out;
}

/// Mixed healthy / diseased set; diseased images carry a disk and a mask,
/// healthy images are background only.
inline std::vector<SyntheticSample> classification_dataset(std::size_t healthy, std::size_t diseased,
                                                           std::uint64_t seed, const DiskOptions& opt = {})
{
    std::mt19937_64 rng(seed);
    std::vector<SyntheticSample> out;
    out.reserve(healthy + diseased);
    for (std::size_t i = 0; i < healthy + diseased; ++i) {
        SyntheticSample s;
        s.image = detail::noisy_background(opt.size, opt, rng);
        if (i >= healthy) {
            s.mask = detail::paint_disk(s.image, opt, rng);
            s.label = ClassLabel::diseased;
            s.lesion_type = LesionType::active;
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace otbench::synth
