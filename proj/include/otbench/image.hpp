#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "otbench/error.hpp"

namespace otbench {

/// Single-channel row-major grid of real intensities. Filters expect values
/// in [0,1]; normalize_gaussian is the one producer of unclamped planes.
class ImagePlane {
public:
    ImagePlane() = default;

    ImagePlane(std::size_t width, std::size_t height, double fill = 0.0)
        : width_(width), height_(height), data_(width * height, fill)
    {
        detail::require(width >= 1 && height >= 1, "ImagePlane: dimensions must be positive");
    }

    ImagePlane(std::size_t width, std::size_t height, std::vector<double> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        detail::require(width >= 1 && height >= 1, "ImagePlane: dimensions must be positive");
        detail::require(data_.size() == width * height, "ImagePlane: data length != width*height");
    }

    /// Builds a plane from nested rows; all rows must be the same length.
    static ImagePlane from_rows(const std::vector<std::vector<double>>& rows)
    {
        detail::require(!rows.empty() && !rows.front().empty(), "ImagePlane: empty rows");
        std::vector<double> flat;
        for (const auto& r : rows) {
            detail::require(r.size() == rows.front().size(), "ImagePlane: ragged rows");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return ImagePlane(rows.front().size(), rows.size(), std::move(flat));
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(std::size_t row, std::size_t col) noexcept { return data_[row * width_ + col]; }
    double at(std::size_t row, std::size_t col) const noexcept { return data_[row * width_ + col]; }

    std::span<double> pixels() noexcept { return data_; }
    std::span<const double> pixels() const noexcept { return data_; }

    bool same_shape(const ImagePlane& o) const noexcept
    {
        return width_ == o.width_ && height_ == o.height_;
    }

    /// True if every value is finite and within [0,1].
    bool in_unit_range() const noexcept
    {
        return std::all_of(data_.begin(), data_.end(),
                           [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; });
    }

    friend bool operator==(const ImagePlane&, const ImagePlane&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> data_;
};

/// Three co-registered planes.
struct RgbImage {
    ImagePlane red;
    ImagePlane green;
    ImagePlane blue;

    RgbImage() = default;
    RgbImage(ImagePlane r, ImagePlane g, ImagePlane b)
        : red(std::move(r)), green(std::move(g)), blue(std::move(b))
    {
        detail::require(red.same_shape(green) && red.same_shape(blue),
                        "RgbImage: channel dimensions differ");
    }

    std::size_t width() const noexcept { return red.width(); }
    std::size_t height() const noexcept { return red.height(); }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Per-pixel lesion (true) / background (false) labels.
class BinaryMask {
public:
    BinaryMask() = default;

    BinaryMask(std::size_t width, std::size_t height, bool fill = false)
        : width_(width), height_(height), data_(width * height, fill ? 1 : 0)
    {
        detail::require(width >= 1 && height >= 1, "BinaryMask: dimensions must be positive");
    }

    BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
        : width_(width), height_(height), data_(std::move(data))
    {
        detail::require(width >= 1 && height >= 1, "BinaryMask: dimensions must be positive");
        detail::require(data_.size() == width * height, "BinaryMask: data length != width*height");
        for (auto& v : data_) v = v ? 1 : 0;
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }

    bool at(std::size_t row, std::size_t col) const noexcept { return data_[row * width_ + col] != 0; }
    void set(std::size_t row, std::size_t col, bool v) noexcept { data_[row * width_ + col] = v ? 1 : 0; }
    bool operator[](std::size_t i) const noexcept { return data_[i] != 0; }
    void set(std::size_t i, bool v) noexcept { data_[i] = v ? 1 : 0; }

    std::span<const std::uint8_t> bits() const noexcept { return data_; }

    std::size_t count() const noexcept
    {
        return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
    }

    template <typename Plane>
    bool same_shape(const Plane& o) const noexcept
    {
        return width_ == o.width() && height_ == o.height();
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<std::uint8_t> data_;
};

}  // namespace otbench
