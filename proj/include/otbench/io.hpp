#pragma once

// 8-bit image file I/O, backed by OpenCV's codecs. Intensities are decoded
// as v/255 and written back as round(x*255).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "otbench/error.hpp"
#include "otbench/image.hpp"

namespace otbench::io {

namespace fs = std::filesystem;

namespace detail {

inline cv::Mat read_8bit(const fs::path& path)
{
    cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (m.empty()) throw ValidationError("cannot decode image: " + path.string());
    if (m.depth() != CV_8U) throw ValidationError("expected an 8-bit image: " + path.string());
    return m;
}

inline ImagePlane channel_plane(const cv::Mat& m, int channel)
{
    ImagePlane p(static_cast<std::size_t>(m.cols), static_cast<std::size_t>(m.rows));
    const int nch = m.channels();
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<unsigned char>(y);
        for (int x = 0; x < m.cols; ++x)
            p.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = row[x * nch + channel] / 255.0;
    }
    return p;
}

inline unsigned char quantize(double v) noexcept
{
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::lround(c * 255.0));
}

inline void write_mat(const fs::path& path, const cv::Mat& m)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), m);
    } catch (const cv::Exception&) {
        ok = false;
    }
    if (!ok) throw std::runtime_error("cannot write image: " + path.string());
}

}  // namespace detail

/// Grey images are replicated into all three channels; alpha is dropped.
inline RgbImage read_rgb(const fs::path& path)
{
    const cv::Mat m = detail::read_8bit(path);
    if (m.channels() == 1) {
        ImagePlane g = detail::channel_plane(m, 0);
        return RgbImage(g, g, g);
    }
    if (m.channels() < 3) throw ValidationError("unsupported channel count in " + path.string());
    // OpenCV stores BGR(A)
    return RgbImage(detail::channel_plane(m, 2), detail::channel_plane(m, 1), detail::channel_plane(m, 0));
}

inline ImagePlane read_plane(const fs::path& path)
{
    const cv::Mat m = detail::read_8bit(path);
    if (m.channels() == 1) return detail::channel_plane(m, 0);
    return read_rgb(path).green;
}

/// Any nonzero sample (in any channel) marks lesion.
inline BinaryMask read_mask(const fs::path& path)
{
    const cv::Mat m = detail::read_8bit(path);
    const int nch = m.channels();
    BinaryMask mask(static_cast<std::size_t>(m.cols), static_cast<std::size_t>(m.rows));
    for (int y = 0; y < m.rows; ++y) {
        const auto* row = m.ptr<unsigned char>(y);
        for (int x = 0; x < m.cols; ++x) {
            bool on = false;
            for (int c = 0; c < nch; ++c) on = on || row[x * nch + c] != 0;
            mask.set(static_cast<std::size_t>(y), static_cast<std::size_t>(x), on);
        }
    }
    return mask;
}

inline void write_plane(const fs::path& path, const ImagePlane& p)
{
    cv::Mat m(static_cast<int>(p.height()), static_cast<int>(p.width()), CV_8UC1);
    for (std::size_t y = 0; y < p.height(); ++y)
        for (std::size_t x = 0; x < p.width(); ++x)
            m.at<unsigned char>(static_cast<int>(y), static_cast<int>(x)) = detail::quantize(p.at(y, x));
    detail::write_mat(path, m);
}

inline void write_rgb(const fs::path& path, const RgbImage& img)
{
    cv::Mat m(static_cast<int>(img.height()), static_cast<int>(img.width()), CV_8UC3);
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x)
            m.at<cv::Vec3b>(static_cast<int>(y), static_cast<int>(x)) =
                cv::Vec3b(detail::quantize(img.blue.at(y, x)), detail::quantize(img.green.at(y, x)),
                          detail::quantize(img.red.at(y, x)));
    detail::write_mat(path, m);
}

/// 0 = background, 255 = lesion.
inline void write_mask(const fs::path& path, const BinaryMask& mask)
{
    cv::Mat m(static_cast<int>(mask.height()), static_cast<int>(mask.width()), CV_8UC1);
    for (std::size_t y = 0; y < mask.height(); ++y)
        for (std::size_t x = 0; x < mask.width(); ++x)
            m.at<unsigned char>(static_cast<int>(y), static_cast<int>(x)) = mask.at(y, x) ? 255 : 0;
    detail::write_mat(path, m);
}

}  // namespace otbench::io
