#pragma once

#include <string>
#include <vector>

#include "otbench/clahe.hpp"
#include "otbench/filters.hpp"

namespace otbench {

enum class Denoiser { gaussian, nlmd };
enum class Normalizer { max, gaussian_intensity };

inline std::string to_string(Denoiser d) { return d == Denoiser::gaussian ? "gaussian" : "nlmd"; }
inline std::string to_string(Normalizer n) { return n == Normalizer::max ? "max" : "gaussian"; }

inline Denoiser parse_denoiser(const std::string& s)
{
    if (s == "gaussian") return Denoiser::gaussian;
    if (s == "nlmd") return Denoiser::nlmd;
    throw ValidationError("unknown denoiser '" + s + "' (expected gaussian|nlmd)");
}

inline Normalizer parse_normalizer(const std::string& s)
{
    if (s == "max") return Normalizer::max;
    if (s == "gaussian") return Normalizer::gaussian_intensity;
    throw ValidationError("unknown normalizer '" + s + "' (expected max|gaussian)");
}

struct PreprocessConfig {
    std::size_t background_window = 51;  ///< mean-filter size for illumination equalisation
    std::size_t gaussian_window = 51;
    double gaussian_sigma = 0.0;  ///< <= 0 selects (k-1)/6
    ClaheParams clahe{};
    NlmdParams nlmd{};
    Denoiser denoiser = Denoiser::gaussian;
    Normalizer normalizer = Normalizer::max;

    double effective_sigma() const noexcept
    {
        return gaussian_sigma > 0.0 ? gaussian_sigma : default_gaussian_sigma(gaussian_window);
    }

    /// Stage names in execution order, for run metadata.
    std::vector<std::string> stage_names() const
    {
        return {"split_channels",
                "invert_green",
                "illumination_equalize",
                "clahe",
                denoiser == Denoiser::gaussian ? "gaussian_filter" : "nlmd",
                normalizer == Normalizer::max ? "normalize_max" : "normalize_gaussian"};
    }
};

/// Denoise step alone, as selected by the config.
inline ImagePlane denoise(const ImagePlane& p, const PreprocessConfig& cfg)
{
    if (cfg.denoiser == Denoiser::nlmd) return nlmd(p, cfg.nlmd);
    return gaussian_filter(p, cfg.effective_sigma(), cfg.gaussian_window);
}

inline ImagePlane normalize(const ImagePlane& p, Normalizer n)
{
    return n == Normalizer::max ? normalize_max(p) : normalize_gaussian(p);
}

/// Green-channel pipeline applied to a plane that is already the green
/// channel (steps after the channel split).
inline ImagePlane preprocess_green(const ImagePlane& green, const PreprocessConfig& cfg = {})
{
    const ImagePlane inverted = invert_channel(green);
    const ImagePlane equalized = illumination_equalize(inverted, cfg.background_window);
    const ImagePlane enhanced = clahe(equalized, cfg.clahe);
    const ImagePlane smoothed = denoise(enhanced, cfg);
    return normalize(smoothed, cfg.normalizer);
}

/// split -> invert green -> illumination equalise -> CLAHE -> denoise -> normalise
inline ImagePlane preprocess(const RgbImage& img, const PreprocessConfig& cfg = {})
{
    const auto [red, green, blue] = split_channels(img);
    return preprocess_green(green, cfg);
}

}  // namespace otbench
