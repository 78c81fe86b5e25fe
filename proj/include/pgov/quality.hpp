#ifndef PGOV_QUALITY_HPP
#define PGOV_QUALITY_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pgov/config_space.hpp"

namespace pgov {

/// Row-major grayscale image with intensities in [0, 1].
struct FrameImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    FrameImage() = default;
    FrameImage(int w, int h, double fill = 0.0);

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)]; }
    bool operator==(const FrameImage&) const = default;
};

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

/// Mean structural similarity over every fully contained 11x11 Gaussian
/// window (sigma 1.5, dynamic range 1). Both images must share dimensions and
/// be at least 11 pixels on each side.
double ssim(const FrameImage& reference, const FrameImage& candidate);

/// max(0, 1 - ssim).
double quality_error(const FrameImage& reference, const FrameImage& candidate);

/// k[i][l] relates e(s_i^l) to e(s_i^{l_max}); k[i][0] is unused and zero,
/// k[i][l_max] is exactly one.
struct ErrorRatioTable {
    std::vector<std::vector<double>> ratios;
    // Passes whose worst-level error never rose above the calibration floor.
    std::vector<bool> inert;

    /// Level-independent ratios (1 everywhere above level 0).
    static ErrorRatioTable uniform(const PassRoster& roster);
};

/// Renders a frame for a configuration and a scene state.
using RenderFunction = std::function<FrameImage(const RenderingConfiguration&, std::int64_t scene_state)>;

inline constexpr double kInertErrorFloor = 1e-6;

/// Mean over calibration states of e(s_i^l)/e(s_i^{l_max}). States whose
/// worst-level error is below 1e-6 are skipped; a pass skipped everywhere is
/// flagged inert with zero ratios.
ErrorRatioTable calibrate_ratios(const PassRoster& roster, const RenderFunction& render,
                                 const std::vector<std::int64_t>& calibration_states);

/// Worst-level errors for every pass plus the ratio table used to extrapolate.
struct ErrorModel {
    std::vector<double> worst_error;
    ErrorRatioTable ratios;
    // Scene frame each worst_error entry was computed for; nullopt until first update.
    std::vector<std::optional<std::int64_t>> computed_for_frame;

    static ErrorModel empty(const PassRoster& roster, ErrorRatioTable ratios);

    /// Frames between `now` and the scene frame behind entry `pass`; nullopt if never computed.
    std::optional<std::int64_t> staleness(std::size_t pass, std::int64_t now) const;

    /// Copy with one entry replaced.
    ErrorModel with_worst_error(std::size_t pass, double error, std::int64_t scene_frame) const;
};

/// Replaces e_worst[i] for every pass whose background frame is present.
ErrorModel update_worst_errors(const ErrorModel& model, const FrameImage& reference,
                               const std::vector<std::optional<FrameImage>>& backgrounds,
                               std::int64_t scene_frame);

/// Additive estimate: sum over degraded passes of k[i][l] * e_worst[i]. Not clamped.
double estimate_error(const ErrorModel& model, const RenderingConfiguration& config);

}  // namespace pgov

#endif  // PGOV_QUALITY_HPP
