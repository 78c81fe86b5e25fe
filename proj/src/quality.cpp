#include "pgov/quality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pgov {

namespace {

std::array<double, kSsimWindow> gaussian_taps() {
    std::array<double, kSsimWindow> taps{};
    constexpr int half = kSsimWindow / 2;
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = static_cast<double>(i - half);
        taps[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
        sum += taps[static_cast<std::size_t>(i)];
    }
    for (auto& t : taps) t /= sum;
    return taps;
}

// Valid-mode separable filter of a width x height plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int width, int height,
                                 const std::array<double, kSsimWindow>& taps) {
    const int out_w = width - kSsimWindow + 1;
    const int out_h = height - kSsimWindow + 1;
    std::vector<double> rows(static_cast<std::size_t>(out_w) * static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        const double* src = plane.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) acc += taps[static_cast<std::size_t>(k)] * src[x + k];
            rows[static_cast<std::size_t>(y) * static_cast<std::size_t>(out_w) + static_cast<std::size_t>(x)] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(out_w) * static_cast<std::size_t>(out_h));
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k)
                acc += taps[static_cast<std::size_t>(k)] *
                       rows[static_cast<std::size_t>(y + k) * static_cast<std::size_t>(out_w) + static_cast<std::size_t>(x)];
            out[static_cast<std::size_t>(y) * static_cast<std::size_t>(out_w) + static_cast<std::size_t>(x)] = acc;
        }
    }
    return out;
}

}  // namespace

namespace {

std::size_t pixel_count(int w, int h) {
    if (w < 0 || h < 0) throw std::invalid_argument("image dimensions must be nonnegative");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
}

}  // namespace

FrameImage::FrameImage(int w, int h, double fill) : width(w), height(h), pixels(pixel_count(w, h), fill) {}

double ssim(const FrameImage& reference, const FrameImage& candidate) {
    if (reference.width != candidate.width || reference.height != candidate.height)
        throw std::invalid_argument("ssim: image dimensions differ (" + std::to_string(reference.width) + "x" +
                                    std::to_string(reference.height) + " vs " + std::to_string(candidate.width) +
                                    "x" + std::to_string(candidate.height) + ")");
    if (reference.width < kSsimWindow || reference.height < kSsimWindow)
        throw std::invalid_argument("ssim: images must be at least 11x11");

    static const auto taps = gaussian_taps();
    const int w = reference.width;
    const int h = reference.height;
    const auto& x = reference.pixels;
    const auto& y = candidate.pixels;
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mu_x = filter_valid(x, w, h, taps);
    const auto mu_y = filter_valid(y, w, h, taps);
    const auto e_xx = filter_valid(xx, w, h, taps);
    const auto e_yy = filter_valid(yy, w, h, taps);
    const auto e_xy = filter_valid(xy, w, h, taps);

    constexpr double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
    constexpr double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);
    double total = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
        const double mx = mu_x[i];
        const double my = mu_y[i];
        const double var_x = e_xx[i] - mx * mx;
        const double var_y = e_yy[i] - my * my;
        const double cov = e_xy[i] - mx * my;
        const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
        const double den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
        total += num / den;
    }
    return total / static_cast<double>(mu_x.size());
}

double quality_error(const FrameImage& reference, const FrameImage& candidate) {
    return std::max(0.0, 1.0 - ssim(reference, candidate));
}

ErrorRatioTable ErrorRatioTable::uniform(const PassRoster& roster) {
    ErrorRatioTable table;
    for (const auto& p : roster.passes()) {
        std::vector<double> k(static_cast<std::size_t>(p.level_count), 1.0);
        k[0] = 0.0;
        table.ratios.push_back(std::move(k));
        table.inert.push_back(false);
    }
    return table;
}

ErrorRatioTable calibrate_ratios(const PassRoster& roster, const RenderFunction& render,
                                 const std::vector<std::int64_t>& calibration_states) {
    if (calibration_states.empty()) throw std::invalid_argument("calibrate_ratios: no calibration frames");

    ErrorRatioTable table;
    table.ratios.resize(roster.size());
    table.inert.assign(roster.size(), false);
    for (std::size_t i = 0; i < roster.size(); ++i)
        table.ratios[i].assign(static_cast<std::size_t>(roster.pass(i).level_count), 0.0);

    std::vector<std::vector<double>> sums(roster.size());
    std::vector<int> used(roster.size(), 0);
    for (std::size_t i = 0; i < roster.size(); ++i) sums[i].assign(table.ratios[i].size(), 0.0);

    for (const auto state : calibration_states) {
        const FrameImage reference = render(roster.best(), state);
        for (std::size_t i = 0; i < roster.size(); ++i) {
            const int l_max = roster.pass(i).level_count - 1;
            if (l_max == 0) continue;
            const double worst = quality_error(reference, render(single_degradation_config(roster, i, l_max), state));
            if (worst < kInertErrorFloor) continue;
            ++used[i];
            sums[i][static_cast<std::size_t>(l_max)] += 1.0;
            for (int l = 1; l < l_max; ++l) {
                const double e = quality_error(reference, render(single_degradation_config(roster, i, l), state));
                sums[i][static_cast<std::size_t>(l)] += e / worst;
            }
        }
    }

    for (std::size_t i = 0; i < roster.size(); ++i) {
        const int l_max = roster.pass(i).level_count - 1;
        if (l_max == 0) continue;
        if (used[i] == 0) {
            table.inert[i] = true;
            continue;
        }
        for (int l = 1; l < l_max; ++l)
            table.ratios[i][static_cast<std::size_t>(l)] = sums[i][static_cast<std::size_t>(l)] / used[i];
        table.ratios[i][static_cast<std::size_t>(l_max)] = 1.0;
    }
    return table;
}

ErrorModel ErrorModel::empty(const PassRoster& roster, ErrorRatioTable ratios) {
    if (ratios.ratios.size() != roster.size()) throw std::invalid_argument("ratio table does not match the roster");
    ErrorModel model;
    model.worst_error.assign(roster.size(), 0.0);
    model.ratios = std::move(ratios);
    model.computed_for_frame.assign(roster.size(), std::nullopt);
    return model;
}

std::optional<std::int64_t> ErrorModel::staleness(std::size_t pass, std::int64_t now) const {
    if (!computed_for_frame[pass]) return std::nullopt;
    return now - *computed_for_frame[pass];
}

ErrorModel ErrorModel::with_worst_error(std::size_t pass, double error, std::int64_t scene_frame) const {
    if (pass >= worst_error.size()) throw std::out_of_range("pass index out of range");
    ErrorModel out = *this;
    out.worst_error[pass] = std::clamp(error, 0.0, 1.0);
    out.computed_for_frame[pass] = scene_frame;
    return out;
}

ErrorModel update_worst_errors(const ErrorModel& model, const FrameImage& reference,
                               const std::vector<std::optional<FrameImage>>& backgrounds,
                               std::int64_t scene_frame) {
    if (backgrounds.size() != model.worst_error.size())
        throw std::invalid_argument("update_worst_errors: one background slot per pass expected");
    ErrorModel out = model;
    for (std::size_t i = 0; i < backgrounds.size(); ++i) {
        if (!backgrounds[i]) continue;
        out = out.with_worst_error(i, quality_error(reference, *backgrounds[i]), scene_frame);
    }
    return out;
}

double estimate_error(const ErrorModel& model, const RenderingConfiguration& config) {
    if (config.size() != model.worst_error.size())
        throw std::invalid_argument("estimate_error: configuration does not match the error model");
    double total = 0.0;
    for (std::size_t i = 0; i < config.size(); ++i) {
        const int level = config[i];
        if (level <= 0) continue;
        total += model.ratios.ratios[i][static_cast<std::size_t>(level)] * model.worst_error[i];
    }
    return total;
}

}  // namespace pgov
