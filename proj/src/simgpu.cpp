#include "pgov/simgpu.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace pgov::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) { return mix(mix(a, b), c); }

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) { return mix(mix(a, b, c), d); }

// Uniform in [-1, 1].
double signed_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0; }

double unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

double& kind_slot(Primitives& p, PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::batches: return p.batches;
        case PrimitiveKind::vertices: return p.vertices;
        default: return p.fragments;
    }
}

void scale_kind(Primitives& p, PrimitiveKind kind, double factor) {
    if (kind == PrimitiveKind::all) {
        p.batches *= factor;
        p.vertices *= factor;
        p.fragments *= factor;
    } else {
        kind_slot(p, kind) *= factor;
    }
}

KindFactors unit_factors(const PassRoster& roster) {
    return KindFactors(roster.power_pass_count(), Primitives{1.0, 1.0, 1.0});
}

double curve_value(const CountCurve& c, std::int64_t frame, std::uint64_t jitter_hash) {
    const double t = static_cast<double>(frame);
    const double wave = 1.0 + c.amplitude * std::sin(2.0 * std::numbers::pi * t / c.period + c.phase);
    const double jitter = 1.0 + c.jitter * signed_unit(jitter_hash);
    return std::max(0.0, c.mean * wave * jitter);
}

}  // namespace

PrimitiveKind parse_primitive_kind(const std::string& text) {
    if (text == "batches") return PrimitiveKind::batches;
    if (text == "vertices") return PrimitiveKind::vertices;
    if (text == "fragments") return PrimitiveKind::fragments;
    if (text == "all") return PrimitiveKind::all;
    throw std::invalid_argument("unknown primitive kind: " + text);
}

std::string to_string(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::batches: return "batches";
        case PrimitiveKind::vertices: return "vertices";
        case PrimitiveKind::fragments: return "fragments";
        case PrimitiveKind::all: return "all";
    }
    return "all";
}

// ---------------------------------------------------------------------------
// HiddenPowerOracle

HiddenPowerOracle HiddenPowerOracle::from_public(const PassRoster& roster, SaturationConstants saturation,
                                                 std::vector<double> batch_cost, UnitCosts unit_costs,
                                                 const CostTable& public_costs, double distortion,
                                                 double noise_sigma, std::uint64_t seed) {
    if (!(distortion > 0.0)) throw std::invalid_argument("distortion must be positive");
    HiddenPowerOracle oracle;
    oracle.saturation = std::move(saturation);
    oracle.batch_cost = std::move(batch_cost);
    oracle.unit_costs = unit_costs;
    oracle.costs = public_costs;
    for (std::size_t p = 0; p < oracle.costs.per_pass.size(); ++p) {
        const double f = (p % 2 == 0) ? distortion : 1.0 / distortion;
        auto& c = oracle.costs.per_pass[p];
        c.ins_v *= f;
        for (auto& v : c.ins_f) v *= f;
        for (auto& v : c.tex_f) v *= f;
    }
    oracle.noise_sigma = noise_sigma;
    oracle.seed = seed;
    oracle.validate(roster);
    return oracle;
}

void HiddenPowerOracle::validate(const PassRoster& roster) const {
    saturation.validate(roster.power_pass_count());
    costs.validate(roster);
    if (batch_cost.size() != roster.power_pass_count())
        throw std::invalid_argument("oracle: one batch cost per power pass expected");
    for (double k : batch_cost)
        if (k < 0.0) throw std::invalid_argument("oracle: batch costs must be nonnegative");
    if (unit_costs.chi < 0.0 || unit_costs.psi < 0.0)
        throw std::invalid_argument("oracle: unit costs must be nonnegative");
    if (noise_sigma < 0.0) throw std::invalid_argument("oracle: noise sigma must be nonnegative");
}

PowerCoefficients HiddenPowerOracle::true_coefficients(const PassRoster& roster, const RenderingConfiguration& config,
                                                       const KindFactors& cost_factors) const {
    auto k = coefficients_for_config(roster, unit_costs, costs, config,
                                     PowerCoefficients{std::vector<PassCoefficients>(roster.power_pass_count())});
    for (std::size_t p = 0; p < k.per_pass.size(); ++p) {
        k.per_pass[p].k_b = batch_cost[p] * cost_factors[p].batches;
        k.per_pass[p].k_v *= cost_factors[p].vertices;
        k.per_pass[p].k_f *= cost_factors[p].fragments;
    }
    return k;
}

double HiddenPowerOracle::true_power(const PassRoster& roster, const RenderingConfiguration& config,
                                     const PassPrimitives& primitives, const KindFactors& cost_factors) const {
    const auto k = true_coefficients(roster, config, cost_factors);
    for (std::size_t p = 0; p < roster.power_pass_count(); ++p) {
        const auto& desc = roster.pass(roster.power_passes()[p]);
        const auto& x = primitives[p];
        const auto& sat = saturation.per_pass[p];
        const auto& c = k.per_pass[p];
        const bool saturated = (desc.uses_batches && c.k_b > 0.0 && x.batches >= sat.batches) ||
                               (desc.uses_vertices && c.k_v > 0.0 && x.vertices >= sat.vertices) ||
                               (desc.uses_fragments && c.k_f > 0.0 && x.fragments >= sat.fragments);
        if (saturated) return saturation.p_max;
    }
    const double alpha = load_alpha(roster, saturation, k, primitives);
    return saturation.p_min - saturation.range() * std::expm1(-alpha);
}

double HiddenPowerOracle::measure(const PassRoster& roster, const RenderingConfiguration& config,
                                  const PassPrimitives& primitives, const KindFactors& cost_factors,
                                  std::uint64_t stream, std::uint64_t key) const {
    const double clean = true_power(roster, config, primitives, cost_factors);
    if (noise_sigma == 0.0) return clean;
    std::mt19937_64 rng(mix(seed, stream, key));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double z = std::clamp(normal(rng), -3.0, 3.0);
    return std::max(clean + z * noise_sigma * saturation.range(), 1e-9);
}

// ---------------------------------------------------------------------------
// SceneTrace

void SceneTrace::validate(const PassRoster& roster) const {
    if (frame_count < 0) throw std::invalid_argument("trace: frame_count must be nonnegative");
    if (curves.size() != roster.power_pass_count())
        throw std::invalid_argument("trace: one curve set per power pass expected");
    if (level_scale.size() != roster.power_pass_count())
        throw std::invalid_argument("trace: one level-scale list per power pass expected");
    for (std::size_t p = 0; p < roster.power_pass_count(); ++p) {
        const auto& desc = roster.pass(roster.power_passes()[p]);
        if (level_scale[p].size() != static_cast<std::size_t>(desc.level_count))
            throw std::invalid_argument("trace: pass " + desc.name + " needs one level scale per level");
        for (const auto& s : level_scale[p])
            if (s.batches < 0.0 || s.vertices < 0.0 || s.fragments < 0.0)
                throw std::invalid_argument("trace: level scales must be nonnegative");
        for (const CountCurve* c : {&curves[p].batches, &curves[p].vertices, &curves[p].fragments}) {
            if (c->mean < 0.0) throw std::invalid_argument("trace: curve means must be nonnegative");
            if (!(c->period > 0.0)) throw std::invalid_argument("trace: curve periods must be positive");
            if (c->amplitude < 0.0 || c->jitter < 0.0 || c->amplitude + c->jitter >= 1.0)
                throw std::invalid_argument("trace: amplitude + jitter must lie in [0, 1)");
        }
    }
    for (std::size_t e = 0; e < events.size(); ++e) {
        if (events[e].power_pass >= roster.power_pass_count())
            throw std::invalid_argument("trace: event refers to an unknown power pass");
        if (!(events[e].factor >= 0.0)) throw std::invalid_argument("trace: event factors must be nonnegative");
        if (e > 0 && events[e].frame < events[e - 1].frame)
            throw std::invalid_argument("trace: events must be sorted by frame");
    }
}

PassPrimitives SceneTrace::primitives(const PassRoster& roster, std::int64_t frame,
                                      const RenderingConfiguration& config) const {
    const double res_scale = roster.fragment_scale(config);
    PassPrimitives out(roster.power_pass_count());
    const auto f = static_cast<std::uint64_t>(frame);
    for (std::size_t p = 0; p < out.size(); ++p) {
        const auto level = static_cast<std::size_t>(config.levels[roster.power_passes()[p]]);
        const auto& scale = level_scale[p][level];
        out[p].batches = curve_value(curves[p].batches, frame, mix(seed, f, p, 0)) * scale.batches;
        out[p].vertices = curve_value(curves[p].vertices, frame, mix(seed, f, p, 1)) * scale.vertices;
        out[p].fragments = curve_value(curves[p].fragments, frame, mix(seed, f, p, 2)) * scale.fragments * res_scale;
    }
    for (const auto& e : events) {
        if (e.frame > frame) break;
        if (e.target == TraceEvent::Target::counts) scale_kind(out[e.power_pass], e.kind, e.factor);
    }
    return out;
}

KindFactors SceneTrace::cost_factors(const PassRoster& roster, std::int64_t frame) const {
    auto factors = unit_factors(roster);
    for (const auto& e : events) {
        if (e.frame > frame) break;
        if (e.target == TraceEvent::Target::costs) scale_kind(factors[e.power_pass], e.kind, e.factor);
    }
    return factors;
}

double measure_power(const HiddenPowerOracle& oracle, const PassRoster& roster, const RenderingConfiguration& config,
                     std::int64_t frame_index, const SceneTrace& trace) {
    if (frame_index < 0 || frame_index >= trace.frame_count)
        throw std::out_of_range("measure_power: frame index outside the trace");
    return oracle.measure(roster, config, trace.primitives(roster, frame_index, config),
                          trace.cost_factors(roster, frame_index), kStreamFrames,
                          static_cast<std::uint64_t>(frame_index));
}

// ---------------------------------------------------------------------------
// FrameSynthesizer

DegradationKind parse_degradation_kind(const std::string& text) {
    if (text == "blur") return DegradationKind::blur;
    if (text == "noise") return DegradationKind::noise;
    if (text == "quantize") return DegradationKind::quantize;
    if (text == "pixelate") return DegradationKind::pixelate;
    if (text == "coverage") return DegradationKind::coverage;
    throw std::invalid_argument("unknown degradation kind: " + text);
}

std::string to_string(DegradationKind kind) {
    switch (kind) {
        case DegradationKind::blur: return "blur";
        case DegradationKind::noise: return "noise";
        case DegradationKind::quantize: return "quantize";
        case DegradationKind::pixelate: return "pixelate";
        case DegradationKind::coverage: return "coverage";
    }
    return "blur";
}

void FrameSynthesizer::validate(const PassRoster& roster) const {
    if (width < kSsimWindow || height < kSsimWindow)
        throw std::invalid_argument("synthesizer: image must be at least 11x11");
    if (passes.size() != roster.size()) throw std::invalid_argument("synthesizer: one degradation per pass expected");
    if (static_cast<std::size_t>(height) < roster.size())
        throw std::invalid_argument("synthesizer: image too short for one band per pass");
    for (std::size_t i = 0; i < passes.size(); ++i) {
        const auto& s = passes[i].strength;
        const auto& name = roster.pass(i).name;
        if (s.size() != static_cast<std::size_t>(roster.pass(i).level_count))
            throw std::invalid_argument("synthesizer: pass " + name + " needs one strength per level");
        if (s[0] != 0.0) throw std::invalid_argument("synthesizer: pass " + name + " must have strength 0 at level 0");
        for (std::size_t l = 1; l < s.size(); ++l)
            if (!(s[l] > s[l - 1]))
                throw std::invalid_argument("synthesizer: pass " + name + " strengths must increase strictly");
        if (passes[i].kind == DegradationKind::coverage && s.back() > 1.0)
            throw std::invalid_argument("synthesizer: coverage strengths must not exceed 1");
    }
}

std::pair<int, int> FrameSynthesizer::band(std::size_t pass) const {
    const auto n = static_cast<long>(passes.size());
    const auto i = static_cast<long>(pass);
    return {static_cast<int>(i * height / n), static_cast<int>((i + 1) * height / n)};
}

FrameImage FrameSynthesizer::reference(std::int64_t frame, std::int64_t variant) const {
    const auto v = static_cast<std::uint64_t>(variant);
    const double t = static_cast<double>(frame);
    FrameImage img(width, height, 0.0);

    // Three drifting gratings.
    struct Grating {
        double fx, fy, speed, phase, amp;
    };
    std::vector<Grating> gratings;
    for (std::uint64_t g = 0; g < 3; ++g) {
        const double angle = std::numbers::pi * unit(mix(seed, v, 10 + g));
        const double freq = 0.05 + 0.25 * unit(mix(seed, v, 20 + g));
        gratings.push_back({freq * std::cos(angle), freq * std::sin(angle), 0.02 + 0.08 * unit(mix(seed, v, 30 + g)),
                            2.0 * std::numbers::pi * unit(mix(seed, v, 40 + g)),
                            0.08 + 0.08 * unit(mix(seed, v, 50 + g))});
    }
    // Hard-edged rectangles moving along the frame.
    struct Box {
        double x0, y0, w, h, vx, level;
    };
    std::vector<Box> boxes;
    for (std::uint64_t b = 0; b < 8; ++b) {
        boxes.push_back({width * unit(mix(seed, v, 60 + b)), height * unit(mix(seed, v, 70 + b)),
                         6.0 + 24.0 * unit(mix(seed, v, 80 + b)), 4.0 + 16.0 * unit(mix(seed, v, 90 + b)),
                         -0.6 + 1.2 * unit(mix(seed, v, 100 + b)), -0.3 + 0.6 * unit(mix(seed, v, 110 + b))});
    }

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double value = 0.5;
            for (const auto& g : gratings)
                value += g.amp * std::sin(2.0 * std::numbers::pi * (g.fx * x + g.fy * y) + g.phase + g.speed * t);
            for (const auto& b : boxes) {
                double bx = std::fmod(b.x0 + b.vx * t, static_cast<double>(width));
                if (bx < 0.0) bx += width;
                if (x >= bx && x < bx + b.w && y >= b.y0 && y < b.y0 + b.h) value += b.level;
            }
            // fine texture
            value += 0.04 * signed_unit(mix(seed, v, static_cast<std::uint64_t>(y) * 4096 + static_cast<std::uint64_t>(x)));
            img.at(x, y) = std::clamp(value, 0.0, 1.0);
        }
    }
    return img;
}

namespace {

void blur_band(FrameImage& img, int y0, int y1, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        taps[static_cast<std::size_t>(k + radius)] = std::exp(-(k * k) / (2.0 * sigma * sigma));
        sum += taps[static_cast<std::size_t>(k + radius)];
    }
    for (auto& tap : taps) tap /= sum;

    FrameImage tmp = img;
    for (int y = y0; y < y1; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += taps[static_cast<std::size_t>(k + radius)] * img.at(std::clamp(x + k, 0, img.width - 1), y);
            tmp.at(x, y) = acc;
        }
    for (int y = y0; y < y1; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += taps[static_cast<std::size_t>(k + radius)] * tmp.at(x, std::clamp(y + k, y0, y1 - 1));
            img.at(x, y) = acc;
        }
}

void noise_band(FrameImage& img, int y0, int y1, double amplitude, std::uint64_t key) {
    for (int y = y0; y < y1; ++y)
        for (int x = 0; x < img.width; ++x) {
            // 2x2 cells give the noise some structure
            const auto cell = static_cast<std::uint64_t>(y / 2) * 4096 + static_cast<std::uint64_t>(x / 2);
            img.at(x, y) = std::clamp(img.at(x, y) + amplitude * signed_unit(mix(key, cell)), 0.0, 1.0);
        }
}

void quantize_band(FrameImage& img, int y0, int y1, double step) {
    for (int y = y0; y < y1; ++y)
        for (int x = 0; x < img.width; ++x)
            img.at(x, y) = std::clamp(step * std::round(img.at(x, y) / step), 0.0, 1.0);
}

void pixelate_band(FrameImage& img, int y0, int y1, double strength) {
    const int block = 1 + static_cast<int>(std::lround(strength));
    if (block <= 1) return;
    for (int by = y0; by < y1; by += block)
        for (int bx = 0; bx < img.width; bx += block) {
            const int ey = std::min(by + block, y1);
            const int ex = std::min(bx + block, img.width);
            double acc = 0.0;
            for (int y = by; y < ey; ++y)
                for (int x = bx; x < ex; ++x) acc += img.at(x, y);
            acc /= static_cast<double>((ey - by) * (ex - bx));
            for (int y = by; y < ey; ++y)
                for (int x = bx; x < ex; ++x) img.at(x, y) = acc;
        }
}

void coverage_band(FrameImage& img, int y0, int y1, double fraction) {
    const int columns = static_cast<int>(std::lround(fraction * img.width));
    for (int y = y0; y < y1; ++y)
        for (int x = 0; x < columns; ++x) {
            const bool stripe = ((x + y) / 3) % 2 == 0;
            img.at(x, y) = img.at(x, y) * (stripe ? 0.55 : 1.0);
        }
}

}  // namespace

FrameImage FrameSynthesizer::render(const RenderingConfiguration& config, std::int64_t frame,
                                    std::int64_t variant) const {
    FrameImage img = reference(frame, variant);
    for (std::size_t i = 0; i < passes.size(); ++i) {
        const int level = config.levels[i];
        if (level == 0) continue;
        const double s = passes[i].strength[static_cast<std::size_t>(level)];
        const auto [y0, y1] = band(i);
        switch (passes[i].kind) {
            case DegradationKind::blur: blur_band(img, y0, y1, s); break;
            case DegradationKind::noise:
                noise_band(img, y0, y1, s, mix(seed, static_cast<std::uint64_t>(frame), 1000 + i));
                break;
            case DegradationKind::quantize: quantize_band(img, y0, y1, s); break;
            case DegradationKind::pixelate: pixelate_band(img, y0, y1, s); break;
            case DegradationKind::coverage: coverage_band(img, y0, y1, s); break;
        }
    }
    return img;
}

// ---------------------------------------------------------------------------
// Probing

MinPowerProbe probe_min_power(const HiddenPowerOracle& oracle, const PassRoster& roster,
                              const PassPrimitives& empty_scene, int frames) {
    if (frames < 1) throw std::invalid_argument("probe_min_power: need at least one frame");
    if (empty_scene.size() != roster.power_pass_count())
        throw std::invalid_argument("probe_min_power: scene does not match the roster");
    for (const auto& p : empty_scene)
        if (p.batches != 0.0 || p.vertices != 0.0 || p.fragments != 0.0)
            throw std::invalid_argument("probe_min_power: scene must be empty");
    const auto factors = unit_factors(roster);
    std::vector<double> readings;
    for (int i = 0; i < frames; ++i)
        readings.push_back(
            oracle.measure(roster, roster.best(), empty_scene, factors, kStreamProbe, static_cast<std::uint64_t>(i)));
    double mean = 0.0;
    for (double r : readings) mean += r;
    mean /= frames;
    double var = 0.0;
    for (double r : readings) var += (r - mean) * (r - mean);
    const double noise = frames > 1 ? std::sqrt(var / (frames - 1)) : 0.0;
    return {mean, noise, frames};
}

bool SaturationProbe::any_cap_reached() const {
    return std::any_of(ramps.begin(), ramps.end(), [](const RampReport& r) { return r.cap_reached; });
}

SaturationProbe probe_saturation(const HiddenPowerOracle& oracle, const PassRoster& roster, double p_min,
                                 const ProbeOptions& options) {
    if (!(options.start_count > 0.0) || options.max_doublings < 1 || options.frames_per_step < 1 ||
        options.refine_steps < 0 || !(options.plateau_threshold > 0.0) || options.reading_noise < 0.0)
        throw std::invalid_argument("probe_saturation: invalid options");

    SaturationProbe result;
    result.saturation.p_min = p_min;
    result.saturation.per_pass.assign(roster.power_pass_count(), Primitives{1.0, 1.0, 1.0});
    const auto factors = unit_factors(roster);
    // Probe frames continue after the ones probe_min_power used.
    std::uint64_t probe_frame = 1u << 20;
    double max_power = p_min;
    const double step_error = options.reading_noise / std::sqrt(static_cast<double>(options.frames_per_step));
    const double rise_margin = 20.0 * step_error;
    const double flat_margin = 4.0 * std::sqrt(2.0) * step_error;

    auto read = [&](std::size_t pass, PrimitiveKind kind, double count) {
        PassPrimitives prims(roster.power_pass_count());
        kind_slot(prims[pass], kind) = count;
        double sum = 0.0;
        for (int i = 0; i < options.frames_per_step; ++i)
            sum += oracle.measure(roster, roster.best(), prims, factors, kStreamProbe, probe_frame++);
        result.frames += options.frames_per_step;
        const double reading = sum / options.frames_per_step;
        max_power = std::max(max_power, reading);
        return reading;
    };

    for (std::size_t p = 0; p < roster.power_pass_count(); ++p) {
        const auto& desc = roster.pass(roster.power_passes()[p]);
        std::vector<PrimitiveKind> kinds;
        if (desc.uses_batches) kinds.push_back(PrimitiveKind::batches);
        if (desc.uses_vertices) kinds.push_back(PrimitiveKind::vertices);
        if (desc.uses_fragments) kinds.push_back(PrimitiveKind::fragments);

        for (const auto kind : kinds) {
            RampReport report{p, kind, 0.0, 0.0, true};
            std::vector<std::pair<double, double>> ramp;  // (count, reading)
            bool rose = false;
            double count = options.start_count;
            for (int j = 0; j <= options.max_doublings; ++j, count *= 2.0) {
                const double reading = read(p, kind, count);
                ramp.emplace_back(count, reading);
                report.max_power = std::max(report.max_power, reading);
                if (ramp.size() < 2) continue;
                const double increase = reading - ramp[ramp.size() - 2].second;
                const bool flat = increase < std::max(options.plateau_threshold * reading, flat_margin);
                if (rose && flat) {
                    report.cap_reached = false;
                    break;
                }
                rose = rose || reading - p_min > std::max(options.plateau_threshold * reading, rise_margin);
            }

            if (report.cap_reached) {
                report.saturating_count = ramp.back().first;
            } else {
                // Plateau spans the last doubling; bracket the knee below it.
                const auto flat = ramp.size() - 2;
                const double plateau = 0.5 * (ramp[flat].second + ramp.back().second);
                const double tolerance = std::max(2.0 * options.plateau_threshold * plateau, 4.0 * step_error);
                double hi = ramp[flat].first;
                double lo = hi / 2.0;
                for (std::size_t i = flat; i-- > 0;) {
                    if (ramp[i].second < plateau - tolerance) {
                        lo = ramp[i].first;
                        break;
                    }
                    hi = ramp[i].first;
                }
                for (int s = 0; s < options.refine_steps; ++s) {
                    const double mid = 0.5 * (lo + hi);
                    if (read(p, kind, mid) >= plateau - tolerance)
                        hi = mid;
                    else
                        lo = mid;
                }
                report.saturating_count = hi;
            }
            kind_slot(result.saturation.per_pass[p], kind) = report.saturating_count;
            result.ramps.push_back(report);
        }
    }
    result.saturation.p_max = max_power;
    return result;
}

std::vector<FrameSample> generic_sweep(const HiddenPowerOracle& oracle, const PassRoster& roster,
                                       const SaturationConstants& probed, int count, double max_load,
                                       std::uint64_t seed) {
    if (count < 0) throw std::invalid_argument("generic_sweep: negative sample count");
    const auto factors = unit_factors(roster);
    std::vector<FrameSample> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        const double load = max_load * static_cast<double>(j + 1) / count;
        FrameSample sample;
        sample.per_pass.resize(roster.power_pass_count());
        for (std::size_t p = 0; p < roster.power_pass_count(); ++p) {
            const auto& desc = roster.pass(roster.power_passes()[p]);
            const auto& sat = probed.per_pass[p];
            const auto key = static_cast<std::uint64_t>(j);
            if (desc.uses_batches) sample.per_pass[p].batches = load * unit(mix(seed, key, p, 0)) * sat.batches;
            if (desc.uses_vertices) sample.per_pass[p].vertices = load * unit(mix(seed, key, p, 1)) * sat.vertices;
            if (desc.uses_fragments) sample.per_pass[p].fragments = load * unit(mix(seed, key, p, 2)) * sat.fragments;
        }
        sample.measured_power = oracle.measure(roster, roster.best(), sample.per_pass, factors, kStreamSweep,
                                               static_cast<std::uint64_t>(j));
        samples.push_back(std::move(sample));
    }
    return samples;
}

}  // namespace pgov::sim
