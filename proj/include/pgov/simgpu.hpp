#ifndef PGOV_SIMGPU_HPP
#define PGOV_SIMGPU_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pgov/config_space.hpp"
#include "pgov/power_model.hpp"
#include "pgov/quality.hpp"

namespace pgov::sim {

enum class PrimitiveKind { batches, vertices, fragments, all };

PrimitiveKind parse_primitive_kind(const std::string& text);
std::string to_string(PrimitiveKind kind);

/// Multipliers applied to each power pass's batch, vertex and fragment terms.
using KindFactors = std::vector<Primitives>;

/// Ground-truth GPU. Same functional form as the prediction model, with its
/// own constants, and a hard saturation: once any costed primitive stream
/// reaches its saturating count the GPU draws P_M.
struct HiddenPowerOracle {
    SaturationConstants saturation;
    std::vector<double> batch_cost;  // true k_b per power pass
    UnitCosts unit_costs;            // true chi, psi
    CostTable costs;                 // true Ins/Tex
    double noise_sigma = 0.0;        // fraction of (P_M - P_m)
    std::uint64_t seed = 0;

    /// Builds true costs from the public table. A distortion d != 1 scales
    /// even power passes by d and odd ones by 1/d.
    static HiddenPowerOracle from_public(const PassRoster& roster, SaturationConstants saturation,
                                         std::vector<double> batch_cost, UnitCosts unit_costs,
                                         const CostTable& public_costs, double distortion, double noise_sigma,
                                         std::uint64_t seed);

    void validate(const PassRoster& roster) const;

    PowerCoefficients true_coefficients(const PassRoster& roster, const RenderingConfiguration& config,
                                        const KindFactors& cost_factors) const;

    /// Noise-free power draw.
    double true_power(const PassRoster& roster, const RenderingConfiguration& config,
                      const PassPrimitives& primitives, const KindFactors& cost_factors) const;

    /// true_power plus seeded Gaussian noise truncated at 3 sigma. The draw is
    /// a pure function of (seed, stream, key).
    double measure(const PassRoster& roster, const RenderingConfiguration& config,
                   const PassPrimitives& primitives, const KindFactors& cost_factors, std::uint64_t stream,
                   std::uint64_t key) const;
};

/// Noise streams, so probing and runtime frames never share draws.
inline constexpr std::uint64_t kStreamFrames = 1;
inline constexpr std::uint64_t kStreamProbe = 2;
inline constexpr std::uint64_t kStreamSweep = 3;

/// mean * (1 + amplitude*sin(2*pi*frame/period + phase)) * (1 + jitter*u), u in [-1, 1].
struct CountCurve {
    double mean = 0.0;
    double amplitude = 0.0;
    double period = 1.0;  // frames
    double phase = 0.0;   // radians
    double jitter = 0.0;
};

struct PassCurves {
    CountCurve batches;
    CountCurve vertices;
    CountCurve fragments;
};

struct TraceEvent {
    enum class Target { costs, counts };
    std::int64_t frame = 0;
    std::size_t power_pass = 0;
    Target target = Target::costs;
    PrimitiveKind kind = PrimitiveKind::all;
    double factor = 1.0;
};

/// Scripted scene: per-frame base counts per power pass, per-level count
/// multipliers, and events that change costs or counts from a frame onwards.
struct SceneTrace {
    std::int64_t frame_count = 0;
    std::vector<PassCurves> curves;              // per power pass
    std::vector<std::vector<Primitives>> level_scale;  // [power pass][level]
    std::vector<TraceEvent> events;              // sorted by frame
    std::uint64_t seed = 0;

    void validate(const PassRoster& roster) const;

    /// Counts for `config` at `frame`, with resolution scaling on fragments.
    PassPrimitives primitives(const PassRoster& roster, std::int64_t frame, const RenderingConfiguration& config) const;

    /// Accumulated cost multipliers of all cost events up to `frame`.
    KindFactors cost_factors(const PassRoster& roster, std::int64_t frame) const;
};

/// Noisy power reading for `config` at trace frame `frame_index`.
double measure_power(const HiddenPowerOracle& oracle, const PassRoster& roster, const RenderingConfiguration& config,
                     std::int64_t frame_index, const SceneTrace& trace);

enum class DegradationKind { blur, noise, quantize, pixelate, coverage };

DegradationKind parse_degradation_kind(const std::string& text);
std::string to_string(DegradationKind kind);

struct PassDegradation {
    DegradationKind kind = DegradationKind::blur;
    std::vector<double> strength;  // per level; 0 at level 0, strictly increasing
};

/// Procedural frames. Each pass degrades its own horizontal band, so a pass's
/// degradation never touches pixels outside its band.
struct FrameSynthesizer {
    int width = 128;
    int height = 128;
    std::uint64_t seed = 0;
    std::vector<PassDegradation> passes;  // per roster pass

    void validate(const PassRoster& roster) const;

    /// Undegraded pattern for a scene variant and frame.
    FrameImage reference(std::int64_t frame, std::int64_t variant = 0) const;

    FrameImage render(const RenderingConfiguration& config, std::int64_t frame, std::int64_t variant = 0) const;

    /// Rows [first, last) owned by roster pass `pass`.
    std::pair<int, int> band(std::size_t pass) const;
};

struct MinPowerProbe {
    double p_min = 0.0;
    double noise = 0.0;  // sample standard deviation of one reading
    int frames = 0;
};

/// Averages `frames` readings of an empty scene. Throws std::invalid_argument
/// if `empty_scene` holds any primitive.
MinPowerProbe probe_min_power(const HiddenPowerOracle& oracle, const PassRoster& roster,
                              const PassPrimitives& empty_scene, int frames = 30);

struct ProbeOptions {
    double start_count = 1.0;
    double plateau_threshold = 0.005;  // fraction of the current reading
    int max_doublings = 40;
    int frames_per_step = 4;
    int refine_steps = 8;
    // Standard deviation of a single reading, usually MinPowerProbe::noise.
    // Widens the rise and plateau tests so noise is not taken for either.
    double reading_noise = 0.0;
};

struct RampReport {
    std::size_t power_pass = 0;
    PrimitiveKind kind = PrimitiveKind::batches;
    double saturating_count = 0.0;
    double max_power = 0.0;
    bool cap_reached = false;
};

struct SaturationProbe {
    SaturationConstants saturation;
    std::vector<RampReport> ramps;
    int frames = 0;
    bool any_cap_reached() const;
};

/// Ramps every used primitive of every power pass alone, doubling the count.
/// A ramp has risen once its reading clears p_min by the plateau threshold
/// (and by 20 standard errors under noise); after that, the first doubling
/// whose increase stays under the threshold (or 4 standard errors of a
/// difference) marks the plateau. The last doubling is then bisected for the
/// smallest count within twice the threshold of the plateau. P_M is the
/// highest reading seen.
SaturationProbe probe_saturation(const HiddenPowerOracle& oracle, const PassRoster& roster, double p_min,
                                 const ProbeOptions& options = {});

/// Dummy-scene sweep for generic fitting: sample j scales random per-stream
/// fractions of the probed saturating counts by a load that rises from near 0
/// to `max_load`, so readings cover P_m to near P_M. Rendered at best quality.
std::vector<FrameSample> generic_sweep(const HiddenPowerOracle& oracle, const PassRoster& roster,
                                       const SaturationConstants& probed, int count, double max_load,
                                       std::uint64_t seed);

}  // namespace pgov::sim

#endif  // PGOV_SIMGPU_HPP
