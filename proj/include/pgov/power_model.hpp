#ifndef PGOV_POWER_MODEL_HPP
#define PGOV_POWER_MODEL_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "pgov/config_space.hpp"

namespace pgov {

/// Batches, vertex-shader invocations and fragment-shader invocations of one pass.
struct Primitives {
    double batches = 0.0;
    double vertices = 0.0;
    double fragments = 0.0;
};

/// One entry per power pass (see PassRoster::power_passes()).
using PassPrimitives = std::vector<Primitives>;

/// Maps a configuration to the primitive counts it would produce for the current frame.
using PrimitivesProvider = std::function<PassPrimitives(const RenderingConfiguration&)>;

struct FrameSample {
    double measured_power = 0.0;
    PassPrimitives per_pass;
};

struct SaturationConstants {
    double p_min = 0.0;
    double p_max = 0.0;
    // Counts that saturate the GPU, one entry per power pass.
    std::vector<Primitives> per_pass;

    double range() const { return p_max - p_min; }
    /// Throws std::invalid_argument unless P_M > P_m > 0 and all counts are positive.
    void validate(std::size_t power_pass_count) const;
};

struct PassCoefficients {
    double k_b = 0.0;
    double k_v = 0.0;
    double k_f = 0.0;
};

struct PowerCoefficients {
    std::vector<PassCoefficients> per_pass;
};

/// Instruction and texel-access counts of a power pass's shaders.
struct PassCosts {
    double ins_v = 0.0;              // per vertex, same at every level
    std::vector<double> ins_f;       // per fragment, per level
    std::vector<double> tex_f;       // per fragment, per level
};

/// Per-power-pass shader costs. Vertex shaders never fetch texels.
struct CostTable {
    std::vector<PassCosts> per_pass;

    /// Checks shape against the roster, nonnegativity, and that cost never
    /// increases with the level index.
    void validate(const PassRoster& roster) const;
};

/// Cost of one instruction (chi) and one texel access (psi).
struct UnitCosts {
    double chi = 0.0;
    double psi = 0.0;
};

/// P_m + (P_M - P_m)(1 - exp(-sum alpha_i)), clipped so the result stays below P_M.
/// Primitive kinds a pass does not use contribute nothing.
double predict_power(const PassRoster& roster, const SaturationConstants& saturation,
                     const PowerCoefficients& coefficients, const PassPrimitives& primitives);

/// Sum of per-pass alpha terms; the linear part of the model.
double load_alpha(const PassRoster& roster, const SaturationConstants& saturation,
                  const PowerCoefficients& coefficients, const PassPrimitives& primitives);

inline constexpr double kDefaultClampFraction = 1e-3;

struct LinearizedSample {
    // Normalized primitives for every (power pass, used kind) column.
    std::vector<double> row;
    // -ln(1 - (P - P_m)/(P_M - P_m)) on the clamped power.
    double target = 0.0;
    bool clamped = false;
};

/// Regression columns: one per (power pass, primitive kind the pass uses).
struct ColumnLayout {
    enum class Kind { batches, vertices, fragments };
    struct Column {
        std::size_t power_pass;
        Kind kind;
    };
    std::vector<Column> columns;

    static ColumnLayout from(const PassRoster& roster);
};

LinearizedSample linearize_sample(const PassRoster& roster, const SaturationConstants& saturation,
                                  const FrameSample& sample, double clamp_fraction = kDefaultClampFraction);

struct FitResult {
    PowerCoefficients coefficients;
    double residual_norm = 0.0;
    int clamp_count = 0;
    bool rank_deficient = false;
    int rank = 0;
};

/// Least-squares fit of the per-pass coefficients on linearized samples, with
/// negative coefficients pinned to zero. Needs at least 3 samples per power pass.
FitResult fit_coefficients(const PassRoster& roster, const std::vector<FrameSample>& samples,
                           const SaturationConstants& saturation);

/// Same algorithm as fit_coefficients; samples come from a dummy-scene sweep
/// instead of a real-time window.
FitResult fit_generic(const PassRoster& roster, const std::vector<FrameSample>& samples,
                      const SaturationConstants& saturation);

struct UnitCostFit {
    UnitCosts costs;
    double residual_norm = 0.0;
    bool psi_indeterminate = false;
};

/// Solves k_v = chi*Ins_v and k_f = chi*Ins_f + psi*Tex_f over all power passes
/// at the levels of `fitted_config`.
UnitCostFit solve_unit_costs(const PassRoster& roster, const PowerCoefficients& coefficients,
                             const CostTable& cost_table, const RenderingConfiguration& fitted_config);

/// Derives coefficients for `config`: batch coefficients are carried over from
/// `fitted`, vertex and fragment coefficients come from unit costs.
PowerCoefficients coefficients_for_config(const PassRoster& roster, const UnitCosts& unit_costs,
                                          const CostTable& cost_table, const RenderingConfiguration& config,
                                          const PowerCoefficients& fitted);

/// Immutable snapshot of a fitted model.
class PowerModel {
  public:
    PowerModel(PassRoster roster, SaturationConstants saturation, CostTable cost_table,
               PowerCoefficients fitted, RenderingConfiguration fitted_config);

    const PassRoster& roster() const { return roster_; }
    const SaturationConstants& saturation() const { return saturation_; }
    const CostTable& cost_table() const { return cost_table_; }
    const PowerCoefficients& fitted_coefficients() const { return fitted_; }
    const RenderingConfiguration& fitted_config() const { return fitted_config_; }
    const UnitCostFit& unit_costs() const { return unit_costs_; }

    /// Fitted coefficients for the fitted configuration, reused ones otherwise.
    PowerCoefficients coefficients_for(const RenderingConfiguration& config) const;
    double predict(const RenderingConfiguration& config, const PassPrimitives& primitives) const;

  private:
    PassRoster roster_;
    SaturationConstants saturation_;
    CostTable cost_table_;
    PowerCoefficients fitted_;
    RenderingConfiguration fitted_config_;
    UnitCostFit unit_costs_;
};

/// One prediction per configuration, indexed like enumerate_configurations().
std::vector<double> predict_all(const PowerModel& model, const PrimitivesProvider& primitives);

}  // namespace pgov

#endif  // PGOV_POWER_MODEL_HPP
