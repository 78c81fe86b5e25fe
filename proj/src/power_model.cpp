#include "pgov/power_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pgov/least_squares.hpp"

namespace pgov {

namespace {

void check_primitives_shape(const PassRoster& roster, const PassPrimitives& primitives) {
    if (primitives.size() != roster.power_pass_count())
        throw std::invalid_argument("expected " + std::to_string(roster.power_pass_count()) +
                                    " per-pass primitive entries, got " + std::to_string(primitives.size()));
}

double column_value(const ColumnLayout::Column& column, const Primitives& prims, const Primitives& sat) {
    switch (column.kind) {
        case ColumnLayout::Kind::batches: return prims.batches / sat.batches;
        case ColumnLayout::Kind::vertices: return prims.vertices / sat.vertices;
        case ColumnLayout::Kind::fragments: return prims.fragments / sat.fragments;
    }
    return 0.0;
}

double& coefficient_slot(PassCoefficients& c, ColumnLayout::Kind kind) {
    switch (kind) {
        case ColumnLayout::Kind::batches: return c.k_b;
        case ColumnLayout::Kind::vertices: return c.k_v;
        case ColumnLayout::Kind::fragments: return c.k_f;
    }
    return c.k_f;
}

}  // namespace

void SaturationConstants::validate(std::size_t power_pass_count) const {
    if (!(p_min > 0.0)) throw std::invalid_argument("P_m must be positive");
    if (!(p_max > p_min)) throw std::invalid_argument("P_M must exceed P_m");
    if (per_pass.size() != power_pass_count)
        throw std::invalid_argument("saturation constants: expected " + std::to_string(power_pass_count) +
                                    " passes, got " + std::to_string(per_pass.size()));
    for (const auto& s : per_pass)
        if (!(s.batches > 0.0 && s.vertices > 0.0 && s.fragments > 0.0))
            throw std::invalid_argument("saturation counts must be positive");
}

void CostTable::validate(const PassRoster& roster) const {
    if (per_pass.size() != roster.power_pass_count())
        throw std::invalid_argument("cost table: expected " + std::to_string(roster.power_pass_count()) +
                                    " power passes, got " + std::to_string(per_pass.size()));
    for (std::size_t p = 0; p < per_pass.size(); ++p) {
        const auto& costs = per_pass[p];
        const auto& desc = roster.pass(roster.power_passes()[p]);
        const auto levels = static_cast<std::size_t>(desc.level_count);
        if (costs.ins_f.size() != levels || costs.tex_f.size() != levels)
            throw std::invalid_argument("cost table: pass " + desc.name + " needs one entry per level");
        if (costs.ins_v < 0.0) throw std::invalid_argument("cost table: negative Ins_v for " + desc.name);
        for (std::size_t l = 0; l < levels; ++l) {
            if (costs.ins_f[l] < 0.0 || costs.tex_f[l] < 0.0)
                throw std::invalid_argument("cost table: negative entry for " + desc.name);
            if (l > 0 && (costs.ins_f[l] > costs.ins_f[l - 1] || costs.tex_f[l] > costs.tex_f[l - 1]))
                throw std::invalid_argument("cost table: " + desc.name +
                                            " costs must not increase with the level index");
        }
    }
}

ColumnLayout ColumnLayout::from(const PassRoster& roster) {
    ColumnLayout layout;
    for (std::size_t p = 0; p < roster.power_pass_count(); ++p) {
        const auto& desc = roster.pass(roster.power_passes()[p]);
        if (desc.uses_batches) layout.columns.push_back({p, Kind::batches});
        if (desc.uses_vertices) layout.columns.push_back({p, Kind::vertices});
        if (desc.uses_fragments) layout.columns.push_back({p, Kind::fragments});
    }
    return layout;
}

double load_alpha(const PassRoster& roster, const SaturationConstants& saturation,
                  const PowerCoefficients& coefficients, const PassPrimitives& primitives) {
    check_primitives_shape(roster, primitives);
    if (coefficients.per_pass.size() != roster.power_pass_count())
        throw std::invalid_argument("coefficient count does not match the roster");
    double alpha = 0.0;
    for (std::size_t p = 0; p < roster.power_pass_count(); ++p) {
        const auto& desc = roster.pass(roster.power_passes()[p]);
        const auto& k = coefficients.per_pass[p];
        const auto& x = primitives[p];
        const auto& sat = saturation.per_pass[p];
        if (desc.uses_batches) alpha += k.k_b * x.batches / sat.batches;
        if (desc.uses_vertices) alpha += k.k_v * x.vertices / sat.vertices;
        if (desc.uses_fragments) alpha += k.k_f * x.fragments / sat.fragments;
    }
    return alpha;
}

double predict_power(const PassRoster& roster, const SaturationConstants& saturation,
                     const PowerCoefficients& coefficients, const PassPrimitives& primitives) {
    saturation.validate(roster.power_pass_count());
    const double alpha = load_alpha(roster, saturation, coefficients, primitives);
    const double p = saturation.p_min - saturation.range() * std::expm1(-alpha);
    // 1 - exp(-alpha) rounds to 1 for large alpha; the model never reaches P_M.
    return std::min(std::max(p, saturation.p_min), std::nextafter(saturation.p_max, saturation.p_min));
}

LinearizedSample linearize_sample(const PassRoster& roster, const SaturationConstants& saturation,
                                  const FrameSample& sample, double clamp_fraction) {
    check_primitives_shape(roster, sample.per_pass);
    const double range = saturation.range();
    const double eps = clamp_fraction * range;
    const double lo = saturation.p_min + eps;
    const double hi = saturation.p_max - eps;

    LinearizedSample out;
    double power = sample.measured_power;
    if (power < lo || power > hi) {
        out.clamped = true;
        power = std::clamp(power, lo, hi);
    }
    out.target = -std::log1p(-(power - saturation.p_min) / range);

    const auto layout = ColumnLayout::from(roster);
    out.row.reserve(layout.columns.size());
    for (const auto& column : layout.columns)
        out.row.push_back(column_value(column, sample.per_pass[column.power_pass], saturation.per_pass[column.power_pass]));
    return out;
}

FitResult fit_coefficients(const PassRoster& roster, const std::vector<FrameSample>& samples,
                           const SaturationConstants& saturation) {
    saturation.validate(roster.power_pass_count());
    const std::size_t needed = 3 * roster.power_pass_count();
    if (samples.size() < needed)
        throw std::invalid_argument("fit needs at least " + std::to_string(needed) + " samples, got " +
                                    std::to_string(samples.size()));

    const auto layout = ColumnLayout::from(roster);
    const auto rows = static_cast<Eigen::Index>(samples.size());
    const auto cols = static_cast<Eigen::Index>(layout.columns.size());
    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd target(rows);

    FitResult result;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto lin = linearize_sample(roster, saturation, samples[static_cast<std::size_t>(r)]);
        if (lin.clamped) ++result.clamp_count;
        for (Eigen::Index c = 0; c < cols; ++c) design(r, c) = lin.row[static_cast<std::size_t>(c)];
        target(r) = lin.target;
    }

    const auto ls = nonnegative_least_squares(design, target);
    result.coefficients.per_pass.assign(roster.power_pass_count(), PassCoefficients{});
    for (Eigen::Index c = 0; c < cols; ++c) {
        const auto& column = layout.columns[static_cast<std::size_t>(c)];
        coefficient_slot(result.coefficients.per_pass[column.power_pass], column.kind) = ls.solution(c);
    }
    result.residual_norm = ls.residual_norm;
    result.rank_deficient = ls.rank_deficient;
    result.rank = static_cast<int>(ls.rank);
    return result;
}

FitResult fit_generic(const PassRoster& roster, const std::vector<FrameSample>& samples,
                      const SaturationConstants& saturation) {
    return fit_coefficients(roster, samples, saturation);
}

UnitCostFit solve_unit_costs(const PassRoster& roster, const PowerCoefficients& coefficients,
                             const CostTable& cost_table, const RenderingConfiguration& fitted_config) {
    roster.validate(fitted_config);
    cost_table.validate(roster);
    if (coefficients.per_pass.size() != roster.power_pass_count())
        throw std::invalid_argument("coefficient count does not match the roster");

    std::vector<std::array<double, 2>> lhs;
    std::vector<double> rhs;
    bool any_texel = false;
    for (std::size_t p = 0; p < roster.power_pass_count(); ++p) {
        const auto roster_index = roster.power_passes()[p];
        const auto& desc = roster.pass(roster_index);
        const auto& costs = cost_table.per_pass[p];
        const auto level = static_cast<std::size_t>(fitted_config.levels[roster_index]);
        if (desc.uses_vertices) {
            lhs.push_back({costs.ins_v, 0.0});
            rhs.push_back(coefficients.per_pass[p].k_v);
        }
        if (desc.uses_fragments) {
            lhs.push_back({costs.ins_f[level], costs.tex_f[level]});
            rhs.push_back(coefficients.per_pass[p].k_f);
            any_texel = any_texel || costs.tex_f[level] > 0.0;
        }
    }

    UnitCostFit out;
    out.psi_indeterminate = !any_texel;
    const auto rows = static_cast<Eigen::Index>(lhs.size());
    const Eigen::Index cols = any_texel ? 2 : 1;
    Eigen::MatrixXd design(rows, cols);
    Eigen::VectorXd target(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) design(r, c) = lhs[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        target(r) = rhs[static_cast<std::size_t>(r)];
    }
    const auto ls = nonnegative_least_squares(design, target);
    out.costs.chi = ls.solution(0);
    out.costs.psi = any_texel ? ls.solution(1) : 0.0;
    out.residual_norm = ls.residual_norm;
    return out;
}

PowerCoefficients coefficients_for_config(const PassRoster& roster, const UnitCosts& unit_costs,
                                          const CostTable& cost_table, const RenderingConfiguration& config,
                                          const PowerCoefficients& fitted) {
    roster.validate(config);
    PowerCoefficients out;
    out.per_pass.resize(roster.power_pass_count());
    for (std::size_t p = 0; p < roster.power_pass_count(); ++p) {
        const auto roster_index = roster.power_passes()[p];
        const auto& costs = cost_table.per_pass[p];
        const auto level = static_cast<std::size_t>(config.levels[roster_index]);
        out.per_pass[p].k_b = fitted.per_pass[p].k_b;
        out.per_pass[p].k_v = unit_costs.chi * costs.ins_v;
        out.per_pass[p].k_f = unit_costs.chi * costs.ins_f[level] + unit_costs.psi * costs.tex_f[level];
    }
    return out;
}

PowerModel::PowerModel(PassRoster roster, SaturationConstants saturation, CostTable cost_table,
                       PowerCoefficients fitted, RenderingConfiguration fitted_config)
    : roster_(std::move(roster)),
      saturation_(std::move(saturation)),
      cost_table_(std::move(cost_table)),
      fitted_(std::move(fitted)),
      fitted_config_(std::move(fitted_config)) {
    saturation_.validate(roster_.power_pass_count());
    unit_costs_ = solve_unit_costs(roster_, fitted_, cost_table_, fitted_config_);
}

PowerCoefficients PowerModel::coefficients_for(const RenderingConfiguration& config) const {
    if (config == fitted_config_) return fitted_;
    return coefficients_for_config(roster_, unit_costs_.costs, cost_table_, config, fitted_);
}

double PowerModel::predict(const RenderingConfiguration& config, const PassPrimitives& primitives) const {
    return predict_power(roster_, saturation_, coefficients_for(config), primitives);
}

std::vector<double> predict_all(const PowerModel& model, const PrimitivesProvider& primitives) {
    const auto& roster = model.roster();
    std::vector<double> out;
    out.reserve(roster.config_count());
    for (const auto& config : enumerate_configurations(roster)) out.push_back(model.predict(config, primitives(config)));
    return out;
}

}  // namespace pgov
