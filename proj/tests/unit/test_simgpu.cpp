#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pgov/scenario.hpp"
#include "pgov/simgpu.hpp"

using namespace pgov;
using namespace pgov::sim;

namespace {

const Scenario& demo() {
    static const Scenario s = load_scenario(std::string(PGOV_SCENARIO_DIR) + "/demo.json");
    return s;
}

HiddenPowerOracle quiet(const Scenario& s) {
    auto o = s.oracle;
    o.noise_sigma = 0.0;
    return o;
}

KindFactors ones(std::size_t n) { return KindFactors(n, Primitives{1.0, 1.0, 1.0}); }

// Alpha written out from the cost table, independent of coefficients_for_config.
double hand_alpha(const Scenario& s, const RenderingConfiguration& c, const PassPrimitives& x) {
    const auto& o = s.oracle;
    double alpha = 0.0;
    for (std::size_t p = 0; p < x.size(); ++p) {
        const auto& d = s.roster.pass(s.roster.power_passes()[p]);
        const auto& costs = o.costs.per_pass[p];
        const auto& sat = o.saturation.per_pass[p];
        const auto level = static_cast<std::size_t>(c[s.roster.power_passes()[p]]);
        if (d.uses_batches) alpha += o.batch_cost[p] * x[p].batches / sat.batches;
        if (d.uses_vertices) alpha += o.unit_costs.chi * costs.ins_v * x[p].vertices / sat.vertices;
        if (d.uses_fragments)
            alpha += (o.unit_costs.chi * costs.ins_f[level] + o.unit_costs.psi * costs.tex_f[level]) * x[p].fragments /
                     sat.fragments;
    }
    return alpha;
}

}  // namespace

TEST(Oracle, TruePowerMatchesHandFormula) {
    const auto& s = demo();
    const auto o = quiet(s);
    for (std::size_t idx : {0u, 100u, 364u, 728u}) {
        const auto c = s.roster.config_at(idx);
        for (std::int64_t f : {0, 50, 999}) {
            const auto x = s.trace.primitives(s.roster, f, c);
            const double want = oracle::saturating_power(20.0, 120.0, hand_alpha(s, c, x));
            EXPECT_NEAR(o.true_power(s.roster, c, x, ones(5)), want, 1e-9);
            EXPECT_EQ(measure_power(o, s.roster, c, f, s.trace), o.true_power(s.roster, c, x, ones(5)));
        }
    }
}

TEST(Oracle, EmptySceneIsMinimumPower) {
    const auto& s = demo();
    EXPECT_EQ(quiet(s).true_power(s.roster, s.roster.best(), PassPrimitives(5), ones(5)), 20.0);
}

TEST(Oracle, HardSaturation) {
    const auto& s = demo();
    const auto o = quiet(s);
    PassPrimitives x(5);
    x[1].vertices = 3.5e6;  // reflections vertex saturation
    EXPECT_EQ(o.true_power(s.roster, s.roster.best(), x, ones(5)), 120.0);
    x[1].vertices = 3.5e6 * 0.999;
    EXPECT_LT(o.true_power(s.roster, s.roster.best(), x, ones(5)), 120.0);
    // A stream with zero cost never saturates.
    auto factors = ones(5);
    factors[1].vertices = 0.0;
    x[1].vertices = 1e9;
    EXPECT_EQ(o.true_power(s.roster, s.roster.best(), x, factors), 20.0);
}

TEST(Oracle, MeasurementsAreDeterministicAndNoisy) {
    const auto& s = demo();
    const auto c = s.roster.config_at(200);
    std::vector<double> residual;
    for (std::int64_t f = 0; f < 1000; ++f) {
        const double a = measure_power(s.oracle, s.roster, c, f, s.trace);
        EXPECT_EQ(a, measure_power(s.oracle, s.roster, c, f, s.trace));
        const double truth = s.oracle.true_power(s.roster, c, s.trace.primitives(s.roster, f, c), ones(5));
        residual.push_back(a - truth);
        EXPECT_LE(std::abs(a - truth), 3.0 * 0.5 + 1e-12);
    }
    const double mean = std::accumulate(residual.begin(), residual.end(), 0.0) / residual.size();
    double var = 0.0;
    for (double r : residual) var += (r - mean) * (r - mean);
    EXPECT_NEAR(std::sqrt(var / (residual.size() - 1)), 0.5, 0.05);
    EXPECT_NEAR(mean, 0.0, 0.05);

    auto other = s.oracle;
    other.seed += 1;
    EXPECT_NE(measure_power(other, s.roster, c, 10, s.trace), measure_power(s.oracle, s.roster, c, 10, s.trace));
    EXPECT_THROW(measure_power(s.oracle, s.roster, c, s.trace.frame_count, s.trace), std::out_of_range);
}

TEST(Oracle, DistortionScalesAlternatePasses) {
    const auto& s = demo();
    const auto o = HiddenPowerOracle::from_public(s.roster, s.oracle.saturation, s.oracle.batch_cost,
                                                  s.oracle.unit_costs, s.cost_table, 2.0, 0.0, 1);
    EXPECT_DOUBLE_EQ(o.costs.per_pass[0].ins_f[0], 600.0);
    EXPECT_DOUBLE_EQ(o.costs.per_pass[1].ins_f[0], 170.0);
    EXPECT_THROW(HiddenPowerOracle::from_public(s.roster, s.oracle.saturation, s.oracle.batch_cost,
                                                s.oracle.unit_costs, s.cost_table, 0.0, 0.0, 1),
                 std::invalid_argument);
}

TEST(Trace, EventsApplyFromTheirFrame) {
    auto s = demo();
    s.trace.events = {{10, 1, TraceEvent::Target::costs, PrimitiveKind::fragments, 3.0},
                      {20, 0, TraceEvent::Target::counts, PrimitiveKind::all, 2.0}};
    const auto c = s.roster.best();
    EXPECT_EQ(s.trace.cost_factors(s.roster, 9)[1].fragments, 1.0);
    EXPECT_EQ(s.trace.cost_factors(s.roster, 10)[1].fragments, 3.0);
    EXPECT_EQ(s.trace.cost_factors(s.roster, 10)[1].vertices, 1.0);
    auto before = demo().trace.primitives(s.roster, 25, c);
    auto after = s.trace.primitives(s.roster, 25, c);
    EXPECT_DOUBLE_EQ(after[0].batches, 2.0 * before[0].batches);
    EXPECT_DOUBLE_EQ(after[0].fragments, 2.0 * before[0].fragments);
    EXPECT_DOUBLE_EQ(after[1].fragments, before[1].fragments);
}

TEST(Trace, ResolutionScalesFragmentsOnly) {
    const auto& s = demo();
    auto lo = s.roster.best();
    lo.levels[0] = 2;
    const auto a = s.trace.primitives(s.roster, 7, s.roster.best());
    const auto b = s.trace.primitives(s.roster, 7, lo);
    for (std::size_t p = 0; p < 5; ++p) {
        EXPECT_DOUBLE_EQ(b[p].fragments, 0.36 * a[p].fragments);
        EXPECT_DOUBLE_EQ(b[p].batches, a[p].batches);
    }
}

TEST(Synthesizer, BestQualityIsTheReference) {
    const auto& syn = demo().synthesizer;
    for (std::int64_t f : {0, 33, 500}) EXPECT_EQ(syn.render(demo().roster.best(), f), syn.reference(f));
}

TEST(Synthesizer, DegradationStaysInItsBand) {
    const auto& s = demo();
    for (std::int64_t f : {0, 77}) {
        const auto ref = s.synthesizer.reference(f);
        for (std::size_t i = 0; i < s.roster.size(); ++i) {
            const auto img = s.synthesizer.render(single_degradation_config(s.roster, i, 2), f);
            const auto [y0, y1] = s.synthesizer.band(i);
            bool changed = false;
            for (int y = 0; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x) {
                    if (y < y0 || y >= y1)
                        ASSERT_EQ(img.at(x, y), ref.at(x, y)) << "pass " << i << " row " << y;
                    else
                        changed |= img.at(x, y) != ref.at(x, y);
                }
            EXPECT_TRUE(changed) << "pass " << i;
        }
    }
}

TEST(Synthesizer, ErrorsAreRoughlyAdditive) {
    const auto& s = demo();
    const auto ref = s.synthesizer.reference(40);
    for (std::size_t idx = 0; idx < s.roster.config_count(); idx += 37) {
        const auto c = s.roster.config_at(idx);
        double sum = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i)
            if (c[i] > 0) sum += quality_error(ref, s.synthesizer.render(single_degradation_config(s.roster, i, c[i]), 40));
        const double joint = quality_error(ref, s.synthesizer.render(c, 40));
        EXPECT_LE(std::abs(joint - sum), 0.15 * std::max(sum, 1e-3) + 1e-9) << c.to_string();
    }
}

TEST(Synthesizer, ErrorGrowsWithLevel) {
    const auto& s = demo();
    const auto ref = s.synthesizer.reference(5, 1);
    for (std::size_t i = 0; i < s.roster.size(); ++i) {
        const double e1 = quality_error(ref, s.synthesizer.render(single_degradation_config(s.roster, i, 1), 5, 1));
        const double e2 = quality_error(ref, s.synthesizer.render(single_degradation_config(s.roster, i, 2), 5, 1));
        EXPECT_GT(e1, 0.0);
        EXPECT_GT(e2, e1);
    }
}

TEST(Probe, MinimumPowerAverage) {
    const auto& s = demo();
    const auto p = probe_min_power(s.oracle, s.roster, PassPrimitives(5), 30);
    EXPECT_EQ(p.frames, 30);
    // 4 standard errors of a 30-frame mean.
    EXPECT_NEAR(p.p_min, 20.0, 4.0 * 0.5 / std::sqrt(30.0));
    EXPECT_NEAR(p.noise, 0.5, 0.25);
    EXPECT_EQ(probe_min_power(quiet(s), s.roster, PassPrimitives(5), 30).p_min, 20.0);
    PassPrimitives busy(5);
    busy[0].batches = 1;
    EXPECT_THROW(probe_min_power(s.oracle, s.roster, busy), std::invalid_argument);
}

TEST(Probe, SaturationWithinFactorTwo) {
    const auto& s = demo();
    for (double sigma : {0.0, 0.005}) {
        auto o = s.oracle;
        o.noise_sigma = sigma;
        const auto m = probe_min_power(o, s.roster, PassPrimitives(5), 30);
        ProbeOptions opt;
        opt.reading_noise = m.noise;
        const auto r = probe_saturation(o, s.roster, m.p_min, opt);
        EXPECT_FALSE(r.any_cap_reached());
        EXPECT_NEAR(r.saturation.p_max, 120.0, 0.01 * 120.0);
        for (std::size_t p = 0; p < 5; ++p) {
            const auto& got = r.saturation.per_pass[p];
            const auto& want = o.saturation.per_pass[p];
            const auto& d = s.roster.pass(s.roster.power_passes()[p]);
            if (d.uses_batches) {
                EXPECT_LE(got.batches, 2.0 * want.batches);
                EXPECT_GE(got.batches, 0.5 * want.batches);
            }
            if (d.uses_vertices) {
                EXPECT_LE(got.vertices, 2.0 * want.vertices);
                EXPECT_GE(got.vertices, 0.5 * want.vertices);
            }
            EXPECT_LE(got.fragments, 2.0 * want.fragments);
            EXPECT_GE(got.fragments, 0.5 * want.fragments);
        }
    }
}

TEST(Probe, ZeroCostStreamHitsTheCap) {
    auto s = demo();
    s.oracle.batch_cost[1] = 0.0;
    ProbeOptions opt;
    opt.max_doublings = 30;
    const auto r = probe_saturation(quiet(s), s.roster, 20.0, opt);
    ASSERT_TRUE(r.any_cap_reached());
    int capped = 0;
    for (const auto& ramp : r.ramps)
        if (ramp.cap_reached) {
            ++capped;
            EXPECT_EQ(ramp.power_pass, 1u);
            EXPECT_EQ(ramp.kind, PrimitiveKind::batches);
        }
    EXPECT_EQ(capped, 1);
}

TEST(Sweep, CoversTheRangeDeterministically) {
    const auto& s = demo();
    const auto a = generic_sweep(s.oracle, s.roster, s.oracle.saturation, 60, 0.6, 9);
    const auto b = generic_sweep(s.oracle, s.roster, s.oracle.saturation, 60, 0.6, 9);
    ASSERT_EQ(a.size(), 60u);
    double lo = 1e9, hi = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        EXPECT_EQ(a[j].measured_power, b[j].measured_power);
        lo = std::min(lo, a[j].measured_power);
        hi = std::max(hi, a[j].measured_power);
        EXPECT_EQ(a[j].per_pass[4].batches, 0.0);
    }
    EXPECT_LT(lo, 30.0);
    EXPECT_GT(hi, 70.0);
    EXPECT_THROW(generic_sweep(s.oracle, s.roster, s.oracle.saturation, -1, 0.6, 9), std::invalid_argument);
}
