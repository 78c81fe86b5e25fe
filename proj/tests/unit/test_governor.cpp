#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pgov/governor.hpp"

using namespace pgov;

namespace {

PassRoster small_roster() {
    return PassRoster({{"a", 3, true, true, true, false, {}},
                       {"b", 3, true, true, true, false, {}},
                       {"c", 2, false, false, true, false, {}}});
}

SaturationConstants small_saturation() {
    return {20.0, 85.0, {{1000, 1e6, 2e6}, {800, 9e5, 1.5e6}, {1, 1, 1e6}}};
}

CostTable small_costs() {
    return {{{100, {200, 120, 40}, {30, 15, 5}}, {90, {260, 100, 30}, {20, 10, 4}}, {0, {80, 10}, {8, 1}}}};
}

const UnitCosts kTrueUnits{0.002, 0.01};
const std::vector<double> kTrueBatch{0.3, 0.2, 0.0};

// Ground truth written out directly from the cost table.
double truth(const RenderingConfiguration& c, const PassPrimitives& x, double scale = 1.0) {
    const auto s = small_saturation();
    const auto t = small_costs();
    double alpha = 0.0;
    for (std::size_t p = 0; p < 3; ++p) {
        const auto l = static_cast<std::size_t>(c[p]);
        alpha += kTrueBatch[p] * x[p].batches / s.per_pass[p].batches;
        if (p < 2) alpha += kTrueUnits.chi * t.per_pass[p].ins_v * x[p].vertices / s.per_pass[p].vertices;
        alpha += (kTrueUnits.chi * t.per_pass[p].ins_f[l] + kTrueUnits.psi * t.per_pass[p].tex_f[l]) * x[p].fragments /
                 s.per_pass[p].fragments;
    }
    return oracle::saturating_power(s.p_min, s.p_max, scale * alpha);
}

PassPrimitives scene(std::int64_t frame, const RenderingConfiguration& c) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(frame) * 7919u + 1u);
    std::uniform_real_distribution<double> u(0.6, 1.4);
    PassPrimitives x(3);
    x[0] = {200 * u(rng), 2e5 * u(rng), 6e5 * u(rng) * (c[0] == 2 ? 0.7 : 1.0)};
    x[1] = {150 * u(rng), 1.5e5 * u(rng), 5e5 * u(rng)};
    x[2] = {0, 0, 7e5 * u(rng)};
    return x;
}

std::shared_ptr<const PowerModel> model_with(double coefficient_scale, const RenderingConfiguration& at) {
    const auto roster = small_roster();
    PowerCoefficients base{{{kTrueBatch[0], 0, 0}, {kTrueBatch[1], 0, 0}, {0, 0, 0}}};
    auto k = coefficients_for_config(roster, kTrueUnits, small_costs(), at, base);
    for (auto& c : k.per_pass) {
        c.k_b *= coefficient_scale;
        c.k_v *= coefficient_scale;
        c.k_f *= coefficient_scale;
    }
    return std::make_shared<const PowerModel>(roster, small_saturation(), small_costs(), k, at);
}

ErrorModel error_model() {
    const auto roster = small_roster();
    auto m = ErrorModel::empty(roster, ErrorRatioTable::uniform(roster));
    m.ratios.ratios = {{0, 0.4, 1}, {0, 0.5, 1}, {0, 1}};
    return m.with_worst_error(0, 0.06, 0).with_worst_error(1, 0.04, 0).with_worst_error(2, 0.02, 0);
}

FrameInputs inputs_at(std::int64_t frame, double truth_scale = 1.0) {
    return {frame, [frame](const RenderingConfiguration& c) { return scene(frame, c); },
            [frame, truth_scale](const RenderingConfiguration& c) { return truth(c, scene(frame, c), truth_scale); }};
}

std::vector<std::string> timeline(const std::vector<FrameRecord>& records) {
    std::vector<std::string> out;
    for (const auto& r : records)
        for (auto e : r.events)
            if (e != GovernorEvent::background && e != GovernorEvent::quality_update)
                out.push_back(to_string(e) + "@" + std::to_string(r.frame));
    return out;
}

}  // namespace

TEST(Budget, FractionOfRange) {
    GovernorConfig c;
    c.budget_percent = 0.4;
    EXPECT_DOUBLE_EQ(budget_watts(c, {20.0, 85.0, {}}), 46.0);
    c.budget_percent = 0.0;
    EXPECT_DOUBLE_EQ(budget_watts(c, {20.0, 85.0, {}}), 20.0);
    c.budget_percent = 1.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Config, FramesForRoundsUp) {
    GovernorConfig c;
    EXPECT_EQ(c.frames_for(2.0), 60);
    EXPECT_EQ(c.filter_frames(), 60);
    EXPECT_EQ(c.frames_for(0.0026), 1);
    EXPECT_EQ(c.frames_for(0.05), 2);
    EXPECT_EQ(c.frames_for(0.0), 0);
    EXPECT_EQ(parse_selection_mode("error"), SelectionMode::error_budget);
    EXPECT_THROW(parse_selection_mode("watts"), std::invalid_argument);
}

TEST(Selection, MatchesBruteForceOnRandomTables) {
    const auto roster = small_roster();
    auto em = error_model();
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(20.0, 85.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> power(roster.config_count());
        for (auto& p : power) p = u(rng);
        std::vector<double> error;
        for (std::size_t i = 0; i < power.size(); ++i)
            error.push_back(oracle::additive_error(em.ratios.ratios, em.worst_error, roster.config_at(i).levels));
        for (double budget : {15.0, 30.0, 46.0, 70.0, 100.0}) {
            const auto got = select_configuration(roster, power, em, budget);
            const auto want = oracle::brute_force_power(power, error, budget);
            EXPECT_EQ(got.index, want.index);
            EXPECT_EQ(got.infeasible, want.infeasible);
            EXPECT_EQ(got.config, roster.config_at(want.index));
            if (!got.infeasible) EXPECT_LT(got.predicted_power, budget);
        }
        for (double eb : {0.0, 0.03, 0.07, 0.2}) {
            const auto got = select_configuration_error_budget(roster, power, em, eb);
            const auto want = oracle::brute_force_error(power, error, eb);
            EXPECT_EQ(got.index, want.index);
            EXPECT_EQ(got.infeasible, want.infeasible);
        }
    }
}

TEST(Selection, TiesAreBrokenDeterministically) {
    const auto roster = small_roster();
    auto em = error_model();
    // Equal worst errors give many equal estimates.
    em = em.with_worst_error(0, 0.25, 0).with_worst_error(1, 0.25, 0).with_worst_error(2, 0.25, 0);
    em.ratios.ratios = {{0, 0.5, 1}, {0, 0.5, 1}, {0, 1}};
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<int> q(80, 300);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> power(roster.config_count());
        for (auto& p : power) p = 0.25 * q(rng);
        std::vector<double> error;
        for (std::size_t i = 0; i < power.size(); ++i) error.push_back(estimate_error(em, roster.config_at(i)));
        for (double budget : {30.0, 45.0, 60.0}) {
            EXPECT_EQ(select_configuration(roster, power, em, budget).index,
                      oracle::brute_force_power(power, error, budget).index);
        }
        EXPECT_EQ(select_configuration_error_budget(roster, power, em, 0.3).index,
                  oracle::brute_force_error(power, error, 0.3).index);
    }
}

TEST(Selection, BudgetIsStrict) {
    const auto roster = small_roster();
    std::vector<double> power(roster.config_count(), 50.0);
    power[5] = 40.0;
    const auto got = select_configuration(roster, power, error_model(), 40.0);
    EXPECT_TRUE(got.infeasible);
    EXPECT_EQ(got.index, 5u);
    EXPECT_FALSE(select_configuration(roster, power, error_model(), 40.0001).infeasible);
    EXPECT_THROW(select_configuration(roster, {}, error_model(), 40.0), std::invalid_argument);
    EXPECT_THROW(select_configuration(roster, std::vector<double>(3, 1.0), error_model(), 40.0), std::invalid_argument);
}

TEST(Filter, BlendsAndRounds) {
    const RenderingConfiguration from{{0, 2, 0}};
    const RenderingConfiguration to{{2, 0, 1}};
    EXPECT_EQ(temporal_filter(from, to, 0.0, 2.0), from);
    EXPECT_EQ(temporal_filter(from, to, 2.0, 2.0), to);
    EXPECT_EQ(temporal_filter(from, to, 1.0, 2.0), (RenderingConfiguration{{1, 1, 1}}));  // 0.5 rounds up
    EXPECT_EQ(temporal_filter(from, to, 0.5, 2.0), (RenderingConfiguration{{1, 2, 0}}));  // 0.5, 1.5, 0.25
    EXPECT_EQ(temporal_filter(from, to, 0.4, 2.0), (RenderingConfiguration{{0, 2, 0}}));
    EXPECT_THROW(temporal_filter(from, to, 2.1, 2.0), std::invalid_argument);
    EXPECT_THROW(temporal_filter(from, to, -0.1, 2.0), std::invalid_argument);
    EXPECT_THROW(temporal_filter(from, RenderingConfiguration{{0}}, 1.0, 2.0), std::invalid_argument);
}

TEST(Check, ThresholdIsStrict) {
    const auto roster = small_roster();
    const auto at = roster.best();
    const auto model = model_with(1.0, at);
    std::vector<FrameSample> exact, high, low;
    const double r = small_saturation().range();
    for (int f = 0; f < 10; ++f) {
        const auto x = scene(f, at);
        const double p = truth(at, x);
        exact.push_back({p, x});
        high.push_back({p + 0.1 * r * 1.001, x});
        low.push_back({p - 0.1 * r * 0.999, x});
    }
    EXPECT_NEAR(mean_prediction_error(*model, at, exact), 0.0, 1e-9);
    EXPECT_FALSE(accuracy_check(*model, at, exact, 0.1));
    EXPECT_TRUE(accuracy_check(*model, at, high, 0.1));
    EXPECT_FALSE(accuracy_check(*model, at, low, 0.1));
    EXPECT_THROW(accuracy_check(*model, at, {}, 0.1), std::invalid_argument);
}

TEST(Check, ReusedModelPredictsEveryConfiguration) {
    const auto roster = small_roster();
    const auto model = model_with(1.0, roster.best());
    for (std::size_t i = 0; i < roster.config_count(); ++i) {
        const auto c = roster.config_at(i);
        const auto x = scene(static_cast<std::int64_t>(i), c);
        EXPECT_NEAR(model->predict(c, x), truth(c, x), 1e-9) << c.to_string();
    }
}

TEST(Governor, RejectsBadConstruction) {
    const auto roster = small_roster();
    GovernorConfig c;
    c.fitting_window = 8;
    EXPECT_THROW(Governor(c, model_with(1.0, roster.best()), error_model(), roster.worst()), std::invalid_argument);
    EXPECT_THROW(Governor(GovernorConfig{}, nullptr, error_model(), roster.worst()), std::invalid_argument);
    EXPECT_THROW(Governor(GovernorConfig{}, model_with(1.0, roster.best()),
                          ErrorModel::empty(PassRoster::default_roster(), ErrorRatioTable::uniform(PassRoster::default_roster())),
                          roster.worst()),
                 std::invalid_argument);
    EXPECT_THROW(Governor(GovernorConfig{}, model_with(1.0, roster.best()), error_model(), RenderingConfiguration{{0}}),
                 std::invalid_argument);
}

TEST(Governor, RefitTimeline) {
    const auto roster = small_roster();
    Governor g(GovernorConfig{}, model_with(1.6, roster.best()), error_model(), roster.worst());
    std::vector<FrameRecord> records;
    for (std::int64_t f = 0; f < 700; ++f) records.push_back(g.tick(inputs_at(f)));
    const std::vector<std::string> want{"select@200", "filter@260", "check_fail@270", "fit@301",
                                        "reuse@302",  "select@460", "filter@520",     "check@530"};
    EXPECT_EQ(timeline(records), want);
    EXPECT_EQ(g.refits(), 1);
    EXPECT_EQ(g.selections(), 2);

    for (std::int64_t f = 0; f < 200; ++f) EXPECT_EQ(records[f].config, roster.worst());
    EXPECT_EQ(records[200].phase, Phase::selecting);
    EXPECT_EQ(records[230].phase, Phase::filtering);
    EXPECT_EQ(records[265].phase, Phase::accuracy_check);
    EXPECT_EQ(records[280].phase, Phase::fitting);
    EXPECT_EQ(records[350].phase, Phase::steady);

    // The refit was taken on the configuration in use and reproduces it.
    EXPECT_EQ(g.model()->fitted_config(), records[290].config);
    ASSERT_TRUE(records[302].fit.has_value());
    EXPECT_LT(records[302].fit->residual_norm, 1e-9);
    EXPECT_LT(records[302].fit->unit_cost_residual, 1e-9);
    for (std::int64_t f = 400; f < 700; ++f) EXPECT_NEAR(records[f].predicted_power, records[f].measured_power, 1e-6);
}

TEST(Governor, FilterPassesThroughMidpoint) {
    const auto roster = small_roster();
    GovernorConfig generous;
    generous.budget_percent = 1.0;
    Governor h(generous, model_with(1.0, roster.best()), error_model(), roster.worst());
    std::vector<FrameRecord> records;
    for (std::int64_t f = 0; f <= 300; ++f) records.push_back(h.tick(inputs_at(f)));
    EXPECT_EQ(h.state().s_new, roster.best());
    EXPECT_EQ(records[200].config, roster.worst());
    EXPECT_EQ(records[230].config, temporal_filter(roster.worst(), roster.best(), 1.0, 2.0));
    EXPECT_EQ(records[230].config, (RenderingConfiguration{{1, 1, 1}}));
    EXPECT_EQ(records[260].config, roster.best());
    for (std::int64_t f = 201; f < 260; ++f)
        EXPECT_EQ(records[f].config, temporal_filter(roster.worst(), roster.best(), (f - 200) / 30.0, 2.0));
}

TEST(Governor, RespectsBudgetWithExactModel) {
    const auto roster = small_roster();
    Governor g(GovernorConfig{}, model_with(1.0, roster.best()), error_model(), roster.worst());
    std::vector<FrameRecord> records;
    for (std::int64_t f = 0; f < 1000; ++f) records.push_back(g.tick(inputs_at(f)));
    std::vector<std::int64_t> selections;
    for (const auto& r : records) {
        if (r.has(GovernorEvent::select)) selections.push_back(r.frame);
        EXPECT_FALSE(r.has(GovernorEvent::check_fail));
        EXPECT_DOUBLE_EQ(r.budget_watts, 46.0);
    }
    ASSERT_GE(selections.size(), 4u);
    for (std::size_t i = 1; i < selections.size(); ++i) EXPECT_GE(selections[i] - selections[i - 1], 200);
    for (const auto& r : records)
        if (r.has(GovernorEvent::select)) EXPECT_FALSE(r.infeasible);
    // Steady frames after a passed check stay under budget with an exact model, up to count drift.
    int over = 0, steady = 0;
    for (const auto& r : records)
        if (r.phase == Phase::steady && r.frame > 300) {
            ++steady;
            over += r.measured_power >= r.budget_watts;
        }
    EXPECT_GT(steady, 0);
    EXPECT_LT(over, steady / 2);
}

TEST(Governor, BackgroundRendersFollowTheCycle) {
    const auto roster = small_roster();
    GovernorConfig c;
    Governor g(c, model_with(1.0, roster.best()), error_model(), roster.worst());
    std::vector<FrameRecord> records;
    for (std::int64_t f = 0; f < 200; ++f) {
        auto r = g.tick(inputs_at(f));
        if (r.background) {
            EXPECT_EQ(f % c.error_frequency, 0);
            // Images: best is flat 0.5, pass i worst is a checkerboard of amplitude 0.1 (i + 1).
            FrameImage img(16, 16, 0.5);
            if (r.background->slot > 0)
                for (int y = 0; y < 16; ++y)
                    for (int x = 0; x < 16; ++x) img.at(x, y) += 0.1 * r.background->slot * (((x + y) % 2) ? 1 : -1);
            g.deliver_background(*r.background, img);
        } else {
            EXPECT_NE(f % c.error_frequency, 0);
        }
        records.push_back(std::move(r));
    }
    std::vector<int> slots;
    for (const auto& r : records)
        if (r.background) slots.push_back(r.background->slot);
    ASSERT_GE(slots.size(), 8u);
    for (std::size_t i = 0; i < slots.size(); ++i) EXPECT_EQ(slots[i], static_cast<int>(i % 4));
    EXPECT_EQ(records[10].background->config, single_degradation_config(roster, 0, 2));
    EXPECT_EQ(records[30].background->config, single_degradation_config(roster, 2, 1));
    EXPECT_EQ(records[30].background->scene_frame, 0);
    EXPECT_EQ(records[50].background->scene_frame, 40);

    // SSIM results show up ssim_latency later (2 frames at 30 fps).
    EXPECT_TRUE(records[12].has(GovernorEvent::quality_update));
    EXPECT_FALSE(records[11].has(GovernorEvent::quality_update));
    FrameImage flat(16, 16, 0.5), board = flat;
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) board.at(x, y) += 0.1 * (((x + y) % 2) ? 1 : -1);
    EXPECT_NEAR(records[12].worst_error[0], quality_error(flat, board), 1e-12);
    EXPECT_EQ(records[12].staleness[0], 12);
    EXPECT_EQ(records[52].staleness[0], 12);
    EXPECT_EQ(records[11].staleness[0], 11);  // initial entries were set for frame 0
}

TEST(Governor, InitialFitRunsFirst) {
    const auto roster = small_roster();
    GovernorConfig c;
    c.initial_fit = true;
    Governor g(c, model_with(1.6, roster.best()), error_model(), roster.worst());
    std::vector<FrameRecord> records;
    for (std::int64_t f = 0; f < 40; ++f) records.push_back(g.tick(inputs_at(f)));
    EXPECT_EQ(records[0].phase, Phase::fitting);
    EXPECT_TRUE(records[30].has(GovernorEvent::fit));
    EXPECT_TRUE(records[31].has(GovernorEvent::reuse));
    EXPECT_EQ(g.state().phase, Phase::steady);
    EXPECT_EQ(g.model()->fitted_config(), roster.worst());
    EXPECT_NEAR(records[35].predicted_power, records[35].measured_power, 1e-6);
}

TEST(Governor, ErrorBudgetMode) {
    const auto roster = small_roster();
    GovernorConfig c;
    c.mode = SelectionMode::error_budget;
    c.error_budget = 0.05;
    Governor g(c, model_with(1.0, roster.best()), error_model(), roster.best());
    FrameRecord sel;
    for (std::int64_t f = 0; f <= 200; ++f) sel = g.tick(inputs_at(f));
    ASSERT_TRUE(sel.has(GovernorEvent::select));
    EXPECT_LT(estimate_error(error_model(), g.state().s_new), 0.05);
    const auto preds = predict_all(*g.model(), [](const RenderingConfiguration& cfg) { return scene(200, cfg); });
    std::vector<double> errs;
    for (std::size_t i = 0; i < preds.size(); ++i) errs.push_back(estimate_error(error_model(), roster.config_at(i)));
    EXPECT_EQ(roster.index_of(g.state().s_new), oracle::brute_force_error(preds, errs, 0.05).index);
}
