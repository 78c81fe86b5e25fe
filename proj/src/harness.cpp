#include "pgov/harness.hpp"

#include <algorithm>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace pgov {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fixed(double v) { return fmt::format("{:.6f}", v); }

// Runs body(i) for i in [0, n) on a few threads. Each index writes its own slot.
template <class F>
void parallel_for(std::size_t n, F&& body) {
    const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
}

RunStats stats_of(const std::vector<double>& power, const std::vector<double>& error) {
    RunStats s;
    s.frames = static_cast<std::int64_t>(power.size());
    if (power.empty()) return s;
    for (std::size_t i = 0; i < power.size(); ++i) {
        s.mean_power += power[i];
        s.mean_error += error[i];
    }
    s.mean_power /= static_cast<double>(power.size());
    s.mean_error /= static_cast<double>(power.size());
    return s;
}

ordered_json stats_json(const RunStats& s) {
    return ordered_json{{"mean_power", s.mean_power}, {"mean_error", s.mean_error}, {"frames", s.frames}};
}

ordered_json primitives_json(const Primitives& p) {
    return ordered_json{{"batches", p.batches}, {"vertices", p.vertices}, {"fragments", p.fragments}};
}

std::string power_pass_name(const PassRoster& roster, std::size_t p) {
    return roster.pass(roster.power_passes()[p]).name;
}

}  // namespace

Initialization initialize(const Scenario& scenario) {
    const auto& roster = scenario.roster;
    Initialization init;
    const PassPrimitives empty(roster.power_pass_count());
    init.min_power = sim::probe_min_power(scenario.oracle, roster, empty, scenario.init.min_power_frames);
    auto probe = scenario.init.probe;
    probe.reading_noise = init.min_power.noise;
    init.saturation = sim::probe_saturation(scenario.oracle, roster, init.min_power.p_min, probe);

    const auto& probed = init.saturation.saturation;
    const auto sweep = sim::generic_sweep(scenario.oracle, roster, probed, scenario.init.sweep_samples,
                                          scenario.init.sweep_max_load, scenario.sweep_seed());
    init.generic_fit = fit_generic(roster, sweep, probed);
    init.model = std::make_shared<const PowerModel>(roster, probed, scenario.cost_table,
                                                    init.generic_fit.coefficients, roster.best());

    const auto& synth = scenario.synthesizer;
    const auto variant = scenario.init.calibration_variant;
    init.ratios = calibrate_ratios(
        roster, [&](const RenderingConfiguration& c, std::int64_t state) { return synth.render(c, state, variant); },
        scenario.init.calibration_frames);
    return init;
}

double true_error(const Scenario& scenario, const RenderingConfiguration& config, std::int64_t frame) {
    if (config == scenario.roster.best()) return 0.0;
    const auto& synth = scenario.synthesizer;
    return quality_error(synth.reference(frame), synth.render(config, frame));
}

GovernedRun run_governed(const Scenario& scenario, const Initialization& init) {
    const auto& roster = scenario.roster;
    const auto& trace = scenario.trace;
    Governor governor(scenario.governor, init.model, ErrorModel::empty(roster, init.ratios), scenario.start_config());

    GovernedRun run;
    run.budget_watts = governor.budget();
    run.rows.reserve(static_cast<std::size_t>(trace.frame_count));
    for (std::int64_t frame = 0; frame < trace.frame_count; ++frame) {
        FrameInputs inputs;
        inputs.frame = frame;
        inputs.primitives = [&](const RenderingConfiguration& c) { return trace.primitives(roster, frame, c); };
        inputs.measure = [&](const RenderingConfiguration& c) {
            return sim::measure_power(scenario.oracle, roster, c, frame, trace);
        };
        RunRow row{governor.tick(inputs), 0.0};
        if (row.record.background) {
            const auto& request = *row.record.background;
            governor.deliver_background(request, scenario.synthesizer.render(request.config, request.scene_frame));
        }
        if (row.record.infeasible) ++run.infeasible;
        run.rows.push_back(std::move(row));
    }

    parallel_for(run.rows.size(), [&](std::size_t i) {
        run.rows[i].true_error = true_error(scenario, run.rows[i].record.config, run.rows[i].record.frame);
    });

    std::vector<double> power, error;
    for (const auto& r : run.rows) {
        power.push_back(r.record.measured_power);
        error.push_back(r.true_error);
    }
    run.stats = stats_of(power, error);
    run.selections = governor.selections();
    run.refits = governor.refits();
    return run;
}

Replay replay(const Scenario& scenario, const RenderingConfiguration& config) {
    scenario.roster.validate(config);
    Replay out;
    out.config = config;
    out.rows.resize(static_cast<std::size_t>(scenario.trace.frame_count));
    parallel_for(out.rows.size(), [&](std::size_t i) {
        const auto frame = static_cast<std::int64_t>(i);
        out.rows[i] = {frame, sim::measure_power(scenario.oracle, scenario.roster, config, frame, scenario.trace),
                       true_error(scenario, config, frame)};
    });
    std::vector<double> power, error;
    for (const auto& r : out.rows) {
        power.push_back(r.measured_power);
        error.push_back(r.true_error);
    }
    out.stats = stats_of(power, error);
    return out;
}

std::vector<OracleRow> oracle_table(const Scenario& scenario, std::int64_t frame) {
    const auto& roster = scenario.roster;
    if (frame < 0 || frame >= scenario.trace.frame_count)
        throw std::out_of_range("oracle: frame " + std::to_string(frame) + " outside the trace");
    const auto configs = enumerate_configurations(roster);
    const auto factors = scenario.trace.cost_factors(roster, frame);
    const FrameImage reference = scenario.synthesizer.reference(frame);
    std::vector<OracleRow> rows(configs.size());
    parallel_for(configs.size(), [&](std::size_t i) {
        const auto& c = configs[i];
        rows[i].config = c;
        rows[i].true_power = scenario.oracle.true_power(roster, c, scenario.trace.primitives(roster, frame, c), factors);
        rows[i].true_error = c == roster.best() ? 0.0 : quality_error(reference, scenario.synthesizer.render(c, frame));
    });
    return rows;
}

void write_run_csv(std::ostream& out, const PassRoster& roster, const GovernedRun& run) {
    out << "# " << kLogVersion << '\n';
    out << "frame,config,phase,predicted_power,measured_power,budget_watts,true_error,events,infeasible,bg_slot,"
           "fit_residual,fit_clamps,fit_degenerate";
    for (const auto& p : roster.passes()) out << ",e_worst_" << p.name;
    for (const auto& p : roster.passes()) out << ",stale_" << p.name;
    out << '\n';

    for (const auto& row : run.rows) {
        const auto& r = row.record;
        std::string events;
        for (const auto e : r.events) {
            if (!events.empty()) events += '|';
            events += to_string(e);
        }
        out << r.frame << ',' << r.config.to_string() << ',' << to_string(r.phase) << ',' << fixed(r.predicted_power)
            << ',' << fixed(r.measured_power) << ',' << fixed(r.budget_watts) << ',' << fixed(row.true_error) << ','
            << events << ',' << (r.infeasible ? 1 : 0) << ',';
        if (r.background) out << r.background->slot;
        out << ',';
        if (r.fit)
            out << fmt::format("{:.6e}", r.fit->residual_norm) << ',' << r.fit->clamp_count << ','
                << (r.fit->rank_deficient ? 1 : 0);
        else
            out << ",,";
        for (double e : r.worst_error) out << ',' << fixed(e);
        for (const auto& s : r.staleness) {
            out << ',';
            if (s) out << *s;
        }
        out << '\n';
    }
}

void write_replay_csv(std::ostream& out, const Replay& replay) {
    out << "# " << kReplayVersion << " config=" << replay.config.to_string() << '\n';
    out << "frame,measured_power,true_error\n";
    for (const auto& r : replay.rows)
        out << r.frame << ',' << fixed(r.measured_power) << ',' << fixed(r.true_error) << '\n';
}

void write_oracle_csv(std::ostream& out, const std::vector<OracleRow>& rows) {
    out << "# " << kOracleVersion << '\n';
    out << "index,config,true_power,true_error\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
        out << i << ',' << rows[i].config.to_string() << ',' << fixed(rows[i].true_power) << ','
            << fixed(rows[i].true_error) << '\n';
}

std::string summary_json(const Scenario& scenario, const Initialization& init, const GovernedRun& run,
                         const Replay& min_quality, const Replay& max_quality) {
    const auto& sat = init.saturation.saturation;
    ordered_json doc;
    doc["scenario"] = scenario.name;
    doc["seed"] = scenario.seed;
    doc["frames"] = scenario.trace.frame_count;
    doc["mode"] = to_string(scenario.governor.mode);
    doc["budget_percent"] = scenario.governor.budget_percent;
    doc["budget_watts"] = run.budget_watts;
    doc["noise_sigma_watts"] = scenario.oracle.noise_sigma * scenario.oracle.saturation.range();
    doc["probed"] = {{"p_min", sat.p_min}, {"p_max", sat.p_max}, {"frames", init.probe_frames()}};
    doc["governed"] = stats_json(run.stats);
    doc["min_quality"] = stats_json(min_quality.stats);
    doc["min_quality"]["config"] = min_quality.config.to_string();
    doc["max_quality"] = stats_json(max_quality.stats);
    doc["max_quality"]["config"] = max_quality.config.to_string();
    doc["selections"] = run.selections;
    doc["refits"] = run.refits;
    doc["infeasible_selections"] = run.infeasible;
    return doc.dump(2) + "\n";
}

std::string probe_json(const Scenario& scenario, const Initialization& init, bool reveal) {
    const auto& roster = scenario.roster;
    const auto& sat = init.saturation.saturation;
    ordered_json doc;
    doc["p_min"] = sat.p_min;
    doc["p_max"] = sat.p_max;
    doc["frames"] = init.probe_frames();
    doc["cap_reached"] = init.probe_failed();
    ordered_json passes = ordered_json::object();
    for (std::size_t p = 0; p < roster.power_pass_count(); ++p)
        passes[power_pass_name(roster, p)] = primitives_json(sat.per_pass[p]);
    doc["saturation"] = passes;
    ordered_json ramps = ordered_json::array();
    for (const auto& r : init.saturation.ramps)
        ramps.push_back({{"pass", power_pass_name(roster, r.power_pass)},
                         {"kind", sim::to_string(r.kind)},
                         {"saturating_count", r.saturating_count},
                         {"max_power", r.max_power},
                         {"cap_reached", r.cap_reached}});
    doc["ramps"] = ramps;
    doc["generic_fit"] = {{"residual_norm", init.generic_fit.residual_norm},
                          {"clamp_count", init.generic_fit.clamp_count},
                          {"rank_deficient", init.generic_fit.rank_deficient}};
    if (reveal) doc["hidden"] = ordered_json::parse(oracle_json(scenario));
    return doc.dump(2) + "\n";
}

std::string oracle_json(const Scenario& scenario) {
    const auto& roster = scenario.roster;
    const auto& o = scenario.oracle;
    ordered_json doc;
    doc["p_min"] = o.saturation.p_min;
    doc["p_max"] = o.saturation.p_max;
    doc["chi"] = o.unit_costs.chi;
    doc["psi"] = o.unit_costs.psi;
    doc["noise_sigma"] = o.noise_sigma;
    ordered_json passes = ordered_json::object();
    for (std::size_t p = 0; p < roster.power_pass_count(); ++p) {
        const auto& c = o.costs.per_pass[p];
        passes[power_pass_name(roster, p)] = {{"batch_cost", o.batch_cost[p]},
                                              {"saturation", primitives_json(o.saturation.per_pass[p])},
                                              {"ins_v", c.ins_v},
                                              {"ins_f", c.ins_f},
                                              {"tex_f", c.tex_f}};
    }
    doc["passes"] = passes;
    return doc.dump(2);
}

}  // namespace pgov
