// pgov: power-aware rendering governor simulator.
//
//   pgov run    --scenario FILE   governed run plus min/max replays
//   pgov replay --scenario FILE --preset best|worst | --config 0-2-1-1-2-2
//   pgov oracle --scenario FILE --frame K
//   pgov probe  --scenario FILE

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pgov/harness.hpp"
#include "pgov/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitScenario = 2;
constexpr int kExitProbe = 3;

struct Options {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<double> budget_percent;
    std::optional<std::string> mode;
    std::optional<double> error_budget;
    std::string out_dir;
    bool reveal = false;
    std::string config;
    std::string preset;
    std::int64_t frame = 0;
};

pgov::Scenario load(const Options& o) {
    auto s = pgov::load_scenario(o.scenario);
    if (o.seed) s.reseed(*o.seed);
    if (o.budget_percent) s.governor.budget_percent = *o.budget_percent;
    if (o.mode) s.governor.mode = pgov::parse_selection_mode(*o.mode);
    if (o.error_budget) s.governor.error_budget = *o.error_budget;
    try {
        s.validate();
        s.governor.validate();
    } catch (const std::invalid_argument& e) {
        throw pgov::ScenarioError(std::string("command line: ") + e.what());
    }
    return s;
}

fs::path out_dir(const Options& o, const pgov::Scenario& s) {
    fs::path dir = s.output.directory;
    if (const char* env = std::getenv("PGOV_OUT_DIR"); env && *env) dir = env;
    if (!o.out_dir.empty()) dir = o.out_dir;
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

template <class F>
void write_with(const fs::path& path, F&& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    body(out);
}

int report_probe_failure(const pgov::Scenario& s, const pgov::Initialization& init) {
    for (const auto& r : init.saturation.ramps)
        if (r.cap_reached)
            std::cerr << fmt::format("probe: no plateau for {} {} (cap {:.0f})\n",
                                     s.roster.pass(s.roster.power_passes()[r.power_pass]).name,
                                     pgov::sim::to_string(r.kind), r.saturating_count);
    return kExitProbe;
}

int cmd_run(const Options& o) {
    const auto s = load(o);
    const auto init = pgov::initialize(s);
    if (init.probe_failed()) return report_probe_failure(s, init);
    const auto dir = out_dir(o, s);

    const auto run = pgov::run_governed(s, init);
    const auto low = pgov::replay(s, s.roster.worst());
    const auto high = pgov::replay(s, s.roster.best());

    write_with(dir / s.output.log, [&](std::ostream& out) { pgov::write_run_csv(out, s.roster, run); });
    write_with(dir / "replay_min.csv", [&](std::ostream& out) { pgov::write_replay_csv(out, low); });
    write_with(dir / "replay_max.csv", [&](std::ostream& out) { pgov::write_replay_csv(out, high); });
    write_file(dir / s.output.summary, pgov::summary_json(s, init, run, low, high));
    if (o.reveal) write_file(dir / "oracle.json", pgov::oracle_json(s) + "\n");

    std::cout << fmt::format("{}: {} frames, budget {:.3f} W\n", s.name, run.stats.frames, run.budget_watts);
    std::cout << fmt::format("  governed  power {:8.3f} W  error {:.5f}\n", run.stats.mean_power, run.stats.mean_error);
    std::cout << fmt::format("  min qual  power {:8.3f} W  error {:.5f}\n", low.stats.mean_power, low.stats.mean_error);
    std::cout << fmt::format("  max qual  power {:8.3f} W  error {:.5f}\n", high.stats.mean_power, high.stats.mean_error);
    std::cout << fmt::format("  selections {}  refits {}  infeasible {}\n", run.selections, run.refits, run.infeasible);
    std::cout << "  wrote " << (dir / s.output.log).string() << '\n';
    return 0;
}

int cmd_replay(const Options& o) {
    const auto s = load(o);
    pgov::RenderingConfiguration config;
    if (!o.config.empty()) {
        try {
            config = pgov::RenderingConfiguration::parse(o.config);
            s.roster.validate(config);
        } catch (const std::invalid_argument& e) {
            throw pgov::ScenarioError(std::string("--config: ") + e.what());
        }
    } else {
        config = o.preset == "best" ? s.roster.best() : s.roster.worst();
    }
    const auto dir = out_dir(o, s);
    const auto r = pgov::replay(s, config);
    const auto path = dir / fmt::format("replay_{}.csv", config.to_string());
    write_with(path, [&](std::ostream& out) { pgov::write_replay_csv(out, r); });
    std::cout << fmt::format("{}: power {:.3f} W  error {:.5f}\n", config.to_string(), r.stats.mean_power,
                             r.stats.mean_error);
    std::cout << "  wrote " << path.string() << '\n';
    return 0;
}

int cmd_oracle(const Options& o) {
    const auto s = load(o);
    if (o.frame < 0 || o.frame >= s.trace.frame_count)
        throw pgov::ScenarioError(fmt::format("--frame {} outside the trace (0..{})", o.frame, s.trace.frame_count - 1));
    const auto dir = out_dir(o, s);
    const auto rows = pgov::oracle_table(s, o.frame);
    const auto path = dir / fmt::format("oracle_{}.csv", o.frame);
    write_with(path, [&](std::ostream& out) { pgov::write_oracle_csv(out, rows); });
    if (o.reveal) write_file(dir / "oracle.json", pgov::oracle_json(s) + "\n");
    std::cout << fmt::format("{} configurations at frame {}\n  wrote {}\n", rows.size(), o.frame, path.string());
    return 0;
}

int cmd_probe(const Options& o) {
    const auto s = load(o);
    const auto init = pgov::initialize(s);
    const auto dir = out_dir(o, s);
    write_file(dir / "probe.json", pgov::probe_json(s, init, o.reveal));
    std::cout << fmt::format("P_m {:.4f} W  P_M {:.4f} W  after {} frames\n", init.saturation.saturation.p_min,
                             init.saturation.saturation.p_max, init.probe_frames());
    if (init.probe_failed()) return report_probe_failure(s, init);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power-aware rendering governor on a simulated GPU"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", o.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "Override the scenario seed");
        sub->add_option("--budget-percent", o.budget_percent, "Override the budget fraction p in [0, 1]");
        sub->add_option("--mode", o.mode, "Selection mode")->check(CLI::IsMember({"power", "error"}));
        sub->add_option("--error-budget", o.error_budget, "Error budget for --mode error");
        sub->add_option("--out-dir", o.out_dir, "Output directory (default: $PGOV_OUT_DIR, then the scenario's)");
        sub->add_flag("--reveal-oracle", o.reveal, "Also dump the hidden oracle parameters");
    };

    auto* run = app.add_subcommand("run", "Initialize, run the governor and both baselines");
    common(run);
    auto* rep = app.add_subcommand("replay", "Run the trace with a fixed configuration");
    common(rep);
    auto* cfg = rep->add_option("--config", o.config, "Configuration such as 0-2-1-1-2-2");
    rep->add_option("--preset", o.preset, "best or worst")->check(CLI::IsMember({"best", "worst"}))->excludes(cfg);
    auto* orc = app.add_subcommand("oracle", "Exhaustive true power and error table for one frame");
    common(orc);
    orc->add_option("--frame", o.frame, "Trace frame")->required();
    auto* prb = app.add_subcommand("probe", "Probe P_m, P_M and saturation counts");
    common(prb);

    CLI11_PARSE(app, argc, argv);
    if (rep->parsed() && o.config.empty() && o.preset.empty()) {
        std::cerr << "replay: give --config or --preset\n";
        return kExitScenario;
    }

    try {
        if (run->parsed()) return cmd_run(o);
        if (rep->parsed()) return cmd_replay(o);
        if (orc->parsed()) return cmd_oracle(o);
        return cmd_probe(o);
    } catch (const pgov::ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return kExitScenario;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
