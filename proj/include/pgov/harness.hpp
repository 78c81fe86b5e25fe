#ifndef PGOV_HARNESS_HPP
#define PGOV_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "pgov/governor.hpp"
#include "pgov/power_model.hpp"
#include "pgov/quality.hpp"
#include "pgov/scenario.hpp"
#include "pgov/simgpu.hpp"

namespace pgov {

/// Everything the governor learns before the first frame.
struct Initialization {
    sim::MinPowerProbe min_power;
    sim::SaturationProbe saturation;
    FitResult generic_fit;
    std::shared_ptr<const PowerModel> model;
    ErrorRatioTable ratios;

    bool probe_failed() const { return saturation.any_cap_reached(); }
    int probe_frames() const { return min_power.frames + saturation.frames; }
};

Initialization initialize(const Scenario& scenario);

/// Per-frame record of a governed run, with the ground-truth error attached.
struct RunRow {
    FrameRecord record;
    double true_error = 0.0;
};

struct RunStats {
    double mean_power = 0.0;
    double mean_error = 0.0;
    std::int64_t frames = 0;
};

struct GovernedRun {
    std::vector<RunRow> rows;
    RunStats stats;
    double budget_watts = 0.0;
    int selections = 0;
    int refits = 0;
    int infeasible = 0;
};

GovernedRun run_governed(const Scenario& scenario, const Initialization& init);

struct ReplayRow {
    std::int64_t frame = 0;
    double measured_power = 0.0;
    double true_error = 0.0;
};

struct Replay {
    RenderingConfiguration config;
    std::vector<ReplayRow> rows;
    RunStats stats;
};

/// Runs the trace with a pinned configuration and no governor.
Replay replay(const Scenario& scenario, const RenderingConfiguration& config);

struct OracleRow {
    RenderingConfiguration config;
    double true_power = 0.0;  // noise-free
    double true_error = 0.0;  // brute-force SSIM against the reference
};

/// Every configuration at one trace frame, in enumeration order.
std::vector<OracleRow> oracle_table(const Scenario& scenario, std::int64_t frame);

/// Mean ground-truth error of rendering `config` at `frame`.
double true_error(const Scenario& scenario, const RenderingConfiguration& config, std::int64_t frame);

inline constexpr const char* kLogVersion = "pgov-log v1";
inline constexpr const char* kReplayVersion = "pgov-replay v1";
inline constexpr const char* kOracleVersion = "pgov-oracle v1";

void write_run_csv(std::ostream& out, const PassRoster& roster, const GovernedRun& run);
void write_replay_csv(std::ostream& out, const Replay& replay);
void write_oracle_csv(std::ostream& out, const std::vector<OracleRow>& rows);

/// JSON summary of a governed run and its two baselines.
std::string summary_json(const Scenario& scenario, const Initialization& init, const GovernedRun& run,
                         const Replay& min_quality, const Replay& max_quality);

/// JSON dump of the probed constants; hidden oracle values only when `reveal`.
std::string probe_json(const Scenario& scenario, const Initialization& init, bool reveal);

/// The hidden oracle parameters, for oracle-equivalence checks.
std::string oracle_json(const Scenario& scenario);

}  // namespace pgov

#endif  // PGOV_HARNESS_HPP
