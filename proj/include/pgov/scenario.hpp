#ifndef PGOV_SCENARIO_HPP
#define PGOV_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pgov/config_space.hpp"
#include "pgov/governor.hpp"
#include "pgov/power_model.hpp"
#include "pgov/simgpu.hpp"

namespace pgov {

/// Malformed or inconsistent scenario document.
class ScenarioError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct InitializationOptions {
    int min_power_frames = 30;
    sim::ProbeOptions probe;
    int sweep_samples = 60;
    double sweep_max_load = 0.6;
    std::vector<std::int64_t> calibration_frames{0, 45, 90};
    std::int64_t calibration_variant = 1;
};

struct OutputOptions {
    std::string directory = "out";
    std::string log = "log.csv";
    std::string summary = "summary.json";
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    PassRoster roster;
    CostTable cost_table;
    sim::HiddenPowerOracle oracle;
    sim::SceneTrace trace;
    sim::FrameSynthesizer synthesizer;
    GovernorConfig governor;
    std::optional<RenderingConfiguration> initial_config;  // all-worst when unset
    InitializationOptions init;
    OutputOptions output;

    /// Cross-section consistency. Throws ScenarioError.
    void validate() const;

    /// Re-derives the oracle, trace and synthesizer seeds from a new master seed.
    void reseed(std::uint64_t master);

    RenderingConfiguration start_config() const { return initial_config.value_or(roster.worst()); }
    std::uint64_t sweep_seed() const;
};

Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace pgov

#endif  // PGOV_SCENARIO_HPP
