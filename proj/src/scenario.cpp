#include "pgov/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pgov {

using nlohmann::json;

namespace {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
    std::uint64_t x = master + 0x9e3779b97f4a7c15ULL * (salt + 1);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t kSaltOracle = 1;
constexpr std::uint64_t kSaltTrace = 2;
constexpr std::uint64_t kSaltSynth = 3;
constexpr std::uint64_t kSaltSweep = 4;

// Walks the document and prefixes every error with the JSON path.
class Reader {
  public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

    [[noreturn]] void fail(const std::string& what) const { throw ScenarioError(path_ + ": " + what); }

    const json& node() const { return node_; }
    const std::string& path() const { return path_; }

    void expect_object(std::initializer_list<const char*> allowed) const {
        if (!node_.is_object()) fail("expected an object");
        std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& [k, v] : node_.items())
            if (!keys.count(k)) fail("unknown key '" + k + "'");
    }

    bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

    Reader at(const char* key) const {
        if (!has(key)) fail(std::string("missing key '") + key + "'");
        return Reader(node_.at(key), path_ + "." + key);
    }

    Reader at(std::size_t i) const { return Reader(node_.at(i), path_ + "[" + std::to_string(i) + "]"); }

    std::size_t array_size() const {
        if (!node_.is_array()) fail("expected an array");
        return node_.size();
    }

    double number() const {
        if (!node_.is_number()) fail("expected a number");
        return node_.get<double>();
    }

    std::int64_t integer() const {
        if (!node_.is_number_integer()) fail("expected an integer");
        return node_.get<std::int64_t>();
    }

    std::string string() const {
        if (!node_.is_string()) fail("expected a string");
        return node_.get<std::string>();
    }

    bool boolean() const {
        if (!node_.is_boolean()) fail("expected true or false");
        return node_.get<bool>();
    }

    std::vector<double> numbers() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < array_size(); ++i) out.push_back(at(i).number());
        return out;
    }

    double number_or(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }
    int int_or(const char* key, int fallback) const {
        return has(key) ? static_cast<int>(at(key).integer()) : fallback;
    }

  private:
    const json& node_;
    std::string path_;
};

// Runs `body`, rethrowing library validation errors as scenario errors at `where`.
template <class F>
auto guarded(const std::string& where, F&& body) {
    try {
        return body();
    } catch (const ScenarioError&) {
        throw;
    } catch (const std::exception& e) {
        throw ScenarioError(where + ": " + e.what());
    }
}

PassRoster read_roster(const Reader& r) {
    if (r.node().is_string()) {
        if (r.string() != "default") r.fail("the only named roster is \"default\"");
        return PassRoster::default_roster();
    }
    std::vector<PassDescriptor> passes;
    for (std::size_t i = 0; i < r.array_size(); ++i) {
        const Reader p = r.at(i);
        p.expect_object({"name", "levels", "primitives", "resolution_scale"});
        PassDescriptor d;
        d.name = p.at("name").string();
        d.level_count = static_cast<int>(p.at("levels").integer());
        if (p.has("resolution_scale")) {
            if (p.has("primitives")) p.fail("a resolution pass has no primitives");
            d.is_resolution = true;
            d.fragment_scale_per_level = p.at("resolution_scale").numbers();
        } else {
            const Reader prims = p.at("primitives");
            for (std::size_t k = 0; k < prims.array_size(); ++k) {
                const std::string kind = prims.at(k).string();
                if (kind == "batches")
                    d.uses_batches = true;
                else if (kind == "vertices")
                    d.uses_vertices = true;
                else if (kind == "fragments")
                    d.uses_fragments = true;
                else
                    prims.at(k).fail("unknown primitive '" + kind + "'");
            }
        }
        passes.push_back(std::move(d));
    }
    return guarded(r.path(), [&] { return PassRoster(std::move(passes)); });
}

// Per-power-pass sections are objects keyed by pass name; every power pass
// must appear and nothing else may.
template <class F>
void for_each_power_pass(const Reader& r, const PassRoster& roster, F&& body) {
    if (!r.node().is_object()) r.fail("expected an object keyed by pass name");
    std::set<std::string> expected;
    for (auto idx : roster.power_passes()) expected.insert(roster.pass(idx).name);
    for (const auto& [k, v] : r.node().items())
        if (!expected.count(k)) r.fail("'" + k + "' is not a power pass of the roster");
    for (std::size_t p = 0; p < roster.power_pass_count(); ++p) body(p, r.at(roster.pass(roster.power_passes()[p]).name.c_str()));
}

CostTable read_cost_table(const Reader& r, const PassRoster& roster) {
    CostTable table;
    table.per_pass.resize(roster.power_pass_count());
    for_each_power_pass(r, roster, [&](std::size_t p, const Reader& c) {
        c.expect_object({"ins_v", "ins_f", "tex_f"});
        table.per_pass[p].ins_v = c.number_or("ins_v", 0.0);
        table.per_pass[p].ins_f = c.at("ins_f").numbers();
        table.per_pass[p].tex_f = c.has("tex_f") ? c.at("tex_f").numbers()
                                                 : std::vector<double>(table.per_pass[p].ins_f.size(), 0.0);
    });
    guarded(r.path(), [&] {
        table.validate(roster);
        return 0;
    });
    return table;
}

Primitives read_primitives(const Reader& r, double fallback) {
    r.expect_object({"batches", "vertices", "fragments"});
    return {r.number_or("batches", fallback), r.number_or("vertices", fallback), r.number_or("fragments", fallback)};
}

sim::CountCurve read_curve(const Reader& r) {
    r.expect_object({"mean", "amplitude", "period", "phase", "jitter"});
    sim::CountCurve c;
    c.mean = r.at("mean").number();
    c.amplitude = r.number_or("amplitude", 0.0);
    c.period = r.number_or("period", 1.0);
    c.phase = r.number_or("phase", 0.0);
    c.jitter = r.number_or("jitter", 0.0);
    return c;
}

sim::HiddenPowerOracle read_oracle(const Reader& r, const PassRoster& roster, const CostTable& public_costs) {
    r.expect_object({"p_min", "p_max", "noise_sigma", "distortion", "chi", "psi", "passes"});
    SaturationConstants sat;
    sat.p_min = r.at("p_min").number();
    sat.p_max = r.at("p_max").number();
    sat.per_pass.resize(roster.power_pass_count());
    std::vector<double> batch_cost(roster.power_pass_count(), 0.0);
    for_each_power_pass(r.at("passes"), roster, [&](std::size_t p, const Reader& c) {
        c.expect_object({"batch_cost", "saturation"});
        batch_cost[p] = c.number_or("batch_cost", 0.0);
        sat.per_pass[p] = read_primitives(c.at("saturation"), 1.0);
    });
    const UnitCosts unit{r.at("chi").number(), r.at("psi").number()};
    return guarded(r.path(), [&] {
        return sim::HiddenPowerOracle::from_public(roster, sat, batch_cost, unit, public_costs,
                                                   r.number_or("distortion", 1.0), r.number_or("noise_sigma", 0.0), 0);
    });
}

sim::SceneTrace read_trace(const Reader& r, const PassRoster& roster) {
    r.expect_object({"frames", "passes", "events"});
    sim::SceneTrace trace;
    trace.frame_count = r.at("frames").integer();
    trace.curves.resize(roster.power_pass_count());
    trace.level_scale.resize(roster.power_pass_count());
    for_each_power_pass(r.at("passes"), roster, [&](std::size_t p, const Reader& c) {
        c.expect_object({"batches", "vertices", "fragments", "level_scale"});
        const auto& desc = roster.pass(roster.power_passes()[p]);
        if (c.has("batches")) trace.curves[p].batches = read_curve(c.at("batches"));
        if (c.has("vertices")) trace.curves[p].vertices = read_curve(c.at("vertices"));
        if (c.has("fragments")) trace.curves[p].fragments = read_curve(c.at("fragments"));
        if (c.has("level_scale")) {
            const Reader ls = c.at("level_scale");
            for (std::size_t l = 0; l < ls.array_size(); ++l) trace.level_scale[p].push_back(read_primitives(ls.at(l), 1.0));
        } else {
            trace.level_scale[p].assign(static_cast<std::size_t>(desc.level_count), Primitives{1.0, 1.0, 1.0});
        }
    });
    if (r.has("events")) {
        const Reader ev = r.at("events");
        for (std::size_t i = 0; i < ev.array_size(); ++i) {
            const Reader e = ev.at(i);
            e.expect_object({"frame", "pass", "target", "kind", "factor"});
            sim::TraceEvent event;
            event.frame = e.at("frame").integer();
            const std::string pass = e.at("pass").string();
            bool found = false;
            for (std::size_t p = 0; p < roster.power_pass_count(); ++p)
                if (roster.pass(roster.power_passes()[p]).name == pass) {
                    event.power_pass = p;
                    found = true;
                }
            if (!found) e.fail("'" + pass + "' is not a power pass of the roster");
            const std::string target = e.at("target").string();
            if (target == "costs")
                event.target = sim::TraceEvent::Target::costs;
            else if (target == "counts")
                event.target = sim::TraceEvent::Target::counts;
            else
                e.fail("target must be \"costs\" or \"counts\"");
            event.kind = guarded(e.path(), [&] {
                return e.has("kind") ? sim::parse_primitive_kind(e.at("kind").string()) : sim::PrimitiveKind::all;
            });
            event.factor = e.at("factor").number();
            trace.events.push_back(event);
        }
    }
    guarded(r.path(), [&] {
        trace.validate(roster);
        return 0;
    });
    return trace;
}

sim::FrameSynthesizer read_synthesizer(const Reader& r, const PassRoster& roster) {
    r.expect_object({"width", "height", "passes"});
    sim::FrameSynthesizer synth;
    synth.width = r.int_or("width", 128);
    synth.height = r.int_or("height", 128);
    const Reader passes = r.at("passes");
    if (!passes.node().is_object()) passes.fail("expected an object keyed by pass name");
    for (const auto& [k, v] : passes.node().items()) {
        bool known = false;
        for (const auto& p : roster.passes()) known = known || p.name == k;
        if (!known) passes.fail("'" + k + "' is not a pass of the roster");
    }
    for (const auto& desc : roster.passes()) {
        const Reader p = passes.at(desc.name.c_str());
        p.expect_object({"kind", "strength"});
        sim::PassDegradation d;
        d.kind = guarded(p.path(), [&] { return sim::parse_degradation_kind(p.at("kind").string()); });
        d.strength = p.at("strength").numbers();
        synth.passes.push_back(std::move(d));
    }
    guarded(r.path(), [&] {
        synth.validate(roster);
        return 0;
    });
    return synth;
}

void read_governor(const Reader& r, GovernorConfig& g, std::optional<RenderingConfiguration>& initial,
                   const PassRoster& roster) {
    r.expect_object({"budget_percent", "mode", "error_budget", "accuracy_check_window", "fitting_window",
                     "accuracy_threshold", "error_frequency", "selection_period", "filter_interval", "fps",
                     "fit_latency", "reuse_latency", "ssim_latency", "initial_fit", "initial_config"});
    g.budget_percent = r.number_or("budget_percent", g.budget_percent);
    if (r.has("mode")) g.mode = guarded(r.path(), [&] { return parse_selection_mode(r.at("mode").string()); });
    g.error_budget = r.number_or("error_budget", g.error_budget);
    g.accuracy_check_window = r.int_or("accuracy_check_window", g.accuracy_check_window);
    g.fitting_window = r.int_or("fitting_window", g.fitting_window);
    g.accuracy_threshold = r.number_or("accuracy_threshold", g.accuracy_threshold);
    g.error_frequency = r.int_or("error_frequency", g.error_frequency);
    g.selection_period = r.int_or("selection_period", g.selection_period);
    g.filter_interval = r.number_or("filter_interval", g.filter_interval);
    g.fps = r.number_or("fps", g.fps);
    g.fit_latency = r.number_or("fit_latency", g.fit_latency);
    g.reuse_latency = r.number_or("reuse_latency", g.reuse_latency);
    g.ssim_latency = r.number_or("ssim_latency", g.ssim_latency);
    if (r.has("initial_fit")) g.initial_fit = r.at("initial_fit").boolean();
    if (r.has("initial_config")) {
        const std::string text = r.at("initial_config").string();
        if (text == "worst")
            initial = roster.worst();
        else if (text == "best")
            initial = roster.best();
        else
            initial = guarded(r.path() + ".initial_config", [&] {
                auto c = RenderingConfiguration::parse(text);
                roster.validate(c);
                return c;
            });
    }
    guarded(r.path(), [&] {
        g.validate();
        return 0;
    });
}

void read_init(const Reader& r, InitializationOptions& o) {
    r.expect_object({"min_power_frames", "start_count", "plateau_threshold", "max_doublings", "frames_per_step",
                     "refine_steps", "sweep_samples", "sweep_max_load", "calibration_frames", "calibration_variant"});
    o.min_power_frames = r.int_or("min_power_frames", o.min_power_frames);
    o.probe.start_count = r.number_or("start_count", o.probe.start_count);
    o.probe.plateau_threshold = r.number_or("plateau_threshold", o.probe.plateau_threshold);
    o.probe.max_doublings = r.int_or("max_doublings", o.probe.max_doublings);
    o.probe.frames_per_step = r.int_or("frames_per_step", o.probe.frames_per_step);
    o.probe.refine_steps = r.int_or("refine_steps", o.probe.refine_steps);
    o.sweep_samples = r.int_or("sweep_samples", o.sweep_samples);
    o.sweep_max_load = r.number_or("sweep_max_load", o.sweep_max_load);
    if (r.has("calibration_frames")) {
        const Reader f = r.at("calibration_frames");
        o.calibration_frames.clear();
        for (std::size_t i = 0; i < f.array_size(); ++i) o.calibration_frames.push_back(f.at(i).integer());
    }
    if (r.has("calibration_variant")) o.calibration_variant = r.at("calibration_variant").integer();
    if (o.min_power_frames < 1) r.fail("min_power_frames must be >= 1");
    if (o.sweep_samples < 1) r.fail("sweep_samples must be >= 1");
    if (!(o.sweep_max_load > 0.0 && o.sweep_max_load <= 1.0)) r.fail("sweep_max_load must lie in (0, 1]");
    if (o.calibration_frames.empty()) r.fail("calibration_frames must not be empty");
    if (o.calibration_variant == 0) r.fail("calibration_variant must differ from the scene (variant 0)");
}

void read_output(const Reader& r, OutputOptions& o) {
    r.expect_object({"directory", "log", "summary"});
    if (r.has("directory")) o.directory = r.at("directory").string();
    if (r.has("log")) o.log = r.at("log").string();
    if (r.has("summary")) o.summary = r.at("summary").string();
}

}  // namespace

void Scenario::validate() const {
    guarded("scenario", [&] {
        cost_table.validate(roster);
        oracle.validate(roster);
        trace.validate(roster);
        synthesizer.validate(roster);
        governor.validate();
        if (initial_config) roster.validate(*initial_config);
        return 0;
    });
    if (static_cast<std::size_t>(governor.fitting_window) < 3 * roster.power_pass_count())
        throw ScenarioError("scenario.governor.fitting_window: need at least 3 samples per power pass");
    if (static_cast<std::size_t>(init.sweep_samples) < 3 * roster.power_pass_count())
        throw ScenarioError("scenario.initialization.sweep_samples: need at least 3 samples per power pass");
}

void Scenario::reseed(std::uint64_t master) {
    seed = master;
    oracle.seed = derive_seed(master, kSaltOracle);
    trace.seed = derive_seed(master, kSaltTrace);
    synthesizer.seed = derive_seed(master, kSaltSynth);
}

std::uint64_t Scenario::sweep_seed() const { return derive_seed(seed, kSaltSweep); }

Scenario parse_scenario(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(source + ": " + e.what());
    }
    const Reader root(doc, source);
    root.expect_object({"name", "seed", "roster", "cost_table", "oracle", "trace", "synthesizer", "governor",
                        "initialization", "output"});

    PassRoster roster = read_roster(root.at("roster"));
    CostTable costs = read_cost_table(root.at("cost_table"), roster);
    auto oracle = read_oracle(root.at("oracle"), roster, costs);
    auto trace = read_trace(root.at("trace"), roster);
    auto synth = read_synthesizer(root.at("synthesizer"), roster);

    Scenario s{root.has("name") ? root.at("name").string() : "scenario",
               0,
               std::move(roster),
               std::move(costs),
               std::move(oracle),
               std::move(trace),
               std::move(synth),
               {},
               std::nullopt,
               {},
               {}};
    if (root.has("governor")) read_governor(root.at("governor"), s.governor, s.initial_config, s.roster);
    if (root.has("initialization")) read_init(root.at("initialization"), s.init);
    if (root.has("output")) read_output(root.at("output"), s.output);

    const std::int64_t seed = root.at("seed").integer();
    if (seed < 0) root.at("seed").fail("seed must be nonnegative");
    s.reseed(static_cast<std::uint64_t>(seed));
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path.string() + ": cannot open scenario file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path.string());
}

}  // namespace pgov
