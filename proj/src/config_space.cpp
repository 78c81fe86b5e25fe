#include "pgov/config_space.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

namespace pgov {

std::string RenderingConfiguration::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i != 0) out += '-';
        out += std::to_string(levels[i]);
    }
    return out;
}

RenderingConfiguration RenderingConfiguration::parse(const std::string& text) {
    RenderingConfiguration config;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, '-')) {
        if (item.empty()) throw std::invalid_argument("malformed configuration: '" + text + "'");
        std::size_t used = 0;
        int level = std::stoi(item, &used);
        if (used != item.size()) throw std::invalid_argument("malformed configuration: '" + text + "'");
        config.levels.push_back(level);
    }
    if (config.levels.empty()) throw std::invalid_argument("empty configuration");
    return config;
}

PassRoster::PassRoster(std::vector<PassDescriptor> passes) : passes_(std::move(passes)) {
    if (passes_.empty()) throw std::invalid_argument("roster must contain at least one pass");
    std::set<std::string> names;
    for (std::size_t i = 0; i < passes_.size(); ++i) {
        const auto& p = passes_[i];
        if (p.name.empty()) throw std::invalid_argument("pass name must not be empty");
        if (!names.insert(p.name).second) throw std::invalid_argument("duplicate pass name: " + p.name);
        if (p.level_count < 1) throw std::invalid_argument("pass " + p.name + ": level_count must be >= 1");
        if (p.is_resolution) {
            if (resolution_index_) throw std::invalid_argument("at most one resolution pass is allowed");
            if (p.uses_batches || p.uses_vertices || p.uses_fragments)
                throw std::invalid_argument("resolution pass " + p.name + " cannot own primitives");
            if (p.fragment_scale_per_level.size() != static_cast<std::size_t>(p.level_count))
                throw std::invalid_argument("resolution pass " + p.name +
                                            ": need one fragment scale per level");
            for (double s : p.fragment_scale_per_level)
                if (!(s > 0.0 && s <= 1.0))
                    throw std::invalid_argument("resolution pass " + p.name +
                                                ": fragment scales must lie in (0, 1]");
            resolution_index_ = i;
        } else {
            power_passes_.push_back(i);
        }
        config_count_ *= static_cast<std::size_t>(p.level_count);
    }
}

PassRoster PassRoster::default_roster() {
    // Fragment scale follows pixel area at 100%, 80% and 60% buffer resolution.
    std::vector<PassDescriptor> passes{
        {"resolution", 3, false, false, false, true, {1.0, 0.64, 0.36}},
        {"base_shading", 3, true, true, true, false, {}},
        {"reflections", 3, true, true, true, false, {}},
        {"shadows", 3, true, true, true, false, {}},
        {"metals", 3, true, true, true, false, {}},
        {"antialiasing", 3, false, false, true, false, {}},
    };
    return PassRoster(std::move(passes));
}

double PassRoster::fragment_scale(const RenderingConfiguration& config) const {
    if (!resolution_index_) return 1.0;
    const auto& p = passes_[*resolution_index_];
    return p.fragment_scale_per_level[static_cast<std::size_t>(config.levels[*resolution_index_])];
}

bool PassRoster::is_valid(const RenderingConfiguration& config) const {
    if (config.levels.size() != passes_.size()) return false;
    for (std::size_t i = 0; i < passes_.size(); ++i)
        if (config.levels[i] < 0 || config.levels[i] >= passes_[i].level_count) return false;
    return true;
}

void PassRoster::validate(const RenderingConfiguration& config) const {
    if (!is_valid(config))
        throw std::invalid_argument("configuration " + config.to_string() + " does not fit the roster");
}

std::size_t PassRoster::index_of(const RenderingConfiguration& config) const {
    validate(config);
    std::size_t index = 0;
    for (std::size_t i = 0; i < passes_.size(); ++i)
        index = index * static_cast<std::size_t>(passes_[i].level_count) + static_cast<std::size_t>(config.levels[i]);
    return index;
}

RenderingConfiguration PassRoster::config_at(std::size_t index) const {
    if (index >= config_count_) throw std::out_of_range("configuration index out of range");
    RenderingConfiguration config;
    config.levels.resize(passes_.size());
    for (std::size_t i = passes_.size(); i-- > 0;) {
        auto count = static_cast<std::size_t>(passes_[i].level_count);
        config.levels[i] = static_cast<int>(index % count);
        index /= count;
    }
    return config;
}

RenderingConfiguration PassRoster::best() const {
    return RenderingConfiguration{std::vector<int>(passes_.size(), 0)};
}

RenderingConfiguration PassRoster::worst() const {
    RenderingConfiguration config;
    for (const auto& p : passes_) config.levels.push_back(p.level_count - 1);
    return config;
}

std::vector<RenderingConfiguration> enumerate_configurations(const PassRoster& roster) {
    std::vector<RenderingConfiguration> out;
    out.reserve(roster.config_count());
    RenderingConfiguration current = roster.best();
    for (std::size_t n = 0; n < roster.config_count(); ++n) {
        out.push_back(current);
        // odometer increment, last pass fastest
        for (std::size_t i = roster.size(); i-- > 0;) {
            if (++current.levels[i] < roster.pass(i).level_count) break;
            current.levels[i] = 0;
        }
    }
    return out;
}

RenderingConfiguration single_degradation_config(const PassRoster& roster, std::size_t pass_index,
                                                 int level) {
    if (pass_index >= roster.size()) throw std::out_of_range("pass index out of range");
    if (level <= 0) throw std::invalid_argument("degradation level must be > 0");
    if (level >= roster.pass(pass_index).level_count) throw std::out_of_range("level out of range");
    RenderingConfiguration config = roster.best();
    config.levels[pass_index] = level;
    return config;
}

}  // namespace pgov
