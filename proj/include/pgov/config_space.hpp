#ifndef PGOV_CONFIG_SPACE_HPP
#define PGOV_CONFIG_SPACE_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace pgov {

/// One stage of the frame pipeline and its selectable shader quality levels.
/// Level 0 is always the best quality; level_count - 1 is the worst.
struct PassDescriptor {
    std::string name;
    int level_count = 1;
    bool uses_batches = false;
    bool uses_vertices = false;
    bool uses_fragments = false;
    bool is_resolution = false;
    // Fraction of full-resolution fragments produced at each level.
    // Only meaningful when is_resolution is set.
    std::vector<double> fragment_scale_per_level;
};

/// Vector of per-pass quality levels, indexed like the roster.
struct RenderingConfiguration {
    std::vector<int> levels;

    int operator[](std::size_t i) const { return levels[i]; }
    std::size_t size() const { return levels.size(); }
    bool operator==(const RenderingConfiguration&) const = default;

    /// Levels joined with '-', e.g. "0-2-1-1-2-2".
    std::string to_string() const;
    static RenderingConfiguration parse(const std::string& text);
};

/// Ordered, validated list of passes. Immutable after construction.
///
/// Passes other than the resolution pass take part in the power model; they
/// are called "power passes" and get a dense index of their own.
class PassRoster {
  public:
    /// Throws std::invalid_argument when any descriptor invariant is violated.
    explicit PassRoster(std::vector<PassDescriptor> passes);

    /// Resolution, base shading, reflections, shadows, metals, antialiasing;
    /// three levels each.
    static PassRoster default_roster();

    const std::vector<PassDescriptor>& passes() const { return passes_; }
    const PassDescriptor& pass(std::size_t i) const { return passes_[i]; }
    std::size_t size() const { return passes_.size(); }

    /// Roster indices of the power passes, in roster order.
    const std::vector<std::size_t>& power_passes() const { return power_passes_; }
    std::size_t power_pass_count() const { return power_passes_.size(); }
    std::optional<std::size_t> resolution_index() const { return resolution_index_; }

    /// Fragment scale implied by the resolution level of `config` (1 without a resolution pass).
    double fragment_scale(const RenderingConfiguration& config) const;

    /// Product of level counts.
    std::size_t config_count() const { return config_count_; }

    /// Lexicographic rank; the last pass varies fastest.
    std::size_t index_of(const RenderingConfiguration& config) const;
    RenderingConfiguration config_at(std::size_t index) const;

    bool is_valid(const RenderingConfiguration& config) const;
    /// Throws std::invalid_argument if `config` does not fit the roster.
    void validate(const RenderingConfiguration& config) const;

    RenderingConfiguration best() const;
    RenderingConfiguration worst() const;

  private:
    std::vector<PassDescriptor> passes_;
    std::vector<std::size_t> power_passes_;
    std::optional<std::size_t> resolution_index_;
    std::size_t config_count_ = 1;
};

/// Full Cartesian product of levels in lexicographic order.
std::vector<RenderingConfiguration> enumerate_configurations(const PassRoster& roster);

/// Best quality everywhere except `pass_index`, which runs at `level` (> 0).
RenderingConfiguration single_degradation_config(const PassRoster& roster, std::size_t pass_index,
                                                 int level);

}  // namespace pgov

#endif  // PGOV_CONFIG_SPACE_HPP
