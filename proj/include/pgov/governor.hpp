#ifndef PGOV_GOVERNOR_HPP
#define PGOV_GOVERNOR_HPP

#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pgov/config_space.hpp"
#include "pgov/power_model.hpp"
#include "pgov/quality.hpp"

namespace pgov {

enum class SelectionMode { power_budget, error_budget };

SelectionMode parse_selection_mode(const std::string& text);
std::string to_string(SelectionMode mode);

struct GovernorConfig {
    double budget_percent = 0.4;
    SelectionMode mode = SelectionMode::power_budget;
    double error_budget = 0.0;  // only used in error-budget mode
    int accuracy_check_window = 10;
    int fitting_window = 30;
    double accuracy_threshold = 0.10;  // fraction of (P_M - P_m)
    int error_frequency = 10;
    int selection_period = 200;
    double filter_interval = 2.0;  // seconds
    double fps = 30.0;
    // Worker latencies in seconds; rounded up to whole frames.
    double fit_latency = 0.0026;
    double reuse_latency = 0.0007;
    double ssim_latency = 0.05;
    // Start with a fitting window on the initial configuration instead of
    // trusting the model handed to the constructor.
    bool initial_fit = false;

    void validate() const;
    int frames_for(double seconds) const;
    int filter_frames() const { return frames_for(filter_interval); }
};

/// P_m + p (P_M - P_m).
double budget_watts(const GovernorConfig& config, const SaturationConstants& saturation);

struct Selection {
    RenderingConfiguration config;
    std::size_t index = 0;
    double predicted_power = 0.0;
    double estimated_error = 0.0;
    bool infeasible = false;
};

/// Minimum estimated error among configurations predicted strictly under
/// `budget`; ties go to lower power, then to enumeration order. With nothing
/// under budget, falls back to the minimum-power configuration and flags it.
Selection select_configuration(const PassRoster& roster, const std::vector<double>& predictions,
                               const ErrorModel& error_model, double budget);

/// Minimum predicted power among configurations with estimated error strictly
/// under `error_budget`; ties go to lower error, then to enumeration order.
/// With nothing under budget, returns the best-quality configuration flagged.
Selection select_configuration_error_budget(const PassRoster& roster, const std::vector<double>& predictions,
                                            const ErrorModel& error_model, double error_budget);

/// Componentwise round((1 - t/T) old + (t/T) new), halves away from zero.
RenderingConfiguration temporal_filter(const RenderingConfiguration& from, const RenderingConfiguration& to, double t,
                                       double interval);

/// True when the mean |measured - predicted| over `window` exceeds
/// threshold * (P_M - P_m). All samples were rendered with `config`.
bool accuracy_check(const PowerModel& model, const RenderingConfiguration& config,
                    const std::vector<FrameSample>& window, double threshold);

/// Mean |measured - predicted| over `window`.
double mean_prediction_error(const PowerModel& model, const RenderingConfiguration& config,
                             const std::vector<FrameSample>& window);

enum class Phase { selecting, filtering, accuracy_check, fitting, steady };

std::string to_string(Phase phase);

enum class GovernorEvent {
    select,         // a new configuration was chosen
    filter_done,    // the temporal filter reached the new configuration
    check_pass,     // accuracy check within threshold
    check_fail,     // accuracy check above threshold; a refit follows
    fit,            // coefficients fitted on the fitting window
    reuse,          // unit costs solved and the new model swapped in
    background,     // a background render was requested
    quality_update  // a worst-level error became visible
};

std::string to_string(GovernorEvent event);

/// Slot 0 renders the best-quality reference; slot i + 1 renders pass i at its worst level.
struct BackgroundRequest {
    int slot = 0;
    RenderingConfiguration config;
    std::int64_t scene_frame = 0;
    std::int64_t requested_at = 0;
};

struct FitDiagnostics {
    double residual_norm = 0.0;
    int clamp_count = 0;
    bool rank_deficient = false;
    double unit_cost_residual = 0.0;
    bool psi_indeterminate = false;
};

struct FrameRecord {
    std::int64_t frame = 0;
    RenderingConfiguration config;  // s_eff
    Phase phase = Phase::steady;
    double predicted_power = 0.0;
    double measured_power = 0.0;
    double budget_watts = 0.0;
    std::vector<GovernorEvent> events;
    bool infeasible = false;
    std::optional<BackgroundRequest> background;
    std::optional<FitDiagnostics> fit;
    std::vector<double> worst_error;
    std::vector<std::optional<std::int64_t>> staleness;

    bool has(GovernorEvent e) const;
};

/// What the simulated GPU offers the governor for one frame.
struct FrameInputs {
    std::int64_t frame = 0;
    PrimitivesProvider primitives;
    // Renders the frame with the chosen configuration and returns the reading.
    std::function<double(const RenderingConfiguration&)> measure;
};

struct GovernorState {
    Phase phase = Phase::steady;
    RenderingConfiguration s_old;
    RenderingConfiguration s_new;
    RenderingConfiguration s_eff;
    std::int64_t filter_start = 0;
    std::int64_t set_frame = 0;
    std::size_t sample_count = 0;
    int background_cursor = 0;
};

/// Frame-driven controller. Renders `initial_config` until the first selection
/// period ends (fitting on it first when initial_fit is set), then cycles
/// select -> filter -> accuracy check -> (fit -> reuse) every selection period.
/// Fit, reuse and SSIM run on worker threads; their results become visible
/// after the configured latencies, so runs are deterministic.
class Governor {
  public:
    Governor(GovernorConfig config, std::shared_ptr<const PowerModel> model, ErrorModel error_model,
             RenderingConfiguration initial_config);
    ~Governor();
    Governor(const Governor&) = delete;
    Governor& operator=(const Governor&) = delete;

    FrameRecord tick(const FrameInputs& inputs);

    /// Hands back the image for a request returned by tick().
    void deliver_background(const BackgroundRequest& request, FrameImage image);

    const GovernorConfig& config() const { return config_; }
    const GovernorState& state() const { return state_; }
    std::shared_ptr<const PowerModel> model() const { return model_; }
    const ErrorModel& error_model() const { return *error_model_; }
    double budget() const;
    int selections() const { return selections_; }
    int refits() const { return refits_; }

  private:
    struct PendingQuality {
        std::int64_t visible_frame;
        std::size_t pass;
        std::int64_t scene_frame;
        std::future<double> error;
    };

    void apply_ready_quality(std::int64_t frame, FrameRecord& record);
    void apply_ready_model_jobs(std::int64_t frame, FrameRecord& record);
    void run_selection(const FrameInputs& inputs, FrameRecord& record);
    std::optional<BackgroundRequest> schedule_background(std::int64_t frame);

    GovernorConfig config_;
    PassRoster roster_;
    std::shared_ptr<const PowerModel> model_;
    std::shared_ptr<const ErrorModel> error_model_;
    GovernorState state_;
    std::vector<FrameSample> samples_;

    std::optional<FrameImage> reference_;
    std::int64_t cycle_scene_frame_ = 0;
    std::vector<PendingQuality> pending_quality_;

    std::optional<std::future<FitResult>> pending_fit_;
    std::int64_t fit_visible_ = 0;
    std::optional<std::future<std::shared_ptr<const PowerModel>>> pending_reuse_;
    std::int64_t reuse_visible_ = 0;
    RenderingConfiguration fit_config_;
    bool fit_submitted_ = false;
    std::optional<FitDiagnostics> last_fit_;

    int selections_ = 0;
    int refits_ = 0;
};

}  // namespace pgov

#endif  // PGOV_GOVERNOR_HPP
