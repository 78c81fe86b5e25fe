#include "pgov/governor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pgov {

SelectionMode parse_selection_mode(const std::string& text) {
    if (text == "power") return SelectionMode::power_budget;
    if (text == "error") return SelectionMode::error_budget;
    throw std::invalid_argument("unknown selection mode: " + text + " (expected power|error)");
}

std::string to_string(SelectionMode mode) { return mode == SelectionMode::power_budget ? "power" : "error"; }

std::string to_string(Phase phase) {
    switch (phase) {
        case Phase::selecting: return "selecting";
        case Phase::filtering: return "filtering";
        case Phase::accuracy_check: return "check";
        case Phase::fitting: return "fitting";
        case Phase::steady: return "steady";
    }
    return "steady";
}

std::string to_string(GovernorEvent event) {
    switch (event) {
        case GovernorEvent::select: return "select";
        case GovernorEvent::filter_done: return "filter";
        case GovernorEvent::check_pass: return "check";
        case GovernorEvent::check_fail: return "check_fail";
        case GovernorEvent::fit: return "fit";
        case GovernorEvent::reuse: return "reuse";
        case GovernorEvent::background: return "bg";
        case GovernorEvent::quality_update: return "quality";
    }
    return "";
}

bool FrameRecord::has(GovernorEvent e) const { return std::find(events.begin(), events.end(), e) != events.end(); }

void GovernorConfig::validate() const {
    if (!(budget_percent >= 0.0 && budget_percent <= 1.0))
        throw std::invalid_argument("budget_percent must lie in [0, 1]");
    if (accuracy_check_window < 1 || fitting_window < 1 || error_frequency < 1 || selection_period < 1)
        throw std::invalid_argument("governor windows and periods must be >= 1");
    if (!(accuracy_threshold > 0.0)) throw std::invalid_argument("accuracy_threshold must be positive");
    if (!(filter_interval > 0.0)) throw std::invalid_argument("filter_interval must be positive");
    if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
    if (fit_latency < 0.0 || reuse_latency < 0.0 || ssim_latency < 0.0)
        throw std::invalid_argument("latencies must be nonnegative");
}

int GovernorConfig::frames_for(double seconds) const {
    // the 1e-9 keeps exact products such as 2 s * 30 fps from rounding up
    return static_cast<int>(std::ceil(seconds * fps - 1e-9));
}

double budget_watts(const GovernorConfig& config, const SaturationConstants& saturation) {
    return saturation.p_min + config.budget_percent * saturation.range();
}

namespace {

void check_tables(const PassRoster& roster, const std::vector<double>& predictions, const ErrorModel& error_model) {
    if (predictions.empty()) throw std::invalid_argument("selection: empty prediction table");
    if (predictions.size() != roster.config_count())
        throw std::invalid_argument("selection: predictions must cover every configuration");
    if (error_model.worst_error.size() != roster.size())
        throw std::invalid_argument("selection: error model does not match the roster");
}

Selection make_selection(const PassRoster& roster, std::size_t index, double power, double error, bool infeasible) {
    return Selection{roster.config_at(index), index, power, error, infeasible};
}

}  // namespace

Selection select_configuration(const PassRoster& roster, const std::vector<double>& predictions,
                               const ErrorModel& error_model, double budget) {
    check_tables(roster, predictions, error_model);
    std::optional<std::size_t> best;
    double best_error = 0.0;
    std::size_t min_power = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] < predictions[min_power]) min_power = i;
        if (!(predictions[i] < budget)) continue;
        const double e = estimate_error(error_model, roster.config_at(i));
        if (!best || e < best_error || (e == best_error && predictions[i] < predictions[*best])) {
            best = i;
            best_error = e;
        }
    }
    if (!best)
        return make_selection(roster, min_power, predictions[min_power],
                              estimate_error(error_model, roster.config_at(min_power)), true);
    return make_selection(roster, *best, predictions[*best], best_error, false);
}

Selection select_configuration_error_budget(const PassRoster& roster, const std::vector<double>& predictions,
                                            const ErrorModel& error_model, double error_budget) {
    check_tables(roster, predictions, error_model);
    std::optional<std::size_t> best;
    double best_error = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double e = estimate_error(error_model, roster.config_at(i));
        if (!(e < error_budget)) continue;
        if (!best || predictions[i] < predictions[*best] || (predictions[i] == predictions[*best] && e < best_error)) {
            best = i;
            best_error = e;
        }
    }
    if (!best) return make_selection(roster, 0, predictions[0], 0.0, true);
    return make_selection(roster, *best, predictions[*best], best_error, false);
}

RenderingConfiguration temporal_filter(const RenderingConfiguration& from, const RenderingConfiguration& to, double t,
                                       double interval) {
    if (from.size() != to.size()) throw std::invalid_argument("temporal_filter: configuration sizes differ");
    if (!(interval > 0.0)) throw std::invalid_argument("temporal_filter: interval must be positive");
    if (!(t >= 0.0 && t <= interval)) throw std::invalid_argument("temporal_filter: t outside [0, T]");
    if (t == interval) return to;
    const double u = t / interval;
    RenderingConfiguration out;
    out.levels.reserve(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
        const double blend = (1.0 - u) * from[i] + u * to[i];
        out.levels.push_back(static_cast<int>(std::round(blend)));
    }
    return out;
}

double mean_prediction_error(const PowerModel& model, const RenderingConfiguration& config,
                             const std::vector<FrameSample>& window) {
    if (window.empty()) throw std::invalid_argument("accuracy check: empty window");
    const auto coefficients = model.coefficients_for(config);
    double total = 0.0;
    for (const auto& s : window)
        total += std::abs(s.measured_power -
                          predict_power(model.roster(), model.saturation(), coefficients, s.per_pass));
    return total / static_cast<double>(window.size());
}

bool accuracy_check(const PowerModel& model, const RenderingConfiguration& config,
                    const std::vector<FrameSample>& window, double threshold) {
    return mean_prediction_error(model, config, window) > threshold * model.saturation().range();
}

// ---------------------------------------------------------------------------
// Governor

Governor::Governor(GovernorConfig config, std::shared_ptr<const PowerModel> model, ErrorModel error_model,
                   RenderingConfiguration initial_config)
    : config_(config),
      roster_(model ? model->roster() : throw std::invalid_argument("governor needs a power model")),
      model_(std::move(model)),
      error_model_(std::make_shared<const ErrorModel>(std::move(error_model))) {
    config_.validate();
    roster_.validate(initial_config);
    if (static_cast<std::size_t>(config_.fitting_window) < 3 * roster_.power_pass_count())
        throw std::invalid_argument("fitting window must hold at least 3 samples per power pass");
    if (error_model_->worst_error.size() != roster_.size())
        throw std::invalid_argument("error model does not match the roster");
    state_.phase = config_.initial_fit ? Phase::fitting : Phase::steady;
    state_.s_old = state_.s_new = state_.s_eff = initial_config;
}

Governor::~Governor() = default;

double Governor::budget() const { return budget_watts(config_, model_->saturation()); }

void Governor::apply_ready_model_jobs(std::int64_t frame, FrameRecord& record) {
    if (pending_fit_ && frame >= fit_visible_) {
        FitResult fit = pending_fit_->get();
        pending_fit_.reset();
        record.events.push_back(GovernorEvent::fit);
        last_fit_ = FitDiagnostics{fit.residual_norm, fit.clamp_count, fit.rank_deficient, 0.0, false};

        auto base = model_;
        auto config = fit_config_;
        pending_reuse_ = std::async(std::launch::async, [base, config, coefficients = std::move(fit.coefficients)]() {
            return std::shared_ptr<const PowerModel>(std::make_shared<PowerModel>(
                base->roster(), base->saturation(), base->cost_table(), coefficients, config));
        });
        reuse_visible_ = frame + std::max(1, config_.frames_for(config_.reuse_latency));
    }
    if (pending_reuse_ && frame >= reuse_visible_) {
        model_ = pending_reuse_->get();
        pending_reuse_.reset();
        record.events.push_back(GovernorEvent::reuse);
        if (last_fit_) {
            last_fit_->unit_cost_residual = model_->unit_costs().residual_norm;
            last_fit_->psi_indeterminate = model_->unit_costs().psi_indeterminate;
            record.fit = last_fit_;
        }
        if (state_.phase == Phase::fitting) {
            state_.phase = Phase::steady;
            fit_submitted_ = false;
        }
    }
}

void Governor::apply_ready_quality(std::int64_t frame, FrameRecord& record) {
    auto it = pending_quality_.begin();
    while (it != pending_quality_.end()) {
        if (it->visible_frame > frame) {
            ++it;
            continue;
        }
        const double error = it->error.get();
        error_model_ = std::make_shared<const ErrorModel>(error_model_->with_worst_error(it->pass, error, it->scene_frame));
        record.events.push_back(GovernorEvent::quality_update);
        it = pending_quality_.erase(it);
    }
}

void Governor::run_selection(const FrameInputs& inputs, FrameRecord& record) {
    const auto predictions = predict_all(*model_, inputs.primitives);
    const Selection selection =
        config_.mode == SelectionMode::power_budget
            ? select_configuration(roster_, predictions, *error_model_, budget())
            : select_configuration_error_budget(roster_, predictions, *error_model_, config_.error_budget);
    state_.s_old = state_.s_eff;
    state_.s_new = selection.config;
    state_.filter_start = inputs.frame;
    record.infeasible = selection.infeasible;
    record.events.push_back(GovernorEvent::select);
    ++selections_;
}

std::optional<BackgroundRequest> Governor::schedule_background(std::int64_t frame) {
    if (frame % config_.error_frequency != 0) return std::nullopt;
    const int slots = static_cast<int>(roster_.size()) + 1;
    // Passes with a single level have nothing to degrade.
    for (int tries = 0; tries < slots; ++tries) {
        const int slot = state_.background_cursor;
        state_.background_cursor = (state_.background_cursor + 1) % slots;
        if (slot == 0) {
            cycle_scene_frame_ = frame;
            return BackgroundRequest{0, roster_.best(), frame, frame};
        }
        const auto pass = static_cast<std::size_t>(slot - 1);
        const int l_max = roster_.pass(pass).level_count - 1;
        if (l_max == 0) continue;
        return BackgroundRequest{slot, single_degradation_config(roster_, pass, l_max), cycle_scene_frame_, frame};
    }
    return std::nullopt;
}

void Governor::deliver_background(const BackgroundRequest& request, FrameImage image) {
    if (request.slot == 0) {
        reference_ = std::move(image);
        return;
    }
    if (!reference_) return;
    auto reference = *reference_;
    PendingQuality pending{request.requested_at + std::max(1, config_.frames_for(config_.ssim_latency)),
                           static_cast<std::size_t>(request.slot - 1), request.scene_frame,
                           std::async(std::launch::async, [reference = std::move(reference), image = std::move(image)]() {
                               return quality_error(reference, image);
                           })};
    pending_quality_.push_back(std::move(pending));
}

FrameRecord Governor::tick(const FrameInputs& inputs) {
    const std::int64_t frame = inputs.frame;
    FrameRecord record;
    record.frame = frame;

    apply_ready_model_jobs(frame, record);
    apply_ready_quality(frame, record);

    Phase phase = state_.phase;
    if (phase == Phase::steady && frame - state_.set_frame >= config_.selection_period) {
        run_selection(inputs, record);
        phase = Phase::selecting;
        state_.phase = Phase::filtering;
    } else if (phase == Phase::filtering) {
        const auto elapsed = frame - state_.filter_start;
        const double t = std::min(static_cast<double>(elapsed) / config_.fps, config_.filter_interval);
        if (elapsed >= config_.filter_frames()) {
            state_.s_eff = state_.s_new;
            state_.set_frame = frame;
            state_.phase = Phase::accuracy_check;
            samples_.clear();
            record.events.push_back(GovernorEvent::filter_done);
        } else {
            state_.s_eff = temporal_filter(state_.s_old, state_.s_new, t, config_.filter_interval);
        }
    }
    record.phase = phase;
    record.config = state_.s_eff;
    record.budget_watts = budget();

    const PassPrimitives primitives = inputs.primitives(state_.s_eff);
    record.measured_power = inputs.measure(state_.s_eff);
    record.predicted_power = model_->predict(state_.s_eff, primitives);

    if (phase == Phase::accuracy_check) {
        samples_.push_back({record.measured_power, primitives});
        if (samples_.size() >= static_cast<std::size_t>(config_.accuracy_check_window)) {
            if (accuracy_check(*model_, state_.s_eff, samples_, config_.accuracy_threshold)) {
                record.events.push_back(GovernorEvent::check_fail);
                state_.phase = Phase::fitting;
                ++refits_;
            } else {
                record.events.push_back(GovernorEvent::check_pass);
                state_.phase = Phase::steady;
            }
            samples_.clear();
        }
    } else if (phase == Phase::fitting && !fit_submitted_) {
        samples_.push_back({record.measured_power, primitives});
        if (samples_.size() >= static_cast<std::size_t>(config_.fitting_window)) {
            fit_config_ = state_.s_eff;
            auto window = std::move(samples_);
            samples_.clear();
            pending_fit_ = std::async(std::launch::async, [roster = roster_, window = std::move(window),
                                                           saturation = model_->saturation()]() {
                return fit_coefficients(roster, window, saturation);
            });
            fit_visible_ = frame + std::max(1, config_.frames_for(config_.fit_latency));
            fit_submitted_ = true;
        }
    }

    record.background = schedule_background(frame);
    if (record.background) record.events.push_back(GovernorEvent::background);

    state_.sample_count = samples_.size();
    record.worst_error = error_model_->worst_error;
    record.staleness.reserve(roster_.size());
    for (std::size_t i = 0; i < roster_.size(); ++i) record.staleness.push_back(error_model_->staleness(i, frame));
    return record;
}

}  // namespace pgov
