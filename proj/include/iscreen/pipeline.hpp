#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "iscreen/core.hpp"
#include "iscreen/criteria.hpp"
#include "iscreen/errors.hpp"
#include "iscreen/projection.hpp"

namespace iscreen {

enum class Preset {
    ISIS,        // SCR1-SEL2
    VanISIS,     // SCR2-SEL3
    VanISIS_R,   // SCR3-SEL3
    FR,          // SCR2-SEL1 with a_k = 1
    SIS_once,    // SCR1-SEL1, one step
    NP_ISIS,     // SCR1-SEL1
    NP_VanISIS,  // SCR2-SEL1
    NP_VanISIS_R // SCR3-SEL1
};

inline const char* to_string(Preset p) {
    switch (p) {
        case Preset::ISIS: return "isis";
        case Preset::VanISIS: return "van-isis";
        case Preset::VanISIS_R: return "van-isis-r";
        case Preset::FR: return "fr";
        case Preset::SIS_once: return "sis";
        case Preset::NP_ISIS: return "np-isis";
        case Preset::NP_VanISIS: return "np-van-isis";
        case Preset::NP_VanISIS_R: return "np-van-isis-r";
    }
    return "unknown";
}

/// Classical SIS screening size ceil(n / log n).
inline int default_screen_size(int n) {
    return static_cast<int>(std::ceil(static_cast<double>(n) / std::log(static_cast<double>(n))));
}

inline constexpr int kDefaultMaxIters = 10;

/// Constant-size schedule with the iteration count truncated so the total
/// screened budget never exceeds p.
inline std::pair<ScreenSchedule, int> capped_schedule(int a, int kappa, int p) {
    if (a < 1) throw InvalidConfig("screen size must be >= 1");
    if (a > p) a = p;
    int max_steps = p / a; // largest kappa with a*kappa <= p
    if (max_steps < 1) max_steps = 1;
    return {ScreenSchedule::constant_size(a), std::min(kappa, max_steps)};
}

/// Resolve a named preset into a full AlgorithmConfig for an n x p problem.
/// a_size and max_iters override the preset defaults; the schedule is capped
/// so the total screening budget stays within p.
inline AlgorithmConfig resolve_preset(Preset preset, int n, int p,
                                      std::optional<PenaltySpec> penalty = std::nullopt,
                                      std::optional<int> max_iters = std::nullopt,
                                      std::optional<int> a_size = std::nullopt) {
    AlgorithmConfig cfg;
    int a = a_size.value_or(default_screen_size(n));
    int kappa = max_iters.value_or(kDefaultMaxIters);
    switch (preset) {
        case Preset::ISIS:
            cfg.screening = Screening::SCR1;
            cfg.selection = Selection::SEL2;
            break;
        case Preset::VanISIS:
            cfg.screening = Screening::SCR2;
            cfg.selection = Selection::SEL3;
            cfg.stop_on_fixed_point = true;
            break;
        case Preset::VanISIS_R:
            cfg.screening = Screening::SCR3;
            cfg.selection = Selection::SEL3;
            cfg.stop_on_fixed_point = true;
            break;
        case Preset::FR:
            cfg.screening = Screening::SCR2;
            cfg.selection = Selection::SEL1;
            a = a_size.value_or(1);
            break;
        case Preset::SIS_once:
            cfg.screening = Screening::SCR1;
            cfg.selection = Selection::SEL1;
            kappa = max_iters.value_or(1);
            break;
        case Preset::NP_ISIS:
            cfg.screening = Screening::SCR1;
            cfg.selection = Selection::SEL1;
            break;
        case Preset::NP_VanISIS:
            cfg.screening = Screening::SCR2;
            cfg.selection = Selection::SEL1;
            break;
        case Preset::NP_VanISIS_R:
            cfg.screening = Screening::SCR3;
            cfg.selection = Selection::SEL1;
            break;
    }
    auto [schedule, capped_kappa] = capped_schedule(a, kappa, p);
    cfg.screen_sizes = schedule;
    cfg.max_iters = capped_kappa;
    if (cfg.selection != Selection::SEL1) {
        if (!penalty) throw InvalidConfig(std::string(to_string(preset)) +
                                          " preset requires a penalty spec");
        cfg.penalty = penalty;
    }
    cfg.validate(p);
    return cfg;
}

/// Run the configured iterative screening algorithm to termination.
/// Deterministic given (dataset, config). Numerical dead ends surface as the
/// trajectory's stop_reason, never as exceptions.
inline Trajectory run(const Dataset& data, const AlgorithmConfig& config,
                      const PlsOptions& pls_opts = {}) {
    config.validate(data.p());
    Trajectory traj;
    traj.standardized_inputs = data.standardized;
    traj.stop_reason = StopReason::MaxIters;

    ActiveSetState state = ActiveSetState::empty(data);
    IndexSet prev_model;

    for (int k = 1; k <= config.max_iters; ++k) {
        if (state.active().size() == data.p()) {
            traj.stop_reason = StopReason::AllColumnsUsed;
            break;
        }
        const double rss_before = state.rss();

        IndexSet screened;
        try {
            screened = screen(config.screening, state, config.screen_sizes.at(k));
        } catch (const NoEligibleColumns&) {
            traj.stop_reason = StopReason::AllColumnsUsed;
            break;
        }

        SelectResult sel;
        try {
            sel = select(config.selection, state, screened, config.penalty, pls_opts);
        } catch (const RankDeficient&) {
            traj.stop_reason = StopReason::RankDeficient;
            break;
        }

        try {
            if (config.selection == Selection::SEL3) {
                const IndexSet kept = state.active().set_intersect(sel.model);
                const IndexSet added = sel.model.set_minus(state.active());
                state = state.shrink_to(kept).extend(added);
            } else {
                state = state.extend(sel.model.set_minus(state.active()));
            }
        } catch (const RankDeficient&) {
            traj.stop_reason = StopReason::RankDeficient;
            break;
        }

        IterationRecord rec;
        rec.k = k;
        rec.screened = screened;
        rec.selected_new = sel.selected_new;
        rec.model = state.active();
        rec.rss = state.rss();
        // rho_k: plain RSS of the entering model for SEL1 (no penalty), the
        // penalized minimum for SEL2/SEL3.
        rec.objective = sel.pls_objective.value_or(rss_before);
        rec.solver_converged = sel.solver_converged;
        traj.records.push_back(std::move(rec));

        const bool fixed_point = config.selection == Selection::SEL3 &&
                                 config.stop_on_fixed_point && state.active() == prev_model;
        if (fixed_point) {
            traj.stop_reason = StopReason::FixedPoint;
            break;
        }
        prev_model = state.active();
    }
    return traj;
}

inline Trajectory run(const Dataset& data, Preset preset,
                      std::optional<PenaltySpec> penalty = std::nullopt,
                      std::optional<int> max_iters = std::nullopt,
                      std::optional<int> a_size = std::nullopt) {
    return run(data, resolve_preset(preset, data.n(), data.p(), penalty, max_iters, a_size));
}

struct ScheduleSuggestion {
    int kappa = 0;
    std::optional<double> lambda_max;
};

enum class TheoremMode { Thm1, Thm2, Thm3 };

/// Evaluate the theorem formulas for the iteration count and the tuning
/// parameter bound. The rate constants are unobservable on real data; this
/// helper evaluates the stated expressions verbatim and cannot validate the
/// constants against a sample.
inline ScheduleSuggestion suggest_schedule(const RateConstants& rates, long n,
                                           TheoremMode mode) {
    rates.validate();
    if (n < 2) throw InvalidRates("n must be at least 2");
    const double nn = static_cast<double>(n);
    const double growth = std::pow(nn, rates.xi_y + 2.0 * rates.xi_beta);
    const double c_kappa = rates.c_kappa();

    ScheduleSuggestion out;
    switch (mode) {
        case TheoremMode::Thm1:
            out.kappa = static_cast<int>(std::ceil(c_kappa * growth));
            break;
        case TheoremMode::Thm2: {
            out.kappa = static_cast<int>(std::ceil(2.0 * c_kappa * growth));
            out.lambda_max = rates.tau_min * rates.tau_min * rates.c_beta *
                             std::pow(nn, -rates.xi_beta) / (4.0 * rates.tau_max);
            break;
        }
        case TheoremMode::Thm3: {
            out.kappa = static_cast<int>(std::ceil(2.0 * c_kappa * growth));
            const double t2 = rates.tau_min * rates.tau_min;
            const double tau_max3 = rates.tau_max * rates.tau_max * rates.tau_max;
            out.lambda_max =
                t2 * t2 * rates.c_beta * rates.c_beta *
                std::pow(nn, -2.0 * rates.xi_beta - (rates.xi_s_star() + rates.xi_y) / 2.0) /
                (8.0 * std::sqrt(rates.c_star()) * tau_max3);
            break;
        }
    }
    return out;
}

enum class SuccessMode { Final, Any };

/// Whether the trajectory covers the true support: Final checks the last
/// model, Any checks every recorded model.
inline bool check_sure_screening(const Trajectory& traj, const TrueModel& truth,
                                 SuccessMode mode) {
    if (truth.indices.empty()) return true;
    if (mode == SuccessMode::Final)
        return truth.indices.is_subset_of(traj.final_model());
    for (const auto& rec : traj.records)
        if (truth.indices.is_subset_of(rec.model)) return true;
    return false;
}

/// First 1-based step k with T ⊆ S_k, or nullopt.
inline std::optional<int> first_coverage_step(const Trajectory& traj, const TrueModel& truth) {
    for (const auto& rec : traj.records)
        if (truth.indices.is_subset_of(rec.model)) return rec.k;
    return std::nullopt;
}

} // namespace iscreen
