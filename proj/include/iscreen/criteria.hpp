#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "iscreen/core.hpp"
#include "iscreen/errors.hpp"
#include "iscreen/penalty.hpp"
#include "iscreen/projection.hpp"

namespace iscreen {

struct ScreenScore {
    int index;
    double score;
};

namespace detail {

/// Rank eligible columns by score, descending, ties broken by lowest index.
inline IndexSet top_indices(std::vector<ScreenScore>& scores, int a) {
    std::sort(scores.begin(), scores.end(), [](const ScreenScore& l, const ScreenScore& r) {
        if (l.score != r.score) return l.score > r.score;
        return l.index < r.index;
    });
    const int take = std::min<int>(a, static_cast<int>(scores.size()));
    std::vector<int> out(static_cast<std::size_t>(take));
    for (int i = 0; i < take; ++i) out[static_cast<std::size_t>(i)] = scores[static_cast<std::size_t>(i)].index;
    return IndexSet(std::move(out));
}

} // namespace detail

/// Candidate set A of size min(a, #eligible) under the given screening criterion:
///   SCR1 ranks |X_i^T M_S Y|,
///   SCR2 ranks (X_i^T M_S Y)^2 / X_i^T M_S X_i   (equivalent to smallest RSS after adding i),
///   SCR3 ranks (X_i^T M_S Y)^2 / (X_i^T M_S X_i)^2 (equivalent to largest joint-fit |beta_i|).
/// Columns failing the rank guard are ineligible for SCR2/SCR3 (their statistic
/// divides by ~0) but stay eligible for SCR1.
inline IndexSet screen(Screening criterion, const ActiveSetState& state, int a) {
    if (a < 1) throw InvalidConfig("screen size must be >= 1");
    const Dataset& data = state.dataset();
    const IndexSet eligible = state.active().complement(data.p());
    if (eligible.empty()) throw NoEligibleColumns();

    const int e = eligible.size();
    const int s = state.active().size();

    Eigen::VectorXd marg(e);
    for (int i = 0; i < e; ++i) marg[i] = data.x.col(eligible[i]).dot(state.residual());

    std::vector<ScreenScore> scores;
    scores.reserve(static_cast<std::size_t>(e));

    if (criterion == Screening::SCR1) {
        for (int i = 0; i < e; ++i) scores.push_back({eligible[i], std::abs(marg[i])});
        return detail::top_indices(scores, a);
    }

    // Projected column norms for the whole complement in one batch:
    // q_i = ||X_i||^2 − ||R^{-T} X_S^T X_i||^2.
    Eigen::VectorXd q(e);
    if (s == 0) {
        for (int i = 0; i < e; ++i) q[i] = data.col_sq_norms[eligible[i]];
    } else {
        Eigen::MatrixXd xs(data.n(), s);
        for (int i = 0; i < s; ++i) xs.col(i) = data.x.col(state.active()[i]);
        Eigen::MatrixXd xe(data.n(), e);
        for (int i = 0; i < e; ++i) xe.col(i) = data.x.col(eligible[i]);
        Eigen::MatrixXd w = xs.transpose() * xe;
        state.chol_factor().triangularView<Eigen::Upper>().transpose().solveInPlace(w);
        for (int i = 0; i < e; ++i)
            q[i] = std::max(data.col_sq_norms[eligible[i]] - w.col(i).squaredNorm(), 0.0);
    }

    for (int i = 0; i < e; ++i) {
        if (q[i] < kRankTolerance * data.col_sq_norms[eligible[i]]) continue;
        const double num = marg[i] * marg[i];
        const double score = criterion == Screening::SCR2 ? num / q[i] : num / (q[i] * q[i]);
        scores.push_back({eligible[i], score});
    }
    if (scores.empty()) throw NoEligibleColumns();
    return detail::top_indices(scores, a);
}

struct SelectResult {
    IndexSet model;        // S_{k+1}
    IndexSet selected_new; // B_{k+1} (SEL2), A_{k+1} (SEL1), the reselected model (SEL3)
    std::optional<double> pls_objective;
    bool solver_converged = true;
};

/// Next model from the current state and the screened candidates:
///   SEL1: S ∪ A.
///   SEL2: S ∪ support of PLS fit of the residual M_S Y on X_A.
///   SEL3: support of PLS fit of Y on X_{S∪A}; members of S may drop out.
inline SelectResult select(Selection criterion, const ActiveSetState& state,
                           const IndexSet& screened,
                           const std::optional<PenaltySpec>& penalty,
                           const PlsOptions& opts = {}) {
    const Dataset& data = state.dataset();
    for (int j : screened)
        if (state.active().contains(j)) throw IndexActive(j);
    const bool needs_penalty = criterion != Selection::SEL1;
    if (needs_penalty && !penalty)
        throw InvalidConfig("selection criterion requires a penalty spec");

    SelectResult out;
    if (criterion == Selection::SEL1) {
        out.model = state.active().set_union(screened);
        out.selected_new = screened;
        return out;
    }

    if (criterion == Selection::SEL2) {
        Eigen::MatrixXd xa(data.n(), screened.size());
        for (int i = 0; i < screened.size(); ++i) xa.col(i) = data.x.col(screened[i]);
        const PlsSolution sol = solve_pls(xa, state.residual(), *penalty, opts);
        std::vector<int> picked;
        for (int i : sol.support) picked.push_back(screened[i]);
        out.selected_new = IndexSet(std::move(picked));
        out.model = state.active().set_union(out.selected_new);
        out.pls_objective = sol.objective;
        out.solver_converged = sol.converged;
        return out;
    }

    // SEL3: refit the whole candidate model against Y.
    const IndexSet candidates = state.active().set_union(screened);
    Eigen::MatrixXd xc(data.n(), candidates.size());
    for (int i = 0; i < candidates.size(); ++i) xc.col(i) = data.x.col(candidates[i]);
    const PlsSolution sol = solve_pls(xc, data.y, *penalty, opts);
    std::vector<int> picked;
    for (int i : sol.support) picked.push_back(candidates[i]);
    out.model = IndexSet(std::move(picked));
    out.selected_new = out.model;
    out.pls_objective = sol.objective;
    out.solver_converged = sol.converged;
    return out;
}

} // namespace iscreen
