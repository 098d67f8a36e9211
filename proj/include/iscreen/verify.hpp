#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "iscreen/core.hpp"
#include "iscreen/criteria.hpp"
#include "iscreen/oracle.hpp"
#include "iscreen/penalty.hpp"
#include "iscreen/projection.hpp"
#include "iscreen/rng.hpp"

namespace iscreen {
namespace verify {

/// Fault injection for negative-control tests: proves the suites can fail.
enum class Sabotage { None, FlipCor1Sign };

struct VerifyOptions {
    int instances = 50;
    std::uint64_t seed = 0;
    Sabotage sabotage = Sabotage::None;
};

struct SuiteResult {
    std::string name;
    int instances = 0;
    int failures = 0;
    double max_rel_error = 0.0;

    bool pass() const { return instances > 0 && failures == 0; }
};

namespace detail {

struct RandomInstance {
    Dataset data;
    IndexSet active;
    Eigen::VectorXd true_beta;
    Eigen::VectorXd noise;
    IndexSet truth;
};

/// Random dense instance in the identity-suite regime: n in [10,50],
/// p in [2,20], |S| <= 8, Gaussian entries, response from a sparse model.
inline RandomInstance make_instance(Rng& rng, bool need_uncovered_truth) {
    const int n = 10 + static_cast<int>(rng.next_below(41));
    const int p = 2 + static_cast<int>(rng.next_below(19));

    Eigen::MatrixXd x(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = rng.next_normal();

    const int t = 1 + static_cast<int>(rng.next_below(
                          static_cast<std::uint64_t>(std::min(4, p))));
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    std::vector<int> support;
    for (int j = 0; j < t; ++j) {
        support.push_back(j);
        const double mag = 0.5 + 1.5 * rng.next_unit();
        beta[j] = rng.next_unit() < 0.5 ? -mag : mag;
    }

    Eigen::VectorXd noise(n);
    for (int i = 0; i < n; ++i) noise[i] = rng.next_normal();
    Eigen::VectorXd y = x * beta + noise;

    const int max_s = std::max(0, std::min({8, p - 1, n - t - 2}));
    int s_size = max_s > 0 ? static_cast<int>(rng.next_below(
                                 static_cast<std::uint64_t>(max_s + 1)))
                           : 0;
    std::vector<int> pool;
    for (int j = 0; j < p; ++j) pool.push_back(j);
    // Keep at least one truth column outside S when requested.
    const int reserved = need_uncovered_truth ? support[static_cast<std::size_t>(
                                                    rng.next_below(static_cast<std::uint64_t>(t)))]
                                              : -1;
    std::vector<int> active;
    while (static_cast<int>(active.size()) < s_size && !pool.empty()) {
        const std::size_t pick = static_cast<std::size_t>(rng.next_below(pool.size()));
        const int j = pool[pick];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        if (j == reserved) continue;
        active.push_back(j);
    }

    RandomInstance inst;
    inst.data = Dataset(std::move(x), std::move(y));
    inst.active = IndexSet(std::move(active));
    inst.true_beta = std::move(beta);
    inst.noise = std::move(noise);
    inst.truth = IndexSet(std::move(support));
    return inst;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline int pick_inactive(const RandomInstance& inst, Rng& rng) {
    const IndexSet elig = inst.active.complement(inst.data.p());
    return elig[static_cast<int>(rng.next_below(static_cast<std::uint64_t>(elig.size())))];
}

} // namespace detail

/// Single-column RSS-reduction identity: the fast-path delta equals the
/// difference of two independent dense refits.
inline SuiteResult run_cor1_suite(const VerifyOptions& opts) {
    SuiteResult res{"cor1-rss-delta", 0, 0, 0.0};
    Rng rng = Rng::split(opts.seed, 101);
    const double sign = opts.sabotage == Sabotage::FlipCor1Sign ? -1.0 : 1.0;
    while (res.instances < opts.instances) {
        auto inst = detail::make_instance(rng, false);
        const int j = detail::pick_inactive(inst, rng);
        ActiveSetState state;
        try {
            state = ActiveSetState::empty(inst.data).extend(inst.active);
        } catch (const RankDeficient&) {
            continue;
        }
        if (state.projected_col_norm_sq(j) <
            1e-6 * inst.data.col_sq_norms[j])
            continue; // stay away from the guard boundary
        const double fast = sign * state.rss_delta_single(j);
        double dense;
        try {
            dense = oracle::dense_rss(inst.data.x, inst.data.y, inst.active) -
                    oracle::dense_rss(inst.data.x, inst.data.y,
                                      inst.active.set_union(IndexSet{j}));
        } catch (const RankDeficient&) {
            continue;
        }
        const double err = detail::rel_err(fast, dense);
        res.max_rel_error = std::max(res.max_rel_error, err);
        if (err > 1e-8) ++res.failures;
        ++res.instances;
    }
    return res;
}

/// Joint-fit coefficient identity: the fast-path last coefficient matches the
/// dense joint OLS, and its square times the projected norm squared recovers
/// the squared marginal statistic.
inline SuiteResult run_prop3_suite(const VerifyOptions& opts) {
    SuiteResult res{"prop3-joint-coef", 0, 0, 0.0};
    Rng rng = Rng::split(opts.seed, 103);
    while (res.instances < opts.instances) {
        auto inst = detail::make_instance(rng, false);
        const int j = detail::pick_inactive(inst, rng);
        ActiveSetState state;
        try {
            state = ActiveSetState::empty(inst.data).extend(inst.active);
        } catch (const RankDeficient&) {
            continue;
        }
        if (state.projected_col_norm_sq(j) < 1e-6 * inst.data.col_sq_norms[j]) continue;
        double dense;
        try {
            dense = oracle::dense_joint_ols_last_coef(inst.data.x, inst.data.y,
                                                      inst.active, j);
        } catch (const RankDeficient&) {
            continue;
        }
        const double fast = state.beta_hat_last(j);
        double err = detail::rel_err(fast, dense);

        const double q = state.projected_col_norm_sq(j);
        const double marg = state.marginal_stat(j);
        err = std::max(err, detail::rel_err(fast * fast * q * q, marg * marg));

        res.max_rel_error = std::max(res.max_rel_error, err);
        if (err > 1e-8) ++res.failures;
        ++res.instances;
    }
    return res;
}

/// Block RSS-reduction lower bound: lhs >= rhs up to 1e-8 slack.
inline SuiteResult run_prop2_suite(const VerifyOptions& opts) {
    SuiteResult res{"prop2-block-bound", 0, 0, 0.0};
    Rng rng = Rng::split(opts.seed, 102);
    while (res.instances < opts.instances) {
        auto inst = detail::make_instance(rng, false);
        ActiveSetState state;
        try {
            state = ActiveSetState::empty(inst.data).extend(inst.active);
        } catch (const RankDeficient&) {
            continue;
        }
        const IndexSet elig = inst.active.complement(inst.data.p());
        const int room = std::min({elig.size(), 4, inst.data.n() - inst.active.size() - 1});
        if (room < 1) continue;
        const int block = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(room)));
        std::vector<int> add(elig.begin(), elig.begin() + block);
        double lhs, rhs;
        try {
            std::tie(lhs, rhs) = state.rss_lower_bound_check(IndexSet(std::move(add)));
        } catch (const RankDeficient&) {
            continue;
        }
        const double slack = rhs - lhs;
        const double err = slack / std::max(1.0, std::abs(lhs));
        res.max_rel_error = std::max(res.max_rel_error, std::max(err, 0.0));
        if (err > 1e-8) ++res.failures;
        ++res.instances;
    }
    return res;
}

/// Marginal-signal lower bound for uncovered relevant predictors, evaluated
/// with the generator-known coefficients and noise.
inline SuiteResult run_prop4_suite(const VerifyOptions& opts) {
    SuiteResult res{"prop4-signal-bound", 0, 0, 0.0};
    Rng rng = Rng::split(opts.seed, 104);
    while (res.instances < opts.instances) {
        auto inst = detail::make_instance(rng, true);
        const IndexSet uncovered = inst.truth.set_minus(inst.active);
        if (uncovered.empty()) continue;
        const IndexSet s_star = inst.active.set_union(inst.truth);
        if (s_star.size() >= inst.data.n()) continue;

        Eigen::MatrixXd xs_star = oracle::detail::gather(inst.data.x, s_star);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs_star);
        qr.setThreshold(1e-10);
        if (qr.rank() < s_star.size()) continue;

        ActiveSetState state;
        try {
            state = ActiveSetState::empty(inst.data).extend(inst.active);
        } catch (const RankDeficient&) {
            continue;
        }

        double beta_min = std::numeric_limits<double>::infinity();
        for (int j : inst.truth) beta_min = std::min(beta_min, std::abs(inst.true_beta[j]));

        double lhs = 0.0, noise_term = 0.0, col_norm = 0.0;
        for (int j : uncovered) {
            const double m = state.marginal_stat(j);
            lhs = std::max(lhs, m * m);
            col_norm = std::max(col_norm, inst.data.col_sq_norms[j]);
            const double q = state.projected_col_norm_sq(j);
            if (q <= 0.0) continue;
            // X_j^T M_S eps / ||X_j^T M_S||, with M_S applied via the state residual trick:
            // X_j^T M_S eps = (M_S X_j)^T eps, and M_S X_j from the dense oracle.
            const Eigen::VectorXd proj_col =
                oracle::dense_residual(inst.data.x, inst.data.x.col(j), inst.active);
            const double w = proj_col.dot(inst.noise) / std::sqrt(q);
            noise_term = std::max(noise_term, w * w);
        }

        const Eigen::MatrixXd gram = xs_star.transpose() * xs_star;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
        const double lam_min = eig.eigenvalues().minCoeff();

        const double rhs =
            0.5 * beta_min * beta_min * lam_min * lam_min - col_norm * noise_term;
        const double viol = (rhs - lhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
        res.max_rel_error = std::max(res.max_rel_error, std::max(viol, 0.0));
        if (viol > 1e-8) ++res.failures;
        ++res.instances;
    }
    return res;
}

/// Fast-path screening equals literal brute-force screening, sets and order.
inline SuiteResult run_screen_equivalence_suite(const VerifyOptions& opts) {
    SuiteResult res{"screen-equivalence", 0, 0, 0.0};
    Rng rng = Rng::split(opts.seed, 105);
    const Screening crits[] = {Screening::SCR1, Screening::SCR2, Screening::SCR3};
    while (res.instances < opts.instances) {
        const int n = 10 + static_cast<int>(rng.next_below(31));
        const int p = 2 + static_cast<int>(rng.next_below(14));
        Eigen::MatrixXd x(n, p);
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < n; ++i) x(i, j) = rng.next_normal();
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = rng.next_normal();
        Dataset data(std::move(x), std::move(y));

        const int max_s = std::min({5, p - 1, n - 2});
        const int s_size = max_s > 0 ? static_cast<int>(rng.next_below(
                                           static_cast<std::uint64_t>(max_s + 1)))
                                     : 0;
        std::vector<int> pool;
        for (int j = 0; j < p; ++j) pool.push_back(j);
        std::vector<int> active;
        for (int j = 0; j < s_size; ++j) {
            const std::size_t pick = static_cast<std::size_t>(rng.next_below(pool.size()));
            active.push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        IndexSet s(std::move(active));
        const int a = 1 + static_cast<int>(rng.next_below(
                              static_cast<std::uint64_t>(p - s.size())));

        ActiveSetState state;
        try {
            state = ActiveSetState::empty(data).extend(s);
        } catch (const RankDeficient&) {
            continue;
        }
        bool ok = true;
        for (Screening c : crits) {
            const IndexSet fast = screen(c, state, a);
            const IndexSet brute = oracle::brute_screen(c, data.x, data.y, s, a);
            if (fast.indices() != brute.indices()) ok = false; // ordered comparison
        }
        if (!ok) ++res.failures;
        ++res.instances;
    }
    return res;
}

/// Solver dominance over the exhaustive grid for one- and two-column problems,
/// both penalties.
inline SuiteResult run_pls_grid_suite(const VerifyOptions& opts) {
    SuiteResult res{"pls-grid-dominance", 0, 0, 0.0};
    Rng rng = Rng::split(opts.seed, 106);
    while (res.instances < opts.instances) {
        const int n = 15 + static_cast<int>(rng.next_below(16));
        const int m = 1 + static_cast<int>(rng.next_below(2));
        Eigen::MatrixXd x(n, m);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < n; ++i) x(i, j) = rng.next_normal();
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z[i] = 2.0 * rng.next_normal();

        PenaltySpec pen;
        pen.kind = res.instances % 2 == 0 ? PenaltyKind::Lasso : PenaltyKind::Scad;
        pen.lambda = 0.05 + 0.45 * rng.next_unit();

        const PlsSolution sol = solve_pls(x, z, pen);
        const double radius = 2.0 * std::max(1.0, sol.coefficients.lpNorm<Eigen::Infinity>());
        const auto grid = oracle::grid_pls(x, z, pen, radius, m == 1 ? 0.002 : 0.02);

        const double gap = sol.objective - grid.objective;
        res.max_rel_error = std::max(res.max_rel_error, std::max(gap, 0.0));
        if (gap > 1e-6) ++res.failures;
        ++res.instances;
    }
    return res;
}

/// LASSO stationarity: KKT residuals at the returned solution.
inline SuiteResult run_pls_kkt_suite(const VerifyOptions& opts) {
    SuiteResult res{"pls-lasso-kkt", 0, 0, 0.0};
    Rng rng = Rng::split(opts.seed, 107);
    PlsOptions tight;
    tight.tol = 1e-12;
    while (res.instances < opts.instances) {
        const int n = 60 + static_cast<int>(rng.next_below(41));
        const int m = 2 + static_cast<int>(rng.next_below(49)); // up to 50
        Eigen::MatrixXd x(n, m);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < n; ++i) x(i, j) = rng.next_normal();
        Eigen::VectorXd beta_true = Eigen::VectorXd::Zero(m);
        for (int j = 0; j < std::min(3, m); ++j) beta_true[j] = 1.0 - 0.4 * j;
        Eigen::VectorXd z = x * beta_true;
        for (int i = 0; i < n; ++i) z[i] += 0.5 * rng.next_normal();

        PenaltySpec pen;
        pen.kind = PenaltyKind::Lasso;
        pen.lambda = 0.02 + 0.2 * rng.next_unit();

        const PlsSolution sol = solve_pls(x, z, pen, tight);
        const Eigen::VectorXd resid = z - x * sol.coefficients;
        const double threshold = static_cast<double>(n) * pen.lambda / 2.0;
        double worst = 0.0;
        for (int j = 0; j < m; ++j) {
            const double g = x.col(j).dot(resid);
            if (sol.coefficients[j] == 0.0)
                worst = std::max(worst, std::abs(g) - threshold);
            else
                worst = std::max(worst,
                                 std::abs(g - threshold * (sol.coefficients[j] > 0 ? 1.0 : -1.0)));
        }
        res.max_rel_error = std::max(res.max_rel_error, std::max(worst, 0.0));
        if (worst > 1e-6) ++res.failures;
        ++res.instances;
    }
    return res;
}

inline std::vector<SuiteResult> run_all_suites(const VerifyOptions& opts) {
    return {run_cor1_suite(opts),   run_prop2_suite(opts),
            run_prop3_suite(opts),  run_prop4_suite(opts),
            run_screen_equivalence_suite(opts), run_pls_grid_suite(opts),
            run_pls_kkt_suite(opts)};
}

} // namespace verify
} // namespace iscreen
