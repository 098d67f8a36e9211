#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "iscreen/core.hpp"
#include "iscreen/errors.hpp"
#include "iscreen/index_set.hpp"
#include "iscreen/penalty.hpp"

namespace iscreen {
namespace oracle {

/// Brute-force reference implementations for the test suites. Everything here
/// goes through column-pivoted QR, a factorization path unrelated to the
/// engine's Gram-matrix Cholesky, and recomputes from scratch on every call.

namespace detail {

inline Eigen::MatrixXd gather(const Eigen::MatrixXd& x, const IndexSet& cols) {
    Eigen::MatrixXd out(x.rows(), cols.size());
    for (int i = 0; i < cols.size(); ++i) out.col(i) = x.col(cols[i]);
    return out;
}

inline Eigen::VectorXd qr_solve_full_rank(const Eigen::MatrixXd& a,
                                          const Eigen::VectorXd& b,
                                          const IndexSet& cols) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < a.cols()) throw RankDeficient(cols.indices());
    return qr.solve(b);
}

} // namespace detail

/// ||Y − X_S (X_S^T X_S)^{-1} X_S^T Y||^2 by direct solve; S = ∅ gives ||Y||^2.
inline double dense_rss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const IndexSet& s) {
    if (s.empty()) return y.squaredNorm();
    const Eigen::MatrixXd xs = detail::gather(x, s);
    const Eigen::VectorXd beta = detail::qr_solve_full_rank(xs, y, s);
    return (y - xs * beta).squaredNorm();
}

/// Residual M_S Y by direct solve.
inline Eigen::VectorXd dense_residual(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      const IndexSet& s) {
    if (s.empty()) return y;
    const Eigen::MatrixXd xs = detail::gather(x, s);
    const Eigen::VectorXd beta = detail::qr_solve_full_rank(xs, y, s);
    return y - xs * beta;
}

/// Last entry of the joint OLS fit of Y on [X_S, X_j].
inline double dense_joint_ols_last_coef(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        const IndexSet& s, int j) {
    IndexSet joint = s.set_union(IndexSet{j});
    const Eigen::MatrixXd xj = detail::gather(x, joint);
    const Eigen::VectorXd beta = detail::qr_solve_full_rank(xj, y, joint);
    return beta[beta.size() - 1];
}

/// Screening by literal evaluation of each criterion display: SCR2 refits OLS
/// on S ∪ {i} for every candidate and ranks the resulting RSS smallest-first,
/// SCR3 extracts the joint-fit coefficient of each candidate. Tie-break is the
/// engine's: equal scores ordered by lowest index.
inline IndexSet brute_screen(Screening criterion, const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& y, const IndexSet& s, int a) {
    const int p = static_cast<int>(x.cols());
    const IndexSet eligible = s.complement(p);
    if (eligible.empty()) throw NoEligibleColumns();

    const Eigen::VectorXd resid = dense_residual(x, y, s);
    struct Scored {
        int index;
        double score; // larger = better for every criterion after sign fixing
    };
    std::vector<Scored> scores;
    for (int j : eligible) {
        if (criterion == Screening::SCR1) {
            scores.push_back({j, std::abs(x.col(j).dot(resid))});
            continue;
        }
        // Rank guard, evaluated densely: X_j^T M_S X_j vs its unprojected norm.
        const Eigen::VectorXd proj_col = dense_residual(x, x.col(j), s);
        const double q = x.col(j).dot(proj_col);
        if (q < 1e-10 * x.col(j).squaredNorm()) continue;
        if (criterion == Screening::SCR2) {
            const double rss = dense_rss(x, y, s.set_union(IndexSet{j}));
            scores.push_back({j, -rss}); // smallest RSS first
        } else {
            const double coef = dense_joint_ols_last_coef(x, y, s, j);
            scores.push_back({j, std::abs(coef)});
        }
    }
    if (scores.empty()) throw NoEligibleColumns();
    std::sort(scores.begin(), scores.end(), [](const Scored& l, const Scored& r) {
        if (l.score != r.score) return l.score > r.score;
        return l.index < r.index;
    });
    const int take = std::min<int>(a, static_cast<int>(scores.size()));
    std::vector<int> out(static_cast<std::size_t>(take));
    for (int i = 0; i < take; ++i) out[static_cast<std::size_t>(i)] = scores[static_cast<std::size_t>(i)].index;
    return IndexSet(std::move(out));
}

struct GridResult {
    Eigen::VectorXd beta;
    double objective;
};

/// Exhaustive grid minimizer of the exact penalized objective over one or two
/// coefficients. A validation device only: accuracy is the grid step.
inline GridResult grid_pls(const Eigen::MatrixXd& x_cols, const Eigen::VectorXd& z,
                           const PenaltySpec& penalty, double grid_radius,
                           double grid_step) {
    const int m = static_cast<int>(x_cols.cols());
    if (m < 1 || m > 2) throw InvalidConfig("grid_pls handles only m in {1, 2}");
    const int steps = static_cast<int>(std::floor(grid_radius / grid_step));

    GridResult best;
    best.beta = Eigen::VectorXd::Zero(m);
    best.objective = std::numeric_limits<double>::infinity();
    Eigen::VectorXd beta(m);

    auto consider = [&](const Eigen::VectorXd& b) {
        const double obj = objective_value(x_cols, z, b, penalty);
        if (obj < best.objective) {
            best.objective = obj;
            best.beta = b;
        }
    };

    if (m == 1) {
        for (int i = -steps; i <= steps; ++i) {
            beta[0] = i * grid_step;
            consider(beta);
        }
    } else {
        for (int i = -steps; i <= steps; ++i) {
            beta[0] = i * grid_step;
            for (int k = -steps; k <= steps; ++k) {
                beta[1] = k * grid_step;
                consider(beta);
            }
        }
    }
    return best;
}

} // namespace oracle
} // namespace iscreen
