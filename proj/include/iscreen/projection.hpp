#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "iscreen/core.hpp"
#include "iscreen/errors.hpp"
#include "iscreen/index_set.hpp"

namespace iscreen {

/// Relative collinearity guard: a column j is rejected against the active set
/// when X_j^T M_S X_j < kRankTolerance * X_j^T X_j.
inline constexpr double kRankTolerance = 1e-10;

/// Incremental least-squares state for an active column set S. Maintains the
/// upper-triangular Cholesky factor R of X_S^T X_S, the residual M_S Y and its
/// squared norm, so per-column marginal queries cost O(n|S| + |S|^2).
///
/// States are persistent values: extend/shrink_to return a new state and leave
/// the original untouched, so a frozen state can serve concurrent read-only
/// queries. The referenced Dataset must outlive every state built on it.
class ActiveSetState {
public:
    static ActiveSetState empty(const Dataset& data) {
        ActiveSetState s;
        s.data_ = &data;
        s.residual_ = data.y;
        s.rss_ = data.y.squaredNorm();
        return s;
    }

    const Dataset& dataset() const { return *data_; }
    const IndexSet& active() const { return active_; }
    const Eigen::VectorXd& residual() const { return residual_; }
    double rss() const { return rss_; }
    const Eigen::MatrixXd& chol_factor() const { return chol_; }

    /// Signed marginal statistic X_j^T M_S Y.
    double marginal_stat(int j) const {
        require_inactive(j);
        return data_->x.col(j).dot(residual_);
    }

    /// X_j^T M_S X_j = ||X_j||^2 − ||R^{−T} X_S^T X_j||^2, clamped at 0.
    double projected_col_norm_sq(int j) const {
        require_inactive(j);
        double v = data_->col_sq_norms[j];
        if (!active_.empty()) v -= back_substituted(j).squaredNorm();
        return std::max(v, 0.0);
    }

    /// Exact RSS reduction from adding column j: (X_j^T M_S Y)^2 / X_j^T M_S X_j.
    double rss_delta_single(int j) const {
        const double q = guarded_projected_norm(j);
        const double m = data_->x.col(j).dot(residual_);
        return m * m / q;
    }

    /// Last coefficient of the joint OLS fit of Y on [X_S, X_j]:
    /// (X_j^T M_S Y) / (X_j^T M_S X_j).
    double beta_hat_last(int j) const {
        const double q = guarded_projected_norm(j);
        return data_->x.col(j).dot(residual_) / q;
    }

    /// State for S ∪ add. Columns are appended one at a time to the factor;
    /// a pivot falling under the rank guard aborts with RankDeficient naming
    /// the offending columns.
    ActiveSetState extend(const IndexSet& add) const {
        for (int j : add)
            if (active_.contains(j)) throw IndexActive(j);
        if (add.empty()) return *this;

        ActiveSetState out = *this;
        const int s0 = active_.size();
        const int s1 = s0 + add.size();
        Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(s1, s1);
        grown.topLeftCorner(s0, s0) = chol_;
        out.chol_ = std::move(grown);

        std::vector<int> offending;
        std::vector<int> appended = active_.indices();
        appended.reserve(static_cast<std::size_t>(s1));
        int m = s0;
        for (int j : add) {
            // New column of R: r = R^{-T} (X_appended^T x_j), pivot^2 = ||x_j||^2 - ||r||^2.
            Eigen::VectorXd v(m);
            for (int i = 0; i < m; ++i)
                v[i] = data_->x.col(appended[static_cast<std::size_t>(i)]).dot(data_->x.col(j));
            if (m > 0)
                out.chol_.topLeftCorner(m, m)
                    .triangularView<Eigen::Upper>()
                    .transpose()
                    .solveInPlace(v);
            const double pivot_sq = data_->col_sq_norms[j] - v.squaredNorm();
            if (!(pivot_sq >= kRankTolerance * data_->col_sq_norms[j])) {
                offending.push_back(j);
                continue;
            }
            out.chol_.col(m).head(m) = v;
            out.chol_(m, m) = std::sqrt(pivot_sq);
            appended.push_back(j);
            ++m;
        }
        if (!offending.empty()) throw RankDeficient(std::move(offending));

        out.active_ = IndexSet(std::move(appended));
        out.refresh_residual();
        return out;
    }

    /// State for the subset keep ⊆ S, rebuilt by refactorization.
    ActiveSetState shrink_to(const IndexSet& keep) const {
        if (!keep.is_subset_of(active_)) throw NotSubset();
        return empty(*data_).extend(keep);
    }

    /// OLS coefficients on the active columns, in active-set order.
    Eigen::VectorXd coefficients() const {
        const int s = active_.size();
        Eigen::VectorXd g(s);
        for (int i = 0; i < s; ++i) g[i] = data_->x.col(active_[i]).dot(data_->y);
        chol_.triangularView<Eigen::Upper>().transpose().solveInPlace(g);
        chol_.triangularView<Eigen::Upper>().solveInPlace(g);
        return g;
    }

    /// Diagnostic pair for the block RSS-reduction lower bound:
    /// lhs = ||M_S Y||^2 − ||M_{S∪A} Y||^2,
    /// rhs = Σ_{i∈A} (X_i^T M_S Y)^2 / λ_max(X_A^T M_S X_A).
    std::pair<double, double> rss_lower_bound_check(const IndexSet& add) const {
        const int a = add.size();
        Eigen::MatrixXd gram(a, a);   // X_A^T M_S X_A
        Eigen::VectorXd stats(a);     // X_i^T M_S Y
        for (int i = 0; i < a; ++i) stats[i] = marginal_stat(add[i]);

        Eigen::MatrixXd w(active_.size(), a);
        for (int i = 0; i < a; ++i) {
            if (!active_.empty()) w.col(i) = back_substituted(add[i]);
        }
        for (int i = 0; i < a; ++i) {
            for (int k = i; k < a; ++k) {
                double g = data_->x.col(add[i]).dot(data_->x.col(add[k]));
                if (!active_.empty()) g -= w.col(i).dot(w.col(k));
                gram(i, k) = g;
                gram(k, i) = g;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                           Eigen::EigenvaluesOnly);
        const double lam_max = eig.eigenvalues().maxCoeff();

        const ActiveSetState grown = extend(add);
        const double lhs = rss_ - grown.rss();
        const double rhs = stats.squaredNorm() / lam_max;
        return {lhs, rhs};
    }

private:
    const Dataset* data_ = nullptr;
    IndexSet active_;
    Eigen::MatrixXd chol_; // upper-triangular R, R^T R = X_S^T X_S
    Eigen::VectorXd residual_;
    double rss_ = 0.0;

    void require_inactive(int j) const {
        if (j < 0 || j >= data_->p())
            throw InvalidConfig("column index " + std::to_string(j) + " out of range");
        if (active_.contains(j)) throw IndexActive(j);
    }

    double guarded_projected_norm(int j) const {
        const double q = projected_col_norm_sq(j);
        if (!(q >= kRankTolerance * data_->col_sq_norms[j])) throw NearCollinear(j);
        return q;
    }

    /// R^{-T} (X_S^T x_j), the workhorse of the projected-norm queries.
    Eigen::VectorXd back_substituted(int j) const {
        const int s = active_.size();
        Eigen::VectorXd v(s);
        for (int i = 0; i < s; ++i) v[i] = data_->x.col(active_[i]).dot(data_->x.col(j));
        chol_.triangularView<Eigen::Upper>().transpose().solveInPlace(v);
        return v;
    }

    /// Recompute residual and RSS from the factor, with one refinement pass to
    /// keep the residual tightly orthogonal to the active columns.
    void refresh_residual() {
        const int s = active_.size();
        Eigen::MatrixXd xs(data_->n(), s);
        for (int i = 0; i < s; ++i) xs.col(i) = data_->x.col(active_[i]);

        Eigen::VectorXd beta = xs.transpose() * data_->y;
        chol_.triangularView<Eigen::Upper>().transpose().solveInPlace(beta);
        chol_.triangularView<Eigen::Upper>().solveInPlace(beta);
        residual_ = data_->y - xs * beta;

        Eigen::VectorXd delta = xs.transpose() * residual_;
        chol_.triangularView<Eigen::Upper>().transpose().solveInPlace(delta);
        chol_.triangularView<Eigen::Upper>().solveInPlace(delta);
        residual_ -= xs * delta;

        rss_ = residual_.squaredNorm();
    }
};

/// Fresh state with S = ∅: residual = Y, rss = ||Y||^2.
inline ActiveSetState new_state(const Dataset& data) { return ActiveSetState::empty(data); }

} // namespace iscreen
