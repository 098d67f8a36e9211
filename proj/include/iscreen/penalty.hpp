#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "iscreen/core.hpp"
#include "iscreen/errors.hpp"
#include "iscreen/index_set.hpp"

namespace iscreen {

inline double lasso_penalty(double theta, double lambda) { return lambda * std::abs(theta); }

/// SCAD derivative at theta >= 0: lambda on [0, lambda], (a*lambda − theta)_+/(a−1) beyond.
inline double scad_derivative(double theta, double lambda, double a) {
    if (theta <= lambda) return lambda;
    return std::max(a * lambda - theta, 0.0) / (a - 1.0);
}

/// Antiderivative of scad_derivative with p(0) = 0; continuous and nondecreasing,
/// flat at lambda^2 (a+1)/2 past a*lambda.
inline double scad_penalty(double theta, double lambda, double a) {
    theta = std::abs(theta);
    if (theta <= lambda) return lambda * theta;
    if (theta <= a * lambda)
        return (2.0 * a * lambda * theta - theta * theta - lambda * lambda) /
               (2.0 * (a - 1.0));
    return lambda * lambda * (a + 1.0) / 2.0;
}

inline double penalty_at(const PenaltySpec& spec, double theta) {
    return spec.kind == PenaltyKind::Lasso
               ? lasso_penalty(theta, spec.lambda)
               : scad_penalty(std::abs(theta), spec.lambda, spec.scad_a);
}

/// ||z − X beta||^2 + n * sum_j p_lambda(|beta_j|), with n = rows(z).
inline double objective_value(const Eigen::MatrixXd& x_cols, const Eigen::VectorXd& z,
                              const Eigen::VectorXd& beta, const PenaltySpec& penalty) {
    const double n = static_cast<double>(z.size());
    double pen = 0.0;
    for (int j = 0; j < beta.size(); ++j) pen += penalty_at(penalty, beta[j]);
    return (z - x_cols * beta).squaredNorm() + n * pen;
}

struct PlsOptions {
    double tol = 1e-8;      // relative coordinate-change stopping rule
    int max_sweeps = 10000; // coordinate-descent sweeps per (weighted) solve
    int max_lla_iters = 25; // outer local-linear-approximation iterations for SCAD
};

struct PlsSolution {
    Eigen::VectorXd coefficients; // over the candidate columns, local indexing
    IndexSet support;             // local indices with nonzero coefficient
    double objective = 0.0;
    int iterations = 0; // total coordinate sweeps
    bool converged = true;
};

namespace detail {

inline double soft_threshold(double c, double t) {
    if (c > t) return c - t;
    if (c < -t) return c + t;
    return 0.0;
}

/// Cyclic coordinate descent for min ||z − X beta||^2 + n * sum_j w_j |beta_j|.
/// Thresholds are n*w_j/2 because the squared loss is unscaled.
inline int weighted_lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& z,
                             const Eigen::VectorXd& weights, const PlsOptions& opts,
                             Eigen::VectorXd& beta, bool& converged) {
    const int m = static_cast<int>(x.cols());
    const double n = static_cast<double>(z.size());
    const Eigen::VectorXd col_sq = x.colwise().squaredNorm();
    Eigen::VectorXd resid = z - x * beta;

    converged = false;
    int sweep = 0;
    for (; sweep < opts.max_sweeps; ++sweep) {
        double max_change = 0.0;
        double max_beta = 0.0;
        for (int j = 0; j < m; ++j) {
            if (col_sq[j] <= 0.0) { beta[j] = 0.0; continue; }
            const double c = x.col(j).dot(resid) + col_sq[j] * beta[j];
            const double next = soft_threshold(c, n * weights[j] / 2.0) / col_sq[j];
            const double change = next - beta[j];
            if (change != 0.0) {
                resid -= x.col(j) * change;
                beta[j] = next;
            }
            max_change = std::max(max_change, std::abs(change));
            max_beta = std::max(max_beta, std::abs(beta[j]));
        }
        if (max_change <= opts.tol * std::max(1.0, max_beta)) {
            converged = true;
            ++sweep;
            break;
        }
    }
    return sweep;
}

inline void snap_to_zero(Eigen::VectorXd& beta) {
    for (int j = 0; j < beta.size(); ++j)
        if (std::abs(beta[j]) < 1e-12) beta[j] = 0.0;
}

inline IndexSet support_of(const Eigen::VectorXd& beta) {
    std::vector<int> s;
    for (int j = 0; j < beta.size(); ++j)
        if (beta[j] != 0.0) s.push_back(j);
    return IndexSet(std::move(s));
}

} // namespace detail

/// Minimize ||z − X beta||^2 + n * sum p_lambda(|beta_j|) over the given columns.
/// LASSO is solved to stationarity by coordinate descent; SCAD by local linear
/// approximation started from the LASSO solution, accepting only steps that do
/// not increase the objective. Non-convergence is soft: the best iterate is
/// returned with converged = false.
inline PlsSolution solve_pls(const Eigen::MatrixXd& x_cols, const Eigen::VectorXd& z,
                             const PenaltySpec& penalty, const PlsOptions& opts = {}) {
    penalty.validate();
    if (x_cols.cols() < 1) throw InvalidConfig("solve_pls needs at least one column");
    if (x_cols.rows() != z.size()) throw InvalidConfig("solve_pls dimension mismatch");
    if (!x_cols.allFinite() || !z.allFinite())
        throw InvalidConfig("solve_pls inputs must be finite");

    const int m = static_cast<int>(x_cols.cols());
    PlsSolution sol;
    sol.coefficients = Eigen::VectorXd::Zero(m);

    Eigen::VectorXd lasso_w = Eigen::VectorXd::Constant(m, penalty.lambda);
    bool cd_ok = false;
    sol.iterations = detail::weighted_lasso_cd(x_cols, z, lasso_w, opts,
                                               sol.coefficients, cd_ok);
    sol.converged = cd_ok;

    if (penalty.kind == PenaltyKind::Scad) {
        double best_obj = objective_value(x_cols, z, sol.coefficients, penalty);
        Eigen::VectorXd beta = sol.coefficients;
        bool outer_stable = false;
        for (int it = 0; it < opts.max_lla_iters; ++it) {
            Eigen::VectorXd w(m);
            for (int j = 0; j < m; ++j)
                w[j] = scad_derivative(std::abs(beta[j]), penalty.lambda, penalty.scad_a);
            Eigen::VectorXd next = beta;
            bool inner_ok = false;
            sol.iterations += detail::weighted_lasso_cd(x_cols, z, w, opts, next, inner_ok);
            const double obj = objective_value(x_cols, z, next, penalty);
            if (obj > best_obj + 1e-12 * std::max(1.0, std::abs(best_obj))) break;
            const double step = (next - beta).lpNorm<Eigen::Infinity>();
            beta = next;
            const bool improved = best_obj - obj >
                                  opts.tol * std::max(1.0, std::abs(best_obj));
            best_obj = std::min(best_obj, obj);
            sol.converged = inner_ok;
            if (!improved && step <= opts.tol * std::max(1.0, beta.lpNorm<Eigen::Infinity>())) {
                outer_stable = true;
                break;
            }
        }
        sol.coefficients = beta;
        sol.converged = sol.converged && outer_stable;
    }

    detail::snap_to_zero(sol.coefficients);
    sol.support = detail::support_of(sol.coefficients);
    sol.objective = objective_value(x_cols, z, sol.coefficients, penalty);
    return sol;
}

} // namespace iscreen
