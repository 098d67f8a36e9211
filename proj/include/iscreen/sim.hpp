#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "iscreen/core.hpp"
#include "iscreen/errors.hpp"
#include "iscreen/pipeline.hpp"
#include "iscreen/rng.hpp"
#include "iscreen/threads.hpp"

namespace iscreen {

struct CovarianceSpec {
    enum class Family { Identity, AR1, CompoundSymmetry, Custom };
    Family family = Family::Identity;
    double rho = 0.0;
    int p = 1;
    Eigen::MatrixXd custom;

    static CovarianceSpec identity(int p) { return {Family::Identity, 0.0, p, {}}; }
    static CovarianceSpec ar1(int p, double rho) { return {Family::AR1, rho, p, {}}; }
    static CovarianceSpec compound_symmetry(int p, double rho) {
        return {Family::CompoundSymmetry, rho, p, {}};
    }
    static CovarianceSpec custom_matrix(Eigen::MatrixXd sigma) {
        CovarianceSpec s;
        s.family = Family::Custom;
        s.p = static_cast<int>(sigma.rows());
        s.custom = std::move(sigma);
        return s;
    }

    void validate() const {
        if (p < 1) throw InvalidConfig("covariance dimension must be >= 1");
        if (family == Family::AR1 && !(std::abs(rho) < 1.0))
            throw InvalidConfig("AR1 requires |rho| < 1");
        if (family == Family::CompoundSymmetry) {
            if (!(rho < 1.0)) throw InvalidConfig("compound symmetry requires rho < 1");
            if (p > 1 && !(rho > -1.0 / (p - 1)))
                throw InvalidConfig("compound symmetry requires rho > -1/(p-1)");
        }
        if (family == Family::Custom &&
            (custom.rows() != p || custom.cols() != p || !custom.isApprox(custom.transpose())))
            throw InvalidConfig("custom covariance must be a symmetric p x p matrix");
    }

    Eigen::MatrixXd materialize() const {
        validate();
        switch (family) {
            case Family::Identity: return Eigen::MatrixXd::Identity(p, p);
            case Family::AR1: {
                Eigen::MatrixXd s(p, p);
                for (int i = 0; i < p; ++i)
                    for (int j = 0; j < p; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
                return s;
            }
            case Family::CompoundSymmetry: {
                Eigen::MatrixXd s = Eigen::MatrixXd::Constant(p, p, rho);
                s.diagonal().setOnes();
                return s;
            }
            case Family::Custom: return custom;
        }
        return Eigen::MatrixXd::Identity(p, p);
    }

    friend bool operator==(const CovarianceSpec&, const CovarianceSpec&) = default;
};

namespace detail {

inline Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& sigma) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite();
    return llt.matrixL();
}

inline Eigen::MatrixXd standard_normal_matrix(int n, int p, Rng& rng) {
    Eigen::MatrixXd z(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) z(i, j) = rng.next_normal();
    return z;
}

} // namespace detail

/// n Gaussian rows with covariance Sigma, via X = Z L^T with Sigma = L L^T.
inline Eigen::MatrixXd gen_design(int n, const CovarianceSpec& cov, std::uint64_t seed) {
    const Eigen::MatrixXd sigma = cov.materialize();
    const Eigen::MatrixXd l = detail::cholesky_lower(sigma);
    Rng rng(seed);
    Eigen::MatrixXd z = detail::standard_normal_matrix(n, cov.p, rng);
    return z * l.transpose();
}

/// Y = X beta + noise_sd * eps with eps iid standard normal.
inline Eigen::VectorXd gen_response(const Eigen::MatrixXd& x, const TrueModel& truth,
                                    double noise_sd, std::uint64_t seed) {
    if (truth.beta.size() != x.cols()) throw InvalidConfig("beta length does not match design");
    Eigen::VectorXd y = x * truth.beta;
    if (noise_sd > 0.0) {
        Rng rng(seed);
        for (int i = 0; i < y.size(); ++i) y[i] += noise_sd * rng.next_normal();
    }
    return y;
}

struct EigenConditionReport {
    double min_eigenvalue = 0.0; // min over sampled subsets of lambda_min(X_S^T X_S / n)
    double max_eigenvalue = 0.0;
    int sampled_subsets = 0;
    int violations = 0;
    double violation_fraction = 0.0;
    bool sampled_only = true; // Monte-Carlo surrogate: a lower bound on violations
};

/// Sample random index subsets of sizes 1..max_subset_size and report the
/// extreme eigenvalues of the normalized Gram matrices. Exhausting all subsets
/// is combinatorially infeasible, so the violation count is a lower bound.
inline EigenConditionReport check_eigen_condition(const Eigen::MatrixXd& x,
                                                  int max_subset_size, int n_subsets,
                                                  double tau_min, double tau_max,
                                                  std::uint64_t seed) {
    const int p = static_cast<int>(x.cols());
    const int n = static_cast<int>(x.rows());
    if (max_subset_size > std::min(n, p))
        throw InvalidConfig("max subset size exceeds min(n, p)");
    Rng rng(seed);
    EigenConditionReport rep;
    rep.min_eigenvalue = std::numeric_limits<double>::infinity();
    rep.max_eigenvalue = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_subsets; ++s) {
        const int size = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_subset_size)));
        std::vector<int> all(static_cast<std::size_t>(p));
        std::iota(all.begin(), all.end(), 0);
        for (int i = 0; i < size; ++i) {
            const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(p - i)));
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
        }
        Eigen::MatrixXd xs(n, size);
        for (int i = 0; i < size; ++i) xs.col(i) = x.col(all[static_cast<std::size_t>(i)]);
        const Eigen::MatrixXd gram = xs.transpose() * xs / static_cast<double>(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        rep.min_eigenvalue = std::min(rep.min_eigenvalue, lo);
        rep.max_eigenvalue = std::max(rep.max_eigenvalue, hi);
        if (lo < tau_min || hi > tau_max) ++rep.violations;
        ++rep.sampled_subsets;
    }
    rep.violation_fraction =
        rep.sampled_subsets ? static_cast<double>(rep.violations) / rep.sampled_subsets : 0.0;
    return rep;
}

/// A design where one relevant predictor is marginally uncorrelated with the
/// response: compound symmetry rho among the first t coordinates, beta_j =
/// beta_mag on the first t−1 of them, and the t-th coefficient solved from
/// (Sigma beta)_t = 0. Plain marginal screening cannot see that predictor.
inline std::pair<Dataset, TrueModel> adversarial_instance(int n, int p, int t,
                                                          double rho, std::uint64_t seed,
                                                          double beta_mag = 5.0,
                                                          double noise_sd = 1.0) {
    if (t < 2) throw InvalidConfig("adversarial construction needs t >= 2");
    if (p <= t) throw InvalidConfig("adversarial construction needs p > t");
    if (rho == 0.0)
        throw InfeasibleConstruction("rho = 0 forces the hidden coefficient to zero");
    if (!(rho < 1.0) || !(rho > -1.0 / (t - 1)))
        throw InfeasibleConstruction("compound symmetry block not positive definite");

    // (Sigma beta)_{t-1} = rho * beta_mag * (t-1) + c = 0.
    const double hidden_coef = -rho * beta_mag * static_cast<double>(t - 1);
    if (hidden_coef == 0.0)
        throw InfeasibleConstruction("solved coefficient vanishes for requested (t, rho)");

    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
    sigma.topLeftCorner(t, t).setConstant(rho);
    sigma.topLeftCorner(t, t).diagonal().setOnes();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < t - 1; ++j) beta[j] = beta_mag;
    beta[t - 1] = hidden_coef;

    std::vector<int> support(static_cast<std::size_t>(t));
    std::iota(support.begin(), support.end(), 0);
    TrueModel truth(IndexSet(std::move(support)), beta);

    const Eigen::MatrixXd x = gen_design(n, CovarianceSpec::custom_matrix(sigma),
                                         Rng::split(seed, 0).next_u64());
    const Eigen::VectorXd y =
        gen_response(x, truth, noise_sd, Rng::split(seed, 1).next_u64());
    return {Dataset(x, y), truth};
}

enum class SignPattern { AllPositive, Alternating };

struct ExperimentSpec {
    int n = 100;
    int p = 200;
    CovarianceSpec covariance = CovarianceSpec::identity(200);
    int t = 3;
    double beta_min = 1.0;
    SignPattern signs = SignPattern::AllPositive;
    double noise_sd = 1.0;
    int replications = 1;
    std::optional<Preset> preset;        // resolved against (n, p) when present
    std::optional<AlgorithmConfig> algorithm;
    std::optional<PenaltySpec> penalty;  // used when resolving a preset
    std::optional<int> max_iters;
    std::optional<int> a_size;
    std::optional<SuccessMode> success_mode; // default Final for SEL1/SEL2, Any for SEL3
    bool adversarial = false;
    double adversarial_rho = 0.5;
    double adversarial_beta_mag = 5.0;
    bool standardize_data = false;
    std::uint64_t seed = 0;

    void validate() const {
        if (replications < 1) throw InvalidConfig("replications must be >= 1");
        if (t < 0 || t > p) throw InvalidConfig("support size t must lie in [0, p]");
        if (noise_sd < 0.0) throw InvalidConfig("noise sd must be >= 0");
        if (!preset && !algorithm) throw InvalidConfig("spec needs a preset or an algorithm");
        if (adversarial) {
            if (t < 2) throw InvalidConfig("adversarial construction needs t >= 2");
            if (p <= t) throw InvalidConfig("adversarial construction needs p > t");
            if (adversarial_rho == 0.0)
                throw InvalidConfig("adversarial construction needs rho != 0");
            if (!(adversarial_rho < 1.0) || !(adversarial_rho > -1.0 / (t - 1)))
                throw InvalidConfig("adversarial rho outside the positive-definite range");
        }
    }

    AlgorithmConfig resolved_config() const {
        if (algorithm) {
            algorithm->validate(p);
            return *algorithm;
        }
        return resolve_preset(*preset, n, p, penalty, max_iters, a_size);
    }

    TrueModel make_truth() const {
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        std::vector<int> support(static_cast<std::size_t>(t));
        std::iota(support.begin(), support.end(), 0);
        for (int j = 0; j < t; ++j) {
            const double sign =
                signs == SignPattern::Alternating && (j % 2 == 1) ? -1.0 : 1.0;
            beta[j] = sign * beta_min;
        }
        return TrueModel(IndexSet(std::move(support)), beta);
    }
};

struct ReplicationRecord {
    int replication = 0;
    bool success = false;
    int first_coverage_step = -1; // -1 when the truth was never covered
    int final_model_size = 0;
    StopReason stop_reason = StopReason::MaxIters;
    bool solver_warning = false;
    int iterations = 0;
    std::string error; // empty unless the replication itself failed
};

struct ExperimentReport {
    int replications = 0;
    int success_count = 0;
    double success_rate = 0.0;
    double mean_iterations_to_coverage = 0.0;   // over covered replications
    double median_iterations_to_coverage = 0.0; // over covered replications
    double mean_final_model_size = 0.0;
    int solver_warnings = 0;
    int replication_errors = 0;
    std::vector<ReplicationRecord> records;
    double wall_time_seconds = 0.0;
};

/// Monte-Carlo estimate of the sure-screening probability: independent
/// replications with per-replication RNG streams split from the master seed,
/// so the report is identical for any worker count.
inline ExperimentReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const AlgorithmConfig config = spec.resolved_config();
    const SuccessMode mode = spec.success_mode.value_or(
        config.selection == Selection::SEL3 ? SuccessMode::Any : SuccessMode::Final);

    ExperimentReport rep;
    rep.replications = spec.replications;
    rep.records.resize(static_cast<std::size_t>(spec.replications));

    parallel_for(spec.replications, [&](int r) {
        ReplicationRecord rec;
        rec.replication = r;
        try {
            const std::uint64_t rep_seed =
                Rng::split(spec.seed, static_cast<std::uint64_t>(r)).next_u64();
            Dataset data;
            TrueModel truth;
            if (spec.adversarial) {
                auto inst = adversarial_instance(spec.n, spec.p, spec.t,
                                                 spec.adversarial_rho, rep_seed,
                                                 spec.adversarial_beta_mag, spec.noise_sd);
                data = std::move(inst.first);
                truth = std::move(inst.second);
            } else {
                truth = spec.make_truth();
                Eigen::MatrixXd x = gen_design(spec.n, spec.covariance,
                                               Rng::split(rep_seed, 0).next_u64());
                Eigen::VectorXd y = gen_response(x, truth, spec.noise_sd,
                                                 Rng::split(rep_seed, 1).next_u64());
                data = Dataset(std::move(x), std::move(y));
            }
            if (spec.standardize_data) data = standardize(data).data;

            const Trajectory traj = run(data, config);
            rec.success = check_sure_screening(traj, truth, mode);
            rec.first_coverage_step = first_coverage_step(traj, truth).value_or(-1);
            rec.final_model_size = traj.final_model().size();
            rec.stop_reason = traj.stop_reason;
            rec.iterations = static_cast<int>(traj.records.size());
            for (const auto& it : traj.records)
                if (!it.solver_converged) rec.solver_warning = true;
        } catch (const Error& e) {
            rec.error = e.what();
        }
        rep.records[static_cast<std::size_t>(r)] = std::move(rec);
    });

    std::vector<double> coverage_steps;
    double size_sum = 0.0;
    for (const auto& rec : rep.records) {
        if (rec.success) ++rep.success_count;
        if (rec.first_coverage_step > 0)
            coverage_steps.push_back(static_cast<double>(rec.first_coverage_step));
        if (rec.solver_warning) ++rep.solver_warnings;
        if (!rec.error.empty()) ++rep.replication_errors;
        size_sum += rec.final_model_size;
    }
    rep.success_rate = static_cast<double>(rep.success_count) / rep.replications;
    rep.mean_final_model_size = size_sum / rep.replications;
    if (!coverage_steps.empty()) {
        rep.mean_iterations_to_coverage =
            std::accumulate(coverage_steps.begin(), coverage_steps.end(), 0.0) /
            static_cast<double>(coverage_steps.size());
        std::sort(coverage_steps.begin(), coverage_steps.end());
        const std::size_t mid = coverage_steps.size() / 2;
        rep.median_iterations_to_coverage =
            coverage_steps.size() % 2 ? coverage_steps[mid]
                                      : 0.5 * (coverage_steps[mid - 1] + coverage_steps[mid]);
    }
    rep.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace iscreen
