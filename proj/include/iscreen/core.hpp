#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iscreen/errors.hpp"
#include "iscreen/index_set.hpp"

namespace iscreen {

/// Design matrix (n samples × p predictors) plus response vector. Immutable
/// after construction; safe to share read-only across threads.
struct Dataset {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::string> column_names; // empty when the source had no header
    bool standardized = false;

    Eigen::VectorXd col_sq_norms; // cached ||X_j||^2, filled by finalize()

    Dataset() = default;
    Dataset(Eigen::MatrixXd x_, Eigen::VectorXd y_,
            std::vector<std::string> names = {}, bool standardized_ = false)
        : x(std::move(x_)), y(std::move(y_)), column_names(std::move(names)),
          standardized(standardized_) {
        finalize();
    }

    int n() const { return static_cast<int>(x.rows()); }
    int p() const { return static_cast<int>(x.cols()); }

    void finalize() {
        if (x.rows() < 2) throw InvalidDataset("need at least 2 samples");
        if (x.cols() < 1) throw InvalidDataset("need at least 1 predictor");
        if (y.size() != x.rows()) throw InvalidDataset("y length does not match x rows");
        if (!x.allFinite()) throw InvalidDataset("x contains non-finite entries");
        if (!y.allFinite()) throw InvalidDataset("y contains non-finite entries");
        if (!column_names.empty() &&
            column_names.size() != static_cast<std::size_t>(x.cols()))
            throw InvalidDataset("column name count does not match predictor count");
        col_sq_norms = x.colwise().squaredNorm();
        if (standardized) check_standardized();
    }

private:
    void check_standardized() const {
        const double nn = static_cast<double>(n());
        for (int j = 0; j < p(); ++j) {
            const double mean = x.col(j).mean();
            const double scale = std::sqrt(col_sq_norms[j] / nn);
            if (std::abs(mean) > 1e-10 * std::max(scale, 1e-300))
                throw InvalidDataset("standardized flag set but column " +
                                     std::to_string(j) + " is not centered");
            if (std::abs(col_sq_norms[j] - nn) > 1e-8 * nn)
                throw InvalidDataset("standardized flag set but ||X_j||^2 != n for column " +
                                     std::to_string(j));
        }
        if (std::abs(y.mean()) > 1e-10 * std::max(1.0, y.norm() / std::sqrt(nn)))
            throw InvalidDataset("standardized flag set but y is not centered");
    }
};

/// True support T and the full coefficient vector; beta[j] != 0 iff j in T.
struct TrueModel {
    IndexSet indices;   // sorted
    Eigen::VectorXd beta;

    TrueModel() = default;
    TrueModel(IndexSet idx, Eigen::VectorXd beta_)
        : indices(IndexSet(idx.sorted())), beta(std::move(beta_)) {
        for (int j = 0; j < beta.size(); ++j) {
            const bool in_support = indices.contains(j);
            if ((beta[j] != 0.0) != in_support)
                throw InvalidConfig("beta support does not match index set at column " +
                                    std::to_string(j));
        }
    }

    int t() const { return indices.size(); }
    double beta_min() const {
        double m = std::numeric_limits<double>::infinity();
        for (int j : indices) m = std::min(m, std::abs(beta[j]));
        return m;
    }
};

/// Column-affine maps recorded by standardize(), for mapping coefficients
/// fitted on the standardized scale back to the original one.
struct StandardizeMaps {
    Eigen::VectorXd x_center; // subtracted per column
    Eigen::VectorXd x_scale;  // multiplied per column after centering
    double y_center = 0.0;
};

struct StandardizedDataset {
    Dataset data;
    StandardizeMaps maps;
};

/// Center each column and rescale so ||X_j||^2 = n; center y. The n-norm
/// convention keeps X_j^T X_j / n = 1, matching the Gram scaling used by the
/// screening statistics.
inline StandardizedDataset standardize(const Dataset& input) {
    const int n = input.n(), p = input.p();
    StandardizedDataset out;
    out.maps.x_center.resize(p);
    out.maps.x_scale.resize(p);

    Eigen::MatrixXd xs(n, p);
    for (int j = 0; j < p; ++j) {
        const double center = input.x.col(j).mean();
        Eigen::VectorXd c = input.x.col(j).array() - center;
        const double sq = c.squaredNorm();
        if (sq <= 0.0) throw ConstantColumn(j);
        const double scale = std::sqrt(static_cast<double>(n) / sq);
        xs.col(j) = c * scale;
        out.maps.x_center[j] = center;
        out.maps.x_scale[j] = scale;
    }
    out.maps.y_center = input.y.mean();
    Eigen::VectorXd ys = input.y.array() - out.maps.y_center;
    out.data = Dataset(std::move(xs), std::move(ys), input.column_names, true);
    return out;
}

enum class PenaltyKind { Lasso, Scad };

struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::Lasso;
    double lambda = 0.0;
    double scad_a = 3.7; // used only for SCAD

    void validate() const {
        if (!(lambda > 0.0)) throw InvalidConfig("penalty lambda must be positive");
        if (kind == PenaltyKind::Scad && !(scad_a > 2.0))
            throw InvalidConfig("SCAD a must exceed 2");
    }
    friend bool operator==(const PenaltySpec&, const PenaltySpec&) = default;
};

enum class Screening { SCR1 = 1, SCR2 = 2, SCR3 = 3 };
enum class Selection { SEL1 = 1, SEL2 = 2, SEL3 = 3 };

/// Screen-size schedule {a_k}: either one constant or an explicit per-step list.
struct ScreenSchedule {
    bool constant = true;
    int const_size = 1;
    std::vector<int> sizes; // used when !constant

    static ScreenSchedule constant_size(int a) {
        ScreenSchedule s;
        s.constant = true;
        s.const_size = a;
        return s;
    }
    static ScreenSchedule explicit_sizes(std::vector<int> a) {
        ScreenSchedule s;
        s.constant = false;
        s.sizes = std::move(a);
        return s;
    }

    /// a_k for 1-based step k.
    int at(int k) const {
        if (constant) return const_size;
        if (k < 1 || k > static_cast<int>(sizes.size()))
            throw InvalidConfig("schedule has no entry for step " + std::to_string(k));
        return sizes[static_cast<std::size_t>(k - 1)];
    }

    long total(int kappa) const {
        long sum = 0;
        for (int k = 1; k <= kappa; ++k) sum += at(k);
        return sum;
    }

    friend bool operator==(const ScreenSchedule&, const ScreenSchedule&) = default;
};

struct AlgorithmConfig {
    Screening screening = Screening::SCR1;
    Selection selection = Selection::SEL1;
    ScreenSchedule screen_sizes = ScreenSchedule::constant_size(1);
    int max_iters = 1;
    std::optional<PenaltySpec> penalty; // required exactly when selection != SEL1
    bool stop_on_fixed_point = false;   // meaningful for SEL3

    void validate(int p) const {
        if (max_iters < 1) throw InvalidConfig("max_iters must be >= 1");
        if (!screen_sizes.constant &&
            static_cast<int>(screen_sizes.sizes.size()) < max_iters)
            throw InvalidConfig("explicit schedule shorter than max_iters");
        for (int k = 1; k <= max_iters; ++k)
            if (screen_sizes.at(k) < 1)
                throw InvalidConfig("screen size a_k must be >= 1 at step " +
                                    std::to_string(k));
        if (screen_sizes.total(max_iters) > p)
            throw InvalidConfig("sum of screen sizes exceeds predictor count");
        const bool needs_penalty = selection != Selection::SEL1;
        if (needs_penalty && !penalty)
            throw InvalidConfig("selection criterion requires a penalty spec");
        if (!needs_penalty && penalty)
            throw InvalidConfig("SEL1 takes no penalty spec");
        if (penalty) penalty->validate();
    }

    friend bool operator==(const AlgorithmConfig&, const AlgorithmConfig&) = default;
};

/// Rate constants of the theorem statements; names follow the assumption that
/// introduces each constant.
struct RateConstants {
    double c_t = 1.0, xi_t = 0.0;
    double c_p = 1.0, xi_p = 0.0;
    double c_beta = 1.0, xi_beta = 0.0;
    double c_y = 1.0, xi_y = 0.0;
    double tau_min = 0.5, tau_max = 1.0;
    double c_s = 1.0, xi_s = 0.0;

    void validate() const {
        if (!(c_beta > 0.0)) throw InvalidRates("c_beta must be positive");
        if (!(c_y > 0.0)) throw InvalidRates("c_y must be positive");
        if (!(tau_min > 0.0)) throw InvalidRates("tau_min must be positive");
        if (!(tau_min < tau_max)) throw InvalidRates("tau_min must be < tau_max");
        for (double v : {c_t, xi_t, c_p, xi_p, xi_beta, xi_y, c_s, xi_s})
            if (v < 0.0) throw InvalidRates("negative rate constant");
        if (!(xi_p + 3.0 * std::max(xi_t, xi_s) < 1.0))
            throw InvalidRates("xi_p + 3*max(xi_t, xi_s) must be < 1");
    }

    double xi_s_star() const { return std::max(xi_t, xi_s); }
    double c_kappa() const {
        return 8.0 * c_y * tau_max * tau_max * tau_max /
               (c_beta * c_beta * tau_min * tau_min * tau_min * tau_min);
    }
    double c_star() const { return 4.0 * c_y * std::max(c_t, c_s) / tau_min; }
};

enum class StopReason { MaxIters, FixedPoint, AllColumnsUsed, RankDeficient };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::MaxIters: return "max_iters";
        case StopReason::FixedPoint: return "fixed_point";
        case StopReason::AllColumnsUsed: return "all_columns_used";
        case StopReason::RankDeficient: return "rank_deficient";
    }
    return "unknown";
}

struct IterationRecord {
    int k = 0;
    IndexSet screened;      // A_k
    IndexSet selected_new;  // B_k (SEL2), A_k (SEL1), or the reselected model (SEL3)
    IndexSet model;         // S_k
    double rss = 0.0;       // ||M_{S_k} Y||^2
    double objective = 0.0; // rho_k per the selection criterion
    bool solver_converged = true;
};

struct Trajectory {
    std::vector<IterationRecord> records;
    StopReason stop_reason = StopReason::MaxIters;
    bool standardized_inputs = false;

    const IndexSet& final_model() const {
        static const IndexSet empty_set;
        return records.empty() ? empty_set : records.back().model;
    }
};

} // namespace iscreen
