#include <catch.hpp>

#include "iscreen/oracle.hpp"
#include "iscreen/penalty.hpp"
#include "iscreen/rng.hpp"

using namespace iscreen;

namespace {

PenaltySpec lasso(double lambda) { return {PenaltyKind::Lasso, lambda, 3.7}; }
PenaltySpec scad(double lambda, double a = 3.7) { return {PenaltyKind::Scad, lambda, a}; }

/// Quadrature of scad_derivative on [0, theta], the independent route to the
/// closed-form antiderivative.
double scad_penalty_by_quadrature(double theta, double lambda, double a) {
    const int steps = 200000;
    const double h = theta / steps;
    double acc = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double mid = (i + 0.5) * h;
        acc += scad_derivative(mid, lambda, a) * h;
    }
    return acc;
}

} // namespace

TEST_CASE("lasso penalty values") {
    REQUIRE(lasso_penalty(0.0, 0.5) == 0.0);
    REQUIRE(lasso_penalty(2.0, 0.5) == Approx(1.0));
    REQUIRE(lasso_penalty(-2.0, 0.5) == Approx(1.0));
}

TEST_CASE("scad derivative branches") {
    REQUIRE(scad_derivative(0.5, 1.0, 3.7) == Approx(1.0));
    REQUIRE(scad_derivative(2.0, 1.0, 3.7) == Approx(0.62962962962962965));
    REQUIRE(scad_derivative(5.0, 1.0, 3.7) == 0.0);
}

TEST_CASE("scad penalty: knots, plateau, and quadrature agreement") {
    REQUIRE(scad_penalty(0.0, 1.0, 3.7) == 0.0);
    REQUIRE(scad_penalty(1.0, 1.0, 3.7) == Approx(1.0));
    REQUIRE(scad_penalty(2.0, 1.0, 3.7) == Approx(1.8148148148148149));
    REQUIRE(scad_penalty(10.0, 1.0, 3.7) == Approx(2.35));
    REQUIRE(scad_penalty(10.0, 1.0, 3.7) ==
            Approx(scad_penalty_by_quadrature(10.0, 1.0, 3.7)).epsilon(1e-6));

    for (double knot : {1.0, 3.7}) {
        const double eps = 1e-9;
        REQUIRE(scad_penalty(knot - eps, 1.0, 3.7) ==
                Approx(scad_penalty(knot + eps, 1.0, 3.7)).margin(1e-7));
    }
}

TEST_CASE("scad penalty derivative matches scad_derivative by central differences") {
    const double lambda = 0.8, a = 3.7;
    const double h = 1e-6;
    for (double theta = 0.05; theta < 4.5; theta += 0.1) {
        if (std::abs(theta - lambda) < 0.02 || std::abs(theta - a * lambda) < 0.02)
            continue; // kinks
        const double fd =
            (scad_penalty(theta + h, lambda, a) - scad_penalty(theta - h, lambda, a)) /
            (2.0 * h);
        REQUIRE(fd == Approx(scad_derivative(theta, lambda, a)).margin(1e-6));
    }
}

TEST_CASE("both penalties are dominated by lambda*|theta|") {
    for (double lambda : {0.1, 0.7, 2.0}) {
        for (double theta = -6.0; theta <= 6.0; theta += 0.05) {
            REQUIRE(lasso_penalty(theta, lambda) <= lambda * std::abs(theta) + 1e-15);
            REQUIRE(scad_penalty(std::abs(theta), lambda, 3.7) <=
                    lambda * std::abs(theta) + 1e-15);
        }
    }
}

TEST_CASE("objective value: zero beta, unit beta, random recomputation") {
    Rng rng(1);
    Eigen::MatrixXd x(4, 2);
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 4; ++i) x(i, j) = rng.next_normal();
    Eigen::VectorXd z(4);
    for (int i = 0; i < 4; ++i) z[i] = rng.next_normal();

    REQUIRE(objective_value(x, z, Eigen::VectorXd::Zero(2), lasso(1.0)) ==
            Approx(z.squaredNorm()));

    Eigen::VectorXd e1(2);
    e1 << 1.0, 0.0;
    REQUIRE(objective_value(x, z, e1, lasso(1.0)) ==
            Approx((z - x.col(0)).squaredNorm() + 4.0));

    Eigen::VectorXd beta(2);
    beta << 0.3, -1.7;
    double expect = (z - x * beta).squaredNorm();
    expect += 4.0 * (scad_penalty(0.3, 0.5, 3.7) + scad_penalty(1.7, 0.5, 3.7));
    REQUIRE(objective_value(x, z, beta, scad(0.5)) == Approx(expect).epsilon(1e-12));
}

TEST_CASE("large lambda kills every coefficient") {
    Rng rng(9);
    Eigen::MatrixXd x(10, 3);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 10; ++i) x(i, j) = rng.next_normal();
    Eigen::VectorXd z(10);
    for (int i = 0; i < 10; ++i) z[i] = rng.next_normal();

    double max_corr = 0.0;
    for (int j = 0; j < 3; ++j) max_corr = std::max(max_corr, std::abs(x.col(j).dot(z)));
    const double lambda = 2.0 * (2.0 * max_corr / 10.0); // lambda*n/2 > max |X_j^T z|

    for (const PenaltySpec& pen : {lasso(lambda), scad(lambda)}) {
        const PlsSolution sol = solve_pls(x, z, pen);
        REQUIRE(sol.support.empty());
        REQUIRE(sol.coefficients.cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(sol.objective == Approx(z.squaredNorm()));
    }
}

TEST_CASE("single-column lasso matches the soft-threshold closed form and the grid") {
    Rng rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::MatrixXd x(12, 1);
        for (int i = 0; i < 12; ++i) x(i, 0) = rng.next_normal();
        Eigen::VectorXd z(12);
        for (int i = 0; i < 12; ++i) z[i] = 1.5 * rng.next_normal();
        const double lambda = 0.05 + 0.4 * rng.next_unit();

        const PlsSolution sol = solve_pls(x, z, lasso(lambda));
        const double c = x.col(0).dot(z);
        const double thr = 12.0 * lambda / 2.0;
        const double closed =
            (std::abs(c) > thr ? (c > 0 ? c - thr : c + thr) : 0.0) / x.col(0).squaredNorm();
        REQUIRE(sol.coefficients[0] == Approx(closed).margin(1e-10));

        const auto grid = oracle::grid_pls(x, z, lasso(lambda), 3.0, 0.001);
        REQUIRE(sol.objective <= grid.objective + 1e-6);
    }
}

TEST_CASE("two orthogonal columns: componentwise soft-thresholding, grid-checked") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(6, 2);
    x(0, 0) = 2.0;
    x(1, 0) = -1.0;
    x(3, 1) = 1.5;
    x(4, 1) = 2.5;
    Rng rng(33);
    Eigen::VectorXd z(6);
    for (int i = 0; i < 6; ++i) z[i] = rng.next_normal() * 1.2;
    const double lambda = 0.3;

    const PlsSolution sol = solve_pls(x, z, lasso(lambda));
    for (int j = 0; j < 2; ++j) {
        const double c = x.col(j).dot(z);
        const double thr = 6.0 * lambda / 2.0;
        const double closed =
            (std::abs(c) > thr ? (c > 0 ? c - thr : c + thr) : 0.0) / x.col(j).squaredNorm();
        REQUIRE(sol.coefficients[j] == Approx(closed).margin(1e-10));
    }
    const auto grid = oracle::grid_pls(x, z, lasso(lambda), 2.0, 0.002);
    REQUIRE(sol.objective <= grid.objective + 1e-6);
}

TEST_CASE("lasso KKT conditions hold at the solution") {
    Rng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 40, m = 8;
        Eigen::MatrixXd x(n, m);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < n; ++i) x(i, j) = rng.next_normal();
        Eigen::VectorXd z = x.col(0) - 0.5 * x.col(3);
        for (int i = 0; i < n; ++i) z[i] += 0.3 * rng.next_normal();
        const double lambda = 0.1;

        PlsOptions tight;
        tight.tol = 1e-12;
        const PlsSolution sol = solve_pls(x, z, lasso(lambda), tight);
        const Eigen::VectorXd resid = z - x * sol.coefficients;
        const double thr = n * lambda / 2.0;
        for (int j = 0; j < m; ++j) {
            const double g = x.col(j).dot(resid);
            if (sol.coefficients[j] == 0.0)
                REQUIRE(std::abs(g) <= thr + 1e-6);
            else
                REQUIRE(g == Approx(thr * (sol.coefficients[j] > 0 ? 1.0 : -1.0)).margin(1e-6));
        }
    }
}

TEST_CASE("scad solution never raises the objective above the lasso warm start") {
    Rng rng(66);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 30, m = 5;
        Eigen::MatrixXd x(n, m);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < n; ++i) x(i, j) = rng.next_normal();
        Eigen::VectorXd z = 2.0 * x.col(1);
        for (int i = 0; i < n; ++i) z[i] += 0.5 * rng.next_normal();
        const PenaltySpec pen = scad(0.2);

        const PlsSolution sol = solve_pls(x, z, pen);
        const PlsSolution warm = solve_pls(x, z, lasso(0.2));
        const double warm_scad_obj = objective_value(x, z, warm.coefficients, pen);
        REQUIRE(sol.objective <= warm_scad_obj + 1e-9 * std::max(1.0, warm_scad_obj));
        REQUIRE(sol.objective <=
                objective_value(x, z, Eigen::VectorXd::Zero(m), pen) + 1e-12);
        const double recomputed = objective_value(x, z, sol.coefficients, pen);
        REQUIRE(sol.objective == Approx(recomputed).epsilon(1e-8));
    }
}

TEST_CASE("scad grid dominance on random two-column instances") {
    Rng rng(88);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd x(20, 2);
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 20; ++i) x(i, j) = rng.next_normal();
        Eigen::VectorXd z(20);
        for (int i = 0; i < 20; ++i) z[i] = 1.5 * rng.next_normal();
        const PenaltySpec pen = scad(0.15 + 0.3 * rng.next_unit());
        const PlsSolution sol = solve_pls(x, z, pen);
        const double radius = 2.0 * std::max(1.0, sol.coefficients.cwiseAbs().maxCoeff());
        const auto grid = oracle::grid_pls(x, z, pen, radius, 0.01);
        REQUIRE(sol.objective <= grid.objective + 1e-6);
    }
}

TEST_CASE("non-convergence is a soft error carrying the best iterate") {
    Rng rng(99);
    Eigen::MatrixXd x(30, 6);
    for (int j = 0; j < 6; ++j)
        for (int i = 0; i < 30; ++i) x(i, j) = rng.next_normal();
    Eigen::VectorXd z = x * Eigen::VectorXd::Ones(6);
    PlsOptions strangled;
    strangled.max_sweeps = 1;
    const PlsSolution sol = solve_pls(x, z, lasso(0.01), strangled);
    REQUIRE_FALSE(sol.converged);
    REQUIRE(sol.coefficients.allFinite());
    REQUIRE(sol.objective <= z.squaredNorm() + 1e-12);
}

TEST_CASE("penalty spec validation") {
    REQUIRE_THROWS_AS(solve_pls(Eigen::MatrixXd::Ones(3, 1), Eigen::VectorXd::Ones(3),
                                lasso(0.0)),
                      InvalidConfig);
    PenaltySpec bad_a = scad(0.5, 2.0);
    REQUIRE_THROWS_AS(bad_a.validate(), InvalidConfig);
}
