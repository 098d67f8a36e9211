#include <catch.hpp>

#include "iscreen/core.hpp"
#include "iscreen/rng.hpp"

using namespace iscreen;

namespace {

Dataset random_dataset(int n, int p, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = rng.next_normal() + 0.3 * j;
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.next_normal();
    return Dataset(std::move(x), std::move(y));
}

} // namespace

TEST_CASE("dataset validation") {
    Eigen::MatrixXd x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    Eigen::VectorXd y(3);
    y << 1, 2, 3;
    REQUIRE_NOTHROW(Dataset(x, y));

    Eigen::MatrixXd one_row(1, 2);
    one_row << 1, 2;
    Eigen::VectorXd y1(1);
    y1 << 1;
    REQUIRE_THROWS_AS(Dataset(one_row, y1), InvalidDataset);

    Eigen::MatrixXd bad = x;
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(Dataset(bad, y), InvalidDataset);

    Eigen::VectorXd bad_y = y;
    bad_y[1] = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(Dataset(x, bad_y), InvalidDataset);
}

TEST_CASE("standardize centers and rescales to the n-norm convention") {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    Eigen::VectorXd y(3);
    y << 2, 4, 6;
    const auto std_data = standardize(Dataset(x, y));

    const double root_3_halves = 1.224744871391589;
    REQUIRE(std_data.data.x(0, 0) == Approx(-root_3_halves).epsilon(1e-14));
    REQUIRE(std_data.data.x(1, 0) == Approx(0.0).margin(1e-14));
    REQUIRE(std_data.data.x(2, 0) == Approx(root_3_halves).epsilon(1e-14));
    REQUIRE(std_data.data.y.mean() == Approx(0.0).margin(1e-14));
    REQUIRE(std_data.data.standardized);
    REQUIRE(std_data.maps.y_center == Approx(4.0));
}

TEST_CASE("standardize is idempotent within 1e-12") {
    const Dataset data = random_dataset(20, 5, 7);
    const Dataset once = standardize(data).data;
    const Dataset twice = standardize(once).data;
    REQUIRE((once.x - twice.x).cwiseAbs().maxCoeff() <= 1e-12);
    REQUIRE((once.y - twice.y).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("standardize on a random 20x5 matrix meets the column contracts") {
    const Dataset data = standardize(random_dataset(20, 5, 11)).data;
    for (int j = 0; j < data.p(); ++j) {
        REQUIRE(std::abs(data.x.col(j).mean()) <= 1e-10);
        REQUIRE(data.x.col(j).squaredNorm() == Approx(20.0).epsilon(1e-8));
    }
}

TEST_CASE("standardize rejects constant columns") {
    Eigen::MatrixXd x(4, 2);
    x.col(0) << 1, 2, 3, 4;
    x.col(1).setConstant(5.0);
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    try {
        standardize(Dataset(x, y));
        FAIL("expected ConstantColumn");
    } catch (const ConstantColumn& e) {
        REQUIRE(e.column == 1);
    }
}

TEST_CASE("true model support consistency is enforced") {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(5);
    beta[1] = 2.0;
    beta[3] = -1.0;
    REQUIRE_NOTHROW(TrueModel(IndexSet{1, 3}, beta));
    REQUIRE_THROWS_AS(TrueModel(IndexSet{1}, beta), InvalidConfig);
    REQUIRE_THROWS_AS(TrueModel(IndexSet{1, 2, 3}, beta), InvalidConfig);
    REQUIRE(TrueModel(IndexSet{3, 1}, beta).beta_min() == Approx(1.0));
}

TEST_CASE("index set operations") {
    IndexSet a{3, 1, 7};
    REQUIRE(a.contains(1));
    REQUIRE(!a.contains(2));
    REQUIRE(a.set_union(IndexSet{1, 4}) == IndexSet({3, 1, 7, 4}));
    REQUIRE(a.set_minus(IndexSet{1}) == IndexSet({3, 7}));
    REQUIRE(a.set_intersect(IndexSet{7, 9, 3}) == IndexSet({3, 7}));
    REQUIRE(a.complement(9).size() == 6);
    REQUIRE(IndexSet({1, 3, 7}) == a);
    REQUIRE_THROWS_AS(IndexSet({1, 1}), InvalidConfig);
}

TEST_CASE("algorithm config invariants") {
    AlgorithmConfig cfg;
    cfg.screening = Screening::SCR1;
    cfg.selection = Selection::SEL1;
    cfg.screen_sizes = ScreenSchedule::constant_size(3);
    cfg.max_iters = 4;
    REQUIRE_NOTHROW(cfg.validate(12));
    REQUIRE_THROWS_AS(cfg.validate(11), InvalidConfig); // sum a_k > p

    cfg.selection = Selection::SEL2;
    REQUIRE_THROWS_AS(cfg.validate(12), InvalidConfig); // missing penalty
    cfg.penalty = PenaltySpec{PenaltyKind::Lasso, 0.1, 3.7};
    REQUIRE_NOTHROW(cfg.validate(12));

    cfg.selection = Selection::SEL1;
    REQUIRE_THROWS_AS(cfg.validate(12), InvalidConfig); // penalty with SEL1
}

TEST_CASE("rate constants validation") {
    RateConstants r;
    r.tau_min = 1.0;
    r.tau_max = 2.0;
    REQUIRE_NOTHROW(r.validate());
    r.tau_max = 1.0;
    REQUIRE_THROWS_AS(r.validate(), InvalidRates);
    r.tau_max = 2.0;
    r.xi_p = 0.5;
    r.xi_t = 0.2;
    REQUIRE_THROWS_AS(r.validate(), InvalidRates); // 0.5 + 0.6 >= 1
}
