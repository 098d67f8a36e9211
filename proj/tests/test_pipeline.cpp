#include <catch.hpp>

#include "iscreen/pipeline.hpp"
#include "iscreen/report.hpp"
#include "iscreen/rng.hpp"
#include "iscreen/sim.hpp"

using namespace iscreen;

namespace {

Dataset gaussian_dataset(int n, int p, Rng& rng, const Eigen::VectorXd* beta = nullptr,
                         double noise = 1.0) {
    Eigen::MatrixXd x(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = rng.next_normal();
    Eigen::VectorXd y = beta ? Eigen::VectorXd(x * *beta)
                             : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
    for (int i = 0; i < n; ++i) y[i] += noise * rng.next_normal();
    return Dataset(std::move(x), std::move(y));
}

PenaltySpec lasso(double lambda) { return {PenaltyKind::Lasso, lambda, 3.7}; }

} // namespace

TEST_CASE("saturating one-step run selects every column") {
    Rng rng(1);
    Dataset data = gaussian_dataset(20, 6, rng);
    AlgorithmConfig cfg;
    cfg.screening = Screening::SCR1;
    cfg.selection = Selection::SEL1;
    cfg.screen_sizes = ScreenSchedule::constant_size(6);
    cfg.max_iters = 1;
    const Trajectory traj = run(data, cfg);
    REQUIRE(traj.records.size() == 1);
    REQUIRE(traj.records[0].model == IndexSet::full(6));
    REQUIRE(traj.stop_reason == StopReason::MaxIters);
}

TEST_CASE("FR preset nails a one-column noiseless signal in the first step") {
    const int n = 10, p = 6;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p);
    for (int j = 0; j < p; ++j) x(j, j) = std::sqrt(static_cast<double>(n));
    Dataset data(x, 2.0 * x.col(3));

    const Trajectory traj = run(data, Preset::FR, std::nullopt, 5);
    REQUIRE(traj.records.size() == 5);
    REQUIRE(traj.records[0].model == IndexSet{3});
    REQUIRE(traj.records[0].rss <= 1e-20);
    // Growth by exactly one per step, strictly nested.
    for (std::size_t k = 0; k < traj.records.size(); ++k) {
        REQUIRE(traj.records[k].model.size() == static_cast<int>(k) + 1);
        if (k > 0)
            REQUIRE(traj.records[k - 1].model.is_subset_of(traj.records[k].model));
    }
}

TEST_CASE("preset resolution matches the named combinations") {
    const auto isis = resolve_preset(Preset::ISIS, 100, 500, lasso(0.1));
    REQUIRE(isis.screening == Screening::SCR1);
    REQUIRE(isis.selection == Selection::SEL2);

    const auto van = resolve_preset(Preset::VanISIS, 100, 500, lasso(0.1));
    REQUIRE(van.screening == Screening::SCR2);
    REQUIRE(van.selection == Selection::SEL3);
    REQUIRE(van.stop_on_fixed_point);

    const auto vanr = resolve_preset(Preset::VanISIS_R, 100, 500, lasso(0.1));
    REQUIRE(vanr.screening == Screening::SCR3);
    REQUIRE(vanr.selection == Selection::SEL3);

    const auto fr = resolve_preset(Preset::FR, 100, 500);
    REQUIRE(fr.screening == Screening::SCR2);
    REQUIRE(fr.selection == Selection::SEL1);
    REQUIRE(fr.screen_sizes.at(1) == 1);

    const auto sis = resolve_preset(Preset::SIS_once, 100, 500);
    REQUIRE(sis.screening == Screening::SCR1);
    REQUIRE(sis.selection == Selection::SEL1);
    REQUIRE(sis.max_iters == 1);

    for (Preset np : {Preset::NP_ISIS, Preset::NP_VanISIS, Preset::NP_VanISIS_R})
        REQUIRE(resolve_preset(np, 100, 500).selection == Selection::SEL1);

    REQUIRE_THROWS_AS(resolve_preset(Preset::ISIS, 100, 500), InvalidConfig);
}

TEST_CASE("running a preset equals running its explicit configuration") {
    Rng rng(2);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(30);
    beta[0] = 2.0;
    beta[4] = -1.0;
    Dataset data = gaussian_dataset(40, 30, rng, &beta, 1.0);

    const AlgorithmConfig explicit_cfg =
        resolve_preset(Preset::ISIS, data.n(), data.p(), lasso(0.1), 4);
    const Trajectory a = run(data, Preset::ISIS, lasso(0.1), 4);
    const Trajectory b = run(data, explicit_cfg);

    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t k = 0; k < a.records.size(); ++k) {
        REQUIRE(a.records[k].model.indices() == b.records[k].model.indices());
        REQUIRE(a.records[k].screened.indices() == b.records[k].screened.indices());
        REQUIRE(a.records[k].rss == b.records[k].rss);
        REQUIRE(a.records[k].objective == b.records[k].objective);
    }
}

TEST_CASE("trajectories are nested with non-increasing rss for SEL1 and SEL2") {
    Rng rng(3);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(25);
    beta[1] = 1.5;
    beta[7] = -2.0;
    for (int trial = 0; trial < 10; ++trial) {
        Dataset data = gaussian_dataset(35, 25, rng, &beta, 1.0);
        for (Selection sel : {Selection::SEL1, Selection::SEL2}) {
            AlgorithmConfig cfg;
            cfg.screening = trial % 2 ? Screening::SCR2 : Screening::SCR1;
            cfg.selection = sel;
            cfg.screen_sizes = ScreenSchedule::constant_size(3);
            cfg.max_iters = 5;
            if (sel != Selection::SEL1) cfg.penalty = lasso(0.05);
            const Trajectory traj = run(data, cfg);
            for (std::size_t k = 1; k < traj.records.size(); ++k) {
                REQUIRE(traj.records[k - 1].model.is_subset_of(traj.records[k].model));
                REQUIRE(traj.records[k].rss <=
                        traj.records[k - 1].rss + 1e-9 * std::max(1.0, traj.records[k - 1].rss));
            }
        }
    }
}

TEST_CASE("rho_k is non-increasing for penalized selections") {
    Rng rng(4);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(30);
    beta[2] = 2.0;
    beta[9] = 1.0;
    for (int trial = 0; trial < 10; ++trial) {
        Dataset data = gaussian_dataset(40, 30, rng, &beta, 1.0);
        for (Selection sel : {Selection::SEL2, Selection::SEL3}) {
            AlgorithmConfig cfg;
            cfg.screening = Screening::SCR2;
            cfg.selection = sel;
            cfg.screen_sizes = ScreenSchedule::constant_size(4);
            cfg.max_iters = 6;
            cfg.penalty = lasso(0.08);
            const Trajectory traj = run(data, cfg);
            for (std::size_t k = 1; k < traj.records.size(); ++k)
                REQUIRE(traj.records[k].objective <=
                        traj.records[k - 1].objective +
                            1e-7 * std::max(1.0, traj.records[k - 1].objective));
        }
    }
}

TEST_CASE("two identical runs produce byte-identical reports") {
    Rng rng(5);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(20);
    beta[0] = 1.0;
    Dataset data = gaussian_dataset(30, 20, rng, &beta, 1.0);
    const AlgorithmConfig cfg = resolve_preset(Preset::VanISIS, 30, 20, lasso(0.3), 6);
    const Trajectory a = run(data, cfg);
    const Trajectory b = run(data, cfg);
    REQUIRE(detail::trajectory_to_json(a).dump() == detail::trajectory_to_json(b).dump());
}

TEST_CASE("SEL3 fixed-point stop reproduces itself on a forced extra iteration") {
    Rng rng(6);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(40);
    beta[0] = 3.0;
    beta[1] = 2.5;
    int triggered = 0;
    for (int trial = 0; trial < 10; ++trial) {
        Dataset data = gaussian_dataset(60, 40, rng, &beta, 0.5);
        AlgorithmConfig cfg = resolve_preset(Preset::VanISIS, 60, 40, lasso(0.8), 6, 5);
        const Trajectory traj = run(data, cfg);
        if (traj.stop_reason != StopReason::FixedPoint) continue;
        ++triggered;
        const int k = traj.records.back().k;
        AlgorithmConfig forced = cfg;
        forced.stop_on_fixed_point = false;
        forced.max_iters = k + 1;
        const Trajectory more = run(data, forced);
        REQUIRE(static_cast<int>(more.records.size()) == k + 1);
        REQUIRE(more.records.back().model == traj.records.back().model);
    }
    REQUIRE(triggered > 0);
}

TEST_CASE("a SEL3 run can evict a predictor that entered earlier") {
    // x0 proxies the sum of the two true predictors, so it wins the first
    // screen; once both true columns are in the candidate pool the SCAD
    // refit leaves them unshrunk and zeroes the proxy out.
    Rng rng(14);
    const int n = 50, p = 6;
    Eigen::MatrixXd x(n, p);
    for (int j = 1; j < p; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = rng.next_normal();
    Eigen::VectorXd e(n);
    for (int i = 0; i < n; ++i) e[i] = rng.next_normal();
    x.col(0) = x.col(1) + x.col(2) + 0.8 * e;
    Eigen::VectorXd y = x.col(1) + x.col(2);
    Dataset data(std::move(x), std::move(y));

    AlgorithmConfig cfg;
    cfg.screening = Screening::SCR2;
    cfg.selection = Selection::SEL3;
    cfg.screen_sizes = ScreenSchedule::constant_size(1);
    cfg.max_iters = 4;
    cfg.penalty = PenaltySpec{PenaltyKind::Scad, 0.05, 3.7};
    const Trajectory traj = run(data, cfg);

    REQUIRE(traj.records[0].model == IndexSet{0});
    bool dropped = false;
    for (const auto& rec : traj.records)
        if (!rec.model.contains(0)) dropped = true;
    REQUIRE(dropped);
    REQUIRE(traj.final_model() == IndexSet({1, 2}));
}

TEST_CASE("rank-deficient designs stop the run instead of crashing") {
    Rng rng(7);
    Eigen::MatrixXd x(12, 4);
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 12; ++i) x(i, j) = rng.next_normal();
    x.col(2) = x.col(0);
    x.col(3) = x.col(1);
    Eigen::VectorXd y = x.col(0) + x.col(1);
    Dataset data(x, y);

    AlgorithmConfig cfg;
    cfg.screening = Screening::SCR1;
    cfg.selection = Selection::SEL1;
    cfg.screen_sizes = ScreenSchedule::constant_size(4);
    cfg.max_iters = 1;
    const Trajectory traj = run(data, cfg);
    REQUIRE(traj.stop_reason == StopReason::RankDeficient);
    REQUIRE(traj.records.empty());
}

TEST_CASE("screening budgets are validated and an exhausted design stops cleanly") {
    Rng rng(8);
    Dataset data = gaussian_dataset(20, 6, rng);
    AlgorithmConfig cfg;
    cfg.screening = Screening::SCR2;
    cfg.selection = Selection::SEL1;
    cfg.screen_sizes = ScreenSchedule::constant_size(3);
    cfg.max_iters = 2;
    Trajectory traj = run(data, cfg);
    REQUIRE(traj.records.back().model.size() == 6);

    cfg.screen_sizes = ScreenSchedule::explicit_sizes({6, 1, 1});
    cfg.max_iters = 3;
    REQUIRE_THROWS_AS(cfg.validate(6), InvalidConfig); // sum exceeds p

    cfg.screen_sizes = ScreenSchedule::explicit_sizes({5, 1, 1});
    REQUIRE_THROWS_AS(run(data, cfg), InvalidConfig); // 7 > 6

    AlgorithmConfig exhaust;
    exhaust.screening = Screening::SCR1;
    exhaust.selection = Selection::SEL1;
    exhaust.screen_sizes = ScreenSchedule::explicit_sizes({5, 1});
    exhaust.max_iters = 2;
    traj = run(data, exhaust);
    REQUIRE(traj.records.size() == 2);
    REQUIRE(traj.records.back().model.size() == 6);
    REQUIRE(traj.stop_reason == StopReason::MaxIters);
}

TEST_CASE("a rank-guard dead end stops with AllColumnsUsed") {
    Rng rng(18);
    Eigen::MatrixXd x(10, 2);
    for (int i = 0; i < 10; ++i) x(i, 0) = rng.next_normal();
    x.col(1) = 3.0 * x.col(0);
    Dataset data(x, Eigen::VectorXd(x.col(0)));
    AlgorithmConfig cfg;
    cfg.screening = Screening::SCR2;
    cfg.selection = Selection::SEL1;
    cfg.screen_sizes = ScreenSchedule::constant_size(1);
    cfg.max_iters = 2;
    const Trajectory traj = run(data, cfg);
    REQUIRE(traj.records.size() == 1);
    REQUIRE(traj.stop_reason == StopReason::AllColumnsUsed);
}

TEST_CASE("suggest_schedule reproduces the hand-computed fixtures") {
    RateConstants r1;
    r1.c_y = 1.0;
    r1.c_beta = 1.0;
    r1.tau_min = 1.0;
    r1.tau_max = 2.0;
    r1.xi_y = 0.0;
    r1.xi_beta = 0.0;
    REQUIRE(r1.c_kappa() == Approx(64.0));
    const auto s1 = suggest_schedule(r1, 500, TheoremMode::Thm1);
    REQUIRE(s1.kappa == 64);
    REQUIRE(!s1.lambda_max.has_value());

    const auto s2 = suggest_schedule(r1, 500, TheoremMode::Thm2);
    REQUIRE(s2.kappa == 128);
    REQUIRE(*s2.lambda_max == Approx(0.125).epsilon(1e-12));

    RateConstants r3;
    r3.c_t = 1.0;
    r3.xi_t = 0.1;
    r3.c_p = 1.0;
    r3.xi_p = 0.2;
    r3.c_beta = 2.0;
    r3.xi_beta = 0.05;
    r3.c_y = 1.5;
    r3.xi_y = 0.1;
    r3.tau_min = 0.5;
    r3.tau_max = 1.0;
    r3.c_s = 2.0;
    r3.xi_s = 0.15;
    REQUIRE(r3.c_kappa() == Approx(48.0));
    REQUIRE(r3.c_star() == Approx(24.0));
    const auto t1 = suggest_schedule(r3, 100, TheoremMode::Thm1);
    REQUIRE(t1.kappa == 121);
    const auto t2 = suggest_schedule(r3, 100, TheoremMode::Thm2);
    REQUIRE(t2.kappa == 242);
    REQUIRE(*t2.lambda_max == Approx(0.09929102934053519).epsilon(1e-12));
    const auto t3 = suggest_schedule(r3, 100, TheoremMode::Thm3);
    REQUIRE(t3.kappa == 242);
    REQUIRE(*t3.lambda_max == Approx(0.0022633118685671315).epsilon(1e-12));

    RateConstants bad = r1;
    bad.tau_max = 1.0; // tau_min == tau_max
    REQUIRE_THROWS_AS(suggest_schedule(bad, 100, TheoremMode::Thm1), InvalidRates);
}

TEST_CASE("check_sure_screening handles empty truth, final vs any, and scans") {
    Trajectory traj;
    for (int k = 1; k <= 3; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.model = k == 2 ? IndexSet{2, 1} : IndexSet{2};
        traj.records.push_back(rec);
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(4);

    TrueModel empty_truth(IndexSet{}, beta);
    REQUIRE(check_sure_screening(traj, empty_truth, SuccessMode::Final));
    REQUIRE(check_sure_screening(traj, empty_truth, SuccessMode::Any));

    beta[1] = 1.0;
    TrueModel truth(IndexSet{1}, beta);
    REQUIRE_FALSE(check_sure_screening(traj, truth, SuccessMode::Final));
    REQUIRE(check_sure_screening(traj, truth, SuccessMode::Any));
    REQUIRE(first_coverage_step(traj, truth) == 2);

    // Randomized trajectories against an exhaustive scan.
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        Trajectory random_traj;
        for (int k = 1; k <= 4; ++k) {
            IterationRecord rec;
            rec.k = k;
            std::vector<int> m;
            for (int j = 0; j < 6; ++j)
                if (rng.next_unit() < 0.4) m.push_back(j);
            rec.model = IndexSet(std::move(m));
            random_traj.records.push_back(rec);
        }
        Eigen::VectorXd b = Eigen::VectorXd::Zero(6);
        std::vector<int> t_idx;
        for (int j = 0; j < 6; ++j)
            if (rng.next_unit() < 0.3) {
                t_idx.push_back(j);
                b[j] = 1.0;
            }
        TrueModel t(IndexSet(std::move(t_idx)), b);

        bool any = false;
        for (const auto& rec : random_traj.records)
            if (t.indices.is_subset_of(rec.model)) any = true;
        const bool fin = t.indices.is_subset_of(random_traj.records.back().model);
        REQUIRE(check_sure_screening(random_traj, t, SuccessMode::Any) == any);
        REQUIRE(check_sure_screening(random_traj, t, SuccessMode::Final) == fin);
    }
}

TEST_CASE("for nested selections Final success implies Any success") {
    Rng rng(10);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(20);
    beta[0] = 2.0;
    Dataset data = gaussian_dataset(30, 20, rng, &beta, 1.0);
    Eigen::VectorXd tbeta = Eigen::VectorXd::Zero(20);
    tbeta[0] = 2.0;
    TrueModel truth(IndexSet{0}, tbeta);
    const Trajectory traj = run(data, Preset::ISIS, lasso(0.1), 4);
    if (check_sure_screening(traj, truth, SuccessMode::Final))
        REQUIRE(check_sure_screening(traj, truth, SuccessMode::Any));
}
