#include <doctest.h>

#include "rkhskit/bench.hpp"
#include "rkhskit/metrics.hpp"
#include "rkhskit/operators.hpp"
#include "rkhskit/rng.hpp"

#include <cmath>

using namespace rkhs;

TEST_CASE("metrics") {
    SUBCASE("identical inputs") {
        Rng rng(1);
        Matrix a = rng.normal_matrix(10, 2);
        CHECK(metrics::rmse(a, a) == 0.0);
        CHECK(metrics::normalized_error(a, a) == 0.0);
        CHECK(metrics::accuracy({1, 2, 3}, {1, 2, 3}) == 1.0);
        const auto ks = metrics::ks_statistic(a.col(0), a.col(0));
        CHECK(ks.statistic == 0.0);
    }
    SUBCASE("rmse against a hand value") {
        Matrix p(2, 1), t(2, 1);
        p << 1.0, 3.0;
        t << 0.0, 0.0;
        CHECK(metrics::rmse(p, t) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
    }
    SUBCASE("disjoint supports give KS statistic one") {
        Vector a(4), b(4);
        a << 0.0, 0.1, 0.2, 0.3;
        b << 5.0, 5.1, 5.2, 5.3;
        CHECK(metrics::ks_statistic(a, b).statistic == doctest::Approx(1.0));
    }
    SUBCASE("KS threshold formula") {
        Vector a = Vector::LinSpaced(50, 0.0, 1.0);
        Vector b = Vector::LinSpaced(80, 0.0, 1.0);
        const auto ks = metrics::ks_statistic(a, b, 0.05);
        const double c_alpha = std::sqrt(-0.5 * std::log(0.025));
        CHECK(ks.threshold ==
              doctest::Approx(c_alpha * std::sqrt((50.0 + 80.0) / (50.0 * 80.0))));
    }
    SUBCASE("three-class confusion matrix vs hand tally") {
        const IndexVec truth = {0, 0, 1, 1, 2, 2, 2};
        const IndexVec pred = {0, 1, 1, 1, 2, 0, 2};
        const Eigen::MatrixXi M = metrics::confusion(pred, truth, 3);
        CHECK(M(0, 0) == 1);
        CHECK(M(0, 1) == 1);
        CHECK(M(1, 1) == 2);
        CHECK(M(2, 0) == 1);
        CHECK(M(2, 2) == 2);
        CHECK(M.sum() == 7);
        CHECK(metrics::accuracy(pred, truth) == doctest::Approx(5.0 / 7.0));
    }
    SUBCASE("moments of a known sample") {
        Vector v(4);
        v << -1.0, 0.0, 0.0, 1.0;
        const auto m = metrics::moments(v);
        CHECK(m.mean == 0.0);
        CHECK(m.variance == doctest::Approx(2.0 / 3.0));
        CHECK(m.skewness == 0.0);
    }
}

TEST_CASE("bachelier_reference") {
    SUBCASE("at the money") {
        // theta*sqrt(t2-t1)*phi(0) with phi(0) = 1/sqrt(2 pi)
        CHECK(bench::bachelier_reference(1.0, 1.0, 0.2, 1.0, 2.0) ==
              doctest::Approx(0.2 / std::sqrt(2.0 * M_PI)).epsilon(1e-10));
        CHECK(bench::bachelier_reference(1.0, 1.0, 0.2, 1.0, 2.0) ==
              doctest::Approx(0.0797885).epsilon(1e-6));
    }
    SUBCASE("deep in the money tends to intrinsic value") {
        const double b = 100.0 * 0.2;
        CHECK(bench::bachelier_reference(b, 0.0, 0.2, 1.0, 2.0) ==
              doctest::Approx(b).epsilon(1e-10));
    }
    SUBCASE("deep out of the money vanishes") {
        CHECK(std::abs(bench::bachelier_reference(-100.0 * 0.2, 0.0, 0.2, 1.0, 2.0)) <= 1e-10);
    }
    SUBCASE("t2 <= t1 is rejected") {
        CHECK_THROWS_AS(bench::bachelier_reference(1.0, 1.0, 0.2, 2.0, 1.0), ValidationError);
    }
}

TEST_CASE("run_bachelier") {
    SUBCASE("tiny volatility collapses every method's score") {
        // a strike far outside the basket range removes the optionality, so
        // the payoff is nearly deterministic and every estimator nails it
        bench::BachelierScenario sc;
        sc.N = 64;
        sc.D = 2;
        sc.theta = 1e-5;
        sc.strike = -1.0;
        sc.seed = 7;
        const auto rep = bench::run_bachelier(sc, default_spec());
        // in-sample scores isolate the estimators from the hull-edge decay of
        // kernel extrapolation, which floors the fresh-sample score
        CHECK(rep.metric("mot_score_insample") <= 1e-3);
        CHECK(rep.metric("nw_score_insample") <= 1e-3);
        CHECK(rep.metric("krr_score_insample") <= 1e-3);
    }
    SUBCASE("plan row-stochasticity is reported from inside the run") {
        bench::BachelierScenario sc;
        sc.N = 64;
        sc.D = 2;
        sc.seed = 11;
        const auto rep = bench::run_bachelier(sc, default_spec());
        CHECK(rep.metric("mot_row_sum_error") <= 1e-8);
        CHECK(rep.metric("mot_runtime") >= 0.0);
    }
    SUBCASE("basket increments match the configured volatility") {
        // sanity of the correlation normalization at larger N
        Rng wrng = Rng::substream(3, "weights");
        const int D = 3;
        Matrix sigma = wrng.normal_matrix(D, D);
        Vector omega = wrng.normal_matrix(D, 1).col(0).cwiseAbs();
        omega /= omega.lpNorm<1>();
        sigma *= 0.2 / (sigma.transpose() * omega).norm();
        Rng drng = Rng::substream(3, "data");
        const int n = 4096;
        const Matrix W = drng.normal_matrix(n, D) * sigma.transpose();
        Vector basket(n);
        for (int i = 0; i < n; ++i) basket[i] = W.row(i).dot(omega);
        const double sd = std::sqrt((basket.array() - basket.mean()).square().mean());
        CHECK(std::abs(sd - 0.2) / 0.2 <= 0.05);
    }
}

TEST_CASE("run_poisson") {
    // manufactured solution: f = L g for a fitted smooth g
    Rng rng(23);
    Matrix mesh = rng.uniform_matrix(24, 2);
    KernelSpec spec;
    spec.base = KernelBase::Gaussian;
    spec.maps = {MapSpec(MapKind::MeanDistance)};
    spec.fit_maps(mesh);
    Matrix g(24, 1);
    for (int i = 0; i < 24; ++i) g(i, 0) = std::sin(mesh(i, 0)) * std::cos(mesh(i, 1));
    const Matrix L = laplace_beltrami(spec, mesh, mesh, kDefaultEpsilon);
    const Matrix f = L * g;
    const auto res = bench::run_poisson(mesh, f, spec);
    CHECK(res.report.metric("relative_residual") <= 1e-6);
    // recovered u matches g up to the operator null space
    const Matrix diff = L * (res.u - g);
    CHECK(diff.norm() / std::max(1.0, f.norm()) <= 1e-6);
}

TEST_CASE("run_heat") {
    Rng rng(29);
    Matrix mesh = rng.uniform_matrix(20, 1);
    Matrix u0 = rng.normal_matrix(20, 1);
    KernelSpec spec;
    spec.base = KernelBase::Gaussian;
    spec.maps = {MapSpec(MapKind::MeanDistance)};
    SUBCASE("implicit step dissipates energy monotonically") {
        const auto res = bench::run_heat(mesh, u0, 1.0, 0.05, 100, spec);
        for (int s = 1; s <= 100; ++s) CHECK(res.energy[s] <= res.energy[s - 1] + 1e-12);
    }
    SUBCASE("report carries the trajectory endpoints") {
        const auto res = bench::run_heat(mesh, u0, 1.0, 0.05, 10, spec);
        CHECK(res.report.metric("energy_initial") == doctest::Approx(u0.norm()));
        CHECK(res.report.metric("energy_final") == doctest::Approx(res.energy[10]));
        CHECK(res.u_final.rows() == 20);
    }
}

TEST_CASE("bench report JSON shape") {
    bench::BenchReport rep;
    rep.name = "demo";
    rep.params = {{"N", "8"}};
    rep.add_metric("score", 0.5);
    rep.artifacts = {"out.csv"};
    const std::string j = rep.to_json();
    CHECK(j.find("\"demo\"") != std::string::npos);
    CHECK(j.find("\"score\"") != std::string::npos);
    CHECK_THROWS_AS(rep.add_metric("bad", std::nan("")), ValidationError);
    CHECK_THROWS_AS(rep.metric("missing"), ValidationError);
}
