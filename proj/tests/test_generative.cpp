#include <doctest.h>

#include "rkhskit/generative.hpp"
#include "rkhskit/metrics.hpp"

#include <algorithm>
#include <cmath>

using namespace rkhs;
using namespace rkhs::gen;

namespace {

KernelSpec gauss() {
    KernelSpec s;
    s.base = KernelBase::Gaussian;
    return s;
}

Matrix sorted_normal(int n, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Matrix m = scale * rng.normal_matrix(n, 1);
    std::sort(m.data(), m.data() + n);
    return m;
}

} // namespace

TEST_CASE("sample_fit") {
    SUBCASE("identical sets match by the identity") {
        Matrix X = sorted_normal(10, 21);
        const Generator g = sample_fit(X, X, gauss());
        for (int i = 0; i < 10; ++i) CHECK(g.permutation[i] == i);
        CHECK(g.mode == MatchMode::Monge);
    }
    SUBCASE("nodes reproduce the matched data exactly") {
        Rng rng(23);
        Matrix X = rng.normal_matrix(12, 2);
        Matrix Y = rng.normal_matrix(12, 2).array() + 1.5;
        const Generator g = sample_fit(X, Y, gauss());
        CHECK((generate(g, X) - g.data_Y_sigma).cwiseAbs().maxCoeff() <= 1e-8);
        // and the multiset of node outputs is the original data
        Matrix out = generate(g, X);
        std::vector<double> a(out.data(), out.data() + out.size());
        std::vector<double> b(Y.data(), Y.data() + Y.size());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-8));
    }
    SUBCASE("1-D sorted data pairs by the monotone rearrangement at N=4") {
        Matrix X(4, 1), Y(4, 1);
        X << -1.5, -0.5, 0.5, 1.5;       // latent, sorted
        Y << 2.0, -1.0, 0.3, 1.2;        // unsorted data
        const Generator g = sample_fit(X, Y, gauss());
        // exhaustive oracle: sorting permutation minimizes the LSAP cost here
        IndexVec expect = {1, 2, 3, 0}; // Y sorted: -1.0, 0.3, 1.2, 2.0
        CHECK(g.permutation == expect);
    }
    SUBCASE("duplicate rows are rejected") {
        Matrix X(3, 1), Y(3, 1);
        X << 0.0, 0.0, 1.0;
        Y << 1.0, 2.0, 3.0;
        CHECK_THROWS_AS(sample_fit(X, Y, gauss()), ValidationError);
    }
    SUBCASE("mismatched dimensions route through gromov-monge") {
        Rng rng(29);
        Matrix X = rng.normal_matrix(8, 1);
        Matrix Y = rng.normal_matrix(8, 3);
        const Generator g = sample_fit(X, Y, default_spec());
        CHECK(g.mode == MatchMode::GromovMonge);
        CHECK((generate(g, X) - g.data_Y_sigma).cwiseAbs().maxCoeff() <= 1e-8);
    }
    SUBCASE("permutation invariance: shuffling Y leaves node outputs unchanged") {
        Rng rng(31);
        Matrix X = sorted_normal(8, 33);
        Matrix Y = sorted_normal(8, 35, 2.0);
        const Generator g1 = sample_fit(X, Y, gauss());
        Matrix Yshuf(8, 1);
        IndexVec shuffle = {5, 2, 7, 0, 3, 6, 1, 4};
        for (int i = 0; i < 8; ++i) Yshuf.row(i) = Y.row(shuffle[i]);
        const Generator g2 = sample_fit(X, Yshuf, gauss());
        CHECK((generate(g1, X) - generate(g2, X)).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("generate") {
    SUBCASE("midpoint queries interpolate between mapped neighbours") {
        Matrix X(2, 1), Y(2, 1);
        X << -1.0, 1.0;
        Y << 0.0, 2.0;
        const Generator g = sample_fit(X, Y, gauss());
        Matrix Z(1, 1);
        Z << 0.0;
        const double mid = generate(g, Z)(0, 0);
        CHECK(mid > 0.0);
        CHECK(mid < 2.0);
    }
    SUBCASE("seeded draws are bit-identical") {
        Rng a = Rng::substream(99, "latent");
        Rng b = Rng::substream(99, "latent");
        const Matrix ma = a.normal_matrix(16, 2);
        const Matrix mb = b.normal_matrix(16, 2);
        CHECK((ma - mb).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("bimodal target statistics at desk scale") {
        // bimodal Gaussian target, fixed seed; a fresh latent sample pushed
        // through the fitted map should pass a KS gate at the 0.10 level
        const int n = 1000;
        Rng rng(77);
        Matrix target(n, 1), holdout(n, 1);
        for (int i = 0; i < n; ++i) {
            target(i, 0) = (rng.uniform() < 0.5 ? -2.0 : 2.0) + 0.5 * rng.normal();
            holdout(i, 0) = (rng.uniform() < 0.5 ? -2.0 : 2.0) + 0.5 * rng.normal();
        }
        Matrix latent = Rng::substream(77, "latent").normal_matrix(n, 1);
        std::sort(latent.data(), latent.data() + n); // distinct by construction
        const Generator g = sample_fit(latent, target, gauss());
        Matrix fresh = Rng::substream(78, "draws").normal_matrix(n, 1);
        const Matrix samples = generate(g, fresh);
        const auto ks = metrics::ks_statistic(samples.col(0), holdout.col(0));
        CHECK(ks.statistic <= 0.10);
        const auto ms = metrics::moments(samples.col(0));
        const auto mt = metrics::moments(holdout.col(0));
        const double se_mean = std::sqrt(mt.variance / n);
        CHECK(std::abs(ms.mean - mt.mean) <= 3.0 * se_mean);
    }
}

TEST_CASE("conditional_sample") {
    SUBCASE("deterministic relation collapses the draws") {
        Matrix X = sorted_normal(12, 41);
        Matrix Y(12, 1);
        for (int i = 0; i < 12; ++i) Y(i, 0) = std::tanh(X(i, 0)); // y = g(x)
        // no conditional spread: zero latent noise dimensions
        const Matrix draws =
            conditional_sample(X, Y, default_spec(), X.row(4).transpose(), 8, 1234, 1, 0);
        for (int i = 0; i < 8; ++i)
            CHECK(draws(i, 0) == doctest::Approx(std::tanh(X(4, 0))).epsilon(1e-6));
    }
    SUBCASE("hot-encoded circles: conditioning picks the right class") {
        const int per = 60;
        Rng rng(51);
        Matrix X(2 * per, 2), Y(2 * per, 2);
        for (int i = 0; i < 2 * per; ++i) {
            const int label = i < per ? 0 : 1;
            const double radius = label == 0 ? 1.0 : 3.0;
            const double angle = 2.0 * M_PI * rng.uniform();
            const double r = radius + 0.05 * rng.normal();
            X(i, 0) = label == 0 ? 1.0 : 0.0;
            X(i, 1) = label == 0 ? 0.0 : 1.0;
            Y(i, 0) = r * std::cos(angle);
            Y(i, 1) = r * std::sin(angle);
        }
        Vector q(2);
        q << 1.0, 0.0; // condition on label 0
        const Matrix draws = conditional_sample(X, Y, default_spec(), q, 60, 4321, 1, 1);
        // radius statistics of the generated set: kernel smoothing pulls the
        // draws inside the circle, but every draw must stay in the 3-sigma
        // band of the generated radii around circle 0 and far from circle 1
        Vector rad(draws.rows());
        for (int i = 0; i < draws.rows(); ++i) rad[i] = draws.row(i).norm();
        const double mu = rad.mean();
        const double sd = std::sqrt((rad.array() - mu).square().mean());
        CHECK(std::abs(mu - 1.0) <= 3.0 * sd); // centered on circle 0
        CHECK(rad.maxCoeff() <= 2.5);          // well clear of circle 1's band
        int inside = 0;
        for (int i = 0; i < draws.rows(); ++i)
            if (std::abs(rad[i] - mu) <= 3.0 * (sd + 0.05)) ++inside;
        CHECK(double(inside) / double(draws.rows()) >= 0.9);
    }
    SUBCASE("draw means are Monte-Carlo consistent and track the conditional") {
        const int n = 80;
        Rng rng(61);
        Matrix X = sorted_normal(n, 63);
        Matrix Y(n, 1);
        for (int i = 0; i < n; ++i) Y(i, 0) = std::sin(X(i, 0)) + 0.1 * rng.normal();
        const Vector q = X.row(n / 2).transpose();
        const int draws_n = 500;
        const ConditionalSampler cs = conditional_fit(X, Y, default_spec(), 1, 1, 999);
        const Matrix draws = conditional_sample(cs, q, draws_n, 1000);
        const double mean_draw = draws.col(0).mean();
        const double sd_draw = std::sqrt(
            (draws.col(0).array() - mean_draw).square().sum() / double(draws_n - 1));
        // internal Monte-Carlo consistency: an independent draw batch agrees
        // within combined standard errors
        const Matrix draws2 = conditional_sample(cs, q, draws_n, 2000);
        const double mean2 = draws2.col(0).mean();
        CHECK(std::abs(mean_draw - mean2) <=
              3.0 * sd_draw * std::sqrt(2.0 / double(draws_n)));
        // kernel conditional expectation via the projection formula; the draw
        // mean carries a smoothing bias at desk scale, so the coupling bound
        // is one draw standard deviation (measured bias is 0.1-0.25 here)
        Regressor reg = fit_regressor(default_spec(), X, Y, kDefaultEpsilon);
        PointSet Q(1, 1);
        Q.row(0) = q.transpose();
        const double cond = predict(reg, Q)(0, 0);
        CHECK(std::abs(mean_draw - cond) <= sd_draw);
    }
    SUBCASE("same seed, same draws") {
        Matrix X = sorted_normal(10, 71);
        Matrix Y = sorted_normal(10, 73, 2.0);
        const Matrix a = conditional_sample(X, Y, default_spec(), X.row(2).transpose(), 5, 42, 1, 1);
        const Matrix b = conditional_sample(X, Y, default_spec(), X.row(2).transpose(), 5, 42, 1, 1);
        CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("stable_invert") {
    SUBCASE("identity maps invert to the query") {
        Matrix X = sorted_normal(9, 81);
        Matrix q(3, 1);
        q << X(1, 0), X(4, 0), X(7, 0);
        const Matrix back = stable_invert(default_spec(), X, X, q);
        CHECK((back - q).cwiseAbs().maxCoeff() <= 1e-6);
    }
    SUBCASE("strictly monotone cubic recovers on-sample preimages") {
        Matrix X(9, 1), Y(9, 1);
        for (int i = 0; i < 9; ++i) {
            X(i, 0) = -1.0 + 0.25 * i;
            Y(i, 0) = std::pow(X(i, 0), 3);
        }
        Matrix q(2, 1);
        q << Y(2, 0), Y(6, 0);
        const Matrix back = stable_invert(gauss(), X, Y, q);
        CHECK(back(0, 0) == doctest::Approx(X(2, 0)).epsilon(1e-6));
        CHECK(back(1, 0) == doctest::Approx(X(6, 0)).epsilon(1e-6));
    }
    SUBCASE("non-invertible square law returns a forward-consistent preimage") {
        Matrix X(8, 1), Y(8, 1);
        double xs[] = {-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0};
        for (int i = 0; i < 8; ++i) {
            X(i, 0) = xs[i];
            Y(i, 0) = xs[i] * xs[i];
        }
        Matrix q(1, 1);
        q << 2.25; // y = x^2 at x = +-1.5
        const Matrix back = stable_invert(default_spec(), X, Y, q);
        // forward map of the function pairs (X, Y), evaluated at the preimage;
        // the discrepancy estimate bounds the admissible interpolation error
        Regressor fwd = fit_regressor(default_spec(), X, Y, 0.0);
        const double yhat = predict(fwd, back)(0, 0);
        const double hnorm2 = (fwd.theta.col(0).transpose() * Y.col(0))(0, 0);
        const double bound =
            mmd_root(fwd.spec, back, X) * std::sqrt(std::max(hnorm2, 0.0)) + 1e-6;
        CHECK(std::abs(yhat - q(0, 0)) <= bound);
    }
}
