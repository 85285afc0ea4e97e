#include <doctest.h>

#include "rkhskit/kernels.hpp"
#include "rkhskit/linalg.hpp"
#include "rkhskit/rng.hpp"

#include <cmath>

using namespace rkhs;

namespace {

Vector vec1(double x) {
    Vector v(1);
    v << x;
    return v;
}

KernelSpec bare(KernelBase base, std::vector<double> params = {}) {
    KernelSpec s;
    s.base = base;
    s.params = std::move(params);
    return s;
}

const std::vector<KernelBase> kAllBases = {
    KernelBase::Gaussian,      KernelBase::Matern,
    KernelBase::MaternTensorial, KernelBase::Multiquadric,
    KernelBase::Sinc,          KernelBase::SincSquare,
    KernelBase::TensorProduct, KernelBase::Truncated,
    KernelBase::DotProduct,    KernelBase::Polynomial,
    KernelBase::PolynomialConvolutional, KernelBase::PeriodicGaussian,
};

} // namespace

TEST_CASE("eval_kernel: table anchors") {
    CHECK(eval_kernel(bare(KernelBase::Gaussian), vec1(0.0), vec1(0.0)) == doctest::Approx(1.0));
    // tensor-product (ReLU) vanishes past unit separation
    CHECK(eval_kernel(bare(KernelBase::TensorProduct), vec1(0.0), vec1(2.0)) == 0.0);
    CHECK(eval_kernel(bare(KernelBase::Matern), vec1(0.0), vec1(1.0)) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("eval_kernel: errors") {
    KernelSpec s = default_spec(); // stateful maps, unfitted
    CHECK_THROWS_AS(eval_kernel(s, vec1(0.0), vec1(1.0)), ValidationError);
    Vector x(2);
    x << 0.0, 1.0;
    CHECK_THROWS_AS(eval_kernel(bare(KernelBase::Gaussian), x, vec1(1.0)), ValidationError);
}

TEST_CASE("fit_map: std-dev oracle on {0, 2}") {
    Matrix X(2, 1);
    X << 0.0, 2.0;
    // population std-dev oracle: mu = 1, var = ((0-1)^2 + (2-1)^2)/2 = 1
    MapSpec m(MapKind::StdDev);
    m.fit(X);
    CHECK(m.col_a[0] == doctest::Approx(1.0));
    CHECK(m.apply(X)(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("fit_map: unit-cube state on range [-1, 1], N=4") {
    Matrix X(4, 1);
    X << -1.0, -0.5, 0.25, 1.0;
    MapSpec m(MapKind::UnitCube);
    m.fit(X);
    CHECK(m.col_a[0] == doctest::Approx(-1.0)); // min
    CHECK(m.col_b[0] == doctest::Approx(2.0));  // range
    CHECK(m.offset == doctest::Approx(0.125)); // 0.5/N
    // min maps to the half-cell offset itself
    CHECK(m.apply(X)(0, 0) == doctest::Approx(0.125));
}

TEST_CASE("fit_map: bandwidth is a bare user scale") {
    Matrix X(3, 1);
    X << 1.0, 2.0, 3.0;
    KernelSpec s = bare(KernelBase::Matern);
    s.params = {2.0};
    s.maps = {MapSpec(MapKind::Bandwidth)};
    s.fit_maps(X);
    CHECK(s.apply_maps(X)(2, 0) == doctest::Approx(6.0));
}

TEST_CASE("fit_map: min-distance rejects identical rows") {
    Matrix X(3, 1);
    X << 1.0, 1.0, 1.0;
    MapSpec m(MapKind::MinDistance);
    CHECK_THROWS_AS(m.fit(X), NumericalError);
}

TEST_CASE("gram: symmetric case and Matern 2x2 anchor") {
    Matrix X(2, 1);
    X << 0.0, 1.0;
    const Matrix K = gram(bare(KernelBase::Matern), X, X);
    CHECK(K(0, 0) == doctest::Approx(1.0));
    CHECK(K(1, 1) == doctest::Approx(1.0));
    CHECK(K(0, 1) == doctest::Approx(std::exp(-1.0)));
    CHECK(K(0, 1) == K(1, 0));
}

TEST_CASE("gram: rectangular case equals entrywise eval loop") {
    Rng rng(42);
    Matrix X = rng.uniform_matrix(3, 2);
    Matrix Y = rng.uniform_matrix(2, 2);
    KernelSpec s = default_spec();
    s.fit_maps(X);
    const Matrix K = gram(s, X, Y);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(K(i, j) ==
                  doctest::Approx(eval_kernel(s, X.row(i).transpose(), Y.row(j).transpose())));
}

TEST_CASE("distance_matrix: anchors and positivity") {
    Matrix X(2, 1);
    X << 0.0, 1.0;
    SUBCASE("zero diagonal on X = Y") {
        const Matrix D = distance_matrix(bare(KernelBase::Gaussian), X, X);
        CHECK(D(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(D(1, 1) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("Matern hand oracle: d(0,1) = 2 - 2/e") {
        const Matrix D = distance_matrix(bare(KernelBase::Matern), X, X);
        CHECK(D(0, 1) == doctest::Approx(2.0 - 2.0 * std::exp(-1.0)).epsilon(1e-10));
    }
    SUBCASE("entrywise nonnegative for positive kernels") {
        Rng rng(3);
        Matrix A = rng.normal_matrix(12, 3);
        Matrix B = rng.normal_matrix(9, 3);
        for (auto base : {KernelBase::Gaussian, KernelBase::Matern, KernelBase::TensorProduct}) {
            const Matrix D = distance_matrix(bare(base), A, B);
            CHECK(D.minCoeff() >= -1e-12);
        }
    }
}

TEST_CASE("mmd: null, singleton, and brute-force oracle") {
    SUBCASE("mmd(X, X) = 0 for every base, N <= 64") {
        Rng rng(7);
        Matrix X = rng.normal_matrix(64, 2);
        for (auto base : kAllBases) {
            KernelSpec s = bare(base);
            CHECK(std::abs(mmd(s, X, X)) <= 1e-10);
        }
    }
    SUBCASE("singletons reduce to the point distance") {
        Matrix X(1, 1), Y(1, 1);
        X << 0.3;
        Y << -0.7;
        const KernelSpec s = bare(KernelBase::Gaussian);
        const double kxx = eval_kernel(s, X.row(0).transpose(), X.row(0).transpose());
        const double kyy = eval_kernel(s, Y.row(0).transpose(), Y.row(0).transpose());
        const double kxy = eval_kernel(s, X.row(0).transpose(), Y.row(0).transpose());
        CHECK(mmd(s, X, Y) == doctest::Approx(kxx + kyy - 2.0 * kxy).epsilon(1e-12));
    }
    SUBCASE("N_x=2, N_y=1 Matern: five-term hand sum") {
        Matrix X(2, 1), Y(1, 1);
        X << 0.0, 1.0;
        Y << 0.5;
        const KernelSpec s = bare(KernelBase::Matern);
        auto k = [](double a, double b) { return std::exp(-std::abs(a - b)); };
        const double oracle = (k(0, 0) + k(0, 1) + k(1, 0) + k(1, 1)) / 4.0 + k(0.5, 0.5) -
                              2.0 * (k(0, 0.5) + k(1, 0.5)) / 2.0;
        CHECK(mmd(s, X, Y) == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(mmd(s, Y, X) == doctest::Approx(oracle).epsilon(1e-12)); // symmetry
    }
    SUBCASE("root accessor clamps") {
        Matrix X(4, 1);
        X << 0.0, 1.0, 2.0, 3.0;
        CHECK(mmd_root(bare(KernelBase::Gaussian), X, X) == 0.0);
    }
}

TEST_CASE("kernel symmetry property across bases and fitted chain") {
    Rng rng(11);
    Matrix X = rng.normal_matrix(16, 3);
    for (auto base : kAllBases) {
        KernelSpec s = bare(base);
        s.maps = {MapSpec(MapKind::UnitCube), MapSpec(MapKind::ErfInv),
                  MapSpec(MapKind::MeanDistance)};
        s.fit_maps(X);
        for (int trial = 0; trial < 8; ++trial) {
            const Vector x = X.row(2 * trial).transpose();
            const Vector y = X.row(2 * trial + 1).transpose();
            CHECK(std::abs(eval_kernel(s, x, y) - eval_kernel(s, y, x)) <= 1e-12);
        }
    }
}

TEST_CASE("PSD property: strictly positive-definite bases") {
    Rng rng(13);
    Matrix X = rng.normal_matrix(32, 2);
    for (auto base : {KernelBase::Gaussian, KernelBase::Matern}) {
        const Matrix K = gram(bare(base), X, X);
        CHECK(min_eig_sym(K) >= -1e-8);
    }
}

TEST_CASE("map-chain equivalence: chain == identity chain on pre-mapped points") {
    Rng rng(17);
    Matrix X = rng.uniform_matrix(10, 2);
    KernelSpec chained = bare(KernelBase::Gaussian);
    chained.maps = {MapSpec(MapKind::UnitCube), MapSpec(MapKind::ErfInv),
                    MapSpec(MapKind::MeanDistance)};
    chained.fit_maps(X);
    const Matrix mapped = chained.apply_maps(X);
    const Matrix K1 = gram(chained, X, X);
    const Matrix K2 = gram(bare(KernelBase::Gaussian), mapped, mapped);
    CHECK((K1 - K2).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("combine: add and multiply identities") {
    Rng rng(19);
    Matrix X = rng.normal_matrix(6, 2);
    const Matrix K = gram(bare(KernelBase::Gaussian), X, X);
    CHECK((combine_gram(CombineMode::Add, K, Matrix::Zero(6, 6)) - K).norm() == 0.0);
    CHECK((combine_gram(CombineMode::Multiply, K, Matrix::Ones(6, 6)) - K).norm() == 0.0);
    CHECK_THROWS_AS(combine_gram(CombineMode::Add, K, Matrix::Zero(3, 3)), ValidationError);
}

TEST_CASE("combine: convolve is the matrix product over the mid set") {
    Rng rng(23);
    Matrix X = rng.normal_matrix(4, 1), Z = rng.normal_matrix(3, 1), Y = rng.normal_matrix(5, 1);
    const Matrix K1 = gram(bare(KernelBase::Gaussian), X, Z);
    const Matrix K2 = gram(bare(KernelBase::Matern), Z, Y);
    CHECK((convolve_gram(K1, K2) - K1 * K2).norm() == 0.0);
}

TEST_CASE("combine: pipe lets the linear kernel take an affine function exactly") {
    Matrix X(5, 1), fX(5, 1);
    X << -1.0, -0.4, 0.1, 0.6, 1.2;
    for (int i = 0; i < 5; ++i) fX(i, 0) = 2.0 * X(i, 0) + 1.0;
    // oracle: the affine least-squares fit of exact affine data is the function itself
    const PipedRegressor pr = pipe_fit(bare(KernelBase::DotProduct), bare(KernelBase::Matern),
                                       X, fX);
    Matrix Z(3, 1);
    Z << -0.75, 0.3, 2.0;
    const Matrix out = pipe_predict(pr, Z);
    for (int i = 0; i < 3; ++i)
        CHECK(out(i, 0) == doctest::Approx(2.0 * Z(i, 0) + 1.0).epsilon(1e-8));
    // the second kernel received nothing to fit
    CHECK(pr.theta2.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("kernel gradients agree with central finite differences") {
    Rng rng(29);
    const double h = 1e-6;
    for (auto base : {KernelBase::Gaussian, KernelBase::Matern, KernelBase::Multiquadric,
                      KernelBase::Sinc, KernelBase::SincSquare, KernelBase::DotProduct,
                      KernelBase::Polynomial, KernelBase::PolynomialConvolutional,
                      KernelBase::PeriodicGaussian}) {
        KernelSpec s = bare(base, {2.0});
        for (int trial = 0; trial < 5; ++trial) {
            Vector x = rng.normal_matrix(3, 1).col(0);
            Vector y = rng.normal_matrix(3, 1).col(0);
            const Vector g = eval_kernel_grad(s, x, y);
            for (int d = 0; d < 3; ++d) {
                Vector xp = x, xm = x;
                xp[d] += h;
                xm[d] -= h;
                const double fd = (eval_kernel(s, xp, y) - eval_kernel(s, xm, y)) / (2.0 * h);
                CHECK(g[d] == doctest::Approx(fd).epsilon(1e-4));
            }
        }
    }
}

TEST_CASE("kernel gradient includes the map-chain jacobian") {
    Rng rng(31);
    Matrix X = rng.uniform_matrix(12, 2);
    KernelSpec s = bare(KernelBase::Gaussian);
    s.maps = {MapSpec(MapKind::UnitCube), MapSpec(MapKind::ErfInv),
              MapSpec(MapKind::MeanDistance)};
    s.fit_maps(X);
    const Vector x = X.row(0).transpose(), y = X.row(5).transpose();
    const Vector g = eval_kernel_grad(s, x, y);
    const double h = 1e-6;
    for (int d = 0; d < 2; ++d) {
        Vector xp = x, xm = x;
        xp[d] += h;
        xm[d] -= h;
        const double fd = (eval_kernel(s, xp, y) - eval_kernel(s, xm, y)) / (2.0 * h);
        CHECK(g[d] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("kernel hessians agree with finite differences of the gradient") {
    Rng rng(37);
    for (auto base : {KernelBase::Gaussian, KernelBase::Multiquadric, KernelBase::DotProduct,
                      KernelBase::Polynomial, KernelBase::PeriodicGaussian}) {
        KernelSpec s = bare(base, {2.0});
        Vector x = rng.normal_matrix(2, 1).col(0);
        Vector y = rng.normal_matrix(2, 1).col(0);
        const Matrix H = eval_kernel_hess(s, x, y);
        const double h = 1e-5;
        for (int d = 0; d < 2; ++d) {
            Vector xp = x, xm = x;
            xp[d] += h;
            xm[d] -= h;
            const Vector fd = (eval_kernel_grad(s, xp, y) - eval_kernel_grad(s, xm, y)) / (2.0 * h);
            for (int e = 0; e < 2; ++e)
                CHECK(H(e, d) == doctest::Approx(fd[e]).epsilon(1e-4));
        }
    }
}

TEST_CASE("erf_inv round-trips against std::erf") {
    for (double x : {-0.999, -0.5, -0.01, 0.0, 0.3, 0.9, 0.99999}) {
        CHECK(std::erf(erf_inv(x)) == doctest::Approx(x).epsilon(1e-13));
    }
    CHECK_THROWS_AS(erf_inv(1.0), ValidationError);
}

TEST_CASE("default spec matches the documented configuration") {
    const KernelSpec s = default_spec();
    CHECK(s.base == KernelBase::Matern);
    REQUIRE(s.maps.size() == 3);
    CHECK(s.maps[0].kind == MapKind::UnitCube);
    CHECK(s.maps[1].kind == MapKind::ErfInv);
    CHECK(s.maps[2].kind == MapKind::MeanDistance);
}

TEST_CASE("shorthand spec parser") {
    const KernelSpec s = spec_from_shorthand("multiquadric:0.5|unit-cube,mean-distance");
    CHECK(s.base == KernelBase::Multiquadric);
    CHECK(s.params == std::vector<double>{0.5});
    REQUIRE(s.maps.size() == 2);
    CHECK(s.maps[1].kind == MapKind::MeanDistance);
    CHECK_THROWS_AS(spec_from_shorthand("nope"), ValidationError);
}

TEST_CASE("kink derivative conventions are deterministic") {
    // left derivatives at the kinks: -|t| has slope +1 approaching 0
    const Vector z = vec1(0.0);
    CHECK(eval_kernel_grad(bare(KernelBase::Matern), z, z)(0) == doctest::Approx(1.0));
    CHECK(eval_kernel_grad(bare(KernelBase::TensorProduct), z, z)(0) == doctest::Approx(1.0));
    // truncated kernel reports zero at the coincident point and beyond support
    CHECK(eval_kernel_grad(bare(KernelBase::Truncated), z, z)(0) == 0.0);
    CHECK(eval_kernel_grad(bare(KernelBase::Truncated), vec1(3.0), z)(0) == 0.0);
}

TEST_CASE("params feed the base first, then bandwidth maps in chain order") {
    KernelSpec s = spec_from_shorthand("multiquadric:0.5,2.0|bandwidth");
    Matrix X(2, 1);
    X << 0.0, 1.0;
    s.fit_maps(X);
    CHECK(s.multiquadric_c() == 0.5);
    CHECK(s.apply_maps(X)(1, 0) == doctest::Approx(2.0)); // h = 2 scales coordinates
    // same pair evaluated without the map at scaled points must agree
    KernelSpec plain = spec_from_shorthand("multiquadric:0.5");
    CHECK(eval_kernel(s, vec1(0.0), vec1(1.0)) ==
          doctest::Approx(eval_kernel(plain, vec1(0.0), vec1(2.0))).epsilon(1e-14));
}

TEST_CASE("erf map is stateless and bounded") {
    MapSpec m(MapKind::Erf);
    Matrix X(2, 1);
    X << -10.0, 10.0;
    const Matrix out = m.apply(X);
    CHECK(out(0, 0) == doctest::Approx(-1.0));
    CHECK(out(1, 0) == doctest::Approx(1.0));
    CHECK(m.stateless());
}
