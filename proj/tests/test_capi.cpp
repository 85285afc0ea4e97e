#include <doctest.h>

#include <rkhs_kit.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

namespace {

struct Kernel {
    rkhs_kernel* k = nullptr;
    explicit Kernel(const char* spec) { REQUIRE(rkhs_kernel_create(spec, &k) == RKHS_OK); }
    ~Kernel() { rkhs_kernel_free(k); }
};

} // namespace

TEST_CASE("capi: version and error text") {
    CHECK(std::string(rkhs_version()).find("rkhs-kit") != std::string::npos);
    rkhs_kernel* k = nullptr;
    CHECK(rkhs_kernel_create("not-a-kernel", &k) == RKHS_ERR_INVALID);
    CHECK(std::string(rkhs_last_error()).find("unknown kernel") != std::string::npos);
}

TEST_CASE("capi: kernel evaluation and gram") {
    Kernel k("matern");
    const double x = 0.0, y = 1.0;
    double v = 0.0;
    CHECK(rkhs_eval(k.k, &x, &y, 1, &v) == RKHS_OK);
    CHECK(v == doctest::Approx(std::exp(-1.0)));

    const double X[4] = {0.0, 0.5, 1.0, 1.5};
    double G[16];
    CHECK(rkhs_gram(k.k, X, 4, X, 4, 1, G) == RKHS_OK);
    CHECK(G[0] == doctest::Approx(1.0));
    CHECK(G[1] == doctest::Approx(std::exp(-0.5)));
    double D[16];
    CHECK(rkhs_distance_matrix(k.k, X, 4, X, 4, 1, D) == RKHS_OK);
    CHECK(D[0] == doctest::Approx(0.0));
    double m = -1.0;
    CHECK(rkhs_mmd(k.k, X, 4, X, 4, 1, &m) == RKHS_OK);
    CHECK(std::abs(m) <= 1e-12);
}

TEST_CASE("capi: default spec maps must be fitted before use") {
    Kernel k(nullptr);
    const double X[3] = {0.0, 0.5, 1.0};
    double G[9];
    CHECK(rkhs_gram(k.k, X, 3, X, 3, 1, G) == RKHS_ERR_INVALID);
    CHECK(rkhs_kernel_fit_maps(k.k, X, 3, 1) == RKHS_OK);
    CHECK(rkhs_gram(k.k, X, 3, X, 3, 1, G) == RKHS_OK);
}

TEST_CASE("capi: fit, predict, gradient, JSON round-trip") {
    Kernel k("gaussian");
    const double X[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    double fX[5];
    for (int i = 0; i < 5; ++i) fX[i] = 3.0 * X[i] + 1.0;
    rkhs_model* model = nullptr;
    REQUIRE(rkhs_fit(k.k, X, 5, 1, fX, 1, 0.0, 0, &model) == RKHS_OK);
    double pred[5];
    CHECK(rkhs_predict(model, X, 5, 1, pred) == RKHS_OK);
    for (int i = 0; i < 5; ++i) CHECK(pred[i] == doctest::Approx(fX[i]).epsilon(1e-8));
    int d_in = 0, d_out = 0, nb = 0;
    CHECK(rkhs_model_dims(model, &d_in, &d_out, &nb) == RKHS_OK);
    CHECK(d_in == 1);
    CHECK(d_out == 1);
    CHECK(nb == 5);
    double grad[5];
    CHECK(rkhs_gradient(model, X, 5, 1, grad) == RKHS_OK);

    char* text = nullptr;
    REQUIRE(rkhs_model_to_json(model, &text) == RKHS_OK);
    rkhs_model* back = nullptr;
    REQUIRE(rkhs_model_from_json(text, &back) == RKHS_OK);
    double pred2[5];
    CHECK(rkhs_predict(back, X, 5, 1, pred2) == RKHS_OK);
    for (int i = 0; i < 5; ++i) CHECK(pred2[i] == pred[i]);
    rkhs_free_text(text);
    rkhs_model_free(model);
    rkhs_model_free(back);
}

TEST_CASE("capi: transport surface") {
    const double C[16] = {0.2617057, 0.2469788, 0.9062546, 0.2495462,
                          0.2719497, 0.7593983, 0.4497398, 0.7767106,
                          0.0653662, 0.4875712, 0.0336136, 0.0626532,
                          0.9064375, 0.1392454, 0.5324207, 0.4110956};
    int sigma[4];
    double cost = 0.0;
    CHECK(rkhs_lsap(C, 4, 4, sigma, &cost) == RKHS_OK);
    CHECK(cost == doctest::Approx(0.6943549).epsilon(1e-7));

    double plan[16], residual = 0.0;
    int iters = 0;
    CHECK(rkhs_sinkhorn(C, 4, 0.5, 1e-9, 10000, plan, &residual, &iters) == RKHS_OK);
    CHECK(residual <= 1e-9);
    // iteration starvation must surface as a numerical failure with residual
    CHECK(rkhs_sinkhorn(C, 4, 0.5, 1e-14, 1, plan, &residual, &iters) == RKHS_ERR_NUMERICAL);

    Kernel k("gaussian");
    const double X[2] = {-1.0, 1.0};
    const double Y[2] = {-2.0, 2.0};
    double mplan[4], bres = 0.0, mmin = 0.0;
    CHECK(rkhs_martingale_ot(k.k, X, Y, 2, 1, 1e-10, 100, 0, mplan, &bres, &mmin) == RKHS_OK);
    CHECK(mplan[0] == doctest::Approx(0.75));
    CHECK(mplan[1] == doctest::Approx(0.25));

    double h[2];
    CHECK(rkhs_polar_potential(k.k, X, Y, 2, 1, h) == RKHS_OK);
}

TEST_CASE("capi: sampling surface") {
    Kernel k("");
    std::vector<double> latent(64), target(64);
    REQUIRE(rkhs_normal_sample(3, "latent", 64, 1, latent.data()) == RKHS_OK);
    REQUIRE(rkhs_normal_sample(4, "target", 64, 1, target.data()) == RKHS_OK);
    rkhs_generator* gen = nullptr;
    REQUIRE(rkhs_sample_fit(k.k, latent.data(), 64, 1, target.data(), 1, &gen) == RKHS_OK);
    std::vector<double> fresh(32), out(32);
    REQUIRE(rkhs_normal_sample(5, "draws", 32, 1, fresh.data()) == RKHS_OK);
    CHECK(rkhs_generate(gen, fresh.data(), 32, 1, out.data()) == RKHS_OK);
    rkhs_generator_free(gen);

    double stat = 0.0, thresh = 0.0;
    CHECK(rkhs_ks(out.data(), 32, target.data(), 64, &stat, &thresh) == RKHS_OK);
    CHECK(stat >= 0.0);
    CHECK(thresh > 0.0);

    // seeded determinism across calls
    std::vector<double> again(64);
    REQUIRE(rkhs_normal_sample(3, "latent", 64, 1, again.data()) == RKHS_OK);
    CHECK(std::memcmp(latent.data(), again.data(), 64 * sizeof(double)) == 0);
}

TEST_CASE("capi: metrics and benchmarks") {
    const double a[4] = {1.0, 2.0, 3.0, 4.0};
    const double b[4] = {1.0, 2.0, 3.0, 5.0};
    double out[2];
    CHECK(rkhs_metric("rmse", a, b, 4, 1, out, 1) == RKHS_OK);
    CHECK(out[0] == doctest::Approx(0.5));
    CHECK(rkhs_metric("nope", a, b, 4, 1, out, 1) == RKHS_ERR_INVALID);

    int conf[4];
    const double p[3] = {0.0, 1.0, 1.0};
    const double t[3] = {0.0, 1.0, 0.0};
    CHECK(rkhs_confusion(p, t, 3, 2, conf) == RKHS_OK);
    CHECK(conf[0] == 1);
    CHECK(conf[1] == 1);
    CHECK(conf[3] == 1);

    double bf = 0.0;
    CHECK(rkhs_bachelier_reference(1.0, 1.0, 0.2, 1.0, 2.0, &bf) == RKHS_OK);
    CHECK(bf == doctest::Approx(0.0797885).epsilon(1e-6));

    Kernel k("");
    char* report = nullptr;
    CHECK(rkhs_run_bachelier(k.k, 32, 2, 0.2, 1.0, 2.0, 0.0, 5, &report) == RKHS_OK);
    CHECK(std::string(report).find("mot_score") != std::string::npos);
    rkhs_free_text(report);
}

TEST_CASE("capi: cluster surface") {
    Kernel k("");
    std::vector<double> X(40);
    REQUIRE(rkhs_normal_sample(8, "cluster-data", 20, 2, X.data()) == RKHS_OK);
    std::vector<double> centroids(3 * 2);
    std::vector<int> assign(20);
    double mmd_val = 0.0, inertia_val = 0.0;
    REQUIRE(rkhs_kernel_fit_maps(k.k, X.data(), 20, 2) == RKHS_OK);
    for (const char* method : {"greedy", "refine", "balanced", "kmeans-inertia"}) {
        CHECK(rkhs_cluster(k.k, X.data(), 20, 2, 3, method, 0, 7, centroids.data(),
                           assign.data(), &mmd_val, &inertia_val) == RKHS_OK);
        for (int i = 0; i < 20; ++i) {
            CHECK(assign[i] >= 0);
            CHECK(assign[i] < 3);
        }
        CHECK(inertia_val >= 0.0);
    }
    CHECK(rkhs_cluster(k.k, X.data(), 20, 2, 3, "quantum", 0, 7, centroids.data(),
                       assign.data(), &mmd_val, &inertia_val) == RKHS_ERR_INVALID);
}
