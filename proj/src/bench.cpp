#include "rkhskit/bench.hpp"
#include "rkhskit/linalg.hpp"
#include "rkhskit/metrics.hpp"
#include "rkhskit/operators.hpp"
#include "rkhskit/rng.hpp"
#include "rkhskit/transport.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>

namespace rkhs {
namespace bench {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace

void BenchReport::add_metric(const std::string& key, double value) {
    require(std::isfinite(value), "bench metric not finite: " + key);
    metrics.emplace_back(key, value);
}

double BenchReport::metric(const std::string& key) const {
    for (const auto& [k, v] : metrics)
        if (k == key) return v;
    throw ValidationError("bench metric missing: " + key);
}

std::string BenchReport::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    nlohmann::json p = nlohmann::json::object();
    for (const auto& [k, v] : params) p[k] = v;
    j["params"] = std::move(p);
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : metrics) m[k] = v;
    j["metrics"] = std::move(m);
    j["artifacts"] = artifacts;
    return j.dump(2);
}

double bachelier_reference(double b, double K, double theta, double t1, double t2) {
    require(t2 > t1, "bachelier_reference: need t2 > t1");
    const double vol = theta * std::sqrt(t2 - t1);
    const double d = (b - K) / vol;
    return vol * normal_pdf(d) + (b - K) * normal_cdf(d);
}

BenchReport run_bachelier(const BachelierScenario& sc, const KernelSpec& spec) {
    require(sc.N >= 2 && sc.D >= 1, "bachelier: bad scenario size");
    require(sc.t2 > sc.t1 && sc.t1 > 0.0, "bachelier: need t2 > t1 > 0");
    require(sc.theta > 0.0, "bachelier: theta must be positive");

    // random correlation, then rescaled so the basket carries volatility theta
    Rng wrng = Rng::substream(sc.seed, "weights");
    Matrix sigma = wrng.normal_matrix(sc.D, sc.D);
    Vector omega = wrng.normal_matrix(sc.D, 1).col(0).cwiseAbs();
    omega /= omega.lpNorm<1>();
    const double basket_vol = (sigma.transpose() * omega).norm();
    require(basket_vol > 0.0, "bachelier: degenerate correlation draw");
    sigma *= sc.theta / basket_vol;

    Rng drng = Rng::substream(sc.seed, "data");
    auto brownian = [&](double t) {
        return (std::sqrt(t) * drng.normal_matrix(sc.N, sc.D) * sigma.transpose()).eval();
    };
    const PointSet X = brownian(sc.t1);
    const PointSet Y = X + brownian(sc.t2 - sc.t1); // paired increments
    const PointSet Z = brownian(sc.t1);

    auto payoff = [&](const PointSet& pts) {
        Matrix p(pts.rows(), 1);
        for (Eigen::Index i = 0; i < pts.rows(); ++i)
            p(i, 0) = std::max(pts.row(i).dot(omega) - sc.strike, 0.0);
        return p;
    };
    auto reference = [&](const PointSet& pts) {
        Matrix f(pts.rows(), 1);
        for (Eigen::Index i = 0; i < pts.rows(); ++i)
            f(i, 0) = bachelier_reference(pts.row(i).dot(omega), sc.strike, sc.theta, sc.t1,
                                          sc.t2);
        return f;
    };
    const Matrix PY = payoff(Y);
    const Matrix fZ = reference(Z);

    BenchReport rep;
    rep.name = "bachelier";
    rep.params = {{"N", std::to_string(sc.N)},     {"D", std::to_string(sc.D)},
                  {"theta", std::to_string(sc.theta)}, {"t1", std::to_string(sc.t1)},
                  {"t2", std::to_string(sc.t2)},   {"K", std::to_string(sc.strike)},
                  {"seed", std::to_string(sc.seed)}};

    const Matrix fX = reference(X);
    // scores on the fresh query sample carry the kernel extrapolation error
    // at the hull edge; the _insample variants isolate the estimator itself
    auto extrapolated_score = [&](const Matrix& est) {
        Regressor reg = fit_regressor(spec, X, est, kDefaultEpsilon);
        return metrics::normalized_error(predict(reg, Z), fZ);
    };

    // martingale transport plan
    double t0 = now_seconds();
    const ot::MartingalePlan mot = ot::martingale_ot(X, Y, spec, 1e-10, 200);
    const Matrix f_mot = mot.plan * PY;
    rep.add_metric("mot_score", extrapolated_score(f_mot));
    rep.add_metric("mot_score_insample", metrics::normalized_error(f_mot, fX));
    rep.add_metric("mot_runtime", now_seconds() - t0);
    rep.add_metric("mot_row_sum_error",
                   (mot.plan.rowwise().sum().array() - 1.0).abs().maxCoeff());
    rep.add_metric("mot_min_entry", mot.min_entry);

    // Nadaraya-Watson transition weights
    t0 = now_seconds();
    KernelSpec nw_spec = spec;
    if (!nw_spec.fitted()) {
        PointSet both(X.rows() + Y.rows(), X.cols());
        both << X, Y;
        nw_spec.fit_maps(both);
    }
    Matrix W = gram(nw_spec, X, Y);
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
        const double s = W.row(i).sum();
        require(s > 0.0, "bachelier: nadaraya-watson weights vanished");
        W.row(i) /= s;
    }
    const Matrix f_nw = W * PY;
    rep.add_metric("nw_score", extrapolated_score(f_nw));
    rep.add_metric("nw_score_insample", metrics::normalized_error(f_nw, fX));
    rep.add_metric("nw_runtime", now_seconds() - t0);

    // naive kernel ridge regression straight to the payoff
    t0 = now_seconds();
    Regressor naive = fit_regressor(spec, X, PY, kDefaultEpsilon);
    rep.add_metric("krr_score", metrics::normalized_error(predict(naive, Z), fZ));
    rep.add_metric("krr_score_insample", metrics::normalized_error(predict(naive, X), fX));
    rep.add_metric("krr_runtime", now_seconds() - t0);
    return rep;
}

PoissonResult run_poisson(const PointSet& mesh, const Matrix& f_values, const KernelSpec& spec) {
    require(f_values.rows() == mesh.rows(), "poisson: rhs rows mismatch");
    PoissonResult out;
    const double t0 = now_seconds();
    const Matrix L = laplace_beltrami(spec, mesh, mesh, kDefaultEpsilon);
    out.u = pinv_sym(L) * f_values;
    const double residual = (L * out.u - f_values).norm() / std::max(f_values.norm(), 1e-300);
    out.report.name = "poisson";
    out.report.params = {{"N", std::to_string(mesh.rows())}, {"D", std::to_string(mesh.cols())}};
    out.report.add_metric("relative_residual", residual);
    out.report.add_metric("runtime", now_seconds() - t0);
    return out;
}

HeatResult run_heat(const PointSet& mesh, const Matrix& u0, double theta, double tau, int steps,
                    const KernelSpec& spec) {
    require(u0.rows() == mesh.rows(), "heat: initial value rows mismatch");
    require(steps >= 1, "heat: need at least one step");
    HeatResult out;
    const double t0 = now_seconds();
    const Matrix L = laplace_beltrami(spec, mesh, mesh, kDefaultEpsilon);
    // the discrete Laplacian is PSD, so the dissipative generator is -L
    const Matrix B = theta_generator(-L, theta, tau);
    out.energy.resize(steps + 1);
    Matrix u = u0;
    out.energy[0] = u.norm();
    for (int s = 1; s <= steps; ++s) {
        u = B * u;
        out.energy[s] = u.norm();
    }
    out.u_final = u;
    out.report.name = "heat";
    out.report.params = {{"N", std::to_string(mesh.rows())},
                         {"theta", std::to_string(theta)},
                         {"tau", std::to_string(tau)},
                         {"steps", std::to_string(steps)}};
    out.report.add_metric("energy_initial", out.energy[0]);
    out.report.add_metric("energy_final", out.energy[steps]);
    out.report.add_metric("runtime", now_seconds() - t0);
    return out;
}

} // namespace bench
} // namespace rkhs
