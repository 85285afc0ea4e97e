#include "rkhskit/generative.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rkhs {
namespace gen {

namespace {

void require_distinct_rows(const PointSet& A, const char* what) {
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = i + 1; j < A.rows(); ++j)
            if (A.row(i) == A.row(j))
                throw ValidationError(std::string(what) + ": duplicate rows " +
                                      std::to_string(i) + " and " + std::to_string(j));
}

KernelSpec fitted_on(const KernelSpec& spec, const PointSet& X) {
    KernelSpec s = spec;
    s.fit_maps(X);
    return s;
}

} // namespace

Generator sample_fit(const PointSet& X_latent, const PointSet& Y, const KernelSpec& spec) {
    const auto n = X_latent.rows();
    require(Y.rows() == n, "sample_fit: sets must have equal row counts");
    require_distinct_rows(X_latent, "sample_fit latent");
    require_distinct_rows(Y, "sample_fit data");

    Generator g;
    if (X_latent.cols() == Y.cols()) {
        g.mode = MatchMode::Monge;
        PointSet both(2 * n, Y.cols());
        both << X_latent, Y;
        const KernelSpec cost_spec = fitted_on(spec, both);
        const ot::LsapResult res = ot::lsap(distance_matrix(cost_spec, X_latent, Y));
        g.permutation = res.sigma;
    } else {
        g.mode = MatchMode::GromovMonge;
        const KernelSpec sx = fitted_on(spec, X_latent);
        const KernelSpec sy = fitted_on(spec, Y);
        const ot::GromovMongeResult res =
            ot::gromov_monge(distance_matrix(sx, X_latent, X_latent),
                             distance_matrix(sy, Y, Y));
        g.permutation = res.sigma;
    }
    g.latent_X = X_latent;
    g.data_Y_sigma.resize(n, Y.cols());
    for (Eigen::Index i = 0; i < n; ++i) g.data_Y_sigma.row(i) = Y.row(g.permutation[i]);
    g.regressor = fit_regressor(spec, X_latent, g.data_Y_sigma, 0.0);
    return g;
}

Matrix generate(const Generator& gen, const PointSet& Z_latent) {
    require(Z_latent.cols() == gen.latent_X.cols(), "generate: latent dimension mismatch");
    return predict(gen.regressor, Z_latent);
}

ConditionalSampler conditional_fit(const PointSet& X_cond, const PointSet& Y,
                                   const KernelSpec& spec, Eigen::Index d_eta_x,
                                   Eigen::Index d_eta_y, std::uint64_t seed) {
    const auto n = X_cond.rows();
    require(Y.rows() == n, "conditional_fit: joint rows must align");
    require(d_eta_x >= 1 && d_eta_y >= 0, "conditional_fit: bad latent split");

    Rng rng = Rng::substream(seed, "latent");
    const Matrix eta = rng.normal_matrix(n, d_eta_x + d_eta_y);

    PointSet joint(n, X_cond.cols() + Y.cols());
    joint << X_cond, Y;

    ConditionalSampler cs;
    if (eta.cols() == joint.cols()) {
        cs.decoder = sample_fit(eta, joint, spec);
    } else {
        // the structural matching is free to rotate the latent axes, so start
        // it from a permutation that lines the conditioning block up with the
        // eta_x block: rank both sides along their conditioning directions
        auto first_pc = [](const Matrix& block) {
            const Matrix C = block.rowwise() - block.colwise().mean();
            Eigen::SelfAdjointEigenSolver<Matrix> es(C.transpose() * C);
            Vector axis = es.eigenvectors().col(block.cols() - 1);
            Eigen::Index arg;
            axis.cwiseAbs().maxCoeff(&arg);
            if (axis[arg] < 0.0) axis = -axis;
            return (C * axis).eval();
        };
        auto ranks = [](const Vector& v) {
            IndexVec idx(v.size());
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(),
                             [&](int a, int b) { return v[a] < v[b]; });
            return idx;
        };
        const IndexVec re = ranks(first_pc(eta.leftCols(d_eta_x)));
        const IndexVec rj = ranks(first_pc(joint.leftCols(X_cond.cols())));
        IndexVec init(n);
        for (Eigen::Index r = 0; r < n; ++r) init[re[r]] = rj[r];

        KernelSpec se = spec, sj = spec;
        se.fit_maps(eta);
        sj.fit_maps(joint);
        const ot::GromovMongeResult gm = ot::gromov_monge(
            distance_matrix(se, eta, eta), distance_matrix(sj, joint, joint), init);
        Generator dec;
        dec.mode = MatchMode::GromovMonge;
        dec.permutation = gm.sigma;
        dec.latent_X = eta;
        dec.data_Y_sigma.resize(n, joint.cols());
        for (Eigen::Index i = 0; i < n; ++i)
            dec.data_Y_sigma.row(i) = joint.row(gm.sigma[i]);
        dec.regressor = fit_regressor(spec, eta, dec.data_Y_sigma, 0.0);
        cs.decoder = std::move(dec);
    }
    cs.d_cond = X_cond.cols();
    cs.d_out = Y.cols();
    cs.d_eta_x = d_eta_x;
    cs.d_eta_y = d_eta_y;

    // encoder refit on the decoder-aligned pairs, so encode(decoded x) is
    // consistent with the joint latent arrangement; zero ridge keeps the
    // node correspondence exact (duplicated conditioning rows fall back to
    // the least-squares average)
    PointSet x_aligned(n, X_cond.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        x_aligned.row(i) = X_cond.row(cs.decoder.permutation[i]);
    const Matrix eta_x = eta.leftCols(d_eta_x);
    cs.encoder = fit_regressor(spec, x_aligned, eta_x, 0.0);
    return cs;
}

Matrix conditional_sample(const ConditionalSampler& cs, const Vector& x_query, int n_draws,
                          std::uint64_t seed) {
    require(x_query.size() == cs.d_cond, "conditional_sample: query dimension mismatch");
    require(n_draws >= 1, "conditional_sample: need at least one draw");
    PointSet q(1, cs.d_cond);
    q.row(0) = x_query.transpose();
    const Matrix eta_x = predict(cs.encoder, q); // 1 x d_eta_x

    Rng rng = Rng::substream(seed, "draws");
    PointSet latent(n_draws, cs.d_eta_x + cs.d_eta_y);
    for (int i = 0; i < n_draws; ++i) {
        latent.row(i).head(cs.d_eta_x) = eta_x.row(0);
        for (Eigen::Index d = 0; d < cs.d_eta_y; ++d)
            latent(i, cs.d_eta_x + d) = rng.normal();
    }
    const Matrix joint_out = generate(cs.decoder, latent);
    return joint_out.rightCols(cs.d_out);
}

Matrix conditional_sample(const PointSet& X_cond, const PointSet& Y, const KernelSpec& spec,
                          const Vector& x_query, int n_draws, std::uint64_t seed,
                          Eigen::Index d_eta_x, Eigen::Index d_eta_y) {
    const ConditionalSampler cs = conditional_fit(X_cond, Y, spec, d_eta_x, d_eta_y, seed);
    return conditional_sample(cs, x_query, n_draws, seed + 1);
}

Matrix stable_invert(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                     const Matrix& y_query) {
    const auto n = X.rows();
    require(Y.rows() == n, "stable_invert: sets must have equal length");
    require(y_query.cols() == Y.cols(), "stable_invert: query dimension mismatch");
    require_distinct_rows(X, "stable_invert source");

    // duplicate Y rows are the whole point here, so match without sample_fit
    IndexVec sigma;
    if (X.cols() == Y.cols()) {
        PointSet both(2 * n, Y.cols());
        both << X, Y;
        sigma = ot::lsap(distance_matrix(fitted_on(spec, both), X, Y)).sigma;
    } else {
        const KernelSpec sx = fitted_on(spec, X);
        const KernelSpec sy = fitted_on(spec, Y);
        sigma = ot::gromov_monge(distance_matrix(sx, X, X), distance_matrix(sy, Y, Y)).sigma;
    }
    PointSet y_aligned(n, Y.cols());
    for (Eigen::Index i = 0; i < n; ++i) y_aligned.row(i) = Y.row(sigma[i]);

    // aligned pairs (y_sigma(i), x_i) invert the smooth factor; duplicated y
    // rows make the system singular and land on the least-squares compromise
    Regressor enc = fit_regressor(spec, y_aligned, X, 0.0);
    // re-interpolation within the source set stabilizes the composition
    Regressor rec = fit_regressor(spec, X, X, 0.0);
    return predict(rec, predict(enc, y_query));
}

} // namespace gen
} // namespace rkhs
