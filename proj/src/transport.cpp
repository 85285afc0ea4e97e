#include "rkhskit/transport.hpp"
#include "rkhskit/linalg.hpp"
#include "rkhskit/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rkhs {
namespace ot {

LsapResult lsap(const Matrix& cost) {
    const int m = int(cost.rows());
    const int n = int(cost.cols());
    require(m >= 1 && n >= 1, "lsap: empty cost matrix");
    require(m <= n, "lsap: need rows <= columns");
    require_finite(cost, "lsap cost");

    // Jonker-Volgenant style: one shortest augmenting path per row, dual
    // potentials keep reduced costs nonnegative.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(m, 0.0), v(n, 0.0);
    std::vector<int> match_col(n, -1); // column -> row
    for (int i = 0; i < m; ++i) {
        std::vector<double> dist(n, inf);
        std::vector<int> prev_col(n, -1);
        std::vector<bool> done(n, false);
        int cur_row = i;
        int sink = -1;
        double path_min = 0.0;
        std::vector<double> offset(n, 0.0);
        // Dijkstra over columns with lazily updated dual offsets
        int from_col = -1;
        while (sink < 0) {
            double best = inf;
            int best_col = -1;
            for (int j = 0; j < n; ++j) {
                if (done[j]) continue;
                const double red = cost(cur_row, j) - u[cur_row] - v[j] + path_min;
                if (red < dist[j]) {
                    dist[j] = red;
                    prev_col[j] = from_col;
                }
                if (dist[j] < best) { // ascending scan keeps the lowest column on ties
                    best = dist[j];
                    best_col = j;
                }
            }
            require(best_col >= 0 && best < inf, "lsap: no augmenting path (non-finite costs?)");
            done[best_col] = true;
            path_min = best;
            if (match_col[best_col] < 0) {
                sink = best_col;
            } else {
                cur_row = match_col[best_col];
                from_col = best_col;
            }
        }
        // dual update along the alternating tree
        u[i] += path_min;
        for (int j = 0; j < n; ++j) {
            if (!done[j] || j == sink) continue;
            const double delta = path_min - dist[j];
            v[j] -= delta;
            u[match_col[j]] += delta;
        }
        // augment
        int col = sink;
        while (col >= 0) {
            const int pc = prev_col[col];
            const int row = (pc < 0) ? i : match_col[pc];
            match_col[col] = row;
            col = pc;
        }
    }

    LsapResult res;
    res.sigma.assign(m, -1);
    for (int j = 0; j < n; ++j)
        if (match_col[j] >= 0) res.sigma[match_col[j]] = j;

    // canonicalize cost-neutral pairwise swaps toward the lexicographic minimum;
    // such swaps keep complementary slackness because the freed slack is zero
    bool changed = true;
    int guard = 4 * m + 4;
    while (changed && guard-- > 0) {
        changed = false;
        for (int a = 0; a < m; ++a) {
            for (int b = a + 1; b < m; ++b) {
                const double before = cost(a, res.sigma[a]) + cost(b, res.sigma[b]);
                const double after = cost(a, res.sigma[b]) + cost(b, res.sigma[a]);
                if (after == before && res.sigma[b] < res.sigma[a]) {
                    std::swap(res.sigma[a], res.sigma[b]);
                    changed = true;
                }
            }
        }
    }

    res.cost = 0.0;
    for (int i = 0; i < m; ++i) res.cost += cost(i, res.sigma[i]);
    res.phi = Eigen::Map<Vector>(u.data(), m);
    res.psi = -Eigen::Map<Vector>(v.data(), n);
    return res;
}

SinkhornResult sinkhorn(const Matrix& cost, double epsilon, double tol, int max_iter) {
    const auto n = cost.rows();
    require(cost.rows() == cost.cols(), "sinkhorn: cost matrix must be square");
    require(epsilon > 0.0, "sinkhorn: epsilon must be positive");
    require_finite(cost, "sinkhorn cost");

    std::vector<double> flat(cost.data(), cost.data() + cost.size());
    std::nth_element(flat.begin(), flat.begin() + flat.size() / 2, flat.end());
    const double med = flat[flat.size() / 2];
    const bool log_domain = epsilon < 0.05 * std::abs(med);

    SinkhornResult res;
    auto residual_of = [&](const Matrix& plan) {
        const double r = (plan.rowwise().sum().array() - 1.0).abs().maxCoeff();
        const double c = (plan.colwise().sum().array() - 1.0).abs().maxCoeff();
        return std::max(r, c);
    };

    if (!log_domain) {
        const Matrix K = (-cost / epsilon).array().exp();
        Vector uu = Vector::Ones(n), vv = Vector::Ones(n);
        for (int it = 0; it < max_iter; ++it) {
            uu = (K * vv).cwiseInverse();
            vv = (K.transpose() * uu).cwiseInverse();
            if ((it & 7) == 7 || it == max_iter - 1) {
                res.plan = uu.asDiagonal() * K * vv.asDiagonal();
                res.iterations = it + 1;
                res.marginal_residual = residual_of(res.plan);
                if (res.marginal_residual < tol) {
                    res.converged = true;
                    return res;
                }
            }
        }
        res.plan = uu.asDiagonal() * K * vv.asDiagonal();
    } else {
        Vector f = Vector::Zero(n), g = Vector::Zero(n);
        auto lse_rows = [&](const Vector& gg) {
            Vector out(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                Vector z = (gg - cost.row(i).transpose()) / epsilon;
                const double mx = z.maxCoeff();
                out[i] = mx + std::log((z.array() - mx).exp().sum());
            }
            return out;
        };
        auto lse_cols = [&](const Vector& ff) {
            Vector out(n);
            for (Eigen::Index j = 0; j < n; ++j) {
                Vector z = (ff - cost.col(j)) / epsilon;
                const double mx = z.maxCoeff();
                out[j] = mx + std::log((z.array() - mx).exp().sum());
            }
            return out;
        };
        for (int it = 0; it < max_iter; ++it) {
            f = -epsilon * lse_rows(g);
            g = -epsilon * lse_cols(f);
            if ((it & 7) == 7 || it == max_iter - 1) {
                Matrix plan(n, n);
                for (Eigen::Index i = 0; i < n; ++i)
                    for (Eigen::Index j = 0; j < n; ++j)
                        plan(i, j) = std::exp((f[i] + g[j] - cost(i, j)) / epsilon);
                res.plan = plan;
                res.iterations = it + 1;
                res.marginal_residual = residual_of(plan);
                if (res.marginal_residual < tol) {
                    res.converged = true;
                    return res;
                }
            }
        }
    }
    res.iterations = max_iter;
    res.marginal_residual = residual_of(res.plan);
    res.converged = res.marginal_residual < tol;
    return res;
}

MartingalePlan martingale_ot(const PointSet& X_in, const PointSet& Y_in, const KernelSpec& spec_in,
                             double tol, int max_iter, bool project_nonneg) {
    const auto n = X_in.rows();
    require(Y_in.rows() == n, "martingale_ot: sets must have equal length");
    require(X_in.cols() == Y_in.cols(), "martingale_ot: dimension mismatch");

    PointSet X = X_in.rowwise() - X_in.colwise().mean();
    PointSet Y = Y_in.rowwise() - Y_in.colwise().mean();

    KernelSpec spec = spec_in;
    if (!spec.fitted()) {
        PointSet both(2 * n, X.cols());
        both << X, Y;
        spec.fit_maps(both);
    }
    const LsapResult match = lsap(distance_matrix(spec, X, Y));
    PointSet Ys(n, Y.cols());
    for (Eigen::Index i = 0; i < n; ++i) Ys.row(i) = Y.row(match.sigma[i]);

    MartingalePlan out;
    out.sigma = match.sigma;
    Matrix plan = Matrix::Identity(n, n);
    PointSet Yc = Ys;
    const double xnorm = std::max(X.norm(), 1e-300);
    for (int it = 0; it < max_iter; ++it) {
        const Matrix R = (X - Yc) * Yc.transpose(); // rank-D update direction
        const double num = R.squaredNorm();
        const double den = (R * Yc).squaredNorm();
        if (!(den > 0.0)) {
            // degenerate step denominator: stop and report rather than guess
            out.iterations = it;
            out.converged = false;
            break;
        }
        const double t = num / den;
        // step = I + t R with R = (X - Yc) Yc^T of rank <= D, so the plan and
        // iterate updates stay O(D N^2)
        const PointSet Yn = Yc + t * (R * Yc);
        plan += t * ((X - Yc) * (Yc.transpose() * plan));
        const double move = (Yn - Yc).norm() / std::max(Yc.norm(), 1e-300);
        Yc = Yn;
        out.iterations = it + 1;
        if (move < tol) {
            out.converged = true;
            break;
        }
    }
    out.barycenter_residual = (X - plan * Ys).norm() / xnorm;

    // re-index by sigma^-1 so the plan couples X with Y in its original order
    out.plan.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) out.plan.col(match.sigma[j]) = plan.col(j);
    out.min_entry = out.plan.minCoeff();
    if (project_nonneg && out.min_entry < 0.0) {
        out.plan = out.plan.cwiseMax(0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = out.plan.row(i).sum();
            if (s > 0.0) out.plan.row(i) /= s;
        }
    }
    return out;
}

namespace {

double gm_objective(const Matrix& DX, const Matrix& DY, const IndexVec& sigma) {
    const auto n = DX.rows();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = DX(i, j) - DY(sigma[i], sigma[j]);
            acc += d * d;
        }
    return acc;
}

// objective change of swapping sigma_a and sigma_b, O(N)
double gm_swap_delta(const Matrix& DX, const Matrix& DY, const IndexVec& sigma, int a, int b) {
    const auto n = DX.rows();
    const int sa = sigma[a], sb = sigma[b];
    double delta = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j == a || j == b) continue;
        const int sj = sigma[j];
        const double oa = DX(a, j) - DY(sa, sj);
        const double ob = DX(b, j) - DY(sb, sj);
        const double na = DX(a, j) - DY(sb, sj);
        const double nb = DX(b, j) - DY(sa, sj);
        delta += na * na + nb * nb - oa * oa - ob * ob;
    }
    return 2.0 * delta; // rows and columns contribute symmetrically
}

IndexVec rank_order(const Vector& values) {
    IndexVec idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
    return idx;
}

// first principal coordinate from a squared-dissimilarity matrix (classical
// MDS double-centering); the sign is pinned by the largest-magnitude entry
Vector principal_coordinate(const Matrix& D) {
    const auto n = D.rows();
    const Matrix J = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / double(n));
    const Matrix B = -0.5 * J * D * J;
    Eigen::SelfAdjointEigenSolver<Matrix> es(B);
    Vector v = es.eigenvectors().col(n - 1);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    return v;
}

} // namespace

GromovMongeResult gromov_monge(const Matrix& DX, const Matrix& DY, const IndexVec& init) {
    const auto n = DX.rows();
    require(DX.rows() == DX.cols() && DY.rows() == DY.cols() && DY.rows() == n,
            "gromov_monge: distance matrices must be square and conformable");

    IndexVec sigma;
    if (!init.empty()) {
        require(int(init.size()) == n, "gromov_monge: init permutation size mismatch");
        sigma = init;
    } else {
        // rank-match both sets along their first principal direction
        const IndexVec rx = rank_order(principal_coordinate(DX));
        const IndexVec ry = rank_order(principal_coordinate(DY));
        sigma.assign(n, 0);
        for (Eigen::Index r = 0; r < n; ++r) sigma[rx[r]] = ry[r];
    }

    const double swap_tol =
        1e-12 * std::max(1.0, gm_objective(DX, DY, sigma) / double(n * n));
    bool improved = true;
    while (improved) {
        improved = false;
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) {
                if (gm_swap_delta(DX, DY, sigma, a, b) < -swap_tol) {
                    std::swap(sigma[a], sigma[b]);
                    improved = true;
                }
            }
        }
    }
    return GromovMongeResult{sigma, gm_objective(DX, DY, sigma)};
}

Vector polar_potential(const KernelSpec& spec_in, const PointSet& X, const PointSet& Y_sigma,
                       double epsilon) {
    require(X.rows() == Y_sigma.rows(), "polar_potential: set sizes mismatch");
    require(X.cols() == Y_sigma.cols(), "polar_potential: dimension mismatch");
    KernelSpec spec = spec_in;
    if (!spec.fitted()) spec.fit_maps(X);
    const auto n = X.rows(), D = X.cols();
    const Matrix nabla = gradient_operator(spec, X, X, X, epsilon);
    Vector field(n * D);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index d = 0; d < D; ++d) field[i * D + d] = Y_sigma(i, d);
    const Matrix L = nabla.transpose() * nabla;
    return pinv_sym(L) * (nabla.transpose() * field);
}

} // namespace ot
} // namespace rkhs
