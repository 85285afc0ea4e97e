#include "rkhskit/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rkhs {
namespace cluster {

IndexVec swap_descent(const GainFunction& gain, IndexVec sigma, const LoopBounds& bounds,
                      double min_gain) {
    bool improved = true;
    while (improved) {
        improved = false;
        for (int i = bounds.i_begin; i < bounds.i_end; ++i) {
            for (int j = bounds.j_begin; j < bounds.j_end; ++j) {
                if (i == j) continue;
                if (gain(i, j, sigma) > min_gain) {
                    std::swap(sigma[i], sigma[j]);
                    improved = true;
                }
            }
        }
    }
    return sigma;
}

namespace {

/// Marginal-discrepancy score of inserting candidate x into the current set:
/// the x-dependent part of d_k(Y u {x}, X)^2. Smaller is better.
struct GreedyScorer {
    const Matrix& K;    // full Gram of X
    const Vector& csum; // column sums of K
    Vector in_set_sum;  // sum_{y in Y} k(., y) per candidate
    int count = 0;
    double nx;

    double score(int cand) const {
        const double q1 = double(count + 1);
        return (2.0 * in_set_sum[cand] + K(cand, cand)) / (q1 * q1) -
               2.0 * csum[cand] / (q1 * nx);
    }
    void add(int idx) {
        in_set_sum += K.col(idx);
        ++count;
    }
};

IndexVec assignment_to(const PointSet& X, const PointSet& C) {
    IndexVec labels(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < C.rows(); ++c) {
            const double d = (X.row(i) - C.row(c)).squaredNorm();
            if (d < bd) {
                bd = d;
                best = int(c);
            }
        }
        labels[i] = best;
    }
    return labels;
}

} // namespace

ClusterModel greedy_select(const KernelSpec& spec_in, const PointSet& X, int n_y, int batch,
                           const IndexVec& init) {
    const int nx = int(X.rows());
    require(n_y >= 1 && n_y <= nx, "greedy_select: need 1 <= N_y <= N_x");
    require(batch >= 1, "greedy_select: batch must be positive");
    KernelSpec spec = spec_in;
    if (!spec.fitted()) spec.fit_maps(X);
    const Matrix K = gram(spec, X, X);
    const Vector csum = K.colwise().sum();
    GreedyScorer scorer{K, csum, Vector::Zero(nx), 0, double(nx)};

    std::vector<bool> taken(nx, false);
    IndexVec chosen;
    chosen.reserve(n_y);
    for (int idx : init) {
        require(idx >= 0 && idx < nx, "greedy_select: init index out of range");
        if (!taken[idx]) {
            taken[idx] = true;
            chosen.push_back(idx);
            scorer.add(idx);
        }
    }
    while (int(chosen.size()) < n_y) {
        const int want = std::min(batch, n_y - int(chosen.size()));
        // rank all remaining candidates once per batch
        std::vector<std::pair<double, int>> ranked;
        ranked.reserve(nx);
        for (int c = 0; c < nx; ++c)
            if (!taken[c]) ranked.emplace_back(scorer.score(c), c);
        std::sort(ranked.begin(), ranked.end());
        for (int b = 0; b < want; ++b) {
            const int idx = ranked[b].second;
            taken[idx] = true;
            chosen.push_back(idx);
            scorer.add(idx);
        }
    }
    ClusterModel model;
    model.centroids.resize(n_y, X.cols());
    for (int i = 0; i < n_y; ++i) model.centroids.row(i) = X.row(chosen[i]);
    model.source_indices = chosen;
    model.assignment = assignment_to(X, model.centroids);
    return model;
}

ClusterModel subset_refine(const KernelSpec& spec_in, const PointSet& X, const IndexVec& subset) {
    const int nx = int(X.rows());
    const int ny = int(subset.size());
    require(ny >= 1 && ny <= nx, "subset_refine: bad subset size");
    KernelSpec spec = spec_in;
    if (!spec.fitted()) spec.fit_maps(X);
    const Matrix K = gram(spec, X, X);
    const Vector csum = K.colwise().sum();

    // sigma[0..ny) are the centroid rows, the rest the complement
    IndexVec sigma(nx);
    std::vector<bool> used(nx, false);
    for (int i = 0; i < ny; ++i) {
        require(subset[i] >= 0 && subset[i] < nx && !used[subset[i]],
                "subset_refine: invalid subset");
        sigma[i] = subset[i];
        used[subset[i]] = true;
    }
    int pos = ny;
    for (int i = 0; i < nx; ++i)
        if (!used[i]) sigma[pos++] = i;

    Vector in_set_sum = Vector::Zero(nx);
    for (int i = 0; i < ny; ++i) in_set_sum += K.col(sigma[i]);

    const double nyd = double(ny), nxd = double(nx);
    auto gain = [&](int i, int j, const IndexVec& s) {
        const int p = s[i], q = s[j];
        const double d_yy = -2.0 * in_set_sum[p] + K(p, p) + 2.0 * in_set_sum[q] -
                            2.0 * K(q, p) + K(q, q);
        const double d_xy = -2.0 / (nxd * nyd) * (csum[q] - csum[p]);
        const double delta = d_yy / (nyd * nyd) + d_xy; // mmd(new) - mmd(old)
        return -delta;
    };
    const double swap_tol = 1e-14 * std::max(1.0, K.cwiseAbs().maxCoeff());
    bool improved = true;
    while (improved) {
        improved = false;
        for (int i = 0; i < ny; ++i) {
            for (int j = ny; j < nx; ++j) {
                if (gain(i, j, sigma) > swap_tol) {
                    const int p = sigma[i], q = sigma[j];
                    in_set_sum += K.col(q) - K.col(p);
                    std::swap(sigma[i], sigma[j]);
                    improved = true;
                }
            }
        }
    }

    ClusterModel model;
    model.centroids.resize(ny, X.cols());
    IndexVec idx(sigma.begin(), sigma.begin() + ny);
    for (int i = 0; i < ny; ++i) model.centroids.row(i) = X.row(idx[i]);
    model.source_indices = idx;
    model.assignment = assignment_to(X, model.centroids);
    return model;
}

Matrix discrepancy_gradient(const KernelSpec& spec, const PointSet& X, const PointSet& Y) {
    const auto ny = Y.rows(), nx = X.rows(), D = X.cols();
    const Vector acc = grad_gram(spec, Y, Y).rowwise().sum();
    const Vector cross = grad_gram(spec, Y, X).rowwise().sum();
    Matrix G(ny, D);
    for (Eigen::Index m = 0; m < ny; ++m)
        for (Eigen::Index d = 0; d < D; ++d)
            G(m, d) = 2.0 / double(ny * ny) * acc[m * D + d] -
                      2.0 / double(nx * ny) * cross[m * D + d];
    return G;
}

namespace {

double golden_section(const std::function<double(double)>& f, double a, double b, int iters) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < iters; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

ClusterModel sharpen_descent(const KernelSpec& spec_in, const PointSet& X, const PointSet& Y0,
                             double tol, int max_iter) {
    switch (spec_in.base) {
    case KernelBase::TensorProduct:
    case KernelBase::Truncated:
        throw ValidationError("sharpen_descent: kernel base is not differentiable");
    default:
        break;
    }
    KernelSpec spec = spec_in;
    if (!spec.fitted()) spec.fit_maps(X);
    PointSet Y = Y0;
    const double nx = double(X.rows());
    // the X-X block of the discrepancy never changes along the descent
    const double term_xx = gram(spec, X, X).sum() / (nx * nx);
    auto objective = [&](const PointSet& C) {
        const double nc = double(C.rows());
        return gram(spec, C, C).sum() / (nc * nc) + term_xx -
               2.0 * gram(spec, C, X).sum() / (nc * nx);
    };
    double J = objective(Y);
    const double diam = std::sqrt((X.colwise().maxCoeff() - X.colwise().minCoeff())
                                      .squaredNorm()) + 1e-12;
    for (int it = 0; it < max_iter; ++it) {
        const Matrix G = discrepancy_gradient(spec, X, Y);
        const double gnorm = G.norm();
        if (gnorm <= tol) break;
        const double lambda_max = diam / (G.rowwise().norm().maxCoeff() + 1e-300);
        auto grad_norm_at = [&](double lam) {
            return discrepancy_gradient(spec, X, Y - lam * G).norm();
        };
        double lam = golden_section(grad_norm_at, 0.0, lambda_max, 24);
        // accept only steps that decrease the discrepancy
        double Jn = objective(Y - lam * G);
        int shrink = 0;
        while (Jn > J && shrink < 30) {
            lam *= 0.5;
            Jn = objective(Y - lam * G);
            ++shrink;
        }
        if (Jn > J) break; // stationary within line-search resolution
        Y -= lam * G;
        if (J - Jn <= tol * std::max(1.0, std::abs(J))) {
            J = Jn;
            break;
        }
        J = Jn;
    }
    ClusterModel model;
    model.centroids = Y;
    model.assignment = assignment_to(X, Y);
    return model;
}

IndexVec balanced_assign(const Matrix& distance_yx) {
    const int ny = int(distance_yx.rows());
    const int nx = int(distance_yx.cols());
    require(ny >= 1 && nx >= 1, "balanced_assign: empty distance matrix");
    IndexVec sigma(nx);
    std::iota(sigma.begin(), sigma.end(), 0);
    auto gain = [&](int i, int j, const IndexVec& s) {
        const int ci = s[i] % ny, cj = s[j] % ny;
        return distance_yx(ci, i) + distance_yx(cj, j) - distance_yx(cj, i) -
               distance_yx(ci, j);
    };
    LoopBounds bounds{0, nx, 0, nx};
    const double tol = 1e-12 * std::max(1.0, distance_yx.cwiseAbs().maxCoeff());
    sigma = swap_descent(gain, std::move(sigma), bounds, tol);
    IndexVec labels(nx);
    for (int n = 0; n < nx; ++n) labels[n] = sigma[n] % ny;
    return labels;
}

IndexVec assign(const PointSet& X, const ClusterModel& model, AssignMetric metric,
                const KernelSpec* spec) {
    require(model.centroids.rows() >= 1, "assign: model has no centroids");
    require(X.cols() == model.centroids.cols(), "assign: dimension mismatch");
    if (metric == AssignMetric::Euclidean) return assignment_to(X, model.centroids);
    require(spec != nullptr, "assign: kernel metric needs a spec");
    const Matrix D = distance_matrix(*spec, X, model.centroids);
    IndexVec labels(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        Eigen::Index best;
        D.row(i).minCoeff(&best);
        labels[i] = int(best);
    }
    return labels;
}

double inertia(const PointSet& X, const ClusterModel& model) {
    require(int(model.assignment.size()) == X.rows(), "inertia: assignment size mismatch");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        acc += (X.row(i) - model.centroids.row(model.assignment[i])).squaredNorm();
    return acc;
}

IndexVec semisup_predict(const ClusterModel& model, const IndexVec& labels_at_centroids,
                         const PointSet& Z, AssignMetric metric, const KernelSpec* spec) {
    require(int(labels_at_centroids.size()) == model.centroids.rows(),
            "semisup_predict: centroid label count mismatch");
    const IndexVec nearest = assign(Z, model, metric, spec);
    IndexVec out(nearest.size());
    for (std::size_t i = 0; i < nearest.size(); ++i) out[i] = labels_at_centroids[nearest[i]];
    return out;
}

} // namespace cluster
} // namespace rkhs
