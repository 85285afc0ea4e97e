#include "rkhs_kit.h"

#include "rkhskit/bench.hpp"
#include "rkhskit/clustering.hpp"
#include "rkhskit/generative.hpp"
#include "rkhskit/metrics.hpp"
#include "rkhskit/operators.hpp"
#include "rkhskit/rng.hpp"
#include "rkhskit/serialize.hpp"
#include "rkhskit/transport.hpp"

#include <cstring>
#include <string>

using namespace rkhs;

struct rkhs_kernel {
    KernelSpec spec;
};
struct rkhs_model {
    Regressor reg;
};
struct rkhs_generator {
    gen::Generator g;
};

namespace {

thread_local std::string t_last_error;

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                   Eigen::RowMajor>>;

Matrix to_matrix(const double* data, int rows, int cols) {
    if (data == nullptr || rows < 1 || cols < 1)
        throw ValidationError("null or empty matrix argument");
    return RowMajorMap(data, rows, cols);
}

void from_matrix(const Matrix& m, double* out) {
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        out, m.rows(), m.cols()) = m;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return RKHS_OK;
    } catch (const ValidationError& e) {
        t_last_error = e.what();
        return RKHS_ERR_INVALID;
    } catch (const NumericalError& e) {
        t_last_error = e.what();
        return RKHS_ERR_NUMERICAL;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return RKHS_ERR_NUMERICAL;
    }
}

char* dup_text(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

const char* rkhs_version(void) { return "rkhs-kit 1.0.0"; }

const char* rkhs_last_error(void) { return t_last_error.c_str(); }

int rkhs_kernel_create(const char* spec_json, rkhs_kernel** out) {
    return guarded([&] {
        require(out != nullptr, "output handle is null");
        KernelSpec spec;
        if (spec_json == nullptr || spec_json[0] == '\0') {
            spec = default_spec();
        } else if (spec_json[0] == '{') {
            spec = io::kernel_spec_from_json(spec_json);
        } else {
            spec = spec_from_shorthand(spec_json);
        }
        *out = new rkhs_kernel{std::move(spec)};
    });
}

int rkhs_kernel_fit_maps(rkhs_kernel* k, const double* X, int n, int d) {
    return guarded([&] {
        require(k != nullptr, "kernel handle is null");
        k->spec.fit_maps(to_matrix(X, n, d));
    });
}

void rkhs_kernel_free(rkhs_kernel* k) { delete k; }

int rkhs_eval(const rkhs_kernel* k, const double* x, const double* y, int d, double* out) {
    return guarded([&] {
        require(k && x && y && out, "null argument");
        *out = eval_kernel(k->spec, to_matrix(x, 1, d).row(0).transpose(),
                           to_matrix(y, 1, d).row(0).transpose());
    });
}

int rkhs_gram(const rkhs_kernel* k, const double* X, int nx, const double* Y, int ny, int d,
              double* out) {
    return guarded([&] {
        require(k && out, "null argument");
        from_matrix(gram(k->spec, to_matrix(X, nx, d), to_matrix(Y, ny, d)), out);
    });
}

int rkhs_distance_matrix(const rkhs_kernel* k, const double* X, int nx, const double* Y, int ny,
                         int d, double* out) {
    return guarded([&] {
        require(k && out, "null argument");
        from_matrix(distance_matrix(k->spec, to_matrix(X, nx, d), to_matrix(Y, ny, d)), out);
    });
}

int rkhs_mmd(const rkhs_kernel* k, const double* X, int nx, const double* Y, int ny, int d,
             double* out) {
    return guarded([&] {
        require(k && out, "null argument");
        *out = mmd(k->spec, to_matrix(X, nx, d), to_matrix(Y, ny, d));
    });
}

int rkhs_fit(const rkhs_kernel* k, const double* X, int n, int d, const double* fX, int df,
             double epsilon, int regularizer, rkhs_model** out) {
    return guarded([&] {
        require(k && out, "null argument");
        const Regularizer reg =
            regularizer == 1 ? Regularizer::Laplacian : Regularizer::Identity;
        *out = new rkhs_model{
            fit_regressor(k->spec, to_matrix(X, n, d), to_matrix(fX, n, df), epsilon, reg)};
    });
}

int rkhs_predict(const rkhs_model* m, const double* Z, int nz, int d, double* out) {
    return guarded([&] {
        require(m && out, "null argument");
        from_matrix(predict(m->reg, to_matrix(Z, nz, d)), out);
    });
}

int rkhs_model_dims(const rkhs_model* m, int* d_in, int* d_out, int* n_basis) {
    return guarded([&] {
        require(m, "null argument");
        if (d_in) *d_in = int(m->reg.dim());
        if (d_out) *d_out = int(m->reg.out_dim());
        if (n_basis) *n_basis = int(m->reg.basis_Y.rows());
    });
}

int rkhs_gradient(const rkhs_model* m, const double* Z, int nz, int d, double* out) {
    return guarded([&] {
        require(m && out, "null argument");
        from_matrix(gradient(m->reg, to_matrix(Z, nz, d)), out);
    });
}

int rkhs_model_to_json(const rkhs_model* m, char** out_text) {
    return guarded([&] {
        require(m && out_text, "null argument");
        *out_text = dup_text(io::regressor_to_json(m->reg));
    });
}

int rkhs_model_from_json(const char* text, rkhs_model** out) {
    return guarded([&] {
        require(text && out, "null argument");
        *out = new rkhs_model{io::regressor_from_json(text)};
    });
}

void rkhs_model_free(rkhs_model* m) { delete m; }

void rkhs_free_text(char* text) { delete[] text; }

int rkhs_cluster(const rkhs_kernel* kern, const double* X, int n, int d, int k,
                 const char* method, int metric, uint64_t seed, double* centroids_out,
                 int* assign_out, double* mmd_out, double* inertia_out) {
    return guarded([&] {
        require(kern && method && centroids_out && assign_out, "null argument");
        const Matrix data = to_matrix(X, n, d);
        KernelSpec spec = kern->spec;
        if (!spec.fitted()) spec.fit_maps(data);
        const std::string m = method;
        cluster::ClusterModel model;
        if (m == "greedy" || m == "kmeans-inertia") {
            model = cluster::greedy_select(spec, data, k);
        } else if (m == "refine") {
            model = cluster::greedy_select(spec, data, k);
            model = cluster::subset_refine(spec, data, *model.source_indices);
        } else if (m == "sharp") {
            model = cluster::greedy_select(spec, data, k);
            model = cluster::subset_refine(spec, data, *model.source_indices);
            model = cluster::sharpen_descent(spec, data, model.centroids);
        } else if (m == "balanced") {
            Rng rng = Rng::substream(seed, "cluster-init");
            IndexVec init;
            std::vector<bool> used(n, false);
            while (int(init.size()) < k) {
                const int idx = int(rng.next_u64() % std::uint64_t(n));
                if (!used[idx]) {
                    used[idx] = true;
                    init.push_back(idx);
                }
            }
            cluster::ClusterModel seeded;
            seeded.centroids.resize(k, d);
            for (int i = 0; i < k; ++i) seeded.centroids.row(i) = data.row(init[i]);
            seeded.source_indices = init;
            Matrix D(k, n);
            if (metric == 1) {
                D = distance_matrix(spec, seeded.centroids, data);
            } else {
                for (int c = 0; c < k; ++c)
                    for (int j = 0; j < n; ++j)
                        D(c, j) = (seeded.centroids.row(c) - data.row(j)).squaredNorm();
            }
            seeded.assignment = cluster::balanced_assign(D);
            model = std::move(seeded);
        } else {
            throw ValidationError("unknown cluster method: " + m);
        }
        if (metric == 1 && m != "balanced")
            model.assignment = cluster::assign(data, model,
                                               cluster::AssignMetric::KernelDiscrepancy, &spec);
        from_matrix(model.centroids, centroids_out);
        for (int i = 0; i < n; ++i) assign_out[i] = model.assignment[i];
        if (mmd_out) *mmd_out = mmd(spec, model.centroids, data);
        if (inertia_out) *inertia_out = cluster::inertia(data, model);
    });
}

int rkhs_lsap(const double* cost, int m, int n, int* sigma_out, double* cost_out) {
    return guarded([&] {
        require(cost && sigma_out, "null argument");
        const ot::LsapResult res = ot::lsap(to_matrix(cost, m, n));
        for (int i = 0; i < m; ++i) sigma_out[i] = res.sigma[i];
        if (cost_out) *cost_out = res.cost;
    });
}

int rkhs_sinkhorn(const double* cost, int n, double epsilon, double tol, int max_iter,
                  double* plan_out, double* residual_out, int* iters_out) {
    return guarded([&] {
        require(cost && plan_out, "null argument");
        const ot::SinkhornResult res = ot::sinkhorn(to_matrix(cost, n, n), epsilon, tol, max_iter);
        from_matrix(res.plan, plan_out);
        if (residual_out) *residual_out = res.marginal_residual;
        if (iters_out) *iters_out = res.iterations;
        if (!res.converged)
            throw NumericalError("sinkhorn: marginal residual " +
                                     std::to_string(res.marginal_residual) +
                                     " above tolerance after " + std::to_string(res.iterations) +
                                     " iterations",
                                 res.marginal_residual);
    });
}

int rkhs_martingale_ot(const rkhs_kernel* k, const double* X, const double* Y, int n, int d,
                       double tol, int max_iter, int project_nonneg, double* plan_out,
                       double* residual_out, double* min_entry_out) {
    return guarded([&] {
        require(k && plan_out, "null argument");
        const ot::MartingalePlan res =
            ot::martingale_ot(to_matrix(X, n, d), to_matrix(Y, n, d), k->spec, tol, max_iter,
                              project_nonneg != 0);
        from_matrix(res.plan, plan_out);
        if (residual_out) *residual_out = res.barycenter_residual;
        if (min_entry_out) *min_entry_out = res.min_entry;
    });
}

int rkhs_gromov_monge(const double* DX, const double* DY, int n, int* sigma_out,
                      double* objective_out) {
    return guarded([&] {
        require(DX && DY && sigma_out, "null argument");
        const ot::GromovMongeResult res =
            ot::gromov_monge(to_matrix(DX, n, n), to_matrix(DY, n, n));
        for (int i = 0; i < n; ++i) sigma_out[i] = res.sigma[i];
        if (objective_out) *objective_out = res.objective;
    });
}

int rkhs_polar_potential(const rkhs_kernel* k, const double* X, const double* Y_sigma, int n,
                         int d, double* h_out) {
    return guarded([&] {
        require(k && h_out, "null argument");
        const Vector h =
            ot::polar_potential(k->spec, to_matrix(X, n, d), to_matrix(Y_sigma, n, d));
        for (int i = 0; i < n; ++i) h_out[i] = h[i];
    });
}

int rkhs_sample_fit(const rkhs_kernel* k, const double* X_latent, int n, int d_latent,
                    const double* Y, int d_data, rkhs_generator** out) {
    return guarded([&] {
        require(k && out, "null argument");
        *out = new rkhs_generator{
            gen::sample_fit(to_matrix(X_latent, n, d_latent), to_matrix(Y, n, d_data), k->spec)};
    });
}

int rkhs_generate(const rkhs_generator* g, const double* Z_latent, int nz, int d_latent,
                  double* out) {
    return guarded([&] {
        require(g && out, "null argument");
        from_matrix(gen::generate(g->g, to_matrix(Z_latent, nz, d_latent)), out);
    });
}

void rkhs_generator_free(rkhs_generator* g) { delete g; }

int rkhs_conditional_sample(const rkhs_kernel* k, const double* X_cond, int n, int d_cond,
                            const double* Y, int d_out, const double* x_query, int n_draws,
                            uint64_t seed, int d_eta_x, int d_eta_y, double* out) {
    return guarded([&] {
        require(k && out && x_query, "null argument");
        const Matrix samples = gen::conditional_sample(
            to_matrix(X_cond, n, d_cond), to_matrix(Y, n, d_out), k->spec,
            to_matrix(x_query, 1, d_cond).row(0).transpose(), n_draws, seed, d_eta_x, d_eta_y);
        from_matrix(samples, out);
    });
}

int rkhs_stable_invert(const rkhs_kernel* k, const double* X, int n, int d_x, const double* Y,
                       int d_y, const double* y_query, int nq, double* x_out) {
    return guarded([&] {
        require(k && x_out, "null argument");
        from_matrix(gen::stable_invert(k->spec, to_matrix(X, n, d_x), to_matrix(Y, n, d_y),
                                       to_matrix(y_query, nq, d_y)),
                    x_out);
    });
}

int rkhs_metric(const char* kind, const double* pred, const double* truth, int n, int d,
                double* out, int out_len) {
    return guarded([&] {
        require(kind && pred && truth && out && out_len >= 1, "null argument");
        const std::string k = kind;
        const Matrix P = to_matrix(pred, n, d), T = to_matrix(truth, n, d);
        if (k == "rmse") {
            out[0] = metrics::rmse(P, T);
        } else if (k == "normalized") {
            out[0] = metrics::normalized_error(P, T);
        } else if (k == "accuracy") {
            IndexVec ip(n), it(n);
            for (int i = 0; i < n; ++i) {
                Eigen::Index ap, at;
                P.row(i).maxCoeff(&ap);
                T.row(i).maxCoeff(&at);
                ip[i] = d == 1 ? int(std::lround(P(i, 0))) : int(ap);
                it[i] = d == 1 ? int(std::lround(T(i, 0))) : int(at);
            }
            out[0] = metrics::accuracy(ip, it);
        } else if (k == "ks") {
            require(d == 1, "ks metric expects single-column samples");
            const auto res = metrics::ks_statistic(P.col(0), T.col(0));
            out[0] = res.statistic;
            if (out_len >= 2) out[1] = res.threshold;
        } else {
            throw ValidationError("unknown metric kind: " + k);
        }
    });
}

int rkhs_ks(const double* a, int na, const double* b, int nb, double* stat_out,
            double* threshold_out) {
    return guarded([&] {
        require(a && b && stat_out, "null argument");
        const auto res = metrics::ks_statistic(to_matrix(a, na, 1).col(0),
                                               to_matrix(b, nb, 1).col(0));
        *stat_out = res.statistic;
        if (threshold_out) *threshold_out = res.threshold;
    });
}

int rkhs_confusion(const double* pred, const double* truth, int n, int n_classes, int* out) {
    return guarded([&] {
        require(pred && truth && out, "null argument");
        IndexVec ip(n), it(n);
        for (int i = 0; i < n; ++i) {
            ip[i] = int(std::lround(pred[i]));
            it[i] = int(std::lround(truth[i]));
        }
        const Eigen::MatrixXi M = metrics::confusion(ip, it, n_classes);
        for (int i = 0; i < n_classes; ++i)
            for (int j = 0; j < n_classes; ++j) out[i * n_classes + j] = M(i, j);
    });
}

int rkhs_bachelier_reference(double b, double strike, double theta, double t1, double t2,
                             double* out) {
    return guarded([&] {
        require(out, "null argument");
        *out = bench::bachelier_reference(b, strike, theta, t1, t2);
    });
}

int rkhs_run_bachelier(const rkhs_kernel* k, int N, int D, double theta, double t1, double t2,
                       double strike, uint64_t seed, char** report_out) {
    return guarded([&] {
        require(k && report_out, "null argument");
        bench::BachelierScenario sc;
        sc.N = N;
        sc.D = D;
        sc.theta = theta;
        sc.t1 = t1;
        sc.t2 = t2;
        sc.strike = strike;
        sc.seed = seed;
        *report_out = dup_text(bench::run_bachelier(sc, k->spec).to_json());
    });
}

int rkhs_run_poisson(const rkhs_kernel* k, const double* mesh, int n, int d, const double* f,
                     int df, double* u_out, double* residual_out) {
    return guarded([&] {
        require(k && u_out, "null argument");
        KernelSpec spec = k->spec;
        const Matrix X = to_matrix(mesh, n, d);
        if (!spec.fitted()) spec.fit_maps(X);
        const auto res = bench::run_poisson(X, to_matrix(f, n, df), spec);
        from_matrix(res.u, u_out);
        if (residual_out) *residual_out = res.report.metric("relative_residual");
    });
}

int rkhs_run_heat(const rkhs_kernel* k, const double* mesh, int n, int d, const double* u0,
                  int df, double theta, double tau, int steps, double* u_out,
                  double* energy_out) {
    return guarded([&] {
        require(k && u_out, "null argument");
        KernelSpec spec = k->spec;
        const Matrix X = to_matrix(mesh, n, d);
        if (!spec.fitted()) spec.fit_maps(X);
        const auto res = bench::run_heat(X, to_matrix(u0, n, df), theta, tau, steps, spec);
        from_matrix(res.u_final, u_out);
        if (energy_out)
            for (int s = 0; s <= steps; ++s) energy_out[s] = res.energy[s];
    });
}

int rkhs_normal_sample(uint64_t seed, const char* stream, int n, int d, double* out) {
    return guarded([&] {
        require(stream && out, "null argument");
        Rng rng = Rng::substream(seed, stream);
        from_matrix(rng.normal_matrix(n, d), out);
    });
}

} // extern "C"
