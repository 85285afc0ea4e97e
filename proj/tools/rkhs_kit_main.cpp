// rkhs-kit command line: thin argument plumbing over the rkhs_kit C API.

#include <rkhs_kit.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Table {
    std::vector<double> data; // row major
    int rows = 0, cols = 0;
    double* ptr() { return data.data(); }
    const double* ptr() const { return data.data(); }
    double at(int r, int c) const { return data[std::size_t(r) * cols + c]; }
};

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) {
    throw CliError{code, message};
}

void check(int rc) {
    if (rc != RKHS_OK) fail(rc, rkhs_last_error());
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Table read_csv(const std::string& path, bool header) {
    std::ifstream in(path);
    if (!in) fail(RKHS_ERR_INVALID, "cannot open CSV file: " + path);
    Table t;
    std::string line;
    bool skip = header;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (skip) {
            skip = false;
            continue;
        }
        std::stringstream ss(line);
        std::string tok;
        int cols = 0;
        while (std::getline(ss, tok, ',')) {
            try {
                t.data.push_back(std::stod(tok));
            } catch (const std::exception&) {
                fail(RKHS_ERR_INVALID, "CSV parse error in " + path + ": \"" + tok + "\"");
            }
            ++cols;
        }
        if (cols == 0) continue;
        if (t.cols == 0) t.cols = cols;
        if (cols != t.cols) fail(RKHS_ERR_INVALID, "CSV file has ragged rows: " + path);
        ++t.rows;
    }
    if (t.rows == 0) fail(RKHS_ERR_INVALID, "CSV file has no data rows: " + path);
    return t;
}

void write_csv(const std::string& path, const double* data, int rows, int cols,
               const std::vector<std::string>& header = {}) {
    std::ofstream out(path);
    if (!out) fail(RKHS_ERR_INVALID, "cannot write CSV file: " + path);
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j) out << ',';
            out << header[j];
        }
        out << '\n';
    }
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (j) out << ',';
            out << format_double(data[std::size_t(i) * cols + j]);
        }
        out << '\n';
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(RKHS_ERR_INVALID, "cannot open file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) fail(RKHS_ERR_INVALID, "cannot write file: " + path);
    out << text;
}

/// --kernel accepts an inline JSON object, an inline shorthand, or a path to
/// a JSON spec file.
struct KernelHandle {
    rkhs_kernel* k = nullptr;
    ~KernelHandle() { rkhs_kernel_free(k); }
};

void make_kernel(const std::string& arg, KernelHandle& out) {
    std::string spec = arg;
    if (!arg.empty() && arg[0] != '{' && arg.find('|') == std::string::npos &&
        arg.find(':') == std::string::npos) {
        // maybe a file path; fall back to treating it as a bare kernel name
        std::ifstream probe(arg);
        if (probe) spec = read_text(arg);
    }
    check(rkhs_kernel_create(spec.empty() ? nullptr : spec.c_str(), &out.k));
}

struct Moments {
    double mean, variance, skewness, kurtosis;
};

Moments moments_of(const std::vector<double>& v) {
    const double n = double(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double sd = std::sqrt(m2);
    Moments m{mean, n > 1 ? m2 * n / (n - 1.0) : 0.0, 0.0, 0.0};
    if (sd > 0.0) {
        m.skewness = m3 / (sd * sd * sd);
        m.kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return m;
}

void emit_report(const std::string& format, const std::vector<std::pair<std::string, double>>& kv) {
    if (format == "json") {
        nlohmann::json j;
        for (const auto& [k, v] : kv) j[k] = v;
        std::cout << j.dump(2) << "\n";
    } else {
        for (const auto& [k, v] : kv) std::cout << k << "," << format_double(v) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rkhs-kit: kernel regression, transport, clustering, and sampling toolkit"};
    app.require_subcommand(1);

    std::string kernel_arg, in_path, in2_path, out_path, format = "csv";
    std::uint64_t seed = 0;
    bool header = false;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--kernel", kernel_arg, "kernel spec (JSON file, inline JSON, or shorthand)");
        cmd->add_option("--in", in_path, "input CSV path");
        cmd->add_option("--out", out_path, "output path");
        cmd->add_option("--seed", seed, "random seed (u64)");
        cmd->add_option("--format", format, "report format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_flag("--header", header, "input CSV files carry a header row");
    };

    // fit
    auto* fit = app.add_subcommand("fit", "fit a kernel ridge regressor");
    std::string labels_path, regularizer = "identity";
    double epsilon = 1e-8;
    add_common(fit);
    fit->add_option("--labels", labels_path, "label CSV path")->required();
    fit->add_option("--epsilon", epsilon, "ridge weight");
    fit->add_option("--regularizer", regularizer, "identity or laplacian")
        ->check(CLI::IsMember({"identity", "laplacian"}));

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "evaluate a fitted regressor");
    std::string model_path;
    add_common(predict_cmd);
    predict_cmd->add_option("--model", model_path, "regressor JSON path")->required();

    // cluster
    auto* cluster_cmd = app.add_subcommand("cluster", "discrepancy-driven centroid selection");
    std::string method = "greedy", metric = "euclidean", assign_out;
    int k_clusters = 2;
    add_common(cluster_cmd);
    cluster_cmd->add_option("--method", method, "greedy|refine|sharp|balanced|kmeans-inertia")
        ->check(CLI::IsMember({"greedy", "refine", "sharp", "balanced", "kmeans-inertia"}));
    cluster_cmd->add_option("--k", k_clusters, "number of centroids")->required();
    cluster_cmd->add_option("--metric", metric, "euclidean or kernel-discrepancy")
        ->check(CLI::IsMember({"euclidean", "kernel-discrepancy"}));
    cluster_cmd->add_option("--assign-out", assign_out, "assignment CSV path");

    // transport
    auto* transport_cmd = app.add_subcommand("transport", "discrete optimal transport solvers");
    std::string ot_method = "lsap";
    double ot_epsilon = 0.1, tol = 1e-9;
    int max_iter = 10000;
    bool project = false;
    add_common(transport_cmd);
    transport_cmd->add_option("--method", ot_method, "lsap|sinkhorn|mot|gm")
        ->check(CLI::IsMember({"lsap", "sinkhorn", "mot", "gm"}));
    transport_cmd->add_option("--in2", in2_path, "second operand CSV (mot, gm)");
    transport_cmd->add_option("--epsilon", ot_epsilon, "entropic regularization");
    transport_cmd->add_option("--tol", tol, "convergence tolerance");
    transport_cmd->add_option("--max-iter", max_iter, "iteration cap");
    transport_cmd->add_flag("--project", project, "project the martingale plan onto nonnegative rows");

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "transport-based generative sampling");
    std::string target_path, conditional_on;
    int latent_dim = 1, n_samples = 100;
    add_common(sample_cmd);
    sample_cmd->add_option("--target", target_path, "target data CSV")->required();
    sample_cmd->add_option("--latent-dim", latent_dim, "latent dimension");
    sample_cmd->add_option("--n", n_samples, "number of samples to draw");
    sample_cmd->add_option("--conditional-on", conditional_on, "col=value conditioning");

    // bachelier
    auto* bachelier_cmd = app.add_subcommand("bachelier", "conditional-expectation benchmark");
    int bn = 256, bd = 2;
    double btheta = 0.2, bt1 = 1.0, bt2 = 2.0, bstrike = 0.0;
    add_common(bachelier_cmd);
    bachelier_cmd->add_option("--n", bn, "sample count");
    bachelier_cmd->add_option("--dim", bd, "Brownian dimension");
    bachelier_cmd->add_option("--theta", btheta, "basket volatility");
    bachelier_cmd->add_option("--t1", bt1, "observation time");
    bachelier_cmd->add_option("--t2", bt2, "maturity");
    bachelier_cmd->add_option("--strike", bstrike, "strike");

    // poisson
    auto* poisson_cmd = app.add_subcommand("poisson", "mesh-free Poisson solve");
    add_common(poisson_cmd);
    poisson_cmd->add_option("--labels", labels_path, "right-hand side CSV")->required();

    // heat
    auto* heat_cmd = app.add_subcommand("heat", "theta-scheme heat evolution");
    double h_theta = 1.0, h_tau = 0.05;
    int h_steps = 100;
    std::string energy_out;
    add_common(heat_cmd);
    heat_cmd->add_option("--labels", labels_path, "initial value CSV")->required();
    heat_cmd->add_option("--theta", h_theta, "scheme parameter in [0,1]");
    heat_cmd->add_option("--tau", h_tau, "time step");
    heat_cmd->add_option("--steps", h_steps, "number of steps");
    heat_cmd->add_option("--energy-out", energy_out, "energy trajectory CSV path");

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "prediction quality metrics");
    std::string metric_kind = "rmse";
    int n_classes = 0;
    add_common(metrics_cmd);
    metrics_cmd->add_option("--labels", labels_path, "truth CSV")->required();
    metrics_cmd->add_option("--metric", metric_kind, "rmse|normalized|accuracy|confusion|ks")
        ->check(CLI::IsMember({"rmse", "normalized", "accuracy", "confusion", "ks"}));
    metrics_cmd->add_option("--classes", n_classes, "class count for confusion");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : RKHS_ERR_INVALID;
    }

    try {
        if (*fit) {
            const Table X = read_csv(in_path, header);
            const Table fX = read_csv(labels_path, header);
            if (fX.rows != X.rows) fail(RKHS_ERR_INVALID, "label rows do not match input rows");
            KernelHandle kern;
            make_kernel(kernel_arg, kern);
            check(rkhs_kernel_fit_maps(kern.k, X.ptr(), X.rows, X.cols));
            rkhs_model* model = nullptr;
            check(rkhs_fit(kern.k, X.ptr(), X.rows, X.cols, fX.ptr(), fX.cols, epsilon,
                           regularizer == "laplacian" ? 1 : 0, &model));
            char* text = nullptr;
            check(rkhs_model_to_json(model, &text));
            write_text(out_path.empty() ? "model.json" : out_path, text);
            rkhs_free_text(text);
            rkhs_model_free(model);
            emit_report(format, {{"rows", double(X.rows)}, {"dims", double(X.cols)},
                                 {"outputs", double(fX.cols)}, {"epsilon", epsilon}});
        } else if (*predict_cmd) {
            const Table Z = read_csv(in_path, header);
            rkhs_model* model = nullptr;
            check(rkhs_model_from_json(read_text(model_path).c_str(), &model));
            int d_in = 0, d_out = 0, n_basis = 0;
            check(rkhs_model_dims(model, &d_in, &d_out, &n_basis));
            if (Z.cols != d_in) {
                rkhs_model_free(model);
                fail(RKHS_ERR_INVALID, "query dimension does not match the model");
            }
            std::vector<double> out(std::size_t(Z.rows) * d_out);
            const int rc = rkhs_predict(model, Z.ptr(), Z.rows, Z.cols, out.data());
            rkhs_model_free(model);
            check(rc);
            write_csv(out_path.empty() ? "pred.csv" : out_path, out.data(), Z.rows, d_out);
        } else if (*cluster_cmd) {
            const Table X = read_csv(in_path, header);
            if (k_clusters < 1 || k_clusters > X.rows)
                fail(RKHS_ERR_INVALID, "--k must be between 1 and the row count");
            KernelHandle kern;
            make_kernel(kernel_arg, kern);
            check(rkhs_kernel_fit_maps(kern.k, X.ptr(), X.rows, X.cols));
            std::vector<double> centroids(std::size_t(k_clusters) * X.cols);
            std::vector<int> assign(X.rows);
            double mmd_val = 0.0, inertia_val = 0.0;
            check(rkhs_cluster(kern.k, X.ptr(), X.rows, X.cols, k_clusters, method.c_str(),
                               metric == "kernel-discrepancy" ? 1 : 0, seed, centroids.data(),
                               assign.data(), &mmd_val, &inertia_val));
            write_csv(out_path.empty() ? "centroids.csv" : out_path, centroids.data(),
                      k_clusters, X.cols);
            std::vector<double> assign_d(assign.begin(), assign.end());
            write_csv(assign_out.empty() ? "assign.csv" : assign_out, assign_d.data(), X.rows, 1);
            emit_report(format, {{"k", double(k_clusters)}, {"mmd", mmd_val},
                                 {"inertia", inertia_val}});
        } else if (*transport_cmd) {
            if (ot_method == "lsap") {
                const Table C = read_csv(in_path, header);
                std::vector<int> sigma(C.rows);
                double cost = 0.0;
                check(rkhs_lsap(C.ptr(), C.rows, C.cols, sigma.data(), &cost));
                std::ofstream out(out_path.empty() ? "permutation.csv" : out_path);
                for (int i = 0; i < C.rows; ++i) out << (i ? "," : "") << sigma[i];
                out << "\n";
                emit_report(format, {{"cost", cost}});
            } else if (ot_method == "sinkhorn") {
                const Table C = read_csv(in_path, header);
                if (C.rows != C.cols) fail(RKHS_ERR_INVALID, "sinkhorn needs a square cost matrix");
                std::vector<double> plan(std::size_t(C.rows) * C.rows);
                double residual = 0.0;
                int iters = 0;
                check(rkhs_sinkhorn(C.ptr(), C.rows, ot_epsilon, tol, max_iter, plan.data(),
                                    &residual, &iters));
                write_csv(out_path.empty() ? "plan.csv" : out_path, plan.data(), C.rows, C.rows);
                emit_report(format, {{"iterations", double(iters)}, {"residual", residual}});
            } else if (ot_method == "mot") {
                const Table X = read_csv(in_path, header);
                const Table Y = read_csv(in2_path, header);
                if (X.rows != Y.rows || X.cols != Y.cols)
                    fail(RKHS_ERR_INVALID, "mot needs equally shaped point sets");
                KernelHandle kern;
                make_kernel(kernel_arg, kern);
                std::vector<double> plan(std::size_t(X.rows) * X.rows);
                double residual = 0.0, min_entry = 0.0;
                check(rkhs_martingale_ot(kern.k, X.ptr(), Y.ptr(), X.rows, X.cols, tol,
                                         max_iter, project ? 1 : 0, plan.data(), &residual,
                                         &min_entry));
                write_csv(out_path.empty() ? "plan.csv" : out_path, plan.data(), X.rows, X.rows);
                emit_report(format, {{"barycenter_residual", residual},
                                     {"min_entry", min_entry}});
            } else { // gm
                const Table X = read_csv(in_path, header);
                const Table Y = read_csv(in2_path, header);
                if (X.rows != Y.rows) fail(RKHS_ERR_INVALID, "gm needs equally long point sets");
                KernelHandle kx, ky;
                make_kernel(kernel_arg, kx);
                make_kernel(kernel_arg, ky);
                check(rkhs_kernel_fit_maps(kx.k, X.ptr(), X.rows, X.cols));
                check(rkhs_kernel_fit_maps(ky.k, Y.ptr(), Y.rows, Y.cols));
                std::vector<double> DX(std::size_t(X.rows) * X.rows);
                std::vector<double> DY(std::size_t(X.rows) * X.rows);
                check(rkhs_distance_matrix(kx.k, X.ptr(), X.rows, X.ptr(), X.rows, X.cols,
                                           DX.data()));
                check(rkhs_distance_matrix(ky.k, Y.ptr(), Y.rows, Y.ptr(), Y.rows, Y.cols,
                                           DY.data()));
                std::vector<int> sigma(X.rows);
                double objective = 0.0;
                check(rkhs_gromov_monge(DX.data(), DY.data(), X.rows, sigma.data(), &objective));
                std::ofstream out(out_path.empty() ? "permutation.csv" : out_path);
                for (int i = 0; i < X.rows; ++i) out << (i ? "," : "") << sigma[i];
                out << "\n";
                emit_report(format, {{"objective", objective}});
            }
        } else if (*sample_cmd) {
            const Table T = read_csv(target_path, header);
            KernelHandle kern;
            make_kernel(kernel_arg, kern);
            std::vector<double> samples;
            int out_cols = 0;
            if (conditional_on.empty()) {
                std::vector<double> latent(std::size_t(T.rows) * latent_dim);
                check(rkhs_normal_sample(seed, "latent", T.rows, latent_dim, latent.data()));
                rkhs_generator* gen = nullptr;
                check(rkhs_sample_fit(kern.k, latent.data(), T.rows, latent_dim, T.ptr(),
                                      T.cols, &gen));
                std::vector<double> fresh(std::size_t(n_samples) * latent_dim);
                check(rkhs_normal_sample(seed, "draws", n_samples, latent_dim, fresh.data()));
                samples.resize(std::size_t(n_samples) * T.cols);
                const int rc = rkhs_generate(gen, fresh.data(), n_samples, latent_dim,
                                             samples.data());
                rkhs_generator_free(gen);
                check(rc);
                out_cols = T.cols;
            } else {
                const auto eq = conditional_on.find('=');
                if (eq == std::string::npos)
                    fail(RKHS_ERR_INVALID, "--conditional-on expects col=value");
                const int col = std::stoi(conditional_on.substr(0, eq));
                const double value = std::stod(conditional_on.substr(eq + 1));
                if (col < 0 || col >= T.cols) fail(RKHS_ERR_INVALID, "conditioning column out of range");
                // hot-encode the distinct values of the conditioning column
                std::vector<double> levels;
                for (int i = 0; i < T.rows; ++i) {
                    const double v = T.at(i, col);
                    if (std::find(levels.begin(), levels.end(), v) == levels.end())
                        levels.push_back(v);
                }
                std::sort(levels.begin(), levels.end());
                const auto it = std::find(levels.begin(), levels.end(), value);
                if (it == levels.end())
                    fail(RKHS_ERR_INVALID, "conditioning value not present in the column");
                const int d_cond = int(levels.size());
                const int d_out = T.cols - 1;
                if (d_out < 1) fail(RKHS_ERR_INVALID, "no output columns besides the conditioner");
                std::vector<double> X_cond(std::size_t(T.rows) * d_cond, 0.0);
                std::vector<double> Y(std::size_t(T.rows) * d_out);
                for (int i = 0; i < T.rows; ++i) {
                    const double v = T.at(i, col);
                    const int lvl = int(std::find(levels.begin(), levels.end(), v) - levels.begin());
                    X_cond[std::size_t(i) * d_cond + lvl] = 1.0;
                    int w = 0;
                    for (int j = 0; j < T.cols; ++j)
                        if (j != col) Y[std::size_t(i) * d_out + w++] = T.at(i, j);
                }
                std::vector<double> query(d_cond, 0.0);
                query[std::size_t(it - levels.begin())] = 1.0;
                samples.resize(std::size_t(n_samples) * d_out);
                check(rkhs_conditional_sample(kern.k, X_cond.data(), T.rows, d_cond, Y.data(),
                                              d_out, query.data(), n_samples, seed, 1,
                                              latent_dim, samples.data()));
                out_cols = d_out;
            }
            const std::string sample_path = out_path.empty() ? "samples.csv" : out_path;
            write_csv(sample_path, samples.data(), n_samples, out_cols);
            // stats sidecar: moments per column plus the KS gate against the target
            std::vector<std::string> hdr = {"column", "mean",     "variance", "skewness",
                                            "kurtosis", "ks",     "ks_threshold"};
            std::vector<double> stats;
            for (int c = 0; c < out_cols; ++c) {
                std::vector<double> col(n_samples);
                for (int i = 0; i < n_samples; ++i) col[i] = samples[std::size_t(i) * out_cols + c];
                const Moments m = moments_of(col);
                double ks_stat = 0.0, ks_thresh = 0.0;
                if (conditional_on.empty()) {
                    std::vector<double> ref(T.rows);
                    for (int i = 0; i < T.rows; ++i) ref[i] = T.at(i, c);
                    check(rkhs_ks(col.data(), n_samples, ref.data(), T.rows, &ks_stat,
                                  &ks_thresh));
                }
                stats.insert(stats.end(), {double(c), m.mean, m.variance, m.skewness,
                                           m.kurtosis, ks_stat, ks_thresh});
            }
            write_csv(sample_path + ".stats.csv", stats.data(), out_cols, 7, hdr);
            emit_report(format, {{"samples", double(n_samples)}, {"columns", double(out_cols)}});
        } else if (*bachelier_cmd) {
            KernelHandle kern;
            make_kernel(kernel_arg, kern);
            char* report = nullptr;
            check(rkhs_run_bachelier(kern.k, bn, bd, btheta, bt1, bt2, bstrike, seed, &report));
            if (!out_path.empty()) write_text(out_path, report);
            std::cout << report << "\n";
            rkhs_free_text(report);
        } else if (*poisson_cmd) {
            const Table mesh = read_csv(in_path, header);
            const Table f = read_csv(labels_path, header);
            if (f.rows != mesh.rows) fail(RKHS_ERR_INVALID, "rhs rows do not match the mesh");
            KernelHandle kern;
            make_kernel(kernel_arg, kern);
            std::vector<double> u(std::size_t(mesh.rows) * f.cols);
            double residual = 0.0;
            check(rkhs_run_poisson(kern.k, mesh.ptr(), mesh.rows, mesh.cols, f.ptr(), f.cols,
                                   u.data(), &residual));
            write_csv(out_path.empty() ? "u.csv" : out_path, u.data(), mesh.rows, f.cols);
            emit_report(format, {{"relative_residual", residual}});
        } else if (*heat_cmd) {
            const Table mesh = read_csv(in_path, header);
            const Table u0 = read_csv(labels_path, header);
            if (u0.rows != mesh.rows) fail(RKHS_ERR_INVALID, "u0 rows do not match the mesh");
            KernelHandle kern;
            make_kernel(kernel_arg, kern);
            std::vector<double> u(std::size_t(mesh.rows) * u0.cols);
            std::vector<double> energy(h_steps + 1);
            check(rkhs_run_heat(kern.k, mesh.ptr(), mesh.rows, mesh.cols, u0.ptr(), u0.cols,
                                h_theta, h_tau, h_steps, u.data(), energy.data()));
            write_csv(out_path.empty() ? "u.csv" : out_path, u.data(), mesh.rows, u0.cols);
            if (!energy_out.empty())
                write_csv(energy_out, energy.data(), h_steps + 1, 1);
            emit_report(format, {{"energy_initial", energy.front()},
                                 {"energy_final", energy.back()}});
        } else if (*metrics_cmd) {
            const Table pred = read_csv(in_path, header);
            const Table truth = read_csv(labels_path, header);
            if (pred.rows != truth.rows || pred.cols != truth.cols)
                fail(RKHS_ERR_INVALID, "prediction and truth shapes differ");
            if (metric_kind == "confusion") {
                if (n_classes < 2) fail(RKHS_ERR_INVALID, "--classes must be at least 2");
                if (pred.cols != 1) fail(RKHS_ERR_INVALID, "confusion expects single-column labels");
                std::vector<int> M(std::size_t(n_classes) * n_classes);
                check(rkhs_confusion(pred.ptr(), truth.ptr(), pred.rows, n_classes, M.data()));
                std::vector<double> Md(M.begin(), M.end());
                if (!out_path.empty())
                    write_csv(out_path, Md.data(), n_classes, n_classes);
                else
                    for (int i = 0; i < n_classes; ++i) {
                        for (int j = 0; j < n_classes; ++j)
                            std::cout << (j ? "," : "") << M[std::size_t(i) * n_classes + j];
                        std::cout << "\n";
                    }
            } else {
                double out[2] = {0.0, 0.0};
                check(rkhs_metric(metric_kind.c_str(), pred.ptr(), truth.ptr(), pred.rows,
                                  pred.cols, out, 2));
                std::vector<std::pair<std::string, double>> kv = {{metric_kind, out[0]}};
                if (metric_kind == "ks") kv.emplace_back("threshold", out[1]);
                emit_report(format, kv);
            }
        }
    } catch (const CliError& e) {
        nlohmann::json j;
        j["error"] = e.message;
        j["code"] = e.code;
        std::cerr << j.dump() << "\n";
        return e.code;
    } catch (const std::exception& e) {
        nlohmann::json j;
        j["error"] = e.what();
        j["code"] = RKHS_ERR_NUMERICAL;
        std::cerr << j.dump() << "\n";
        return RKHS_ERR_NUMERICAL;
    }
    return 0;
}
