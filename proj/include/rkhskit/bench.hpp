#pragma once

#include "rkhskit/kernels.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rkhs {
namespace bench {

struct BenchReport {
    std::string name;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::string> artifacts;

    void add_metric(const std::string& key, double value);
    double metric(const std::string& key) const;
    std::string to_json() const;
};

struct BachelierScenario {
    int N = 256;
    int D = 2;
    double theta = 0.2;    // basket volatility
    double t1 = 1.0;
    double t2 = 2.0;
    double strike = 0.0;
    std::uint64_t seed = 0;
};

/// Closed-form conditional call value under arithmetic Brownian motion.
double bachelier_reference(double b, double K, double theta, double t1, double t2);

/// Conditional-expectation benchmark: transition plans from the martingale
/// solver, Nadaraya-Watson weights, and a naive ridge regression, each scored
/// against the closed form on a fresh query sample.
BenchReport run_bachelier(const BachelierScenario& sc, const KernelSpec& spec);

struct PoissonResult {
    BenchReport report;
    Matrix u;
};

PoissonResult run_poisson(const PointSet& mesh, const Matrix& f_values, const KernelSpec& spec);

struct HeatResult {
    BenchReport report;
    Matrix u_final;
    Vector energy; // ||u^n||_2 per step, step 0 first
};

HeatResult run_heat(const PointSet& mesh, const Matrix& u0, double theta, double tau, int steps,
                    const KernelSpec& spec);

} // namespace bench
} // namespace rkhs
