#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace rkhs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexVec = std::vector<int>;

// Rows are samples, columns are features.
using PointSet = Matrix;

/// Bad input: shapes, ranges, unfitted state. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical breakdown: singular systems, non-convergence. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg, double residual = 0.0)
        : std::runtime_error(msg), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

inline void require_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite()) throw ValidationError(what + " contains non-finite entries");
}

} // namespace rkhs
