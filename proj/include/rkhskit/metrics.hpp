#pragma once

#include "rkhskit/types.hpp"

namespace rkhs {
namespace metrics {

double rmse(const Matrix& pred, const Matrix& truth);

/// Scale-free error ||p - t|| / (||p|| + ||t||).
double normalized_error(const Matrix& pred, const Matrix& truth);

/// Fraction of matching integer labels.
double accuracy(const IndexVec& pred, const IndexVec& truth);

/// M(i, j) counts truth == i and prediction == j.
Eigen::MatrixXi confusion(const IndexVec& pred, const IndexVec& truth, int n_classes);

struct KsResult {
    double statistic = 0.0;
    double threshold = 0.0; // c_alpha * sqrt((n + m)/(n m))
};

/// Two-sample Kolmogorov-Smirnov statistic of 1-D samples.
KsResult ks_statistic(const Vector& a, const Vector& b, double alpha = 0.05);

struct MomentStats {
    double mean = 0.0, variance = 0.0, skewness = 0.0, kurtosis = 0.0; // excess
};

MomentStats moments(const Vector& sample);

} // namespace metrics
} // namespace rkhs
