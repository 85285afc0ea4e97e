#include "rkhskit/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace rkhs {
namespace metrics {

double rmse(const Matrix& pred, const Matrix& truth) {
    require(pred.rows() == truth.rows() && pred.cols() == truth.cols(),
            "rmse: shape mismatch");
    require(pred.size() > 0, "rmse: empty input");
    return std::sqrt((pred - truth).squaredNorm() / double(pred.size()));
}

double normalized_error(const Matrix& pred, const Matrix& truth) {
    require(pred.rows() == truth.rows() && pred.cols() == truth.cols(),
            "normalized_error: shape mismatch");
    const double denom = pred.norm() + truth.norm();
    if (denom == 0.0) return 0.0;
    return (pred - truth).norm() / denom;
}

double accuracy(const IndexVec& pred, const IndexVec& truth) {
    require(pred.size() == truth.size() && !pred.empty(), "accuracy: shape mismatch");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++hit;
    return double(hit) / double(pred.size());
}

Eigen::MatrixXi confusion(const IndexVec& pred, const IndexVec& truth, int n_classes) {
    require(pred.size() == truth.size(), "confusion: shape mismatch");
    Eigen::MatrixXi M = Eigen::MatrixXi::Zero(n_classes, n_classes);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        require(truth[i] >= 0 && truth[i] < n_classes && pred[i] >= 0 && pred[i] < n_classes,
                "confusion: label out of range");
        M(truth[i], pred[i]) += 1;
    }
    return M;
}

KsResult ks_statistic(const Vector& a, const Vector& b, double alpha) {
    require(a.size() > 0 && b.size() > 0, "ks_statistic: empty sample");
    std::vector<double> sa(a.data(), a.data() + a.size());
    std::vector<double> sb(b.data(), b.data() + b.size());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = double(sa.size()), nb = double(sb.size());
    double stat = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < sa.size() && ib < sb.size()) {
        const double x = std::min(sa[ia], sb[ib]);
        while (ia < sa.size() && sa[ia] <= x) ++ia;
        while (ib < sb.size() && sb[ib] <= x) ++ib;
        stat = std::max(stat, std::abs(double(ia) / na - double(ib) / nb));
    }
    const double c_alpha = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return KsResult{stat, c_alpha * std::sqrt((na + nb) / (na * nb))};
}

MomentStats moments(const Vector& sample) {
    require(sample.size() > 1, "moments: need at least two values");
    MomentStats s;
    const double n = double(sample.size());
    s.mean = sample.mean();
    const Eigen::ArrayXd c = sample.array() - s.mean;
    s.variance = c.square().sum() / (n - 1.0);
    const double sd = std::sqrt(c.square().sum() / n);
    if (sd > 0.0) {
        s.skewness = (c / sd).cube().sum() / n;
        s.kurtosis = (c / sd).pow(4).sum() / n - 3.0;
    }
    return s;
}

} // namespace metrics
} // namespace rkhs
