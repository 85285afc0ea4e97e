#include "rkhskit/kernels.hpp"
#include "rkhskit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace rkhs {

namespace {

constexpr double kErfClamp = 1.0 - 1e-9;
constexpr int kThetaTerms = 10; // 21-term truncated theta sum, n in [-10, 10]

// left-derivative convention at kinks: sign(0) := -1
double lsign(double t) { return t > 0.0 ? 1.0 : -1.0; }

double sinc(double t) {
    const double a = M_PI * t;
    if (std::abs(a) < 1e-4) return 1.0 - a * a / 6.0 + a * a * a * a / 120.0;
    return std::sin(a) / a;
}

double sinc_prime(double t) {
    const double a = M_PI * t;
    if (std::abs(a) < 1e-4) return M_PI * (-a / 3.0 + a * a * a / 30.0);
    return M_PI * (std::cos(a) - sinc(t)) / a;
}

double theta3(double t) {
    double s = 0.0;
    for (int n = -kThetaTerms; n <= kThetaTerms; ++n) {
        const double u = t + n;
        s += std::exp(-M_PI * u * u);
    }
    return s;
}

double theta3_prime(double t) {
    double s = 0.0;
    for (int n = -kThetaTerms; n <= kThetaTerms; ++n) {
        const double u = t + n;
        s += -2.0 * M_PI * u * std::exp(-M_PI * u * u);
    }
    return s;
}

} // namespace

double erf_inv(double x) {
    require(std::abs(x) < 1.0, "erf_inv: argument must be in (-1, 1)");
    // Acklam's inverse normal CDF, then erf_inv(x) = Phi^-1((x+1)/2)/sqrt(2)
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p = 0.5 * (x + 1.0);
    const double plow = 0.02425;
    double z;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    double y = z / std::sqrt(2.0);
    // two Halley steps on erf(y) - x
    for (int it = 0; it < 2; ++it) {
        const double e = std::erf(y) - x;
        const double dp = 2.0 / std::sqrt(M_PI) * std::exp(-y * y);
        y -= e / (dp + y * e);
    }
    return y;
}

// ---------------------------------------------------------------------------
// names

namespace {
const std::map<std::string, KernelBase> kBaseNames = {
    {"gaussian", KernelBase::Gaussian},
    {"matern", KernelBase::Matern},
    {"matern-tensorial", KernelBase::MaternTensorial},
    {"multiquadric", KernelBase::Multiquadric},
    {"sinc", KernelBase::Sinc},
    {"sinc-square", KernelBase::SincSquare},
    {"tensor-product", KernelBase::TensorProduct},
    {"relu", KernelBase::TensorProduct},
    {"truncated", KernelBase::Truncated},
    {"dot-product", KernelBase::DotProduct},
    {"polynomial", KernelBase::Polynomial},
    {"polynomial-convolutional", KernelBase::PolynomialConvolutional},
    {"periodic-gaussian", KernelBase::PeriodicGaussian},
};
const std::map<std::string, MapKind> kMapNames = {
    {"std-dev", MapKind::StdDev},       {"erf", MapKind::Erf},
    {"erf-inv", MapKind::ErfInv},       {"mean-distance", MapKind::MeanDistance},
    {"min-distance", MapKind::MinDistance}, {"unit-cube", MapKind::UnitCube},
    {"bandwidth", MapKind::Bandwidth},
};
} // namespace

KernelBase kernel_base_from_name(const std::string& name) {
    auto it = kBaseNames.find(name);
    require(it != kBaseNames.end(), "unknown kernel base: " + name);
    return it->second;
}

std::string kernel_base_name(KernelBase base) {
    for (const auto& [n, b] : kBaseNames)
        if (b == base && n != "relu") return n;
    return "matern";
}

MapKind map_kind_from_name(const std::string& name) {
    auto it = kMapNames.find(name);
    require(it != kMapNames.end(), "unknown map: " + name);
    return it->second;
}

std::string map_kind_name(MapKind kind) {
    for (const auto& [n, k] : kMapNames)
        if (k == kind) return n;
    return "bandwidth";
}

// ---------------------------------------------------------------------------
// maps

bool MapSpec::stateless() const {
    return kind == MapKind::Erf || kind == MapKind::ErfInv || kind == MapKind::Bandwidth;
}

void MapSpec::fit(const PointSet& X) {
    require(X.rows() >= 1 && X.cols() >= 1, "map fit: empty point set");
    require_finite(X, "map fit input");
    const auto n = X.rows();
    switch (kind) {
    case MapKind::StdDev: {
        col_a.resize(X.cols());
        for (Eigen::Index d = 0; d < X.cols(); ++d) {
            const double mu = X.col(d).mean();
            const double var = (X.col(d).array() - mu).square().mean();
            const double sigma = std::sqrt(var);
            if (!(sigma > 0.0))
                throw NumericalError("std-dev map: degenerate scale in column " + std::to_string(d));
            col_a[d] = sigma;
        }
        break;
    }
    case MapKind::MeanDistance: {
        // sum_{i,k} |x_i - x_k|^2 = 2N sum|x_i|^2 - 2|sum x_i|^2
        const double sq = X.rowwise().squaredNorm().sum();
        const double alpha =
            (2.0 * n * sq - 2.0 * X.colwise().sum().squaredNorm()) / (double(n) * double(n));
        if (!(alpha > 0.0)) throw NumericalError("mean-distance map: degenerate scale");
        scale = 1.0 / std::sqrt(alpha);
        break;
    }
    case MapKind::MinDistance: {
        require(n >= 2, "min-distance map needs at least two rows");
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index k = 0; k < n; ++k) {
                if (k == i) continue;
                best = std::min(best, (X.row(i) - X.row(k)).squaredNorm());
            }
            acc += best;
        }
        const double alpha = acc / double(n);
        if (!(alpha > 0.0))
            throw NumericalError("min-distance map: all rows identical, degenerate scale");
        scale = 1.0 / std::sqrt(alpha);
        break;
    }
    case MapKind::UnitCube: {
        col_a = X.colwise().minCoeff();
        Vector mx = X.colwise().maxCoeff();
        col_b = mx - col_a;
        for (Eigen::Index d = 0; d < col_b.size(); ++d)
            if (!(col_b[d] > 0.0))
                throw NumericalError("unit-cube map: constant column " + std::to_string(d));
        offset = 0.5 / double(n);
        break;
    }
    case MapKind::Erf:
    case MapKind::ErfInv:
    case MapKind::Bandwidth:
        break;
    }
    fitted = true;
}

Matrix MapSpec::apply(const Matrix& X) const {
    require(fitted || stateless(), "map applied before fitting: " + map_kind_name(kind));
    switch (kind) {
    case MapKind::StdDev:
        return X.array().rowwise() / col_a.transpose().array();
    case MapKind::Erf:
        return X.array().unaryExpr([](double t) { return std::erf(t); });
    case MapKind::ErfInv:
        return X.array().unaryExpr([](double t) {
            return erf_inv(std::clamp(t, -kErfClamp, kErfClamp));
        });
    case MapKind::MeanDistance:
    case MapKind::MinDistance:
        return X * scale;
    case MapKind::UnitCube: {
        // normalize, shrink by (N-1)/N and shift half a grid cell: the fitted
        // data lands exactly on [0.5/N, 1-0.5/N], strictly inside the cube
        Matrix out = X;
        out.array().rowwise() -= col_a.transpose().array();
        out.array().rowwise() /= col_b.transpose().array();
        out.array() = out.array() * (1.0 - 2.0 * offset) + offset;
        return out;
    }
    case MapKind::Bandwidth:
        return X * scale;
    }
    return X;
}

Vector MapSpec::derivative(const Vector& x) const {
    const auto d = x.size();
    switch (kind) {
    case MapKind::StdDev:
        return col_a.cwiseInverse();
    case MapKind::Erf:
        return x.array().unaryExpr([](double t) {
            return 2.0 / std::sqrt(M_PI) * std::exp(-t * t);
        });
    case MapKind::ErfInv:
        return x.array().unaryExpr([](double t) {
            if (std::abs(t) >= kErfClamp) return 0.0; // clamped region is flat
            const double u = erf_inv(t);
            return std::sqrt(M_PI) / 2.0 * std::exp(u * u);
        });
    case MapKind::MeanDistance:
    case MapKind::MinDistance:
    case MapKind::Bandwidth:
        return Vector::Constant(d, scale);
    case MapKind::UnitCube:
        return (1.0 - 2.0 * offset) * col_b.cwiseInverse();
    }
    return Vector::Ones(d);
}

Vector MapSpec::second_derivative(const Vector& x) const {
    switch (kind) {
    case MapKind::Erf:
        return x.array().unaryExpr([](double t) {
            return -4.0 * t / std::sqrt(M_PI) * std::exp(-t * t);
        });
    case MapKind::ErfInv:
        return x.array().unaryExpr([](double t) {
            if (std::abs(t) >= kErfClamp) return 0.0;
            const double u = erf_inv(t);
            return M_PI / 2.0 * u * std::exp(2.0 * u * u);
        });
    default:
        return Vector::Zero(x.size());
    }
}

// ---------------------------------------------------------------------------
// spec

bool KernelSpec::fitted() const {
    for (const auto& m : maps)
        if (!m.fitted && !m.stateless()) return false;
    return true;
}

void KernelSpec::validate() const {
    if (base == KernelBase::Multiquadric)
        require(multiquadric_c() > 0.0, "multiquadric: c must be positive");
    if (base == KernelBase::Polynomial || base == KernelBase::PolynomialConvolutional ||
        base == KernelBase::DotProduct)
        require(poly_degree() >= 1, "polynomial degree must be a positive integer");
}

double KernelSpec::multiquadric_c() const {
    return params.empty() ? 1.0 : params[0];
}

int KernelSpec::poly_degree() const {
    if (base == KernelBase::DotProduct) return params.empty() ? 1 : int(params[0]);
    return params.empty() ? 2 : int(params[0]);
}

void KernelSpec::fit_maps(const PointSet& X) {
    require(X.rows() >= 1, "fit_maps: empty point set");
    std::size_t pidx =
        (base == KernelBase::Multiquadric || base == KernelBase::Polynomial ||
         base == KernelBase::PolynomialConvolutional || base == KernelBase::DotProduct)
            ? 1
            : 0;
    Matrix cur = X;
    for (auto& m : maps) {
        if (m.kind == MapKind::Bandwidth) {
            m.scale = pidx < params.size() ? params[pidx] : 1.0;
            require(m.scale > 0.0, "bandwidth map: h must be positive");
            ++pidx;
        }
        m.fit(cur);
        cur = m.apply(cur);
    }
}

Matrix KernelSpec::apply_maps(const Matrix& X) const {
    Matrix cur = X;
    for (const auto& m : maps) cur = m.apply(cur);
    return cur;
}

KernelSpec default_spec() {
    KernelSpec s;
    s.base = KernelBase::Matern;
    s.maps = {MapSpec(MapKind::UnitCube), MapSpec(MapKind::ErfInv), MapSpec(MapKind::MeanDistance)};
    return s;
}

KernelSpec spec_from_shorthand(const std::string& text) {
    KernelSpec s;
    std::string head = text, maps;
    if (auto bar = text.find('|'); bar != std::string::npos) {
        head = text.substr(0, bar);
        maps = text.substr(bar + 1);
    }
    std::string name = head, params;
    if (auto colon = head.find(':'); colon != std::string::npos) {
        name = head.substr(0, colon);
        params = head.substr(colon + 1);
    }
    s.base = kernel_base_from_name(name);
    std::stringstream ps(params);
    for (std::string tok; std::getline(ps, tok, ',');)
        if (!tok.empty()) s.params.push_back(std::stod(tok));
    std::stringstream ms(maps);
    for (std::string tok; std::getline(ms, tok, ',');)
        if (!tok.empty()) s.maps.push_back(MapSpec(map_kind_from_name(tok)));
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// base kernels on mapped coordinates

namespace {

double base_eval(const KernelSpec& spec, const Vector& u, const Vector& v) {
    const auto D = u.size();
    switch (spec.base) {
    case KernelBase::Gaussian:
        return std::exp(-(u - v).squaredNorm());
    case KernelBase::Matern:
        return std::exp(-(u - v).lpNorm<1>());
    case KernelBase::MaternTensorial: {
        double p = 1.0;
        for (Eigen::Index d = 0; d < D; ++d) p *= std::abs(u[d] - v[d]);
        return std::exp(-p);
    }
    case KernelBase::Multiquadric: {
        const double c = spec.multiquadric_c();
        return std::sqrt(1.0 + (u - v).squaredNorm() / (c * c));
    }
    case KernelBase::Sinc: {
        double p = 1.0;
        for (Eigen::Index d = 0; d < D; ++d) p *= sinc(u[d] - v[d]);
        return p;
    }
    case KernelBase::SincSquare: {
        double p = 1.0;
        for (Eigen::Index d = 0; d < D; ++d) {
            const double s = sinc(u[d] - v[d]);
            p *= s * s;
        }
        return p;
    }
    case KernelBase::TensorProduct: {
        double p = 1.0;
        for (Eigen::Index d = 0; d < D; ++d) p *= std::max(1.0 - std::abs(u[d] - v[d]), 0.0);
        return p;
    }
    case KernelBase::Truncated:
        return std::max(1.0 - (u - v).norm(), 0.0);
    case KernelBase::DotProduct: {
        // monomial feature map (1, x, x^2, ...) up to degree p per coordinate
        const int p = spec.poly_degree();
        double acc = 1.0;
        for (int j = 1; j <= p; ++j)
            for (Eigen::Index d = 0; d < D; ++d)
                acc += std::pow(u[d], j) * std::pow(v[d], j);
        return acc;
    }
    case KernelBase::Polynomial:
        return std::pow(1.0 + u.dot(v) / double(D), spec.poly_degree());
    case KernelBase::PolynomialConvolutional: {
        const int p = spec.poly_degree();
        double acc = 0.0;
        for (Eigen::Index m = 0; m < D; ++m) {
            double w = 0.0;
            for (Eigen::Index d = 0; d < D; ++d) w += u[d] * v[(m + d) % D];
            acc += std::pow(std::abs(1.0 + w / double(D)), p);
        }
        return acc;
    }
    case KernelBase::PeriodicGaussian: {
        double p = 1.0;
        for (Eigen::Index d = 0; d < D; ++d) p *= theta3(u[d] - v[d]);
        return p;
    }
    }
    return 0.0;
}

// gradient in the first (mapped) argument
Vector base_grad(const KernelSpec& spec, const Vector& u, const Vector& v) {
    const auto D = u.size();
    Vector g = Vector::Zero(D);
    switch (spec.base) {
    case KernelBase::Gaussian: {
        const double k = std::exp(-(u - v).squaredNorm());
        g = -2.0 * (u - v) * k;
        break;
    }
    case KernelBase::Matern: {
        const double k = std::exp(-(u - v).lpNorm<1>());
        // left derivative of -|t| at 0 is +1, hence -lsign with lsign(0) = -1
        for (Eigen::Index d = 0; d < D; ++d) g[d] = -lsign(u[d] - v[d]) * k;
        break;
    }
    case KernelBase::MaternTensorial: {
        double prod = 1.0;
        for (Eigen::Index d = 0; d < D; ++d) prod *= std::abs(u[d] - v[d]);
        const double k = std::exp(-prod);
        for (Eigen::Index d = 0; d < D; ++d) {
            const double t = u[d] - v[d];
            double rest = 1.0;
            for (Eigen::Index e = 0; e < D; ++e)
                if (e != d) rest *= std::abs(u[e] - v[e]);
            g[d] = -lsign(t) * rest * k;
        }
        break;
    }
    case KernelBase::Multiquadric: {
        const double c2 = spec.multiquadric_c() * spec.multiquadric_c();
        const double k = std::sqrt(1.0 + (u - v).squaredNorm() / c2);
        g = (u - v) / (c2 * k);
        break;
    }
    case KernelBase::Sinc: {
        for (Eigen::Index d = 0; d < D; ++d) {
            double term = sinc_prime(u[d] - v[d]);
            for (Eigen::Index e = 0; e < D; ++e)
                if (e != d) term *= sinc(u[e] - v[e]);
            g[d] = term;
        }
        break;
    }
    case KernelBase::SincSquare: {
        for (Eigen::Index d = 0; d < D; ++d) {
            const double s = sinc(u[d] - v[d]);
            double term = 2.0 * s * sinc_prime(u[d] - v[d]);
            for (Eigen::Index e = 0; e < D; ++e) {
                if (e == d) continue;
                const double se = sinc(u[e] - v[e]);
                term *= se * se;
            }
            g[d] = term;
        }
        break;
    }
    case KernelBase::TensorProduct: {
        for (Eigen::Index d = 0; d < D; ++d) {
            const double t = u[d] - v[d];
            double slope = 0.0;
            if (t > -1.0 && t <= 0.0) slope = 1.0;       // left derivative at the kinks
            else if (t > 0.0 && t <= 1.0) slope = -1.0;
            double rest = 1.0;
            for (Eigen::Index e = 0; e < D; ++e)
                if (e != d) rest *= std::max(1.0 - std::abs(u[e] - v[e]), 0.0);
            g[d] = slope * rest;
        }
        break;
    }
    case KernelBase::Truncated: {
        const double r = (u - v).norm();
        if (r > 0.0 && r < 1.0) g = -(u - v) / r;
        break;
    }
    case KernelBase::DotProduct: {
        const int p = spec.poly_degree();
        for (Eigen::Index d = 0; d < D; ++d)
            for (int j = 1; j <= p; ++j)
                g[d] += j * std::pow(u[d], j - 1) * std::pow(v[d], j);
        break;
    }
    case KernelBase::Polynomial: {
        const int p = spec.poly_degree();
        const double s = 1.0 + u.dot(v) / double(D);
        g = double(p) * std::pow(s, p - 1) / double(D) * v;
        break;
    }
    case KernelBase::PolynomialConvolutional: {
        const int p = spec.poly_degree();
        for (Eigen::Index m = 0; m < D; ++m) {
            double w = 0.0;
            for (Eigen::Index d = 0; d < D; ++d) w += u[d] * v[(m + d) % D];
            const double s = 1.0 + w / double(D);
            const double f = p * std::pow(std::abs(s), p - 1) * lsign(s) / double(D);
            for (Eigen::Index d = 0; d < D; ++d) g[d] += f * v[(m + d) % D];
        }
        break;
    }
    case KernelBase::PeriodicGaussian: {
        for (Eigen::Index d = 0; d < D; ++d) {
            double term = theta3_prime(u[d] - v[d]);
            for (Eigen::Index e = 0; e < D; ++e)
                if (e != d) term *= theta3(u[e] - v[e]);
            g[d] = term;
        }
        break;
    }
    }
    return g;
}

Matrix base_hess(const KernelSpec& spec, const Vector& u, const Vector& v) {
    const auto D = u.size();
    Matrix H = Matrix::Zero(D, D);
    switch (spec.base) {
    case KernelBase::Gaussian: {
        const Vector t = u - v;
        const double k = std::exp(-t.squaredNorm());
        H = (4.0 * t * t.transpose() - 2.0 * Matrix::Identity(D, D)) * k;
        break;
    }
    case KernelBase::Multiquadric: {
        const double c2 = spec.multiquadric_c() * spec.multiquadric_c();
        const Vector t = u - v;
        const double k = std::sqrt(1.0 + t.squaredNorm() / c2);
        H = Matrix::Identity(D, D) / (c2 * k) - t * t.transpose() / (c2 * c2 * k * k * k);
        break;
    }
    case KernelBase::DotProduct: {
        const int p = spec.poly_degree();
        for (Eigen::Index d = 0; d < D; ++d)
            for (int j = 2; j <= p; ++j)
                H(d, d) += double(j) * (j - 1) * std::pow(u[d], j - 2) * std::pow(v[d], j);
        break;
    }
    case KernelBase::Polynomial: {
        const int p = spec.poly_degree();
        const double s = 1.0 + u.dot(v) / double(D);
        H = double(p) * (p - 1) * std::pow(s, p - 2) / (double(D) * D) * (v * v.transpose());
        break;
    }
    case KernelBase::PeriodicGaussian: {
        Vector th(D), thp(D), thpp(D);
        for (Eigen::Index d = 0; d < D; ++d) {
            const double t = u[d] - v[d];
            th[d] = theta3(t);
            thp[d] = theta3_prime(t);
            double tdd = 0.0;
            for (int n = -kThetaTerms; n <= kThetaTerms; ++n) {
                const double w = t + n;
                tdd += (4.0 * M_PI * M_PI * w * w - 2.0 * M_PI) * std::exp(-M_PI * w * w);
            }
            thpp[d] = tdd;
        }
        for (Eigen::Index d = 0; d < D; ++d) {
            for (Eigen::Index e = 0; e < D; ++e) {
                double term = (d == e) ? thpp[d] : thp[d] * thp[e];
                for (Eigen::Index f = 0; f < D; ++f)
                    if (f != d && f != e) term *= th[f];
                H(d, e) = term;
            }
        }
        break;
    }
    default:
        throw ValidationError("hessian unsupported for kernel base " + kernel_base_name(spec.base));
    }
    return H;
}

// chained first/second derivative factors of the map composition per coordinate
void chain_factors(const KernelSpec& spec, const Vector& x, Vector& d1, Vector& d2) {
    const auto D = x.size();
    d1 = Vector::Ones(D);
    d2 = Vector::Zero(D);
    Vector cur = x;
    for (const auto& m : spec.maps) {
        const Vector md1 = m.derivative(cur);
        const Vector md2 = m.second_derivative(cur);
        // g = m o f: g' = m'(f) f', g'' = m''(f) f'^2 + m'(f) f''
        d2 = md2.cwiseProduct(d1.cwiseProduct(d1)) + md1.cwiseProduct(d2);
        d1 = md1.cwiseProduct(d1);
        cur = m.apply(cur.transpose()).transpose();
    }
}

} // namespace

double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& y) {
    require(x.size() == y.size(), "eval_kernel: dimension mismatch");
    require(spec.fitted(), "eval_kernel: stateful map not fitted");
    const Vector u = spec.apply_maps(x.transpose()).transpose();
    const Vector v = spec.apply_maps(y.transpose()).transpose();
    return base_eval(spec, u, v);
}

Vector eval_kernel_grad(const KernelSpec& spec, const Vector& x, const Vector& y) {
    require(x.size() == y.size(), "eval_kernel_grad: dimension mismatch");
    require(spec.fitted(), "eval_kernel_grad: stateful map not fitted");
    const Vector u = spec.apply_maps(x.transpose()).transpose();
    const Vector v = spec.apply_maps(y.transpose()).transpose();
    Vector d1, d2;
    chain_factors(spec, x, d1, d2);
    return base_grad(spec, u, v).cwiseProduct(d1);
}

Matrix eval_kernel_hess(const KernelSpec& spec, const Vector& x, const Vector& y) {
    require(x.size() == y.size(), "eval_kernel_hess: dimension mismatch");
    const Vector u = spec.apply_maps(x.transpose()).transpose();
    const Vector v = spec.apply_maps(y.transpose()).transpose();
    Vector d1, d2;
    chain_factors(spec, x, d1, d2);
    const Vector g = base_grad(spec, u, v);
    Matrix H = base_hess(spec, u, v);
    // d^2k/dx_a dx_b = H_ab s'_a s'_b + delta_ab g_a s''_a for diagonal maps
    H = H.cwiseProduct(d1 * d1.transpose());
    H.diagonal() += g.cwiseProduct(d2);
    return H;
}

Matrix gram(const KernelSpec& spec, const PointSet& X, const PointSet& Y) {
    require(X.cols() == Y.cols(), "gram: point sets must share dimension");
    require(spec.fitted(), "gram: stateful map not fitted");
    require_finite(X, "gram X");
    require_finite(Y, "gram Y");
    const Matrix U = spec.apply_maps(X);
    const Matrix V = spec.apply_maps(Y);
    Matrix K(X.rows(), Y.rows());
    for (Eigen::Index i = 0; i < U.rows(); ++i)
        for (Eigen::Index j = 0; j < V.rows(); ++j)
            K(i, j) = base_eval(spec, U.row(i).transpose(), V.row(j).transpose());
    return K;
}

Matrix grad_gram(const KernelSpec& spec, const PointSet& Z, const PointSet& Y) {
    require(Z.cols() == Y.cols(), "grad_gram: point sets must share dimension");
    require(spec.fitted(), "grad_gram: stateful map not fitted");
    const auto nz = Z.rows(), ny = Y.rows(), D = Z.cols();
    const Matrix U = spec.apply_maps(Z);
    const Matrix V = spec.apply_maps(Y);
    Matrix G(nz * D, ny);
    Vector d1, d2;
    for (Eigen::Index i = 0; i < nz; ++i) {
        chain_factors(spec, Z.row(i).transpose(), d1, d2);
        for (Eigen::Index j = 0; j < ny; ++j) {
            const Vector g =
                base_grad(spec, U.row(i).transpose(), V.row(j).transpose()).cwiseProduct(d1);
            for (Eigen::Index d = 0; d < D; ++d) G(i * D + d, j) = g[d];
        }
    }
    return G;
}

Matrix distance_matrix(const KernelSpec& spec, const PointSet& X, const PointSet& Y) {
    require(X.cols() == Y.cols(), "distance_matrix: point sets must share dimension");
    const Matrix U = spec.apply_maps(X);
    const Matrix V = spec.apply_maps(Y);
    Vector dx(U.rows()), dy(V.rows());
    for (Eigen::Index i = 0; i < U.rows(); ++i)
        dx[i] = base_eval(spec, U.row(i).transpose(), U.row(i).transpose());
    for (Eigen::Index j = 0; j < V.rows(); ++j)
        dy[j] = base_eval(spec, V.row(j).transpose(), V.row(j).transpose());
    Matrix D(U.rows(), V.rows());
    for (Eigen::Index i = 0; i < U.rows(); ++i)
        for (Eigen::Index j = 0; j < V.rows(); ++j)
            D(i, j) = dx[i] + dy[j] - 2.0 * base_eval(spec, U.row(i).transpose(), V.row(j).transpose());
    return D;
}

double mmd(const KernelSpec& spec, const PointSet& X, const PointSet& Y) {
    require(X.rows() >= 1 && Y.rows() >= 1, "mmd: empty point set");
    require(X.cols() == Y.cols(), "mmd: point sets must share dimension");
    const double nx = double(X.rows()), ny = double(Y.rows());
    const Matrix Kxx = gram(spec, X, X);
    const Matrix Kyy = gram(spec, Y, Y);
    const Matrix Kxy = gram(spec, X, Y);
    return Kxx.sum() / (nx * nx) + Kyy.sum() / (ny * ny) - 2.0 * Kxy.sum() / (nx * ny);
}

double mmd_root(const KernelSpec& spec, const PointSet& X, const PointSet& Y) {
    return std::sqrt(std::max(mmd(spec, X, Y), 0.0));
}

Matrix combine_gram(CombineMode mode, const Matrix& K1, const Matrix& K2) {
    require(K1.rows() == K2.rows() && K1.cols() == K2.cols(),
            "combine_gram: nonconformable shapes");
    switch (mode) {
    case CombineMode::Add:
        return K1 + K2;
    case CombineMode::Multiply:
        return K1.cwiseProduct(K2);
    default:
        throw ValidationError("combine_gram: use convolve_gram / pipe_fit for this mode");
    }
}

Matrix convolve_gram(const Matrix& K1_XZ, const Matrix& K2_ZY) {
    require(K1_XZ.cols() == K2_ZY.rows(), "convolve_gram: nonconformable shapes");
    return K1_XZ * K2_ZY;
}

PipedRegressor pipe_fit(KernelSpec k1, KernelSpec k2, const PointSet& X, const Matrix& fX) {
    require(X.rows() == fX.rows(), "pipe_fit: label rows mismatch");
    if (!k1.fitted()) k1.fit_maps(X);
    if (!k2.fitted()) k2.fit_maps(X);
    const Matrix K1 = gram(k1, X, X);
    const Matrix K2 = gram(k2, X, X);
    const Matrix K1p = pinv_sym(K1);
    // pi_1 projects labels onto what the first kernel can represent
    const Matrix pi1 = K1 * K1p;
    PipedRegressor pr{std::move(k1), std::move(k2), X, Matrix(), Matrix()};
    const Matrix f1 = pi1 * fX;
    pr.theta1 = K1p * f1;
    pr.theta2 = pinv_sym(K2) * (fX - f1);
    return pr;
}

Matrix pipe_predict(const PipedRegressor& pr, const PointSet& Z) {
    return gram(pr.k1, Z, pr.X) * pr.theta1 + gram(pr.k2, Z, pr.X) * pr.theta2;
}

} // namespace rkhs
