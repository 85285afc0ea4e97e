#pragma once

#include "rkhskit/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rkhs {

enum class KernelBase {
    Gaussian,
    Matern,
    MaternTensorial,
    Multiquadric,
    Sinc,
    SincSquare,
    TensorProduct, // a.k.a. ReLU kernel
    Truncated,
    DotProduct,
    Polynomial,
    PolynomialConvolutional,
    PeriodicGaussian,
};

enum class MapKind {
    StdDev,
    Erf,
    ErfInv,
    MeanDistance,
    MinDistance,
    UnitCube,
    Bandwidth,
};

KernelBase kernel_base_from_name(const std::string& name);
std::string kernel_base_name(KernelBase base);
MapKind map_kind_from_name(const std::string& name);
std::string map_kind_name(MapKind kind);

/// One rescaling map of the chain. Stateful maps learn their scale from a
/// PointSet at fit time; the chain is applied left-to-right before the base
/// kernel sees the coordinates.
struct MapSpec {
    MapSpec() = default;
    explicit MapSpec(MapKind k) : kind(k) {}

    MapKind kind = MapKind::Bandwidth;
    bool fitted = false;
    double scale = 1.0;     // sigma^-1 surrogate for scalar maps, user h for bandwidth
    Vector col_a;           // per-column state (sigma, min)
    Vector col_b;           // per-column state (range alpha)
    double offset = 0.0;    // unit-cube 0.5/N shift

    void fit(const PointSet& X);
    Matrix apply(const Matrix& X) const;
    /// d/dx of the map per coordinate, evaluated at pre-map coordinates.
    Vector derivative(const Vector& x) const;
    /// d^2/dx^2 of the map per coordinate.
    Vector second_derivative(const Vector& x) const;
    bool stateless() const;
};

/// Base kernel + parameters + ordered map chain; fully determines k(x, y).
/// Params are consumed by the base first (multiquadric c, polynomial degree p)
/// and then one per bandwidth map in chain order.
struct KernelSpec {
    KernelBase base = KernelBase::Matern;
    std::vector<double> params;
    std::vector<MapSpec> maps;

    bool fitted() const;
    /// Fit every stateful map, each on the image of X under the maps before it.
    void fit_maps(const PointSet& X);
    Matrix apply_maps(const Matrix& X) const;

    double multiquadric_c() const;
    int poly_degree() const;
    void validate() const;
};

/// Library default: Matern base with unit-cube, erf-inv, mean-distance.
KernelSpec default_spec();

/// Parse "name" | "name:p1,p2" | "name:p1,p2|map1,map2" shorthand.
KernelSpec spec_from_shorthand(const std::string& text);

double eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& y);

/// Gradient of k(S(x), S(y)) in the first raw argument, chain rule included.
Vector eval_kernel_grad(const KernelSpec& spec, const Vector& x, const Vector& y);

/// Hessian in the first raw argument (D x D). Only smooth bases support it.
Matrix eval_kernel_hess(const KernelSpec& spec, const Vector& x, const Vector& y);

Matrix gram(const KernelSpec& spec, const PointSet& X, const PointSet& Y);

/// Batched kernel-gradient Gram: row z*D + d, column j holds
/// d/dz_d k(S(z), S(y_j)). Maps are applied once per set, not per pair.
Matrix grad_gram(const KernelSpec& spec, const PointSet& Z, const PointSet& Y);

/// Entry (i,j) = k(x_i,x_i) + k(y_j,y_j) - 2 k(x_i,y_j).
Matrix distance_matrix(const KernelSpec& spec, const PointSet& X, const PointSet& Y);

/// Squared kernel discrepancy between the two empirical measures (the
/// square of the set distance d_k). Symmetric, zero when X == Y.
double mmd(const KernelSpec& spec, const PointSet& X, const PointSet& Y);

/// sqrt of mmd clamped at zero, for callers wanting an actual distance.
double mmd_root(const KernelSpec& spec, const PointSet& X, const PointSet& Y);

enum class CombineMode { Add, Multiply, Convolve, Pipe };

Matrix combine_gram(CombineMode mode, const Matrix& K1, const Matrix& K2);
Matrix convolve_gram(const Matrix& K1_XZ, const Matrix& K2_ZY);

/// Two-kernel projection split: the first kernel takes the component of the
/// labels it can represent, the second handles the remainder.
struct PipedRegressor {
    KernelSpec k1, k2;
    PointSet X;
    Matrix theta1; // coefficients against K1(.,X)
    Matrix theta2; // coefficients against K2(.,X)
};

PipedRegressor pipe_fit(KernelSpec k1, KernelSpec k2, const PointSet& X, const Matrix& fX);
Matrix pipe_predict(const PipedRegressor& pr, const PointSet& Z);

/// Inverse error function, |x| < 1 (Acklam initial guess + Halley polish).
double erf_inv(double x);

} // namespace rkhs
