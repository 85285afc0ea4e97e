#pragma once

#include "rkhskit/kernels.hpp"

#include <functional>

namespace rkhs {

enum class Regularizer { Identity, Laplacian, Custom };

/// Optional base map g for residual regression: predictions are g(Z) plus the
/// kernel correction fitted to fX - g(X).
struct ResidualBase {
    std::function<Matrix(const PointSet&)> value;    // N x Df
    std::function<Matrix(const PointSet&)> gradient; // (N*D) x Df flat, optional
};

/// Fitted kernel ridge regressor. Immutable after fit; predict/gradient are
/// safe to call concurrently.
struct Regressor {
    KernelSpec spec;
    PointSet train_X;  // data sites
    PointSet basis_Y;  // projection sites (== train_X in extrapolation mode)
    Matrix theta;      // Ny x Df
    double epsilon = 0.0;
    Regularizer regularizer = Regularizer::Identity;
    std::optional<ResidualBase> residual;

    Eigen::Index dim() const { return train_X.cols(); }
    Eigen::Index out_dim() const { return theta.cols(); }
    bool extrapolation_mode() const;
};

constexpr double kDefaultEpsilon = 1e-8;

Regressor fit_regressor(const KernelSpec& spec, const PointSet& X, const Matrix& fX,
                        double epsilon = kDefaultEpsilon,
                        Regularizer reg = Regularizer::Identity,
                        const Matrix* custom_R = nullptr);

/// Least-squares variant with a separate projection set Y.
Regressor fit_regressor_basis(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                              const Matrix& fX, double epsilon = kDefaultEpsilon,
                              Regularizer reg = Regularizer::Identity);

Matrix predict(const Regressor& reg, const PointSet& Z);

/// N_z x N_x response matrix of indicator labels; Kronecker delta on the
/// training set in extrapolation mode.
Matrix partition_of_unity(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                          const PointSet& Z, double epsilon = 0.0);

/// Gradient tensor of a fitted regressor, flattened (N_z*D) x Df with row
/// index z*D + d.
Matrix gradient(const Regressor& reg, const PointSet& Z);

/// The gradient *operator* matrix (N_z*D) x N_x mapping samples f(X) to
/// gradient values at Z.
Matrix gradient_operator(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                         const PointSet& Z, double epsilon = kDefaultEpsilon);

/// Transpose pairing of the gradient: maps a field on Z, flattened
/// (N_z*D) x Df, to divergence samples on X.
Matrix divergence(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                  const PointSet& Z, const Matrix& field_flat,
                  double epsilon = kDefaultEpsilon);

/// Discrete Laplace-Beltrami matrix, gradient^T gradient on X. Symmetric PSD.
Matrix laplace_beltrami(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                        double epsilon = kDefaultEpsilon);

/// Least-squares pseudo-inverse solve of the Laplacian.
Matrix inv_laplace(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                   const Matrix& fX, double epsilon = kDefaultEpsilon);

struct HelmholtzParts {
    Vector potential;  // h(X)
    Matrix solenoidal; // zeta(X), N x D
};

/// u = grad h + zeta with discrete orthogonality <grad h, zeta> = 0.
HelmholtzParts helmholtz_hodge(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                               const Matrix& u_field, double epsilon = kDefaultEpsilon);

/// Divergence-free component of the field (the Leray projection).
Matrix leray(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
             const Matrix& u_field, double epsilon = kDefaultEpsilon);

/// Ridge solve with the Laplacian as regularizer; epsilon = 0 interpolates.
Matrix denoise(const KernelSpec& spec, const PointSet& X, const Matrix& fX_noisy,
               double epsilon);

/// Project values uX onto the subspace whose extrapolation to Z_boundary
/// matches phiZ exactly (minimal l2 correction).
Matrix boundary_project(const KernelSpec& spec, const PointSet& X, const PointSet& Z_boundary,
                        const Matrix& phiZ, const Matrix& uX);

Regressor classifier_fit(const KernelSpec& spec, const PointSet& X, const Matrix& piX,
                         double epsilon = kDefaultEpsilon);
Matrix classifier_predict(const Regressor& reg, const PointSet& Z);
/// (N_z*D) x D_pi flat tensor of probability gradients.
Matrix classifier_gradient(const Regressor& reg, const PointSet& Z);

Matrix nadaraya_watson(const KernelSpec& spec, const PointSet& X, const Matrix& yX,
                       const PointSet& Z);

/// Second-order Taylor expansion of the fitted function around x0.
Matrix taylor2(const Regressor& reg, const Vector& x0, const PointSet& Z);

/// One-step evolution matrix (I - tau*theta*A)^-1 (I + tau*(1-theta)*A).
Matrix theta_generator(const Matrix& A, double theta, double tau);
Matrix theta_step(const Matrix& B, const Matrix& u);

/// Weights beta with sum_k beta_k (x_k - y)^i = i! p_i for i = 0..q-1.
Vector vandermonde_weights(const Vector& nodes, double y, const Vector& p_coeffs);

} // namespace rkhs
