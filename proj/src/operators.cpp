#include "rkhskit/operators.hpp"
#include "rkhskit/linalg.hpp"

#include <cmath>

namespace rkhs {

namespace {

bool same_points(const PointSet& A, const PointSet& B) {
    return A.rows() == B.rows() && A.cols() == B.cols() && A == B;
}

Matrix regularizer_matrix(const KernelSpec& spec, const PointSet& X, Regularizer reg,
                          const Matrix* custom_R);

} // namespace

bool Regressor::extrapolation_mode() const { return same_points(train_X, basis_Y); }

namespace {

Matrix regularizer_matrix(const KernelSpec& spec, const PointSet& X, Regularizer reg,
                          const Matrix* custom_R) {
    switch (reg) {
    case Regularizer::Identity:
        return Matrix::Identity(X.rows(), X.rows());
    case Regularizer::Laplacian:
        return laplace_beltrami(spec, X, X, 0.0);
    case Regularizer::Custom:
        require(custom_R != nullptr, "custom regularizer matrix missing");
        require(custom_R->rows() == X.rows() && custom_R->cols() == X.rows(),
                "custom regularizer: shape mismatch");
        return *custom_R;
    }
    return Matrix::Identity(X.rows(), X.rows());
}

} // namespace

Regressor fit_regressor(const KernelSpec& spec_in, const PointSet& X, const Matrix& fX,
                        double epsilon, Regularizer reg, const Matrix* custom_R) {
    require(X.rows() == fX.rows(), "fit_regressor: label rows mismatch");
    require(epsilon >= 0.0, "fit_regressor: epsilon must be nonnegative");
    require_finite(fX, "labels");
    KernelSpec spec = spec_in;
    if (!spec.fitted()) spec.fit_maps(X);
    Matrix K = gram(spec, X, X);
    if (epsilon > 0.0) K += epsilon * regularizer_matrix(spec, X, reg, custom_R);
    Regressor out;
    out.spec = std::move(spec);
    out.train_X = X;
    out.basis_Y = X;
    out.theta = solve_sym(K, fX);
    out.epsilon = epsilon;
    out.regularizer = reg;
    return out;
}

Regressor fit_regressor_basis(const KernelSpec& spec_in, const PointSet& X, const PointSet& Y,
                              const Matrix& fX, double epsilon, Regularizer reg) {
    if (same_points(X, Y)) return fit_regressor(spec_in, X, fX, epsilon, reg);
    require(X.rows() == fX.rows(), "fit_regressor_basis: label rows mismatch");
    require(X.cols() == Y.cols(), "fit_regressor_basis: dimension mismatch");
    KernelSpec spec = spec_in;
    if (!spec.fitted()) spec.fit_maps(X);
    const Matrix Kxy = gram(spec, X, Y);
    Matrix A = Kxy.transpose() * Kxy;
    if (epsilon > 0.0) A += epsilon * regularizer_matrix(spec, Y, reg, nullptr);
    Regressor out;
    out.spec = std::move(spec);
    out.train_X = X;
    out.basis_Y = Y;
    out.theta = solve_sym(A, Kxy.transpose() * fX);
    out.epsilon = epsilon;
    out.regularizer = reg;
    return out;
}

Matrix predict(const Regressor& reg, const PointSet& Z) {
    require(Z.cols() == reg.dim(), "predict: dimension mismatch");
    Matrix out = gram(reg.spec, Z, reg.basis_Y) * reg.theta;
    if (reg.residual && reg.residual->value) out += reg.residual->value(Z);
    return out;
}

Matrix partition_of_unity(const KernelSpec& spec_in, const PointSet& X, const PointSet& Y,
                          const PointSet& Z, double epsilon) {
    KernelSpec spec = spec_in;
    if (!spec.fitted()) spec.fit_maps(X);
    const Matrix labels = Matrix::Identity(X.rows(), X.rows());
    Regressor reg = same_points(X, Y) ? fit_regressor(spec, X, labels, epsilon)
                                      : fit_regressor_basis(spec, X, Y, labels, epsilon);
    return predict(reg, Z);
}

Matrix gradient(const Regressor& reg, const PointSet& Z) {
    require(Z.cols() == reg.dim(), "gradient: dimension mismatch");
    Matrix out = grad_gram(reg.spec, Z, reg.basis_Y) * reg.theta;
    if (reg.residual && reg.residual->gradient) out += reg.residual->gradient(Z);
    return out;
}

Matrix gradient_operator(const KernelSpec& spec_in, const PointSet& X, const PointSet& Y,
                         const PointSet& Z, double epsilon) {
    KernelSpec spec = spec_in;
    if (!spec.fitted()) spec.fit_maps(X);
    const Matrix G = grad_gram(spec, Z, Y);
    if (same_points(X, Y)) {
        Matrix K = gram(spec, X, X);
        if (epsilon > 0.0) K += epsilon * Matrix::Identity(X.rows(), X.rows());
        // G * K^-1, computed through the symmetric solve
        return solve_sym(K, G.transpose()).transpose();
    }
    const Matrix Kxy = gram(spec, X, Y);
    Matrix A = Kxy.transpose() * Kxy;
    if (epsilon > 0.0) A += epsilon * Matrix::Identity(Y.rows(), Y.rows());
    return G * solve_sym(A, Kxy.transpose());
}

Matrix divergence(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                  const PointSet& Z, const Matrix& field_flat, double epsilon) {
    require(field_flat.rows() == Z.rows() * Z.cols(), "divergence: field shape mismatch");
    const Matrix nabla = gradient_operator(spec, X, Y, Z, epsilon);
    return nabla.transpose() * field_flat;
}

Matrix laplace_beltrami(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                        double epsilon) {
    const Matrix nabla = gradient_operator(spec, X, Y, X, epsilon);
    return nabla.transpose() * nabla;
}

Matrix inv_laplace(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                   const Matrix& fX, double epsilon) {
    require(fX.rows() == X.rows(), "inv_laplace: rhs rows mismatch");
    const Matrix L = laplace_beltrami(spec, X, Y, epsilon);
    return pinv_sym(L) * fX;
}

HelmholtzParts helmholtz_hodge(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                               const Matrix& u_field, double epsilon) {
    const auto n = X.rows(), D = X.cols();
    require(u_field.rows() == n && u_field.cols() == D, "helmholtz_hodge: field shape mismatch");
    const Matrix nabla = gradient_operator(spec, X, Y, X, epsilon); // (N*D) x N
    Vector u_flat(n * D);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index d = 0; d < D; ++d) u_flat[i * D + d] = u_field(i, d);
    const Matrix L = nabla.transpose() * nabla;
    const Vector h = pinv_sym(L) * (nabla.transpose() * u_flat);
    const Vector gh = nabla * h;
    HelmholtzParts parts;
    parts.potential = h;
    parts.solenoidal.resize(n, D);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index d = 0; d < D; ++d)
            parts.solenoidal(i, d) = u_field(i, d) - gh[i * D + d];
    return parts;
}

Matrix leray(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
             const Matrix& u_field, double epsilon) {
    return helmholtz_hodge(spec, X, Y, u_field, epsilon).solenoidal;
}

Matrix denoise(const KernelSpec& spec, const PointSet& X, const Matrix& fX_noisy,
               double epsilon) {
    Regressor reg = fit_regressor(spec, X, fX_noisy, epsilon, Regularizer::Laplacian);
    return predict(reg, X);
}

Matrix boundary_project(const KernelSpec& spec_in, const PointSet& X, const PointSet& Z_boundary,
                        const Matrix& phiZ, const Matrix& uX) {
    require(Z_boundary.rows() >= 1, "boundary_project: empty boundary set");
    require(phiZ.rows() == Z_boundary.rows(), "boundary_project: boundary value rows mismatch");
    require(uX.rows() == X.rows(), "boundary_project: value rows mismatch");
    KernelSpec spec = spec_in;
    if (!spec.fitted()) spec.fit_maps(X);
    const Matrix P = partition_of_unity(spec, X, X, Z_boundary, 0.0); // N_z x N_x
    // minimal l2 correction onto {v : P v = phi}
    const Matrix PPt = P * P.transpose();
    const Matrix lambda = solve_sym(PPt, phiZ - P * uX);
    return uX + P.transpose() * lambda;
}

Regressor classifier_fit(const KernelSpec& spec, const PointSet& X, const Matrix& piX,
                         double epsilon) {
    require(piX.rows() == X.rows(), "classifier_fit: probability rows mismatch");
    require((piX.array() > 0.0).all(), "classifier_fit: probabilities must be strictly positive");
    for (Eigen::Index i = 0; i < piX.rows(); ++i)
        require(std::abs(piX.row(i).sum() - 1.0) < 1e-9,
                "classifier_fit: probability rows must sum to one");
    return fit_regressor(spec, X, piX.array().log().matrix(), epsilon);
}

namespace {
Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const Vector row = logits.row(i).transpose();
        const double m = row.maxCoeff();
        Vector e = (row.array() - m).exp();
        out.row(i) = (e / e.sum()).transpose();
    }
    return out;
}
} // namespace

Matrix classifier_predict(const Regressor& reg, const PointSet& Z) {
    return softmax_rows(predict(reg, Z));
}

Matrix classifier_gradient(const Regressor& reg, const PointSet& Z) {
    const auto nz = Z.rows(), D = Z.cols(), dp = reg.out_dim();
    const Matrix pi = classifier_predict(reg, Z);
    const Matrix glog = gradient(reg, Z); // (N_z*D) x dp, logit gradients
    Matrix out(nz * D, dp);
    for (Eigen::Index i = 0; i < nz; ++i) {
        for (Eigen::Index d = 0; d < D; ++d) {
            const auto row = glog.row(i * D + d);
            const double dot = row * pi.row(i).transpose();
            for (Eigen::Index j = 0; j < dp; ++j)
                out(i * D + d, j) = pi(i, j) * (row[j] - dot);
        }
    }
    return out;
}

Matrix nadaraya_watson(const KernelSpec& spec_in, const PointSet& X, const Matrix& yX,
                       const PointSet& Z) {
    require(yX.rows() == X.rows(), "nadaraya_watson: label rows mismatch");
    KernelSpec spec = spec_in;
    if (!spec.fitted()) spec.fit_maps(X);
    const Matrix K = gram(spec, Z, X);
    Matrix out(Z.rows(), yX.cols());
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        const double denom = K.row(i).sum();
        if (!(denom > 0.0))
            throw NumericalError("nadaraya_watson: vanishing weight sum at query " +
                                 std::to_string(i));
        out.row(i) = (K.row(i) * yX) / denom;
    }
    return out;
}

Matrix taylor2(const Regressor& reg, const Vector& x0, const PointSet& Z) {
    const auto D = reg.dim(), df = reg.out_dim();
    require(x0.size() == D, "taylor2: x0 dimension mismatch");
    require(Z.cols() == D, "taylor2: query dimension mismatch");
    PointSet X0(1, D);
    X0.row(0) = x0.transpose();
    const Matrix f0 = predict(reg, X0);        // 1 x df
    const Matrix g0 = gradient(reg, X0);       // D x df
    // per-output Hessian at x0
    std::vector<Matrix> H(df, Matrix::Zero(D, D));
    for (Eigen::Index j = 0; j < reg.basis_Y.rows(); ++j) {
        const Matrix Hk = eval_kernel_hess(reg.spec, x0, reg.basis_Y.row(j).transpose());
        for (Eigen::Index f = 0; f < df; ++f) H[f] += Hk * reg.theta(j, f);
    }
    Matrix out(Z.rows(), df);
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        const Vector h = Z.row(i).transpose() - x0;
        for (Eigen::Index f = 0; f < df; ++f)
            out(i, f) = f0(0, f) + g0.col(f).dot(h) + 0.5 * h.dot(H[f] * h);
    }
    return out;
}

Matrix theta_generator(const Matrix& A, double theta, double tau) {
    require(A.rows() == A.cols(), "theta_generator: matrix not square");
    require(theta >= 0.0 && theta <= 1.0, "theta_generator: theta must lie in [0, 1]");
    require(tau > 0.0, "theta_generator: tau must be positive");
    const auto n = A.rows();
    const Matrix impl = Matrix::Identity(n, n) - tau * theta * A;
    const Matrix expl = Matrix::Identity(n, n) + tau * (1.0 - theta) * A;
    Eigen::PartialPivLU<Matrix> lu(impl);
    const Matrix B = lu.solve(expl);
    if (!B.allFinite()) throw NumericalError("theta_generator: implicit matrix singular");
    const double residual = (impl * B - expl).cwiseAbs().maxCoeff();
    if (residual > 1e-6 * std::max(1.0, expl.cwiseAbs().maxCoeff()))
        throw NumericalError("theta_generator: implicit matrix singular", residual);
    return B;
}

Matrix theta_step(const Matrix& B, const Matrix& u) {
    require(B.cols() == u.rows(), "theta_step: shape mismatch");
    return B * u;
}

Vector vandermonde_weights(const Vector& nodes, double y, const Vector& p_coeffs) {
    const auto q = nodes.size();
    require(q >= 1, "vandermonde_weights: need at least one node");
    require(p_coeffs.size() == q, "vandermonde_weights: coefficient count mismatch");
    for (Eigen::Index i = 0; i < q; ++i)
        for (Eigen::Index j = i + 1; j < q; ++j)
            if (nodes[i] == nodes[j])
                throw NumericalError("vandermonde_weights: coincident nodes");
    Matrix M(q, q);
    Vector rhs(q);
    double fact = 1.0;
    for (Eigen::Index i = 0; i < q; ++i) {
        if (i > 0) fact *= double(i);
        rhs[i] = fact * p_coeffs[i];
        for (Eigen::Index k = 0; k < q; ++k) M(i, k) = std::pow(nodes[k] - y, double(i));
    }
    Eigen::FullPivLU<Matrix> lu(M);
    if (!lu.isInvertible()) throw NumericalError("vandermonde_weights: singular system");
    return lu.solve(rhs);
}

} // namespace rkhs
