#pragma once

#include "rkhskit/types.hpp"

namespace rkhs {

/// Solve A X = B for symmetric A by LDLT with escalating diagonal jitter.
/// Jitter starts at 1e-12*trace(A)/n and grows tenfold up to 1e-4*trace(A)/n;
/// throws NumericalError with the last relative residual once exhausted.
Matrix solve_sym(const Matrix& A, const Matrix& B);

/// Spectral pseudo-inverse of a symmetric matrix. Eigenvalues below
/// rel_tol * lambda_max are treated as zero, so pinv(A)*A is the exact
/// orthogonal projector onto the numerical range.
Matrix pinv_sym(const Matrix& A, double rel_tol = 1e-11);

/// Orthogonal projector onto the numerical range of a symmetric PSD matrix.
Matrix range_projector_sym(const Matrix& A, double rel_tol = 1e-11);

/// Smallest eigenvalue of a symmetric matrix.
double min_eig_sym(const Matrix& A);

} // namespace rkhs
