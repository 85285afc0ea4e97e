#pragma once

#include "rkhskit/kernels.hpp"

namespace rkhs {
namespace ot {

/// Row-to-column matching of a rectangular cost matrix, M <= N.
struct LsapResult {
    IndexVec sigma;  // sigma[i] = column assigned to row i
    double cost = 0.0;
    Vector phi, psi; // dual potentials, phi_i - psi_j <= c_ij, tight on sigma
};

/// Exact linear sum assignment by shortest augmenting paths with potentials.
/// Cost-neutral pairwise swaps are canonicalized toward the lexicographically
/// smallest optimal permutation.
LsapResult lsap(const Matrix& cost);

struct SinkhornResult {
    Matrix plan;           // row sums and column sums equal one
    int iterations = 0;
    double marginal_residual = 0.0;
    bool converged = false;
};

/// Iterative proportional fitting on the Gibbs kernel exp(-C/eps). Switches to
/// log-domain scaling when eps is small against the cost scale.
SinkhornResult sinkhorn(const Matrix& cost, double epsilon, double tol = 1e-9,
                        int max_iter = 10000);

struct MartingalePlan {
    Matrix plan;            // rows sum to one; entries may be negative
    IndexVec sigma;         // LSAP reordering applied to Y before iteration
    int iterations = 0;
    double barycenter_residual = 0.0; // ||X - plan * (Y - mean)|| relative
    double min_entry = 0.0;
    bool converged = false;
};

/// Bi-stochastic approximation of the martingale coupling: center both sets,
/// reorder Y by kernel-distance LSAP, then rank-one fixed-point updates with
/// the closed-form step length. Set project_nonneg to clip-and-renormalize the
/// returned plan onto nonnegative rows.
MartingalePlan martingale_ot(const PointSet& X, const PointSet& Y, const KernelSpec& spec,
                             double tol = 1e-10, int max_iter = 1000,
                             bool project_nonneg = false);

struct GromovMongeResult {
    IndexVec sigma;
    double objective = 0.0;
};

/// Pairwise-swap local search on sum |DX(i,j) - DY(sigma_i, sigma_j)|^2,
/// started from the first-principal-direction rank matching.
GromovMongeResult gromov_monge(const Matrix& DX, const Matrix& DY,
                               const IndexVec& init = {});

/// Discrete polar-factorization potential: h = Laplacian^+ (div of Y_sigma).
Vector polar_potential(const KernelSpec& spec, const PointSet& X, const PointSet& Y_sigma,
                       double epsilon = 1e-8);

} // namespace ot
} // namespace rkhs
