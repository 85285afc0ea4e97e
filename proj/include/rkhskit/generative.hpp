#pragma once

#include "rkhskit/operators.hpp"
#include "rkhskit/rng.hpp"
#include "rkhskit/transport.hpp"

namespace rkhs {
namespace gen {

enum class MatchMode { Monge, GromovMonge };

/// Transport-aligned push-forward sampler: a kernel interpolant from latent
/// sites to permutation-matched data rows.
struct Generator {
    PointSet latent_X;
    PointSet data_Y_sigma;
    Regressor regressor;
    IndexVec permutation;
    MatchMode mode = MatchMode::Monge;
};

/// Match latent rows to data rows (LSAP on the kernel distance when the
/// dimensions agree, Gromov-Monge on per-space distance matrices otherwise)
/// and fit the interpolating decoder.
Generator sample_fit(const PointSet& X_latent, const PointSet& Y, const KernelSpec& spec);

Matrix generate(const Generator& gen, const PointSet& Z_latent);

struct ConditionalSampler {
    Generator decoder;      // latent (eta_x, eta_y) -> (X, Y)
    Regressor encoder;      // x -> eta_x, fitted on decoder-aligned pairs
    Eigen::Index d_cond = 0;   // conditioning dimension D_x
    Eigen::Index d_out = 0;    // output dimension D_y
    Eigen::Index d_eta_x = 0;  // latent split
    Eigen::Index d_eta_y = 0;
};

ConditionalSampler conditional_fit(const PointSet& X_cond, const PointSet& Y,
                                   const KernelSpec& spec, Eigen::Index d_eta_x,
                                   Eigen::Index d_eta_y, std::uint64_t seed);

/// Draw n samples of Y | X = x_query. Fresh latent noise per seed.
Matrix conditional_sample(const ConditionalSampler& cs, const Vector& x_query, int n_draws,
                          std::uint64_t seed);

/// One-shot convenience wrapper around conditional_fit + conditional_sample.
Matrix conditional_sample(const PointSet& X_cond, const PointSet& Y, const KernelSpec& spec,
                          const Vector& x_query, int n_draws, std::uint64_t seed,
                          Eigen::Index d_eta_x = 1, Eigen::Index d_eta_y = 1);

/// Stable inversion of the matched forward map through its polar factors:
/// encode y back to the source, then re-interpolate within the source set.
Matrix stable_invert(const KernelSpec& spec, const PointSet& X, const PointSet& Y,
                     const Matrix& y_query);

} // namespace gen
} // namespace rkhs
