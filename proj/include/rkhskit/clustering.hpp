#pragma once

#include "rkhskit/kernels.hpp"

#include <functional>

namespace rkhs {
namespace cluster {

/// Centroid set plus assignment. When source_indices is set, centroids are
/// rows of the training data.
struct ClusterModel {
    PointSet centroids;
    std::optional<IndexVec> source_indices;
    IndexVec assignment;
};

/// Swap gain s(i, j, sigma): positive when swapping sigma_i and sigma_j
/// improves the objective. s(i, i, sigma) must be zero.
using GainFunction = std::function<double(int, int, const IndexVec&)>;

struct LoopBounds {
    int i_begin = 0, i_end = 0;
    int j_begin = 0, j_end = 0;
};

/// Generic two-element swap descent over an index map.
/// Accepts every swap whose gain exceeds min_gain until none remains in the
/// loop ranges; the threshold guards against rounding residue on gains that
/// are zero in exact arithmetic, which would otherwise cycle forever.
IndexVec swap_descent(const GainFunction& gain, IndexVec sigma, const LoopBounds& bounds,
                      double min_gain = 1e-12);

/// Greedy centroid selection by iterated best-insertion under the incremental
/// kernel-sum discrepancy score. Ties break to the lowest index; batch size M
/// re-ranks after each batch.
ClusterModel greedy_select(const KernelSpec& spec, const PointSet& X, int n_y, int batch = 1,
                           const IndexVec& init = {});

/// Permutation refinement of a subset selection: swaps centroids against the
/// remaining points while the discrepancy decreases.
ClusterModel subset_refine(const KernelSpec& spec, const PointSet& X, const IndexVec& subset);

/// Continuous polish: explicit descent on the discrepancy with a golden-section
/// line search on the step length. Centroids may leave X.
ClusterModel sharpen_descent(const KernelSpec& spec, const PointSet& X, const PointSet& Y0,
                             double tol = 1e-8, int max_iter = 100);

/// Gradient of d_k(Y, X)^2 with respect to the centroid rows (N_y x D).
Matrix discrepancy_gradient(const KernelSpec& spec, const PointSet& X, const PointSet& Y);

/// Modulo-balanced assignment: point n joins cluster sigma_n % N_y; swap
/// descent on the distance objective keeps sizes within one of each other.
IndexVec balanced_assign(const Matrix& distance_yx);

enum class AssignMetric { Euclidean, KernelDiscrepancy };

IndexVec assign(const PointSet& X, const ClusterModel& model, AssignMetric metric,
                const KernelSpec* spec = nullptr);

double inertia(const PointSet& X, const ClusterModel& model);

/// Nearest-centroid label propagation.
IndexVec semisup_predict(const ClusterModel& model, const IndexVec& labels_at_centroids,
                         const PointSet& Z, AssignMetric metric = AssignMetric::Euclidean,
                         const KernelSpec* spec = nullptr);

} // namespace cluster
} // namespace rkhs
