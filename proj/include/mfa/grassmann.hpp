#pragma once

#include <span>
#include <vector>

#include "mfa/dataset.hpp"
#include "mfa/graph.hpp"
#include "mfa/types.hpp"

namespace mfa {

/// A point on the Grassmann manifold G_{N,d}: a d-dimensional linear subspace
/// of R^N represented by an N x d matrix with orthonormal columns. The basis
/// itself is non-unique; two values are subspace-equal iff their projection
/// distance is ~0.
class TangentBasis {
 public:
  TangentBasis() = default;

  /// Checks column orthonormality to 1e-8 (max norm of B^T B - I).
  explicit TangentBasis(Matrix basis);

  const Matrix& matrix() const { return basis_; }
  Index ambient_dim() const { return basis_.rows(); }
  Index subspace_dim() const { return basis_.cols(); }

 private:
  Matrix basis_;
};

/// Orthonormal basis of the d-dominant left singular subspace of `columns`
/// (N x p, one vector per column). When the column space has rank r < d the
/// basis is completed deterministically with the lexicographically-first
/// standard basis vectors orthogonalized against the found directions.
/// Singular-value ties at the d boundary keep descending order with
/// index-order tie-break. Exact reformulation via the p x p Gram matrix when
/// p <= N, else via the N x N outer-product matrix; N x N projection matrices
/// per input vector are never materialized.
Matrix dominant_subspace(const Matrix& columns, Index d);

/// Tangent space at sample i: the d-dominant subspace of the neighbor vectors
/// shifted so that x_i sits at the origin (x_i itself contributes a zero row
/// and is excluded).
TangentBasis estimate_tangent(const SampleSet& samples, const NeighborGraph& graph,
                              int i, Index d);

/// Tangents for every sample; parallel over samples, thread-count invariant.
std::vector<TangentBasis> estimate_tangents(const SampleSet& samples,
                                            const NeighborGraph& graph, Index d,
                                            int threads = 0);

/// Projection metric D_T(A, B) = sqrt(d - tr(A^T B B^T A)) in [0, sqrt(d)],
/// computed via the trace form. Radicands in [-1e-9, d + 1e-9] are clamped to
/// [0, d]; anything further out raises an internal-consistency error.
double projection_distance(const TangentBasis& a, const TangentBasis& b);

/// Extrinsic mean: the d-dominant eigensubspace of
/// (sum_i w_i M_i M_i^T) / (sum_i w_i), computed from the column-stacked
/// scaled bases [sqrt(w_1) M_1 | ... | sqrt(w_k) M_k].
TangentBasis extrinsic_mean(std::span<const TangentBasis> bases,
                            std::span<const double> weights);
TangentBasis extrinsic_mean(std::span<const TangentBasis> bases);

/// Sum of squared projection distances from each basis to `mean`; equals the
/// cluster criterion value when `mean` is the extrinsic mean of the list.
double sum_sq_dist_to_mean(std::span<const TangentBasis> bases,
                           const TangentBasis& mean);

}  // namespace mfa
