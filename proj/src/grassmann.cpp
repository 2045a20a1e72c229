#include "mfa/grassmann.hpp"

#include <algorithm>
#include <cmath>

#include "mfa/parallel.hpp"

namespace mfa {

namespace {

constexpr double kOrthonormalTol = 1e-8;

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

/// Appends standard basis vectors (in index order) orthogonalized against the
/// columns already in `basis` until it has `d` columns.
void complete_basis(Matrix& basis, Index d) {
  const Index n = basis.rows();
  Index have = basis.cols();
  basis.conservativeResize(n, d);
  for (Index e = 0; e < n && have < d; ++e) {
    Vector candidate = Vector::Unit(n, e);
    // Two rounds of Gram-Schmidt for orthogonality near machine precision.
    for (int round = 0; round < 2; ++round)
      candidate -= basis.leftCols(have) * (basis.leftCols(have).transpose() * candidate);
    const double norm = candidate.norm();
    if (norm < 1e-6) continue;  // already spanned
    basis.col(have++) = candidate / norm;
  }
  if (have < d)
    throw std::runtime_error("dominant_subspace: cannot complete basis");
}

}  // namespace

TangentBasis::TangentBasis(Matrix basis) : basis_(std::move(basis)) {
  require(basis_.rows() >= 1 && basis_.cols() >= 1,
          "tangent basis: dimensions must be positive");
  require(basis_.cols() <= basis_.rows(), "tangent basis: d must be <= N");
  const Matrix gram = basis_.transpose() * basis_;
  const double defect =
      (gram - Matrix::Identity(basis_.cols(), basis_.cols())).cwiseAbs().maxCoeff();
  if (defect >= kOrthonormalTol)
    throw std::invalid_argument("tangent basis: columns not orthonormal (defect " +
                                std::to_string(defect) + ")");
}

Matrix dominant_subspace(const Matrix& columns, Index d) {
  const Index n = columns.rows();
  const Index p = columns.cols();
  require(n >= 1, "dominant_subspace: empty ambient space");
  require(d >= 1 && d <= n, "dominant_subspace: need 1 <= d <= N");

  Matrix basis(n, 0);
  if (p > 0) {
    // Both branches diagonalize the same operator; the smaller side is chosen.
    // Eigenvalues come back ascending and are consumed from the top, which
    // fixes the order under ties.
    if (p <= n) {
      Eigen::SelfAdjointEigenSolver<Matrix> eigen(columns.transpose() * columns);
      const Vector& values = eigen.eigenvalues();
      const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300);
      const double tol = scale * 1e-24;  // squared singular values
      const Index keep = std::min(d, p);
      basis.resize(n, keep);
      Index have = 0;
      for (Index r = 0; r < keep; ++r) {
        const Index idx = p - 1 - r;
        if (values[idx] <= tol) break;  // numerically rank deficient
        basis.col(have++) = columns * eigen.eigenvectors().col(idx) / std::sqrt(values[idx]);
      }
      basis.conservativeResize(n, have);
      // The Gram route loses a little orthogonality for clustered spectra;
      // re-orthonormalize explicitly.
      if (have > 0) {
        Eigen::HouseholderQR<Matrix> qr(basis);
        Matrix q = qr.householderQ() * Matrix::Identity(n, have);
        // Fix signs so the result does not depend on QR internals.
        for (Index c = 0; c < have; ++c) {
          Index pivot = 0;
          q.col(c).cwiseAbs().maxCoeff(&pivot);
          if (q(pivot, c) < 0.0) q.col(c) = -q.col(c);
        }
        basis = q;
      }
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> eigen(columns * columns.transpose());
      const Vector& values = eigen.eigenvalues();
      const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300);
      const double tol = scale * 1e-24;
      basis.resize(n, d);
      Index have = 0;
      for (Index r = 0; r < d; ++r) {
        const Index idx = n - 1 - r;
        if (values[idx] <= tol) break;
        basis.col(have++) = eigen.eigenvectors().col(idx);
      }
      basis.conservativeResize(n, have);
    }
  }
  if (basis.cols() < d) complete_basis(basis, d);
  return basis;
}

TangentBasis estimate_tangent(const SampleSet& samples, const NeighborGraph& graph,
                              int i, Index d) {
  require(d >= 1 && d <= samples.dim(), "estimate_tangent: need 1 <= d <= N");
  if (graph.node_count() != samples.count())
    throw std::invalid_argument("estimate_tangent: graph/sample size mismatch");
  const std::vector<int>& nbrs = neighbors(graph, i);
  if (nbrs.empty())
    throw std::invalid_argument("estimate_tangent: node " + std::to_string(i) +
                                " is isolated");
  // Shift the neighborhood so x_i sits at the origin; x_i itself becomes the
  // zero vector and is dropped.
  Matrix shifted(samples.dim(), static_cast<Index>(nbrs.size()));
  for (std::size_t c = 0; c < nbrs.size(); ++c)
    shifted.col(static_cast<Index>(c)) =
        (samples.data.row(nbrs[c]) - samples.data.row(i)).transpose();
  return TangentBasis(dominant_subspace(shifted, d));
}

std::vector<TangentBasis> estimate_tangents(const SampleSet& samples,
                                            const NeighborGraph& graph, Index d,
                                            int threads) {
  const Index m = samples.count();
  std::vector<TangentBasis> tangents(static_cast<std::size_t>(m));
  parallel_for(m, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      tangents[static_cast<std::size_t>(i)] =
          estimate_tangent(samples, graph, static_cast<int>(i), d);
  });
  return tangents;
}

double projection_distance(const TangentBasis& a, const TangentBasis& b) {
  require(a.ambient_dim() == b.ambient_dim() && a.subspace_dim() == b.subspace_dim(),
          "projection_distance: dimension mismatch");
  const double d = static_cast<double>(a.subspace_dim());
  // Canonical argument order makes the evaluation bitwise symmetric.
  const Matrix* first = &a.matrix();
  const Matrix* second = &b.matrix();
  if (std::lexicographical_compare(second->data(), second->data() + second->size(),
                                   first->data(), first->data() + first->size()))
    std::swap(first, second);
  // The radicand d - tr(A^T B B^T A) = d - ||A^T B||_F^2 equals
  // ||B - A (A^T B)||_F^2 for orthonormal bases. The residual form is used
  // because the direct difference cancels catastrophically near zero
  // distance (floor ~sqrt(eps)).
  const Matrix overlap = first->transpose() * (*second);
  double radicand = (*second - (*first) * overlap).squaredNorm();
  if (radicand < -1e-9 || radicand > d + 1e-9)
    throw std::runtime_error("projection_distance: radicand " +
                             std::to_string(radicand) + " out of range");
  radicand = std::clamp(radicand, 0.0, d);
  if (radicand < 1e-24) radicand = 0.0;  // below machine noise: equal subspaces
  return std::sqrt(radicand);
}

TangentBasis extrinsic_mean(std::span<const TangentBasis> bases,
                            std::span<const double> weights) {
  require(!bases.empty(), "extrinsic_mean: empty basis list");
  require(weights.size() == bases.size(), "extrinsic_mean: weight count mismatch");
  const Index n = bases.front().ambient_dim();
  const Index d = bases.front().subspace_dim();
  for (const TangentBasis& basis : bases)
    require(basis.ambient_dim() == n && basis.subspace_dim() == d,
            "extrinsic_mean: mixed dimensions");
  Matrix stack(n, static_cast<Index>(bases.size()) * d);
  for (std::size_t i = 0; i < bases.size(); ++i) {
    require(weights[i] > 0.0, "extrinsic_mean: weights must be positive");
    stack.middleCols(static_cast<Index>(i) * d, d) =
        std::sqrt(weights[i]) * bases[i].matrix();
  }
  return TangentBasis(dominant_subspace(stack, d));
}

TangentBasis extrinsic_mean(std::span<const TangentBasis> bases) {
  const std::vector<double> weights(bases.size(), 1.0);
  return extrinsic_mean(bases, weights);
}

double sum_sq_dist_to_mean(std::span<const TangentBasis> bases,
                           const TangentBasis& mean) {
  double total = 0.0;
  for (const TangentBasis& basis : bases) {
    const double dist = projection_distance(basis, mean);
    total += dist * dist;
  }
  return total;
}

}  // namespace mfa
