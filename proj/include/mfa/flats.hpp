#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mfa/clustering.hpp"
#include "mfa/dataset.hpp"
#include "mfa/types.hpp"

namespace mfa {

/// A d-dimensional affine subspace of R^N: origin plus orthonormal basis.
struct Flat {
  Vector origin;
  Matrix basis;  // N x d, orthonormal columns

  Index ambient_dim() const { return origin.size(); }
  Index flat_dim() const { return basis.cols(); }
};

/// Least-squares flat through the members' sample mean: basis is the
/// d-dominant subspace of the mean-shifted member matrix (rank-deficient
/// member sets are padded deterministically).
Flat fit_flat(const SampleSet& samples, std::span<const int> members, Index d);

/// One flat per cluster of the partition, in partition order.
std::vector<Flat> fit_flats(const SampleSet& samples, const Partition& partition,
                            Index d);

/// Orthogonal projection onto the flat: m + F F^T (x - m). Idempotent.
Vector project(const Flat& flat, const Vector& x);

double residual_distance(const Flat& flat, const Vector& x);

/// Mean squared reconstruction error: each sample projects onto its own
/// cluster's flat; mean of squared residuals over all samples.
double msre(const SampleSet& samples, const std::vector<int>& labels,
            const std::vector<Flat>& flats);

/// Serialization: a manifest JSON plus one raw-f64 origin/basis pair per flat.
void save_flats(const std::vector<Flat>& flats, const std::filesystem::path& dir);
std::vector<Flat> load_flats(const std::filesystem::path& dir);

}  // namespace mfa
