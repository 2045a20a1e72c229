#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mfa/types.hpp"

namespace mfa {

/// A set of m samples in R^N, one per row, with optional integer labels.
struct SampleSet {
  Matrix data;
  std::optional<Eigen::VectorXi> labels;

  Index count() const { return data.rows(); }
  Index dim() const { return data.cols(); }
};

/// Throws std::invalid_argument if the set violates its invariants
/// (finite entries, m >= 1, N >= 1, label length == m).
void validate(const SampleSet& set);

/// Generated samples together with the surface parameters that produced them.
struct ManifoldSample {
  SampleSet samples;
  Vector t;  // position along the curve direction
  Vector h;  // position along the extruded direction
};

// Swiss roll: x = t cos t, y = h, z = t sin t with t ~ U[3pi/2, 9pi/2],
// h ~ U[0, 21]; optional isotropic Gaussian noise added to all coordinates.
ManifoldSample gen_swiss_roll_detailed(Index n, double noise_sigma, std::uint64_t seed);
SampleSet gen_swiss_roll(Index n, double noise_sigma, std::uint64_t seed);

// S-curve: x = sin t, y = h, z = sign(t) (cos t - 1) with t ~ U[-3pi/2, 3pi/2],
// h ~ U[0, 2].
ManifoldSample gen_s_curve_detailed(Index n, double noise_sigma, std::uint64_t seed);
SampleSet gen_s_curve(Index n, double noise_sigma, std::uint64_t seed);

enum class MatrixFormat { kCsv, kRawF64 };

/// raw-f64: 16-byte header (little-endian u64 m, N) followed by m*N
/// little-endian doubles, row-major. CSV: one sample per line; when
/// labels_in_last_column is set the final column is parsed as an integer label.
SampleSet load_matrix(const std::filesystem::path& path, MatrixFormat format,
                      bool labels_in_last_column = false);
void save_matrix(const SampleSet& set, const std::filesystem::path& path,
                 MatrixFormat format, bool write_labels = false);

/// Standard big-endian IDX pair (magic 0x803 images, 0x801 labels). Pixels are
/// flattened row-major and scaled to [0, 1].
SampleSet load_idx(const std::filesystem::path& images_path,
                   const std::filesystem::path& labels_path);

/// Square patches with uniformly random top-left corners, sampled without
/// replacement. Each patch is flattened row-major and normalized to zero mean
/// and unit variance (population variance); constant patches are discarded.
SampleSet extract_patches(const Matrix& image, int patch_size, Index max_patches,
                          std::uint64_t seed);

/// Round-robin over several images until max_patches are collected.
SampleSet extract_patches(const std::vector<Matrix>& images, int patch_size,
                          Index max_patches, std::uint64_t seed);

/// Minimal grayscale PGM reader (binary P5 or ASCII P2), values scaled to [0, 1].
Matrix load_pgm(const std::filesystem::path& path);

}  // namespace mfa
