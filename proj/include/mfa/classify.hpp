#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "mfa/clustering.hpp"
#include "mfa/flats.hpp"

namespace mfa {

/// Per-class manifold approximations: an ordered label list and the flats
/// fitted to each class's clusters. The feature map sends a sample to its
/// residual distance from every flat, class-major then flat-index order.
struct FlatFeatureModel {
  std::vector<int> classes;
  std::vector<std::vector<Flat>> flats;  // aligned with classes

  Index ambient_dim() const;
  Index feature_dim() const;
};

struct TrainConfig {
  int flats_per_class = 10;
  int k = 20;
  Index d = 4;
  DissimilarityMode mode = DissimilarityMode::kBound;
  int threads = 0;
};

/// Runs the merge pipeline and flat fitting per class independently.
/// Degenerate classes are handled by clamping: k to class size - 1 and the
/// cluster target to the class size.
FlatFeatureModel train_flat_model(const std::map<int, SampleSet>& per_class,
                                  const TrainConfig& config);

Vector featurize(const FlatFeatureModel& model, const Vector& x);
Matrix featurize_all(const FlatFeatureModel& model, const Matrix& rows,
                     int threads = 0);

/// 1-NN under Euclidean distance; ties resolve to the smallest training index.
int predict_nn(const Matrix& train_points, const Eigen::VectorXi& train_labels,
               const Vector& query);
Eigen::VectorXi predict_nn_all(const Matrix& train_points,
                               const Eigen::VectorXi& train_labels,
                               const Matrix& queries, int threads = 0);

/// Global PCA projector fitted on pooled training data.
struct PcaProjector {
  Vector mean;
  Matrix components;  // N x dims, orthonormal columns
};

PcaProjector pca_fit(const Matrix& rows, Index dims);
Matrix pca_transform(const PcaProjector& projector, const Matrix& rows);

void save_model(const FlatFeatureModel& model, const std::filesystem::path& dir);
FlatFeatureModel load_model(const std::filesystem::path& dir);

/// Uniform subsample without replacement of at most `cap` samples per class,
/// keyed by label. Selection for each class is seeded from the master seed
/// plus the class label.
std::map<int, SampleSet> split_by_class(const SampleSet& samples, Index cap,
                                        std::uint64_t seed);

}  // namespace mfa
