#include "mfa/classify.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "mfa/parallel.hpp"
#include "mfa/rng.hpp"

namespace mfa {

Index FlatFeatureModel::ambient_dim() const {
  for (const auto& class_flats : flats)
    if (!class_flats.empty()) return class_flats.front().ambient_dim();
  return 0;
}

Index FlatFeatureModel::feature_dim() const {
  Index total = 0;
  for (const auto& class_flats : flats) total += static_cast<Index>(class_flats.size());
  return total;
}

FlatFeatureModel train_flat_model(const std::map<int, SampleSet>& per_class,
                                  const TrainConfig& config) {
  if (per_class.empty()) throw std::invalid_argument("train: no classes");
  if (config.flats_per_class < 1)
    throw std::invalid_argument("train: flats_per_class must be >= 1");

  FlatFeatureModel model;
  model.classes.reserve(per_class.size());
  std::vector<const SampleSet*> sets;
  for (const auto& [label, set] : per_class) {
    model.classes.push_back(label);
    sets.push_back(&set);
  }
  model.flats.resize(sets.size());

  // Classes are independent; each worker writes only its own slot.
  parallel_for(static_cast<std::int64_t>(sets.size()), config.threads,
               [&](std::int64_t begin, std::int64_t end) {
                 for (std::int64_t c = begin; c < end; ++c) {
                   const SampleSet& set = *sets[static_cast<std::size_t>(c)];
                   const int m = static_cast<int>(set.count());
                   std::vector<Flat> class_flats;
                   if (m == 1) {
                     // One sample: the flat is the point with any valid basis.
                     class_flats.push_back(fit_flat(set, std::vector<int>{0}, config.d));
                   } else {
                     const int k = std::clamp(config.k, 1, m - 1);
                     const int target = std::min(config.flats_per_class, m);
                     AcdtOptions options;
                     options.mode = config.mode;
                     options.threads = 1;  // outer loop owns the parallelism
                     const AcdtResult result = acdt(set, k, target, config.d, options);
                     class_flats = fit_flats(set, result.partition, config.d);
                   }
                   model.flats[static_cast<std::size_t>(c)] = std::move(class_flats);
                 }
               });
  return model;
}

Vector featurize(const FlatFeatureModel& model, const Vector& x) {
  if (x.size() != model.ambient_dim())
    throw std::invalid_argument("featurize: dimension mismatch");
  Vector features(model.feature_dim());
  Index w = 0;
  for (const auto& class_flats : model.flats)
    for (const Flat& flat : class_flats) features[w++] = residual_distance(flat, x);
  return features;
}

Matrix featurize_all(const FlatFeatureModel& model, const Matrix& rows, int threads) {
  Matrix features(rows.rows(), model.feature_dim());
  parallel_for(rows.rows(), threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      features.row(i) = featurize(model, rows.row(i).transpose()).transpose();
  });
  return features;
}

namespace {

/// Index of the row of `points` nearest to `query`; ties toward the smaller
/// index. Distances via the expanded form with precomputed row norms.
int nearest_row(const Matrix& points, const Vector& point_sq_norms, const Vector& query) {
  const Vector scores = point_sq_norms - 2.0 * (points * query);
  int best = 0;
  double best_score = scores[0];
  for (Index i = 1; i < scores.size(); ++i)
    if (scores[i] < best_score) {
      best_score = scores[i];
      best = static_cast<int>(i);
    }
  return best;
}

}  // namespace

int predict_nn(const Matrix& train_points, const Eigen::VectorXi& train_labels,
               const Vector& query) {
  if (train_points.rows() == 0) throw std::invalid_argument("predict: empty bank");
  if (train_points.rows() != train_labels.size())
    throw std::invalid_argument("predict: label count mismatch");
  if (train_points.cols() != query.size())
    throw std::invalid_argument("predict: dimension mismatch");
  const Vector sq_norms = train_points.rowwise().squaredNorm();
  return train_labels[nearest_row(train_points, sq_norms, query)];
}

Eigen::VectorXi predict_nn_all(const Matrix& train_points,
                               const Eigen::VectorXi& train_labels,
                               const Matrix& queries, int threads) {
  if (train_points.rows() == 0) throw std::invalid_argument("predict: empty bank");
  if (train_points.rows() != train_labels.size())
    throw std::invalid_argument("predict: label count mismatch");
  if (train_points.cols() != queries.cols())
    throw std::invalid_argument("predict: dimension mismatch");
  const Vector sq_norms = train_points.rowwise().squaredNorm();
  Eigen::VectorXi predicted(queries.rows());
  parallel_for(queries.rows(), threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i)
      predicted[i] = train_labels[nearest_row(train_points, sq_norms,
                                              queries.row(i).transpose())];
  });
  return predicted;
}

PcaProjector pca_fit(const Matrix& rows, Index dims) {
  if (rows.rows() < 1) throw std::invalid_argument("pca: empty data");
  if (dims < 1 || dims > rows.cols())
    throw std::invalid_argument("pca: need 1 <= dims <= N");
  PcaProjector projector;
  projector.mean = rows.colwise().mean().transpose();
  Matrix centered = rows.transpose();  // N x m, one sample per column
  centered.colwise() -= projector.mean;
  projector.components = dominant_subspace(centered, dims);
  return projector;
}

Matrix pca_transform(const PcaProjector& projector, const Matrix& rows) {
  if (rows.cols() != projector.mean.size())
    throw std::invalid_argument("pca: dimension mismatch");
  return (rows.rowwise() - projector.mean.transpose()) * projector.components;
}

void save_model(const FlatFeatureModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["classes"] = model.classes;
  manifest["flats_per_class"] = nlohmann::json::array();
  for (std::size_t c = 0; c < model.flats.size(); ++c) {
    const std::string class_dir = "class_" + std::to_string(model.classes[c]);
    save_flats(model.flats[c], dir / class_dir);
    manifest["flats_per_class"].push_back(
        {{"label", model.classes[c]}, {"dir", class_dir}});
  }
  std::ofstream out(dir / "model.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "model.json").string());
  out << manifest.dump(2) << '\n';
}

FlatFeatureModel load_model(const std::filesystem::path& dir) {
  std::ifstream in(dir / "model.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "model.json").string());
  nlohmann::json manifest;
  in >> manifest;
  FlatFeatureModel model;
  for (const auto& entry : manifest.at("flats_per_class")) {
    model.classes.push_back(entry.at("label").get<int>());
    model.flats.push_back(load_flats(dir / entry.at("dir").get<std::string>()));
  }
  return model;
}

std::map<int, SampleSet> split_by_class(const SampleSet& samples, Index cap,
                                        std::uint64_t seed) {
  if (!samples.labels) throw std::invalid_argument("split: samples carry no labels");
  if (cap < 1) throw std::invalid_argument("split: cap must be >= 1");
  std::map<int, std::vector<int>> indices;
  for (Index i = 0; i < samples.count(); ++i)
    indices[(*samples.labels)[i]].push_back(static_cast<int>(i));

  std::map<int, SampleSet> per_class;
  for (auto& [label, idx] : indices) {
    if (static_cast<Index>(idx.size()) > cap) {
      Rng rng(seed + static_cast<std::uint64_t>(label));
      // Partial Fisher-Yates: the first `cap` slots become the sample.
      for (Index i = 0; i < cap; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) +
            static_cast<std::size_t>(rng.below(idx.size() - static_cast<std::size_t>(i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
      }
      idx.resize(static_cast<std::size_t>(cap));
      std::sort(idx.begin(), idx.end());
    }
    SampleSet subset;
    subset.data.resize(static_cast<Index>(idx.size()), samples.dim());
    for (std::size_t r = 0; r < idx.size(); ++r)
      subset.data.row(static_cast<Index>(r)) = samples.data.row(idx[r]);
    per_class.emplace(label, std::move(subset));
  }
  return per_class;
}

}  // namespace mfa
