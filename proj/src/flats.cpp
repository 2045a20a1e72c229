#include "mfa/flats.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "mfa/grassmann.hpp"

namespace mfa {

Flat fit_flat(const SampleSet& samples, std::span<const int> members, Index d) {
  if (members.empty()) throw std::invalid_argument("fit_flat: empty member set");
  if (d < 1 || d > samples.dim())
    throw std::invalid_argument("fit_flat: need 1 <= d <= N");
  Flat flat;
  flat.origin = Vector::Zero(samples.dim());
  for (int x : members) flat.origin += samples.data.row(x).transpose();
  flat.origin /= static_cast<double>(members.size());

  Matrix shifted(samples.dim(), static_cast<Index>(members.size()));
  for (std::size_t c = 0; c < members.size(); ++c)
    shifted.col(static_cast<Index>(c)) =
        samples.data.row(members[c]).transpose() - flat.origin;
  flat.basis = dominant_subspace(shifted, d);
  return flat;
}

std::vector<Flat> fit_flats(const SampleSet& samples, const Partition& partition,
                            Index d) {
  std::vector<Flat> flats;
  flats.reserve(partition.clusters.size());
  for (const Cluster& cluster : partition.clusters)
    flats.push_back(fit_flat(samples, cluster.members, d));
  return flats;
}

Vector project(const Flat& flat, const Vector& x) {
  if (x.size() != flat.ambient_dim())
    throw std::invalid_argument("project: dimension mismatch");
  const Vector shifted = x - flat.origin;
  return flat.origin + flat.basis * (flat.basis.transpose() * shifted);
}

double residual_distance(const Flat& flat, const Vector& x) {
  return (x - project(flat, x)).norm();
}

double msre(const SampleSet& samples, const std::vector<int>& labels,
            const std::vector<Flat>& flats) {
  if (static_cast<Index>(labels.size()) != samples.count())
    throw std::invalid_argument("msre: label count must equal sample count");
  double total = 0.0;
  for (Index i = 0; i < samples.count(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= static_cast<int>(flats.size()))
      throw std::invalid_argument("msre: label " + std::to_string(label) +
                                  " has no flat");
    const double residual =
        residual_distance(flats[static_cast<std::size_t>(label)], samples.data.row(i).transpose());
    total += residual * residual;
  }
  return total / static_cast<double>(samples.count());
}

void save_flats(const std::vector<Flat>& flats, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["flat_count"] = flats.size();
  manifest["flats"] = nlohmann::json::array();
  for (std::size_t i = 0; i < flats.size(); ++i) {
    const Flat& flat = flats[i];
    const std::string stem = "flat_" + std::to_string(i);
    SampleSet origin;
    origin.data = flat.origin.transpose();
    save_matrix(origin, dir / (stem + "_origin.f64"), MatrixFormat::kRawF64);
    SampleSet basis;
    basis.data = flat.basis;
    save_matrix(basis, dir / (stem + "_basis.f64"), MatrixFormat::kRawF64);
    manifest["flats"].push_back({{"origin", stem + "_origin.f64"},
                                 {"basis", stem + "_basis.f64"},
                                 {"ambient_dim", flat.ambient_dim()},
                                 {"flat_dim", flat.flat_dim()}});
  }
  std::ofstream out(dir / "flats.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "flats.json").string());
  out << manifest.dump(2) << '\n';
}

std::vector<Flat> load_flats(const std::filesystem::path& dir) {
  std::ifstream in(dir / "flats.json");
  if (!in) throw std::runtime_error("cannot open " + (dir / "flats.json").string());
  nlohmann::json manifest;
  in >> manifest;
  std::vector<Flat> flats;
  for (const auto& entry : manifest.at("flats")) {
    Flat flat;
    const SampleSet origin =
        load_matrix(dir / entry.at("origin").get<std::string>(), MatrixFormat::kRawF64);
    if (origin.count() != 1) throw std::runtime_error("flats: origin must be one row");
    flat.origin = origin.data.row(0).transpose();
    const SampleSet basis =
        load_matrix(dir / entry.at("basis").get<std::string>(), MatrixFormat::kRawF64);
    flat.basis = basis.data;
    if (flat.basis.rows() != flat.origin.size())
      throw std::runtime_error("flats: basis/origin dimension mismatch");
    flats.push_back(std::move(flat));
  }
  return flats;
}

}  // namespace mfa
