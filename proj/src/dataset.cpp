#include "mfa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "mfa/rng.hpp"

namespace mfa {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  return out;
}

void write_u64_le(std::ostream& out, std::uint64_t value) {
  unsigned char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(value >> (8 * b));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw std::runtime_error("raw-f64: truncated header");
  std::uint64_t value = 0;
  for (int b = 7; b >= 0; --b) value = (value << 8) | bytes[b];
  return value;
}

std::uint32_t read_u32_be(std::istream& in, const char* what) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) throw std::runtime_error(std::string("idx: truncated ") + what);
  return (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
         (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
}

ManifoldSample gen_surface(Index n, double noise_sigma, std::uint64_t seed,
                           double t_lo, double t_hi, double h_lo, double h_hi,
                           Vector (*point)(double, double)) {
  require(n >= 1, "generator: n must be >= 1");
  require(noise_sigma >= 0.0, "generator: noise_sigma must be >= 0");
  Rng rng(seed);
  ManifoldSample out;
  out.samples.data.resize(n, 3);
  out.t.resize(n);
  out.h.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double t = rng.uniform(t_lo, t_hi);
    const double h = rng.uniform(h_lo, h_hi);
    out.t[i] = t;
    out.h[i] = h;
    out.samples.data.row(i) = point(t, h).transpose();
  }
  if (noise_sigma > 0.0) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < 3; ++j) out.samples.data(i, j) += noise_sigma * rng.normal();
  }
  return out;
}

}  // namespace

void validate(const SampleSet& set) {
  require(set.data.rows() >= 1, "sample set: m must be >= 1");
  require(set.data.cols() >= 1, "sample set: N must be >= 1");
  require(set.data.allFinite(), "sample set: entries must be finite");
  if (set.labels)
    require(set.labels->size() == set.data.rows(),
            "sample set: label count must equal sample count");
}

ManifoldSample gen_swiss_roll_detailed(Index n, double noise_sigma, std::uint64_t seed) {
  return gen_surface(n, noise_sigma, seed, 1.5 * kPi, 4.5 * kPi, 0.0, 21.0,
                     [](double t, double h) {
                       Vector p(3);
                       p << t * std::cos(t), h, t * std::sin(t);
                       return p;
                     });
}

SampleSet gen_swiss_roll(Index n, double noise_sigma, std::uint64_t seed) {
  return gen_swiss_roll_detailed(n, noise_sigma, seed).samples;
}

ManifoldSample gen_s_curve_detailed(Index n, double noise_sigma, std::uint64_t seed) {
  return gen_surface(n, noise_sigma, seed, -1.5 * kPi, 1.5 * kPi, 0.0, 2.0,
                     [](double t, double h) {
                       Vector p(3);
                       const double sign = t < 0.0 ? -1.0 : 1.0;
                       p << std::sin(t), h, sign * (std::cos(t) - 1.0);
                       return p;
                     });
}

SampleSet gen_s_curve(Index n, double noise_sigma, std::uint64_t seed) {
  return gen_s_curve_detailed(n, noise_sigma, seed).samples;
}

namespace {

SampleSet load_csv(const std::filesystem::path& path, bool labels_in_last_column) {
  std::ifstream in = open_input(path, std::ios::in);
  std::vector<std::vector<double>> rows;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    Index col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw std::runtime_error("csv parse error at row " + std::to_string(line_no) +
                                 ", column " + std::to_string(col) + " in " +
                                 path.string());
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("csv: row " + std::to_string(line_no) + " has " +
                               std::to_string(row.size()) + " columns, expected " +
                               std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("csv: no samples in " + path.string());

  const Index m = static_cast<Index>(rows.size());
  Index n_cols = static_cast<Index>(rows.front().size());
  if (labels_in_last_column && n_cols < 2)
    throw std::runtime_error("csv: label column requested but only one column present");

  SampleSet set;
  const Index dim = labels_in_last_column ? n_cols - 1 : n_cols;
  set.data.resize(m, dim);
  if (labels_in_last_column) set.labels.emplace(m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < dim; ++j) set.data(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (labels_in_last_column) {
      const double raw = rows[static_cast<std::size_t>(i)].back();
      if (raw != std::floor(raw))
        throw std::runtime_error("csv: non-integer label at row " + std::to_string(i + 1));
      (*set.labels)[i] = static_cast<int>(raw);
    }
  }
  return set;
}

SampleSet load_raw_f64(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, std::ios::binary);
  const std::uint64_t m = read_u64_le(in);
  const std::uint64_t dim = read_u64_le(in);
  if (m == 0 || dim == 0) throw std::runtime_error("raw-f64: no samples in " + path.string());
  SampleSet set;
  set.data.resize(static_cast<Index>(m), static_cast<Index>(dim));
  std::vector<double> row(dim);
  for (std::uint64_t i = 0; i < m; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(dim * sizeof(double)));
    if (!in)
      throw std::runtime_error("raw-f64: truncated payload at row " + std::to_string(i) +
                               " in " + path.string());
    for (std::uint64_t j = 0; j < dim; ++j)
      set.data(static_cast<Index>(i), static_cast<Index>(j)) = row[j];
  }
  return set;
}

}  // namespace

SampleSet load_matrix(const std::filesystem::path& path, MatrixFormat format,
                      bool labels_in_last_column) {
  SampleSet set = format == MatrixFormat::kCsv ? load_csv(path, labels_in_last_column)
                                               : load_raw_f64(path);
  validate(set);
  return set;
}

void save_matrix(const SampleSet& set, const std::filesystem::path& path,
                 MatrixFormat format, bool write_labels) {
  validate(set);
  if (write_labels) require(set.labels.has_value(), "save_matrix: no labels to write");
  if (format == MatrixFormat::kCsv) {
    std::ofstream out = open_output(path, std::ios::out);
    out.precision(17);
    for (Index i = 0; i < set.count(); ++i) {
      for (Index j = 0; j < set.dim(); ++j) {
        if (j) out << ',';
        out << set.data(i, j);
      }
      if (write_labels) out << ',' << (*set.labels)[i];
      out << '\n';
    }
  } else {
    std::ofstream out = open_output(path, std::ios::binary);
    write_u64_le(out, static_cast<std::uint64_t>(set.count()));
    write_u64_le(out, static_cast<std::uint64_t>(set.dim()));
    std::vector<double> row(static_cast<std::size_t>(set.dim()));
    for (Index i = 0; i < set.count(); ++i) {
      for (Index j = 0; j < set.dim(); ++j) row[static_cast<std::size_t>(j)] = set.data(i, j);
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
  }
}

SampleSet load_idx(const std::filesystem::path& images_path,
                   const std::filesystem::path& labels_path) {
  std::ifstream images = open_input(images_path, std::ios::binary);
  const std::uint32_t image_magic = read_u32_be(images, "image magic");
  if (image_magic != 0x00000803u)
    throw std::runtime_error("idx: image magic mismatch in " + images_path.string());
  const std::uint32_t count = read_u32_be(images, "image count");
  const std::uint32_t rows = read_u32_be(images, "image rows");
  const std::uint32_t cols = read_u32_be(images, "image cols");

  std::ifstream labels = open_input(labels_path, std::ios::binary);
  const std::uint32_t label_magic = read_u32_be(labels, "label magic");
  if (label_magic != 0x00000801u)
    throw std::runtime_error("idx: label magic mismatch in " + labels_path.string());
  const std::uint32_t label_count = read_u32_be(labels, "label count");
  if (label_count != count)
    throw std::runtime_error("idx: image/label count mismatch (" + std::to_string(count) +
                             " images vs " + std::to_string(label_count) + " labels)");
  if (count == 0) throw std::runtime_error("idx: no samples");

  const std::size_t pixels = std::size_t{rows} * cols;
  SampleSet set;
  set.data.resize(static_cast<Index>(count), static_cast<Index>(pixels));
  set.labels.emplace(static_cast<Index>(count));

  std::vector<unsigned char> buffer(pixels);
  for (std::uint32_t i = 0; i < count; ++i) {
    images.read(reinterpret_cast<char*>(buffer.data()),
                static_cast<std::streamsize>(pixels));
    if (!images)
      throw std::runtime_error("idx: truncated image payload at index " + std::to_string(i));
    for (std::size_t p = 0; p < pixels; ++p)
      set.data(static_cast<Index>(i), static_cast<Index>(p)) = buffer[p] / 255.0;
  }
  std::vector<unsigned char> raw_labels(count);
  labels.read(reinterpret_cast<char*>(raw_labels.data()),
              static_cast<std::streamsize>(count));
  if (!labels) throw std::runtime_error("idx: truncated label payload");
  for (std::uint32_t i = 0; i < count; ++i)
    (*set.labels)[static_cast<Index>(i)] = raw_labels[i];
  return set;
}

SampleSet extract_patches(const Matrix& image, int patch_size, Index max_patches,
                          std::uint64_t seed) {
  return extract_patches(std::vector<Matrix>{image}, patch_size, max_patches, seed);
}

SampleSet extract_patches(const std::vector<Matrix>& images, int patch_size,
                          Index max_patches, std::uint64_t seed) {
  require(patch_size >= 1, "extract_patches: patch_size must be >= 1");
  require(max_patches >= 1, "extract_patches: max_patches must be >= 1");
  require(!images.empty(), "extract_patches: no images");
  for (const Matrix& image : images)
    if (image.rows() < patch_size || image.cols() < patch_size)
      throw std::invalid_argument("extract_patches: image smaller than patch");

  Rng rng(seed);
  // Per-image shuffled corner queues; corners are drawn without replacement.
  struct Corners {
    std::vector<std::pair<Index, Index>> order;
    std::size_t next = 0;
  };
  std::vector<Corners> queues(images.size());
  for (std::size_t im = 0; im < images.size(); ++im) {
    const Index max_r = images[im].rows() - patch_size + 1;
    const Index max_c = images[im].cols() - patch_size + 1;
    auto& order = queues[im].order;
    order.reserve(static_cast<std::size_t>(max_r * max_c));
    for (Index r = 0; r < max_r; ++r)
      for (Index c = 0; c < max_c; ++c) order.emplace_back(r, c);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
  }

  const Index patch_dim = static_cast<Index>(patch_size) * patch_size;
  std::vector<Vector> patches;
  bool exhausted = false;
  while (static_cast<Index>(patches.size()) < max_patches && !exhausted) {
    exhausted = true;
    for (std::size_t im = 0; im < images.size(); ++im) {
      auto& queue = queues[im];
      if (queue.next >= queue.order.size()) continue;
      exhausted = false;
      const auto [r, c] = queue.order[queue.next++];
      Vector patch(patch_dim);
      Index p = 0;
      for (int dr = 0; dr < patch_size; ++dr)
        for (int dc = 0; dc < patch_size; ++dc) patch[p++] = images[im](r + dr, c + dc);
      const double mean = patch.mean();
      patch.array() -= mean;
      const double variance = patch.squaredNorm() / static_cast<double>(patch_dim);
      if (variance <= 0.0) continue;  // constant patch
      patch /= std::sqrt(variance);
      patches.push_back(std::move(patch));
      if (static_cast<Index>(patches.size()) >= max_patches) break;
    }
  }

  SampleSet set;
  set.data.resize(static_cast<Index>(patches.size()), patch_dim);
  for (Index i = 0; i < set.count(); ++i)
    set.data.row(i) = patches[static_cast<std::size_t>(i)].transpose();
  return set;
}

Matrix load_pgm(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, std::ios::binary);
  auto next_token = [&in, &path]() {
    std::string token;
    while (in >> token) {
      if (token[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return token;
    }
    throw std::runtime_error("pgm: truncated header in " + path.string());
  };
  const std::string magic = next_token();
  if (magic != "P5" && magic != "P2")
    throw std::runtime_error("pgm: unsupported magic '" + magic + "'");
  const Index cols = std::stoll(next_token());
  const Index rows = std::stoll(next_token());
  const long maxval = std::stol(next_token());
  if (rows <= 0 || cols <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("pgm: unsupported dimensions or maxval");

  Matrix image(rows, cols);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> buffer(static_cast<std::size_t>(rows * cols));
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size()));
    if (!in) throw std::runtime_error("pgm: truncated payload in " + path.string());
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c)
        image(r, c) = buffer[static_cast<std::size_t>(r * cols + c)] / double(maxval);
  } else {
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) {
        long value = 0;
        if (!(in >> value)) throw std::runtime_error("pgm: truncated payload");
        image(r, c) = value / double(maxval);
      }
  }
  return image;
}

}  // namespace mfa
