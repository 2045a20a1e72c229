#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mfa/dataset.hpp"
#include "mfa/rng.hpp"

using namespace mfa;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("mfa_dataset_" + name);
}

void write_idx_images(const std::filesystem::path& path, std::uint32_t magic,
                      std::uint32_t count, std::uint32_t rows, std::uint32_t cols,
                      const std::vector<unsigned char>& pixels) {
  std::ofstream out(path, std::ios::binary);
  auto put_be = [&out](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  put_be(magic);
  put_be(count);
  put_be(rows);
  put_be(cols);
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path, std::uint32_t magic,
                      const std::vector<unsigned char>& labels) {
  std::ofstream out(path, std::ios::binary);
  auto put_be = [&out](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  put_be(magic);
  put_be(static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

}  // namespace

TEST_SUITE_BEGIN("dataset");

TEST_CASE("swiss roll has requested shape") {
  const SampleSet set = gen_swiss_roll(5000, 0.0, 7);
  CHECK(set.count() == 5000);
  CHECK(set.dim() == 3);
  CHECK(set.data.allFinite());
}

TEST_CASE("single swiss roll point lies on the parametric surface") {
  const ManifoldSample sample = gen_swiss_roll_detailed(1, 0.0, 0);
  const double t = sample.t[0];
  const double h = sample.h[0];
  CHECK(sample.samples.data(0, 0) == doctest::Approx(t * std::cos(t)).epsilon(1e-12));
  CHECK(sample.samples.data(0, 1) == doctest::Approx(h).epsilon(1e-12));
  CHECK(sample.samples.data(0, 2) == doctest::Approx(t * std::sin(t)).epsilon(1e-12));
}

TEST_CASE("noise-free swiss roll satisfies x^2 + z^2 = t^2") {
  const ManifoldSample sample = gen_swiss_roll_detailed(1000, 0.0, 3);
  for (Index i = 0; i < 1000; ++i) {
    const double radius_sq = sample.samples.data(i, 0) * sample.samples.data(i, 0) +
                             sample.samples.data(i, 2) * sample.samples.data(i, 2);
    CHECK(std::abs(radius_sq - sample.t[i] * sample.t[i]) < 1e-9);
  }
}

TEST_CASE("s-curve shape and surface membership") {
  const SampleSet set = gen_s_curve(5000, 0.0, 7);
  CHECK(set.count() == 5000);
  CHECK(set.dim() == 3);

  const ManifoldSample one = gen_s_curve_detailed(1, 0.0, 0);
  const double t = one.t[0];
  const double sign = t < 0.0 ? -1.0 : 1.0;
  CHECK(one.samples.data(0, 0) == doctest::Approx(std::sin(t)).epsilon(1e-12));
  CHECK(one.samples.data(0, 2) ==
        doctest::Approx(sign * (std::cos(t) - 1.0)).epsilon(1e-12));
}

TEST_CASE("generators are bit-exact under reruns") {
  const SampleSet a = gen_s_curve(500, 0.1, 1);
  const SampleSet b = gen_s_curve(500, 0.1, 1);
  CHECK(a.data == b.data);
  const SampleSet c = gen_swiss_roll(500, 0.25, 11);
  const SampleSet d = gen_swiss_roll(500, 0.25, 11);
  CHECK(c.data == d.data);
}

TEST_CASE("csv readback") {
  const auto path = temp_file("three_rows.csv");
  {
    std::ofstream out(path);
    out << "1.5,2\n-3,4.25\n0,0\n";
  }
  const SampleSet set = load_matrix(path, MatrixFormat::kCsv);
  CHECK(set.count() == 3);
  CHECK(set.dim() == 2);
  CHECK(set.data(1, 1) == doctest::Approx(4.25));
}

TEST_CASE("csv with label column") {
  const auto path = temp_file("labeled.csv");
  {
    std::ofstream out(path);
    out << "1,2,0\n3,4,1\n";
  }
  const SampleSet set = load_matrix(path, MatrixFormat::kCsv, true);
  CHECK(set.dim() == 2);
  REQUIRE(set.labels.has_value());
  CHECK((*set.labels)[1] == 1);
}

TEST_CASE("empty file is rejected") {
  const auto path = temp_file("empty.csv");
  { std::ofstream out(path); }
  CHECK_THROWS_WITH_AS(load_matrix(path, MatrixFormat::kCsv),
                       doctest::Contains("no samples"), std::runtime_error);
}

TEST_CASE("csv parse errors name the position") {
  const auto path = temp_file("bad.csv");
  {
    std::ofstream out(path);
    out << "1,2\n3,oops\n";
  }
  CHECK_THROWS_WITH_AS(load_matrix(path, MatrixFormat::kCsv),
                       doctest::Contains("row 2"), std::runtime_error);
}

TEST_CASE("save/load round-trip is the identity") {
  Rng rng(42);
  for (const MatrixFormat format : {MatrixFormat::kCsv, MatrixFormat::kRawF64}) {
    SampleSet set;
    set.data.resize(17, 5);
    for (Index i = 0; i < set.count(); ++i)
      for (Index j = 0; j < set.dim(); ++j) set.data(i, j) = rng.normal();
    const auto path = temp_file(format == MatrixFormat::kCsv ? "rt.csv" : "rt.f64");
    save_matrix(set, path, format);
    const SampleSet loaded = load_matrix(path, format);
    REQUIRE(loaded.count() == set.count());
    REQUIRE(loaded.dim() == set.dim());
    // 17 significant digits round-trip doubles exactly in both formats.
    CHECK(loaded.data == set.data);
  }
}

TEST_CASE("raw-f64 truncation is reported") {
  const auto path = temp_file("short.f64");
  {
    SampleSet set;
    set.data = Matrix::Ones(4, 3);
    save_matrix(set, path, MatrixFormat::kRawF64);
  }
  std::filesystem::resize_file(path, 16 + 2 * 3 * sizeof(double));
  CHECK_THROWS_WITH_AS(load_matrix(path, MatrixFormat::kRawF64),
                       doctest::Contains("truncated"), std::runtime_error);
}

TEST_CASE("idx fixture with one 2x2 zero image") {
  const auto images = temp_file("one.idx3");
  const auto labels = temp_file("one.idx1");
  write_idx_images(images, 0x803, 1, 2, 2, {0, 0, 0, 0});
  write_idx_labels(labels, 0x801, {7});
  const SampleSet set = load_idx(images, labels);
  CHECK(set.count() == 1);
  CHECK(set.dim() == 4);
  CHECK(set.data.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(set.labels.has_value());
  CHECK((*set.labels)[0] == 7);
}

TEST_CASE("idx error paths are distinct") {
  const auto images = temp_file("err.idx3");
  const auto labels = temp_file("err.idx1");

  write_idx_images(images, 0x123, 1, 2, 2, {0, 0, 0, 0});
  write_idx_labels(labels, 0x801, {1});
  CHECK_THROWS_WITH_AS(load_idx(images, labels), doctest::Contains("image magic"),
                       std::runtime_error);

  write_idx_images(images, 0x803, 2, 2, 2, {9, 9, 9, 9, 9, 9, 9, 9});
  write_idx_labels(labels, 0x801, {1});
  CHECK_THROWS_WITH_AS(load_idx(images, labels), doctest::Contains("count mismatch"),
                       std::runtime_error);

  write_idx_images(images, 0x803, 2, 2, 2, {9, 9, 9});  // payload too short
  write_idx_labels(labels, 0x801, {1, 2});
  CHECK_THROWS_WITH_AS(load_idx(images, labels), doctest::Contains("truncated"),
                       std::runtime_error);
}

TEST_CASE("idx pixels scale to [0,1]") {
  const auto images = temp_file("scale.idx3");
  const auto labels = temp_file("scale.idx1");
  write_idx_images(images, 0x803, 1, 1, 2, {0, 255});
  write_idx_labels(labels, 0x801, {3});
  const SampleSet set = load_idx(images, labels);
  CHECK(set.data(0, 0) == 0.0);
  CHECK(set.data(0, 1) == 1.0);
}

TEST_CASE("patches are normalized to zero mean and unit variance") {
  Rng rng(5);
  Matrix image(32, 32);
  for (Index r = 0; r < 32; ++r)
    for (Index c = 0; c < 32; ++c) image(r, c) = rng.uniform();
  const SampleSet patches = extract_patches(image, 8, 100, 3);
  CHECK(patches.count() == 100);
  CHECK(patches.dim() == 64);
  for (Index i = 0; i < patches.count(); ++i) {
    const double mean = patches.data.row(i).mean();
    const double variance = patches.data.row(i).squaredNorm() / 64.0 - mean * mean;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(variance - 1.0) < 1e-9);
  }
}

TEST_CASE("constant image yields zero patches") {
  const Matrix image = Matrix::Constant(16, 16, 0.5);
  const SampleSet patches = extract_patches(image, 8, 10, 0);
  CHECK(patches.count() == 0);
}

TEST_CASE("image smaller than patch is rejected") {
  const Matrix image = Matrix::Zero(4, 4);
  CHECK_THROWS_AS(extract_patches(image, 8, 10, 0), std::invalid_argument);
}

TEST_CASE("pgm round-trip through the binary format") {
  const auto path = temp_file("img.pgm");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# comment line\n3 2\n255\n";
    const unsigned char pixels[6] = {0, 64, 128, 192, 255, 10};
    out.write(reinterpret_cast<const char*>(pixels), 6);
  }
  const Matrix image = load_pgm(path);
  CHECK(image.rows() == 2);
  CHECK(image.cols() == 3);
  CHECK(image(0, 0) == 0.0);
  CHECK(image(1, 2) == doctest::Approx(10.0 / 255.0));
}

TEST_SUITE_END();
