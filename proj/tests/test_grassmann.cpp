#include <doctest.h>

#include <cmath>

#include "mfa/grassmann.hpp"
#include "mfa/rng.hpp"
#include "oracles.hpp"

using namespace mfa;

namespace {

TangentBasis line(double angle) {
  Matrix basis(2, 1);
  basis << std::cos(angle), std::sin(angle);
  return TangentBasis(basis);
}

}  // namespace

TEST_SUITE_BEGIN("grassmann");

TEST_CASE("tangent basis rejects non-orthonormal columns") {
  Matrix bad(2, 2);
  bad << 1, 1, 0, 1;
  CHECK_THROWS_AS(TangentBasis{bad}, std::invalid_argument);
  CHECK_NOTHROW(TangentBasis{Matrix::Identity(3, 2)});
}

TEST_CASE("tangent estimation recovers an exact plane in R^5") {
  Rng rng(1);
  const Matrix plane = oracle::random_orthonormal(rng, 5, 2);
  SampleSet set;
  set.data.resize(12, 5);
  for (Index i = 0; i < 12; ++i) {
    Vector coeffs(2);
    coeffs << rng.normal(), rng.normal();
    set.data.row(i) = (plane * coeffs).transpose();
  }
  const NeighborGraph graph = build_knn_graph(set, 5);
  const TangentBasis truth(plane);
  for (int i = 0; i < 12; ++i) {
    const TangentBasis estimated = estimate_tangent(set, graph, i, 2);
    CHECK(projection_distance(estimated, truth) < 1e-8);
  }
}

TEST_CASE("rank-1 neighborhood gives the normalized difference direction") {
  SampleSet set;
  set.data.resize(2, 3);
  set.data << 1.0, 2.0, 3.0,
              4.0, 0.0, 3.0;
  const NeighborGraph graph = build_knn_graph(set, 1);
  const TangentBasis tangent = estimate_tangent(set, graph, 0, 1);
  Vector expected(3);
  expected << 3.0, -2.0, 0.0;
  expected.normalize();
  Matrix expected_basis(3, 1);
  expected_basis.col(0) = expected;
  CHECK(projection_distance(tangent, TangentBasis(expected_basis)) < 1e-12);
}

TEST_CASE("tangent estimation matches the Gram-matrix oracle") {
  Rng rng(9);
  SampleSet set;
  set.data.resize(15, 4);
  for (Index i = 0; i < 15; ++i)
    for (Index j = 0; j < 4; ++j) set.data(i, j) = rng.normal();
  const NeighborGraph graph = build_knn_graph(set, 6);

  for (int i = 0; i < 15; ++i) {
    const TangentBasis estimated = estimate_tangent(set, graph, i, 2);

    // Oracle: eigendecompose the N x N second-moment matrix of the shifted
    // neighborhood and take the top-2 eigenvectors.
    const auto& nbrs = neighbors(graph, i);
    Matrix second_moment = Matrix::Zero(4, 4);
    for (int j : nbrs) {
      const Vector diff = (set.data.row(j) - set.data.row(i)).transpose();
      second_moment += diff * diff.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eigen(second_moment);
    Matrix top(4, 2);
    top.col(0) = eigen.eigenvectors().col(3);
    top.col(1) = eigen.eigenvectors().col(2);
    CHECK(projection_distance(estimated, TangentBasis(top)) < 1e-8);
  }
}

TEST_CASE("isolated nodes and bad dimensions are rejected") {
  const NeighborGraph graph = NeighborGraph::from_edges(3, std::vector<std::pair<int, int>>{{0, 1}});
  SampleSet set;
  set.data = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(estimate_tangent(set, graph, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(estimate_tangent(set, graph, 0, 4), std::invalid_argument);
}

TEST_CASE("projection distance of identical and rotated bases is zero") {
  Rng rng(3);
  const Matrix basis = oracle::random_orthonormal(rng, 6, 3);
  const TangentBasis a(basis);
  CHECK(projection_distance(a, a) == 0.0);
  const Matrix rotation = oracle::random_rotation(rng, 3);
  const TangentBasis rotated(basis * rotation);
  CHECK(projection_distance(a, rotated) < 1e-9);
}

TEST_CASE("orthogonal lines in R^2 are at distance 1") {
  const TangentBasis e1 = line(0.0);
  const TangentBasis e2 = line(M_PI / 2.0);
  CHECK(projection_distance(e1, e2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("planar line pair evaluates to |sin theta|") {
  const double theta = M_PI / 6.0;
  CHECK(projection_distance(line(0.0), line(theta)) ==
        doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("dimension mismatch is rejected") {
  CHECK_THROWS_AS(projection_distance(TangentBasis(Matrix::Identity(3, 1)),
                                      TangentBasis(Matrix::Identity(4, 1))),
                  std::invalid_argument);
  CHECK_THROWS_AS(projection_distance(TangentBasis(Matrix::Identity(3, 1)),
                                      TangentBasis(Matrix::Identity(3, 2))),
                  std::invalid_argument);
}

TEST_CASE("metric axioms hold on random bases") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(5));
    const Index d = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    const TangentBasis a(oracle::random_orthonormal(rng, n, d));
    const TangentBasis b(oracle::random_orthonormal(rng, n, d));
    const TangentBasis c(oracle::random_orthonormal(rng, n, d));
    const double ab = projection_distance(a, b);
    const double ba = projection_distance(b, a);
    const double ac = projection_distance(a, c);
    const double bc = projection_distance(b, c);
    CHECK(ab == ba);  // symmetric evaluation is exact
    CHECK(ab >= 0.0);
    CHECK(ab <= std::sqrt(static_cast<double>(d)) + 1e-12);
    CHECK(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("basis rotation changes nothing") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const TangentBasis a(oracle::random_orthonormal(rng, 5, 2));
    const TangentBasis b(oracle::random_orthonormal(rng, 5, 2));
    const TangentBasis a_rot(a.matrix() * oracle::random_rotation(rng, 2));
    CHECK(std::abs(projection_distance(a, b) - projection_distance(a_rot, b)) < 1e-9);

    std::vector<TangentBasis> bases{a, b};
    std::vector<TangentBasis> rotated{a_rot, b};
    const TangentBasis mean = extrinsic_mean(bases);
    const TangentBasis mean_rot = extrinsic_mean(rotated);
    CHECK(projection_distance(mean, mean_rot) < 1e-8);
  }
}

TEST_CASE("upper bound sqrt(d) is attained for orthogonal subspaces") {
  for (Index d : {1, 2, 3}) {
    const Index n = 2 * d;
    Matrix first = Matrix::Zero(n, d);
    Matrix second = Matrix::Zero(n, d);
    for (Index c = 0; c < d; ++c) {
      first(c, c) = 1.0;
      second(d + c, c) = 1.0;
    }
    CHECK(projection_distance(TangentBasis(first), TangentBasis(second)) ==
          doctest::Approx(std::sqrt(static_cast<double>(d))).epsilon(1e-12));
  }
}

TEST_CASE("extrinsic mean of a repeated subspace is that subspace") {
  Rng rng(8);
  const Matrix basis = oracle::random_orthonormal(rng, 4, 2);
  std::vector<TangentBasis> bases;
  for (int i = 0; i < 5; ++i)
    bases.emplace_back(basis * oracle::random_rotation(rng, 2));
  const TangentBasis mean = extrinsic_mean(bases);
  CHECK(projection_distance(mean, TangentBasis(basis)) < 1e-8);
}

TEST_CASE("mean of symmetric line pair is the bisector") {
  const double theta = 0.7;
  std::vector<TangentBasis> bases{line(theta), line(-theta)};
  const TangentBasis mean = extrinsic_mean(bases);
  CHECK(projection_distance(mean, line(0.0)) < 1e-8);
}

TEST_CASE("extrinsic mean matches the grid-search oracle") {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<TangentBasis> bases;
    for (int i = 0; i < 5; ++i)
      bases.emplace_back(oracle::random_orthonormal(rng, 3, 1));
    const TangentBasis mean = extrinsic_mean(bases);
    const Vector best = oracle::grid_search_mean_line(bases, 1e-3);
    Matrix best_basis(3, 1);
    best_basis.col(0) = best;
    CHECK(projection_distance(mean, TangentBasis(best_basis)) < 1e-2);
  }
}

TEST_CASE("weighted mean tilts toward the heavier subspace") {
  const double theta = 0.5;
  std::vector<TangentBasis> bases{line(theta), line(-theta)};
  const std::vector<double> weights{3.0, 1.0};
  const TangentBasis mean = extrinsic_mean(bases, weights);
  CHECK(projection_distance(mean, line(theta)) < projection_distance(mean, line(-theta)));
}

TEST_CASE("extrinsic mean argument validation") {
  CHECK_THROWS_AS(extrinsic_mean(std::vector<TangentBasis>{}), std::invalid_argument);
  std::vector<TangentBasis> mixed{TangentBasis(Matrix::Identity(3, 1)),
                                  TangentBasis(Matrix::Identity(4, 1))};
  CHECK_THROWS_AS(extrinsic_mean(mixed), std::invalid_argument);
  std::vector<TangentBasis> ok{TangentBasis(Matrix::Identity(3, 1))};
  const std::vector<double> bad_weight{-1.0};
  CHECK_THROWS_AS(extrinsic_mean(ok, bad_weight), std::invalid_argument);
}

TEST_CASE("sum of squared distances: singleton and orthogonal pair") {
  Rng rng(12);
  const TangentBasis a(oracle::random_orthonormal(rng, 4, 2));
  std::vector<TangentBasis> single{a};
  CHECK(sum_sq_dist_to_mean(single, a) == 0.0);

  std::vector<TangentBasis> pair{line(0.0), line(M_PI / 2.0)};
  const TangentBasis bisector = line(M_PI / 4.0);
  // Two lines at +-45 degrees from the bisector: 2 sin^2(pi/4) = 1.
  CHECK(sum_sq_dist_to_mean(pair, bisector) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("extrinsic mean beats random competitors") {
  Rng rng(14);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<TangentBasis> bases;
    for (int i = 0; i < 6; ++i)
      bases.emplace_back(oracle::random_orthonormal(rng, 4, 2));
    const TangentBasis mean = extrinsic_mean(bases);
    const double at_mean = sum_sq_dist_to_mean(bases, mean);
    for (int comp = 0; comp < 100; ++comp) {
      const TangentBasis competitor(oracle::random_orthonormal(rng, 4, 2));
      CHECK(at_mean <= sum_sq_dist_to_mean(bases, competitor) + 1e-9);
    }
  }
}

TEST_CASE("dominant subspace pads rank-deficient input deterministically") {
  // One informative direction, d = 2: the second column must be the first
  // standard basis vector orthogonalized against the found direction.
  Matrix columns(3, 1);
  columns << 0.0, 2.0, 0.0;
  const Matrix basis = dominant_subspace(columns, 2);
  CHECK(std::abs(std::abs(basis(1, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(basis(0, 1) - 1.0) < 1e-12);  // e_0 survives orthogonalization

  // Zero columns: the basis is the leading standard basis block.
  const Matrix zero_basis = dominant_subspace(Matrix::Zero(4, 2), 2);
  CHECK((zero_basis - Matrix::Identity(4, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_SUITE_END();
