#include <doctest.h>

#include <random>

#include "htdml/graph.hpp"
#include "htdml/synth.hpp"
#include "test_util.hpp"

using namespace htdml;

TEST_SUITE("graph") {

TEST_CASE("bandwidth of two points at distance 2") {
  Matrix s(1, 2);
  s << 0.0, 2.0;
  CHECK(default_bandwidth(s) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("bandwidth rejects identical samples and accepts near-degenerate sets") {
  Matrix same = Matrix::Constant(3, 4, 1.5);
  CHECK_THROWS_WITH_AS(default_bandwidth(same), doctest::Contains("degenerate"), data_error);
  Matrix mixed = Matrix::Constant(3, 4, 1.5);
  mixed(0, 3) = 2.5;
  CHECK(default_bandwidth(mixed) > 0.0);
  CHECK_THROWS_AS(default_bandwidth(Matrix::Zero(2, 1)), std::invalid_argument);
}

TEST_CASE("bandwidth matches an expanded-form oracle") {
  const Matrix s = test::random_matrix(4, 10, 41);
  // Independent route: ||xi - xj||^2 = ||xi||^2 + ||xj||^2 - 2 xi.xj.
  double sum = 0.0;
  for (Eigen::Index i = 0; i < s.cols(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      sum += s.col(i).squaredNorm() + s.col(j).squaredNorm() - 2.0 * s.col(i).dot(s.col(j));
    }
  }
  const double oracle = sum / 100.0;
  CHECK(default_bandwidth(s) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("identical points are mutual neighbors with weight 1") {
  Matrix s(2, 2);
  s << 1.0, 1.0, 2.0, 2.0;
  const NeighborGraph g = build_neighbor_graph(s, 1, 1.0);
  CHECK(g.weights.coeff(0, 1) == 1.0);
  CHECK(g.weights.coeff(1, 0) == 1.0);
}

TEST_CASE("weights are symmetric with a zero diagonal") {
  const Matrix s = test::random_matrix(3, 12, 43);
  const NeighborGraph g = build_neighbor_graph(s, 3, 0.7);
  const Matrix w = Matrix(g.weights);
  CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(w.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(w.minCoeff() >= 0.0);
  CHECK(w.maxCoeff() <= 1.0);
}

TEST_CASE("three collinear points with k=1") {
  Matrix s(1, 3);
  s << 0.0, 1.0, 2.0;
  const NeighborGraph g = build_neighbor_graph(s, 1, 1.0);
  CHECK(g.weights.coeff(0, 2) == 0.0);
  CHECK(g.weights.coeff(0, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(g.weights.coeff(1, 2) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("graph construction validates k and omega") {
  const Matrix s = test::random_matrix(2, 5, 44);
  CHECK_THROWS_AS(build_neighbor_graph(s, 5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_neighbor_graph(s, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_neighbor_graph(s, 2, 0.0), std::invalid_argument);
}

TEST_CASE("laplacian rows sum to zero and the form is PSD") {
  const Matrix s = test::random_matrix(3, 9, 45);
  const NeighborGraph g = build_neighbor_graph(s, 2, 1.1);
  const Vector row_sums = Matrix(g.laplacian).rowwise().sum();
  CHECK(row_sums.cwiseAbs().maxCoeff() < 1e-12);
  std::mt19937_64 rng(46);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 20; ++t) {
    Vector x(g.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = gauss(rng);
    CHECK(x.dot(g.laplacian * x) >= -1e-10);
  }
}

TEST_CASE("manifold term vanishes at U = 0") {
  const Matrix s = test::random_matrix(3, 6, 47);
  const NeighborGraph g = build_neighbor_graph(s, 2, 0.9);
  const auto term = manifold_value_grad(Matrix::Zero(3, 2), s, g);
  CHECK(term.value == 0.0);
  CHECK(term.grad.isZero(0.0));
}

TEST_CASE("two-node closed form") {
  Matrix s(2, 2);
  s << 0.0, 1.0, 0.0, -1.0;
  const NeighborGraph g = build_neighbor_graph(s, 1, 2.0);
  const double w = g.weights.coeff(0, 1);
  const Matrix u = test::random_matrix(2, 2, 48);
  const auto term = manifold_value_grad(u, s, g);
  const double expect = 2.0 * w * (u.transpose() * (s.col(0) - s.col(1))).squaredNorm();
  CHECK(term.value == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("manifold gradient matches finite differences") {
  const Matrix s = test::random_matrix(3, 5, 49);
  const NeighborGraph g = build_neighbor_graph(s, 2, 1.3);
  const Matrix u = test::random_matrix(3, 2, 50);
  const auto analytic = manifold_value_grad(u, s, g);
  const Matrix fd = fd_gradient(
      [&](const Matrix& m) { return manifold_value_grad(m, s, g).value; }, u, 1e-6);
  CHECK((analytic.grad - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
}

TEST_CASE("trace identity matches the explicit double sum") {
  const Matrix s = test::random_matrix(4, 8, 51);
  const NeighborGraph g = build_neighbor_graph(s, 3, 0.8);
  const Matrix u = test::random_matrix(4, 3, 52);
  const auto term = manifold_value_grad(u, s, g);
  const double double_sum = manifold_value_mapped(map_columns_linear(u, s), g);
  CHECK(term.value == doctest::Approx(double_sum).epsilon(1e-8));
  CHECK(term.value >= 0.0);
}

TEST_CASE("permuting samples leaves the regularizer value unchanged") {
  const Matrix s = test::random_matrix(3, 7, 53);
  const Matrix u = test::random_matrix(3, 2, 54);
  const NeighborGraph g = build_neighbor_graph(s, 2, 1.0);
  const double base = manifold_value_grad(u, s, g).value;

  std::vector<Eigen::Index> perm = {3, 0, 6, 1, 5, 2, 4};
  Matrix sp(s.rows(), s.cols());
  for (Eigen::Index j = 0; j < s.cols(); ++j) sp.col(j) = s.col(perm[static_cast<size_t>(j)]);
  const NeighborGraph gp = build_neighbor_graph(sp, 2, 1.0);
  const double permuted = manifold_value_grad(u, sp, gp).value;
  CHECK(base == doctest::Approx(permuted).epsilon(1e-10));
}

}  // TEST_SUITE
