#include "htdml/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace htdml {

double default_bandwidth(const Matrix& samples) {
  const Eigen::Index n = samples.cols();
  if (n < 2) throw std::invalid_argument("bandwidth needs at least two samples");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      sum += (samples.col(i) - samples.col(j)).squaredNorm();
    }
  }
  if (sum <= 0.0) throw data_error("degenerate bandwidth: all samples identical");
  return sum / (static_cast<double>(n) * static_cast<double>(n));
}

NeighborGraph build_neighbor_graph(const Matrix& samples, int k, double omega) {
  const Eigen::Index n = samples.cols();
  if (omega <= 0.0) throw std::invalid_argument("omega must be positive");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k >= n) {
    throw std::invalid_argument("k = " + std::to_string(k) + " must be smaller than the number" +
                                " of samples (" + std::to_string(n) + ")");
  }

  const double denom = 2.0 * omega * omega;
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::vector<bool>> edge(static_cast<size_t>(n),
                                      std::vector<bool>(static_cast<size_t>(n), false));
  std::vector<std::pair<double, Eigen::Index>> cand;
  cand.reserve(static_cast<size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    cand.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back((samples.col(i) - samples.col(j)).squaredNorm(), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (int t = 0; t < k; ++t) {
      const Eigen::Index j = cand[static_cast<size_t>(t)].second;
      edge[static_cast<size_t>(std::min(i, j))][static_cast<size_t>(std::max(i, j))] = true;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (!edge[static_cast<size_t>(i)][static_cast<size_t>(j)]) continue;
      const double w = std::exp(-(samples.col(i) - samples.col(j)).squaredNorm() / denom);
      triplets.emplace_back(i, j, w);
      triplets.emplace_back(j, i, w);
    }
  }

  NeighborGraph g;
  g.weights.resize(n, n);
  g.weights.setFromTriplets(triplets.begin(), triplets.end());
  Vector degree = g.weights * Vector::Ones(n);
  std::vector<Eigen::Triplet<double>> lap = triplets;
  for (auto& t : lap) t = {t.row(), t.col(), -t.value()};
  for (Eigen::Index i = 0; i < n; ++i) lap.emplace_back(i, i, degree[i]);
  g.laplacian.resize(n, n);
  g.laplacian.setFromTriplets(lap.begin(), lap.end());
  g.bandwidth = omega;
  g.k = k;
  return g;
}

Matrix laplacian_quadratic(const Matrix& samples, const NeighborGraph& graph) {
  if (samples.cols() != graph.size()) {
    throw std::invalid_argument("graph size does not match sample count");
  }
  const Matrix lx = graph.laplacian * samples.transpose();  // N x d
  return samples * lx;                                      // d x d
}

ManifoldTerm manifold_value_grad(const Matrix& u, const Matrix& samples,
                                 const NeighborGraph& graph) {
  if (u.rows() != samples.rows()) {
    throw std::invalid_argument("manifold term: U rows do not match sample dimension");
  }
  const Matrix quad = laplacian_quadratic(samples, graph);
  ManifoldTerm out;
  out.value = 2.0 * (u.transpose() * quad * u).trace();
  out.grad = 4.0 * (quad * u);
  return out;
}

double manifold_value_mapped(const Matrix& phi, const NeighborGraph& graph) {
  if (phi.cols() != graph.size()) {
    throw std::invalid_argument("manifold value: mapped columns do not match graph size");
  }
  double sum = 0.0;
  for (int col = 0; col < graph.weights.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(graph.weights, col); it; ++it) {
      sum += it.value() * (phi.col(it.row()) - phi.col(it.col())).squaredNorm();
    }
  }
  return sum;
}

}  // namespace htdml
