#pragma once

#include <Eigen/Sparse>

#include "htdml/data.hpp"

namespace htdml {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric k-nearest-neighbor graph with heat-kernel weights and its
/// unnormalized Laplacian L = D - W.
struct NeighborGraph {
  SparseMatrix weights;
  SparseMatrix laplacian;
  double bandwidth = 0.0;
  int k = 0;

  Eigen::Index size() const { return weights.rows(); }
};

/// Mean squared pairwise distance over all ordered pairs, including i == j.
/// Used as the default heat-kernel and fragment-kernel bandwidth.
double default_bandwidth(const Matrix& samples);

/// Connect i and j when either is among the other's k nearest Euclidean
/// neighbors (ties by lower index); edge weight exp(-d² / (2 omega²)),
/// zero diagonal.
NeighborGraph build_neighbor_graph(const Matrix& samples, int k, double omega);

struct ManifoldTerm {
  double value = 0.0;
  Matrix grad;
};

/// Laplacian quadratic form X L Xᵀ of the graph over the given samples.
Matrix laplacian_quadratic(const Matrix& samples, const NeighborGraph& graph);

/// value = sum_ij w_ij ||Uᵀ(x_i - x_j)||² (= 2 tr(Uᵀ X L Xᵀ U)), and its
/// gradient 4 X L Xᵀ U. Scaling by gamma_i / N² is the caller's.
ManifoldTerm manifold_value_grad(const Matrix& u, const Matrix& samples,
                                 const NeighborGraph& graph);

/// The same double sum evaluated from already-mapped columns phi (r x N).
double manifold_value_mapped(const Matrix& phi, const NeighborGraph& graph);

}  // namespace htdml
