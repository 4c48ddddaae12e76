#pragma once

#include <string>
#include <vector>

#include "htdml/data.hpp"

namespace htdml {

/// Linear feature mapping x -> Uᵀx with an elementwise non-negative U.
struct LinearMap {
  Matrix u;

  explicit LinearMap(Matrix m);

  Eigen::Index input_dim() const { return u.rows(); }
  Eigen::Index output_dim() const { return u.cols(); }

  Vector apply(const Eigen::Ref<const Vector>& x) const { return u.transpose() * x; }

  static LinearMap identity(Eigen::Index d) { return LinearMap(Matrix::Identity(d, d)); }
};

/// Column-wise image Uᵀ x_j for a raw (possibly signed) matrix U. Objective
/// and gradient code share this path so mapped values agree exactly with
/// per-sample apply().
Matrix map_columns_linear(const Matrix& u, const Matrix& x);

struct HyperParams {
  double gamma = 0.0;    // fragment-approximation weight
  double gamma_i = 0.0;  // manifold-regularization weight
  double sigma = 0.5;    // smoothing parameter
  double rho = 0.01;     // sufficient-decrease constant
  double eps_stop = 1e-5;
  int max_iter = 500;
  Eigen::Index r = 0;  // mapped dimension; must be set explicitly
  unsigned long long seed = 0;
  double beta = 0.1;  // backtracking factor
  int k_neighbors = 7;

  void validate() const;  // throws std::invalid_argument on bad values
};

struct IterRecord {
  double objective = 0.0;
  double step = 0.0;
  double grad_norm = 0.0;
  double armijo_lhs = 0.0;  // f(U_next) - f(U)
  double armijo_rhs = 0.0;  // rho * <grad, U_next - U>
  double min_entry = 0.0;   // smallest entry of the accepted iterate
};

struct TrainTrace {
  double initial_objective = 0.0;
  std::vector<IterRecord> iterations;
  bool converged = false;

  std::string status() const { return converged ? "converged" : "max_iter"; }
  double final_objective() const {
    return iterations.empty() ? initial_objective : iterations.back().objective;
  }
};

}  // namespace htdml
