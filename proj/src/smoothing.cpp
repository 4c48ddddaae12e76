#include "htdml/smoothing.hpp"

#include <algorithm>
#include <stdexcept>

#include "htdml/mapping.hpp"

namespace htdml {

SmoothedValue smoothed_hinge(int y, double dist_sq, double delta_inf, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  if (delta_inf < 0.0) throw std::invalid_argument("delta_inf must be non-negative");
  const double z = static_cast<double>(y) * (1.0 - dist_sq);
  if (delta_inf == 0.0) {
    // Unsmoothed limit: identical pair endpoints make the loss constant.
    return {std::max(0.0, -z), -z > 0.0 ? 1.0 : 0.0};
  }
  const double cap = sigma * delta_inf;
  const double nu = std::clamp(-z / cap, 0.0, 1.0);
  if (z > 0.0) return {0.0, nu};
  if (z < -cap) return {-z - 0.5 * cap, nu};
  return {z * z / (2.0 * cap), nu};
}

SmoothedValue smoothed_abs(double z, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  const double q = std::clamp(z / sigma, -1.0, 1.0);
  if (z < -sigma) return {-z - 0.5 * sigma, q};
  if (z > sigma) return {z - 0.5 * sigma, q};
  return {z * z / (2.0 * sigma), q};
}

Matrix hinge_grad_accum(const LabeledPairSet& pairs, const Matrix& u, double sigma) {
  if (u.rows() != pairs.dim()) {
    throw std::invalid_argument("hinge gradient: U has " + std::to_string(u.rows()) +
                                " rows, pairs have dimension " + std::to_string(pairs.dim()));
  }
  Matrix grad = Matrix::Zero(u.rows(), u.cols());
  const Matrix m1 = map_columns_linear(u, pairs.endpoints1());
  const Matrix m2 = map_columns_linear(u, pairs.endpoints2());
  for (Eigen::Index i = 0; i < pairs.n_pairs(); ++i) {
    const Vector w = m1.col(i) - m2.col(i);
    const int y = pairs.label(i);
    const auto sv = smoothed_hinge(y, w.squaredNorm(), pairs.delta_inf_norms()[i], sigma);
    if (sv.inner != 0.0) {
      grad.noalias() += (2.0 * y * sv.inner) * (pairs.deltas().col(i) * w.transpose());
    }
  }
  return grad;
}

Matrix l1_grad(const Matrix& u, const Matrix& unlabeled, const Matrix& fragments, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  if (u.rows() != unlabeled.rows() || fragments.rows() != u.cols() ||
      fragments.cols() != unlabeled.cols()) {
    throw std::invalid_argument("l1 gradient: inconsistent shapes");
  }
  const Matrix phi = map_columns_linear(u, unlabeled);
  Matrix q = ((phi - fragments) / sigma).cwiseMax(-1.0).cwiseMin(1.0);
  return unlabeled * q.transpose();
}

}  // namespace htdml
