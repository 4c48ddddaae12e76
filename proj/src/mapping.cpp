#include "htdml/mapping.hpp"

#include <stdexcept>

namespace htdml {

LinearMap::LinearMap(Matrix m) : u(std::move(m)) {
  if (u.rows() < 1 || u.cols() < 1) throw data_error("linear map must be non-empty");
  if (!u.allFinite()) throw data_error("linear map contains non-finite entries");
  if ((u.array() < 0.0).any()) throw data_error("linear map entries must be non-negative");
}

Matrix map_columns_linear(const Matrix& u, const Matrix& x) {
  Matrix out(u.cols(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    out.col(j) = u.transpose() * x.col(j);
  }
  return out;
}

void HyperParams::validate() const {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be >= 0");
  if (gamma_i < 0.0) throw std::invalid_argument("gamma_i must be >= 0");
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  if (rho <= 0.0 || rho >= 1.0) throw std::invalid_argument("rho must lie in (0, 1)");
  if (beta <= 0.0 || beta >= 1.0) throw std::invalid_argument("beta must lie in (0, 1)");
  if (eps_stop <= 0.0) throw std::invalid_argument("eps_stop must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (r < 1) throw std::invalid_argument("r must be >= 1");
  if (k_neighbors < 1) throw std::invalid_argument("k_neighbors must be >= 1");
}

}  // namespace htdml
