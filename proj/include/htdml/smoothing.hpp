#pragma once

#include "htdml/data.hpp"

namespace htdml {

/// Value of a smoothed loss together with the closed-form inner solution
/// (nu for the hinge, q for the absolute value).
struct SmoothedValue {
  double value = 0.0;
  double inner = 0.0;
};

/// Smoothed hinge of one pair: y in {+1,-1}, dist_sq the squared mapped
/// distance, delta_inf the infinity norm of the raw endpoint difference.
/// delta_inf == 0 falls back to the unsmoothed hinge (the loss is constant
/// in the map there, so the gradient contribution vanishes either way).
SmoothedValue smoothed_hinge(int y, double dist_sq, double delta_inf, double sigma);

/// Huber-style smoothed |z|; inner is clamp(z / sigma, -1, 1).
SmoothedValue smoothed_abs(double z, double sigma);

/// Sum over pairs of the smoothed-hinge gradient, 2 y_i nu_i delta_i w_iᵀ
/// with w_i = Uᵀx1_i - Uᵀx2_i. Division by the pair count is the caller's.
Matrix hinge_grad_accum(const LabeledPairSet& pairs, const Matrix& u, double sigma);

/// Gradient of the summed smoothed |UᵀX_U - F| term: X_U Qᵀ where
/// q_cn = clamp((u_cᵀ x_n - f_cn) / sigma, -1, 1). Scaling by gamma / N_U
/// is the caller's.
Matrix l1_grad(const Matrix& u, const Matrix& unlabeled, const Matrix& fragments, double sigma);

}  // namespace htdml
