#pragma once

#include <optional>

#include "htdml/data.hpp"
#include "htdml/fragments.hpp"
#include "htdml/graph.hpp"
#include "htdml/mapping.hpp"

namespace htdml {

/// Smoothed objective: mean smoothed hinge over labeled pairs, plus
/// gamma / N_U times the smoothed fragment deviation, plus gamma_i / N_U²
/// times the manifold double sum. `unlabeled` is the target-side data
/// matrix X_U; fragments/graph may be null when the matching weight is 0.
double objective_smoothed(const Matrix& u, const LabeledPairSet& pairs, const Matrix* unlabeled,
                          const FragmentMatrix* fragments, const NeighborGraph* graph,
                          const HyperParams& hyper);

/// The objective evaluated from already-mapped values: m1/m2 are the mapped
/// pair endpoints (r x N_M), phi_u the mapped unlabeled columns. Shared by
/// the linear and boosted paths.
double objective_mapped(const Matrix& m1, const Matrix& m2, const std::vector<int>& labels,
                        const Vector& delta_inf, const Matrix* phi_u,
                        const FragmentMatrix* fragments, const NeighborGraph* graph,
                        const HyperParams& hyper);

/// Analytic gradient of objective_smoothed with respect to U.
Matrix gradient_smoothed(const Matrix& u, const LabeledPairSet& pairs, const Matrix* unlabeled,
                         const FragmentMatrix* fragments, const NeighborGraph* graph,
                         const HyperParams& hyper);

/// Elementwise max(v, 0).
Matrix project_nonneg(const Matrix& v);

struct TrainResult {
  LinearMap map;
  TrainTrace trace;
};

/// Projected gradient descent on the smoothed objective with an Armijo
/// backtracking line search. Starts from `init` when given, otherwise from
/// a uniform[0,1) matrix seeded by hyper.seed. Stops when the relative
/// objective change falls below hyper.eps_stop or after max_iter steps.
TrainResult pgm_train(const LabeledPairSet& pairs, const Matrix* unlabeled,
                      const FragmentMatrix* fragments, const NeighborGraph* graph,
                      const HyperParams& hyper, const std::optional<LinearMap>& init = {});

}  // namespace htdml
