#pragma once

#include <string>

#include "htdml/data.hpp"
#include "htdml/mapping.hpp"

namespace htdml {

enum class FragmentKind { metric_derived, mapping_derived };

/// Columns are the fundamental elements p_c extracted from a source metric
/// decomposition A_S = P Pᵀ.
struct FundamentalElements {
  Matrix elements;  // d_S x r
  FragmentKind kind = FragmentKind::metric_derived;

  Eigen::Index dim() const { return elements.rows(); }
  Eigen::Index count() const { return elements.cols(); }
};

/// Source knowledge evaluated on the unlabeled correspondences: row c,
/// column n holds f_c(x_n) under the recorded construction.
struct FragmentMatrix {
  Matrix values;  // r x N_U
  FragmentKind kind = FragmentKind::mapping_derived;
  double bandwidth = 0.0;  // RBF bandwidth for metric-derived fragments

  Eigen::Index count() const { return values.rows(); }
  Eigen::Index n_unlabeled() const { return values.cols(); }
};

/// exp(-||x - p||² / (2 omega²)), in (0, 1].
double rbf_kernel(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& p,
                  double omega);

/// Symmetric eigendecomposition of a PSD matrix; returns the top-r
/// eigenvectors scaled by the square roots of their eigenvalues, eigenvalues
/// descending. Eigenvalues in [-1e-8, 0] are clamped to zero; anything more
/// negative is rejected. Each element's first non-negligible component is
/// made non-negative so the result does not depend on eigenvector sign.
FundamentalElements decompose_metric(const Matrix& a, Eigen::Index r);

/// Train a source-domain map on labeled source pairs alone (both transfer
/// regularizers off); the returned map's Gram matrix U Uᵀ is the source
/// metric to decompose.
LinearMap train_source_metric(const LabeledPairSet& source_pairs, Eigen::Index r,
                              const HyperParams& hyper);

/// Gram matrix U Uᵀ of a trained map, rescaled to unit spectral norm. A
/// metric's overall scale never affects rankings, and unit scale keeps the
/// fundamental elements commensurate with unit-norm data, so the RBF
/// bandwidth rule retains its dynamic range.
Matrix normalized_source_metric(const LinearMap& map);

/// Evaluate RBF fragments centered at the fundamental elements on the
/// source side of the correspondences.
FragmentMatrix build_fragment_matrix(const FundamentalElements& elements,
                                     const CorrespondenceSet& corr, double omega);

/// Escape hatch for mapping-derived fragments: accept a precomputed
/// r x N_U table of source-mapping evaluations verbatim.
FragmentMatrix fragment_matrix_from_table(Matrix table);

/// Text format: header "r n_unlabeled", then r rows of space-separated
/// values written with shortest round-trip formatting.
void save_fragment_matrix(const FragmentMatrix& fragments, const std::string& path);
FragmentMatrix load_fragment_matrix(const std::string& path);

}  // namespace htdml
