#pragma once

#include <Eigen/Dense>

#include <vector>

#include "htdml/errors.hpp"

namespace htdml {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One weakly-supervised constraint: samples `first` and `second` are
/// similar (label +1) or dissimilar (label -1).
struct PairConstraint {
  Eigen::Index first = 0;
  Eigen::Index second = 0;
  int label = +1;
};

/// Labeled pair data for one domain. Samples are matrix columns; pairs
/// reference them by index so a sample can appear in many constraints.
/// Endpoint differences and their infinity norms are cached at build time.
class LabeledPairSet {
 public:
  LabeledPairSet(Matrix samples, std::vector<PairConstraint> pairs);

  Eigen::Index dim() const { return samples_.rows(); }
  Eigen::Index n_samples() const { return samples_.cols(); }
  Eigen::Index n_pairs() const { return static_cast<Eigen::Index>(pairs_.size()); }

  const Matrix& samples() const { return samples_; }
  const std::vector<PairConstraint>& pairs() const { return pairs_; }

  /// First/second pair endpoints gathered as columns, aligned with pairs().
  const Matrix& endpoints1() const { return x1_; }
  const Matrix& endpoints2() const { return x2_; }
  /// Column i equals endpoints1().col(i) - endpoints2().col(i).
  const Matrix& deltas() const { return deltas_; }
  const Vector& delta_inf_norms() const { return delta_inf_; }
  const std::vector<int>& labels() const { return labels_; }
  int label(Eigen::Index i) const { return labels_[static_cast<size_t>(i)]; }

 private:
  Matrix samples_;
  std::vector<PairConstraint> pairs_;
  std::vector<int> labels_;
  Matrix x1_, x2_, deltas_;
  Vector delta_inf_;
};

/// Unlabeled samples observed in both domains; column n of source() and
/// target() are two representations of the same underlying object.
class CorrespondenceSet {
 public:
  CorrespondenceSet(Matrix source, Matrix target);

  Eigen::Index count() const { return source_.cols(); }
  Eigen::Index source_dim() const { return source_.rows(); }
  Eigen::Index target_dim() const { return target_.rows(); }
  const Matrix& source() const { return source_; }
  const Matrix& target() const { return target_; }

 private:
  Matrix source_, target_;
};

/// Class-labeled points, used for kNN evaluation and synthetic benchmarks.
/// Class ids must be contiguous starting at 0.
class LabeledPointSet {
 public:
  LabeledPointSet(Matrix points, std::vector<int> labels);

  Eigen::Index size() const { return points_.cols(); }
  Eigen::Index dim() const { return points_.rows(); }
  int n_classes() const { return n_classes_; }
  const Matrix& points() const { return points_; }
  const std::vector<int>& labels() const { return labels_; }
  int label(Eigen::Index i) const { return labels_[static_cast<size_t>(i)]; }

 private:
  Matrix points_;
  std::vector<int> labels_;
  int n_classes_ = 0;
};

}  // namespace htdml
