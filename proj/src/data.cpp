#include "htdml/data.hpp"

#include <set>
#include <string>

namespace htdml {

LabeledPairSet::LabeledPairSet(Matrix samples, std::vector<PairConstraint> pairs)
    : samples_(std::move(samples)), pairs_(std::move(pairs)) {
  if (samples_.rows() < 1 || samples_.cols() < 1) {
    throw data_error("pair set requires at least one sample of positive dimension");
  }
  if (!samples_.allFinite()) {
    throw data_error("pair set samples contain non-finite values");
  }
  const Eigen::Index n = samples_.cols();
  const Eigen::Index m = static_cast<Eigen::Index>(pairs_.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    const PairConstraint& p = pairs_[static_cast<size_t>(i)];
    if (p.first < 0 || p.first >= n || p.second < 0 || p.second >= n) {
      throw data_error("pair " + std::to_string(i) + " references sample index out of range [0, " +
                       std::to_string(n) + ")");
    }
    if (p.label != +1 && p.label != -1) {
      throw data_error("pair " + std::to_string(i) + " has label " + std::to_string(p.label) +
                       "; expected +1 or -1");
    }
  }
  x1_.resize(samples_.rows(), m);
  x2_.resize(samples_.rows(), m);
  labels_.reserve(pairs_.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    x1_.col(i) = samples_.col(pairs_[static_cast<size_t>(i)].first);
    x2_.col(i) = samples_.col(pairs_[static_cast<size_t>(i)].second);
    labels_.push_back(pairs_[static_cast<size_t>(i)].label);
  }
  deltas_ = x1_ - x2_;
  delta_inf_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    delta_inf_[i] = deltas_.col(i).cwiseAbs().maxCoeff();
  }
}

CorrespondenceSet::CorrespondenceSet(Matrix source, Matrix target)
    : source_(std::move(source)), target_(std::move(target)) {
  if (source_.cols() != target_.cols()) {
    throw data_error("correspondence alignment error: " + std::to_string(source_.cols()) +
                     " source rows vs " + std::to_string(target_.cols()) + " target rows");
  }
  if (source_.cols() < 1) {
    throw data_error("empty input: correspondence sets need at least one row");
  }
  if (source_.rows() < 1 || target_.rows() < 1) {
    throw data_error("correspondence samples must have positive dimension");
  }
  if (!source_.allFinite() || !target_.allFinite()) {
    throw data_error("correspondence samples contain non-finite values");
  }
}

LabeledPointSet::LabeledPointSet(Matrix points, std::vector<int> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  if (static_cast<size_t>(points_.cols()) != labels_.size()) {
    throw data_error("point set has " + std::to_string(points_.cols()) + " points but " +
                     std::to_string(labels_.size()) + " labels");
  }
  if (!points_.allFinite()) {
    throw data_error("point set contains non-finite values");
  }
  if (labels_.empty()) return;
  std::set<int> distinct(labels_.begin(), labels_.end());
  if (*distinct.begin() < 0) {
    throw data_error("class ids must be non-negative");
  }
  n_classes_ = *distinct.rbegin() + 1;
  if (static_cast<int>(distinct.size()) != n_classes_) {
    throw data_error("class ids must be contiguous from 0; saw " +
                     std::to_string(distinct.size()) + " distinct ids with max " +
                     std::to_string(n_classes_ - 1));
  }
}

}  // namespace htdml
