#pragma once

#include <variant>
#include <vector>

#include "htdml/linear.hpp"

namespace htdml {

/// Axis-aligned binary regression tree with r-vector leaf values.
/// Routing rule: go left iff x[feature] <= threshold.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    Vector value;  // leaf payload

    bool is_leaf() const { return feature < 0; }
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes);

  const std::vector<Node>& nodes() const { return nodes_; }
  Eigen::Index output_dim() const;

  Vector apply(const Eigen::Ref<const Vector>& x) const;

 private:
  std::vector<Node> nodes_;  // nodes_[0] is the root
};

/// Greedy top-down least-squares tree fit: at each node pick the
/// (feature, midpoint threshold) pair minimizing the children's summed
/// squared deviation from their mean targets; split only while depth < p,
/// the node has at least two points, and the split strictly improves.
/// Ties go to the lowest feature index, then the lowest threshold.
RegressionTree fit_tree(const Matrix& points, const Matrix& targets, int max_depth);

/// phi(x) = Uᵀx + alpha * sum_t tree_t(x), accumulated in tree order.
struct BoostedMap {
  LinearMap init;
  std::vector<RegressionTree> trees;
  double alpha = 0.0;

  Eigen::Index input_dim() const { return init.input_dim(); }
  Eigen::Index output_dim() const { return init.output_dim(); }

  Vector apply(const Eigen::Ref<const Vector>& x) const;
};

Vector apply_boosted(const BoostedMap& map, const Eigen::Ref<const Vector>& x);

/// Either mapping, exposed behind one apply().
using Mapping = std::variant<LinearMap, BoostedMap>;

Vector apply_mapping(const Mapping& map, const Eigen::Ref<const Vector>& x);
Eigen::Index mapping_input_dim(const Mapping& map);
Eigen::Index mapping_output_dim(const Mapping& map);
Matrix map_columns(const Mapping& map, const Matrix& x);

/// The deduplicated union of pair endpoints and unlabeled samples, with the
/// negative objective gradient accumulated per distinct point.
struct GradientTable {
  Matrix points;     // d_M x n
  Matrix residuals;  // r x n
};

GradientTable negative_gradients(const Mapping& map, const LabeledPairSet& pairs,
                                 const Matrix* unlabeled, const FragmentMatrix* fragments,
                                 const NeighborGraph* graph, const HyperParams& hyper);

struct BoostResult {
  BoostedMap map;
  TrainTrace trace;
};

/// Gradient boosting refinement: in each round fit one tree to the negative
/// gradients at the current mapping and append it with rate alpha. The
/// trace records the objective after every round.
BoostResult boost_train(const LinearMap& init, const LabeledPairSet& pairs,
                        const Matrix* unlabeled, const FragmentMatrix* fragments,
                        const NeighborGraph* graph, const HyperParams& hyper, int n_trees,
                        double alpha, int depth);

}  // namespace htdml
