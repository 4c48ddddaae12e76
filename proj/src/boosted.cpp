#include "htdml/boosted.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "htdml/smoothing.hpp"

namespace htdml {

namespace {

// Lexicographic column order; used only to deduplicate identical points.
struct LexLess {
  bool operator()(const Vector& a, const Vector& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  }
};

// Distinct points in first-occurrence order: pair endpoints (x1 then x2,
// pair by pair), then unlabeled columns.
struct PointRegistry {
  Matrix points;
  std::vector<Eigen::Index> pair1, pair2;  // per pair, index into points
  std::vector<Eigen::Index> unlabeled;     // per unlabeled column
};

PointRegistry build_registry(const LabeledPairSet& pairs, const Matrix* unlabeled) {
  std::map<Vector, Eigen::Index, LexLess> seen;
  std::vector<Vector> order;
  auto intern = [&](const Vector& v) {
    const auto it = seen.find(v);
    if (it != seen.end()) return it->second;
    const Eigen::Index idx = static_cast<Eigen::Index>(order.size());
    seen.emplace(v, idx);
    order.push_back(v);
    return idx;
  };

  PointRegistry reg;
  for (Eigen::Index i = 0; i < pairs.n_pairs(); ++i) {
    reg.pair1.push_back(intern(pairs.endpoints1().col(i)));
    reg.pair2.push_back(intern(pairs.endpoints2().col(i)));
  }
  if (unlabeled != nullptr) {
    for (Eigen::Index n = 0; n < unlabeled->cols(); ++n) {
      reg.unlabeled.push_back(intern(unlabeled->col(n)));
    }
  }
  reg.points.resize(pairs.dim(), static_cast<Eigen::Index>(order.size()));
  for (size_t i = 0; i < order.size(); ++i) {
    reg.points.col(static_cast<Eigen::Index>(i)) = order[i];
  }
  return reg;
}

// Negative objective gradient per registry point, from mapped values.
Matrix residuals_from_mapped(const Matrix& phi, const PointRegistry& reg,
                             const LabeledPairSet& pairs, const FragmentMatrix* fragments,
                             const NeighborGraph* graph, const HyperParams& hp) {
  const double n_pairs = static_cast<double>(pairs.n_pairs());
  Matrix res = Matrix::Zero(phi.rows(), phi.cols());

  for (Eigen::Index i = 0; i < pairs.n_pairs(); ++i) {
    const Eigen::Index a = reg.pair1[static_cast<size_t>(i)];
    const Eigen::Index b = reg.pair2[static_cast<size_t>(i)];
    const Vector diff = phi.col(a) - phi.col(b);
    const int y = pairs.label(i);
    const auto sv = smoothed_hinge(y, diff.squaredNorm(), pairs.delta_inf_norms()[i], hp.sigma);
    if (sv.inner == 0.0) continue;
    const Vector g = (2.0 / n_pairs * y * sv.inner) * diff;
    res.col(a) -= g;
    res.col(b) += g;
  }

  if (hp.gamma > 0.0) {
    const double n_u = static_cast<double>(reg.unlabeled.size());
    for (size_t n = 0; n < reg.unlabeled.size(); ++n) {
      const Eigen::Index pt = reg.unlabeled[n];
      for (Eigen::Index c = 0; c < phi.rows(); ++c) {
        const double z = phi(c, pt) - fragments->values(c, static_cast<Eigen::Index>(n));
        const double q = smoothed_abs(z, hp.sigma).inner;
        res(c, pt) -= hp.gamma / n_u * q;
      }
    }
  }

  if (hp.gamma_i > 0.0) {
    const double n_u = static_cast<double>(reg.unlabeled.size());
    const double scale = 2.0 * hp.gamma_i / (n_u * n_u);
    for (int col = 0; col < graph->weights.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(graph->weights, col); it; ++it) {
        const Eigen::Index pi = reg.unlabeled[static_cast<size_t>(it.row())];
        const Eigen::Index pj = reg.unlabeled[static_cast<size_t>(it.col())];
        const Vector g = (scale * it.value()) * (phi.col(pi) - phi.col(pj));
        res.col(pi) -= g;
        res.col(pj) += g;
      }
    }
  }

  return res;
}

double objective_from_registry(const Matrix& phi, const PointRegistry& reg,
                               const LabeledPairSet& pairs, const FragmentMatrix* fragments,
                               const NeighborGraph* graph, const HyperParams& hp) {
  const Eigen::Index n_pairs = pairs.n_pairs();
  Matrix m1(phi.rows(), n_pairs), m2(phi.rows(), n_pairs);
  for (Eigen::Index i = 0; i < n_pairs; ++i) {
    m1.col(i) = phi.col(reg.pair1[static_cast<size_t>(i)]);
    m2.col(i) = phi.col(reg.pair2[static_cast<size_t>(i)]);
  }
  Matrix phi_u;
  const Matrix* phi_u_ptr = nullptr;
  if (hp.gamma > 0.0 || hp.gamma_i > 0.0) {
    phi_u.resize(phi.rows(), static_cast<Eigen::Index>(reg.unlabeled.size()));
    for (size_t n = 0; n < reg.unlabeled.size(); ++n) {
      phi_u.col(static_cast<Eigen::Index>(n)) = phi.col(reg.unlabeled[n]);
    }
    phi_u_ptr = &phi_u;
  }
  return objective_mapped(m1, m2, pairs.labels(), pairs.delta_inf_norms(), phi_u_ptr, fragments,
                          graph, hp);
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double sse = 0.0;
};

// Children's summed squared deviation, via sum/sum-of-squares identities.
double subset_sse(double sq_sum, const Vector& vec_sum, double count) {
  return sq_sum - vec_sum.squaredNorm() / count;
}

}  // namespace

RegressionTree::RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("regression tree needs at least one node");
}

Eigen::Index RegressionTree::output_dim() const {
  for (const auto& n : nodes_) {
    if (n.is_leaf()) return n.value.size();
  }
  return 0;
}

Vector RegressionTree::apply(const Eigen::Ref<const Vector>& x) const {
  int at = 0;
  while (!nodes_[static_cast<size_t>(at)].is_leaf()) {
    const Node& n = nodes_[static_cast<size_t>(at)];
    at = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<size_t>(at)].value;
}

RegressionTree fit_tree(const Matrix& points, const Matrix& targets, int max_depth) {
  if (points.cols() < 1) throw data_error("empty input: fit_tree needs at least one point");
  if (points.cols() != targets.cols()) {
    throw std::invalid_argument("fit_tree: point/target count mismatch");
  }
  if (max_depth < 0) throw std::invalid_argument("fit_tree: depth must be >= 0");

  std::vector<RegressionTree::Node> nodes;

  // Recursive builder over an index subset; returns the node id.
  auto build = [&](auto&& self, std::vector<Eigen::Index>& idx, int depth) -> int {
    const double count = static_cast<double>(idx.size());
    Vector sum = Vector::Zero(targets.rows());
    double sq = 0.0;
    for (const Eigen::Index i : idx) {
      sum += targets.col(i);
      sq += targets.col(i).squaredNorm();
    }
    const double node_sse = subset_sse(sq, sum, count);

    SplitChoice best;
    if (depth < max_depth && idx.size() >= 2) {
      std::vector<Eigen::Index> sorted = idx;
      for (int f = 0; f < points.rows(); ++f) {
        std::sort(sorted.begin(), sorted.end(), [&](Eigen::Index a, Eigen::Index b) {
          const double va = points(f, a), vb = points(f, b);
          return va != vb ? va < vb : a < b;
        });
        Vector left_sum = Vector::Zero(targets.rows());
        double left_sq = 0.0;
        for (size_t m = 0; m + 1 < sorted.size(); ++m) {
          left_sum += targets.col(sorted[m]);
          left_sq += targets.col(sorted[m]).squaredNorm();
          const double lo = points(f, sorted[m]);
          const double hi = points(f, sorted[m + 1]);
          if (lo == hi) continue;  // boundary only between distinct values
          double thr = 0.5 * (lo + hi);
          if (!(thr >= lo && thr < hi)) thr = lo;  // guard midpoint rounding
          const double left_n = static_cast<double>(m + 1);
          const double sse = subset_sse(left_sq, left_sum, left_n) +
                             subset_sse(sq - left_sq, sum - left_sum, count - left_n);
          if (!best.found || sse < best.sse) {
            best = {true, f, thr, sse};
          }
        }
      }
      if (best.found && !(best.sse < node_sse)) best.found = false;  // must strictly improve
    }

    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (!best.found) {
      nodes[static_cast<size_t>(id)].value = sum / count;
      return id;
    }
    std::vector<Eigen::Index> left, right;
    for (const Eigen::Index i : idx) {
      (points(best.feature, i) <= best.threshold ? left : right).push_back(i);
    }
    nodes[static_cast<size_t>(id)].feature = best.feature;
    nodes[static_cast<size_t>(id)].threshold = best.threshold;
    const int l = self(self, left, depth + 1);
    nodes[static_cast<size_t>(id)].left = l;
    const int r = self(self, right, depth + 1);
    nodes[static_cast<size_t>(id)].right = r;
    return id;
  };

  std::vector<Eigen::Index> all(static_cast<size_t>(points.cols()));
  std::iota(all.begin(), all.end(), 0);
  build(build, all, 0);
  return RegressionTree(std::move(nodes));
}

Vector BoostedMap::apply(const Eigen::Ref<const Vector>& x) const {
  Vector out = init.apply(x);
  for (const auto& tree : trees) {
    out += alpha * tree.apply(x);
  }
  return out;
}

Vector apply_boosted(const BoostedMap& map, const Eigen::Ref<const Vector>& x) {
  if (x.size() != map.input_dim()) {
    throw std::invalid_argument("apply_boosted: input dimension mismatch");
  }
  return map.apply(x);
}

Vector apply_mapping(const Mapping& map, const Eigen::Ref<const Vector>& x) {
  return std::visit([&](const auto& m) { return m.apply(x); }, map);
}

Eigen::Index mapping_input_dim(const Mapping& map) {
  return std::visit([](const auto& m) { return m.input_dim(); }, map);
}

Eigen::Index mapping_output_dim(const Mapping& map) {
  return std::visit([](const auto& m) { return m.output_dim(); }, map);
}

Matrix map_columns(const Mapping& map, const Matrix& x) {
  Matrix out(mapping_output_dim(map), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    out.col(j) = apply_mapping(map, x.col(j));
  }
  return out;
}

GradientTable negative_gradients(const Mapping& map, const LabeledPairSet& pairs,
                                 const Matrix* unlabeled, const FragmentMatrix* fragments,
                                 const NeighborGraph* graph, const HyperParams& hyper) {
  hyper.validate();
  if (hyper.gamma > 0.0 && (fragments == nullptr || unlabeled == nullptr)) {
    throw std::invalid_argument("fragments and unlabeled data are required when gamma > 0");
  }
  if (hyper.gamma_i > 0.0 && (graph == nullptr || unlabeled == nullptr)) {
    throw std::invalid_argument("a neighbor graph and unlabeled data are required when gamma_i > 0");
  }
  if (mapping_input_dim(map) != pairs.dim()) {
    throw std::invalid_argument("negative_gradients: mapping input dimension mismatch");
  }
  PointRegistry reg = build_registry(pairs, unlabeled);
  const Matrix phi = map_columns(map, reg.points);
  GradientTable table;
  table.residuals = residuals_from_mapped(phi, reg, pairs, fragments, graph, hyper);
  table.points = std::move(reg.points);
  return table;
}

BoostResult boost_train(const LinearMap& init, const LabeledPairSet& pairs,
                        const Matrix* unlabeled, const FragmentMatrix* fragments,
                        const NeighborGraph* graph, const HyperParams& hyper, int n_trees,
                        double alpha, int depth) {
  hyper.validate();
  if (n_trees < 1) throw std::invalid_argument("boost_train: n_trees must be >= 1");
  if (alpha < 0.0) throw std::invalid_argument("boost_train: alpha must be >= 0");
  if (depth < 0) throw std::invalid_argument("boost_train: depth must be >= 0");
  if (init.input_dim() != pairs.dim() || init.output_dim() != hyper.r) {
    throw std::invalid_argument("boost_train: init shape does not match data and r");
  }
  if (hyper.gamma > 0.0 && (fragments == nullptr || unlabeled == nullptr)) {
    throw std::invalid_argument("fragments and unlabeled data are required when gamma > 0");
  }
  if (hyper.gamma_i > 0.0 && (graph == nullptr || unlabeled == nullptr)) {
    throw std::invalid_argument("a neighbor graph and unlabeled data are required when gamma_i > 0");
  }

  PointRegistry reg = build_registry(pairs, unlabeled);
  BoostedMap map{init, {}, alpha};
  Matrix phi = map_columns(Mapping{init}, reg.points);

  TrainTrace trace;
  trace.initial_objective = objective_from_registry(phi, reg, pairs, fragments, graph, hyper);

  for (int t = 0; t < n_trees; ++t) {
    const Matrix residuals = residuals_from_mapped(phi, reg, pairs, fragments, graph, hyper);
    RegressionTree tree = fit_tree(reg.points, residuals, depth);
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      phi.col(j) += alpha * tree.apply(reg.points.col(j));
    }
    map.trees.push_back(std::move(tree));
    const double obj = objective_from_registry(phi, reg, pairs, fragments, graph, hyper);
    trace.iterations.push_back({obj, alpha, residuals.norm(), 0.0, 0.0, 0.0});
  }
  return {std::move(map), std::move(trace)};
}

}  // namespace htdml
