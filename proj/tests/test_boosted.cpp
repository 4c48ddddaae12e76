#include <doctest.h>

#include "htdml/boosted.hpp"
#include "htdml/smoothing.hpp"
#include "htdml/synth.hpp"
#include "test_util.hpp"

using namespace htdml;

namespace {

struct Instance {
  LabeledPairSet pairs;
  Matrix x_u;
  FragmentMatrix fragments;
  NeighborGraph graph;
  HyperParams hp;
};

Instance make_instance(unsigned seed, double gamma, double gamma_i) {
  const Eigen::Index d = 4, r = 2, n_u = 10;
  Instance inst{test::random_pair_set(d, 8, 12, seed),
                test::random_matrix(d, n_u, seed + 1, -2.0, 2.0),
                fragment_matrix_from_table(test::random_matrix(r, n_u, seed + 2, 0.0, 1.0)),
                build_neighbor_graph(test::random_matrix(d, n_u, seed + 1, -2.0, 2.0), 3, 2.0),
                HyperParams{}};
  inst.hp.gamma = gamma;
  inst.hp.gamma_i = gamma_i;
  inst.hp.r = r;
  inst.hp.seed = seed;
  return inst;
}

RegressionTree leaf_tree(const Vector& v) {
  std::vector<RegressionTree::Node> nodes(1);
  nodes[0].value = v;
  return RegressionTree(std::move(nodes));
}

}  // namespace

TEST_SUITE("boosted") {

TEST_CASE("apply: no trees reduces to the linear map") {
  const LinearMap lin(test::random_matrix(3, 2, 101, 0.0, 1.0));
  const BoostedMap map{lin, {}, 0.05};
  const Vector x = test::random_matrix(3, 1, 102).col(0);
  CHECK(test::bitwise_equal(Matrix(apply_boosted(map, x)), Matrix(lin.apply(x))));
}

TEST_CASE("apply: zero learning rate ignores the trees") {
  const LinearMap lin(test::random_matrix(3, 2, 103, 0.0, 1.0));
  Vector v(2);
  v << 5.0, -7.0;
  const BoostedMap map{lin, {leaf_tree(v), leaf_tree(v)}, 0.0};
  const Vector x = test::random_matrix(3, 1, 104).col(0);
  CHECK(Matrix(apply_boosted(map, x)) == Matrix(lin.apply(x)));
}

TEST_CASE("apply: a depth-0 tree shifts by alpha times its leaf") {
  const LinearMap lin(test::random_matrix(3, 2, 105, 0.0, 1.0));
  Vector v(2);
  v << 1.0, -2.0;
  const BoostedMap map{lin, {leaf_tree(v)}, 0.5};
  const Vector x = test::random_matrix(3, 1, 106).col(0);
  const Vector expect = lin.apply(x) + 0.5 * v;
  CHECK((apply_boosted(map, x) - expect).norm() == 0.0);
  CHECK_THROWS_AS(apply_boosted(map, Vector::Zero(4)), std::invalid_argument);
}

TEST_CASE("fit_tree: constant targets collapse to one leaf") {
  const Matrix pts = test::random_matrix(3, 6, 107);
  Vector v(2);
  v << 0.25, -1.5;
  Matrix targets(2, 6);
  for (Eigen::Index j = 0; j < 6; ++j) targets.col(j) = v;
  const RegressionTree tree = fit_tree(pts, targets, 3);
  CHECK(tree.nodes().size() == 1);
  CHECK((tree.apply(pts.col(0)) - v).norm() < 1e-15);
}

TEST_CASE("fit_tree: a single split separates two distinct points exactly") {
  Matrix pts(1, 2);
  pts << 0.0, 1.0;
  Matrix targets(2, 2);
  targets << 1.0, 3.0, -1.0, 2.0;
  const RegressionTree tree = fit_tree(pts, targets, 1);
  REQUIRE(tree.nodes().size() == 3);
  CHECK(tree.nodes()[0].feature == 0);
  CHECK(tree.nodes()[0].threshold > 0.0);
  CHECK(tree.nodes()[0].threshold < 1.0);
  CHECK((tree.apply(pts.col(0)) - targets.col(0)).norm() == 0.0);
  CHECK((tree.apply(pts.col(1)) - targets.col(1)).norm() == 0.0);
}

TEST_CASE("fit_tree: depth 0 returns the mean predictor") {
  const Matrix pts = test::random_matrix(2, 5, 108);
  const Matrix targets = test::random_matrix(3, 5, 109);
  const RegressionTree tree = fit_tree(pts, targets, 0);
  CHECK(tree.nodes().size() == 1);
  const Vector mean = targets.rowwise().mean();
  CHECK((tree.apply(pts.col(0)) - mean).norm() < 1e-14);
}

TEST_CASE("fit_tree: training error never exceeds the mean predictor") {
  for (unsigned seed : {110u, 111u, 112u}) {
    const Matrix pts = test::random_matrix(3, 20, seed);
    const Matrix targets = test::random_matrix(2, 20, seed + 50);
    const RegressionTree tree = fit_tree(pts, targets, 3);
    const Vector mean = targets.rowwise().mean();
    double tree_err = 0.0, mean_err = 0.0;
    for (Eigen::Index j = 0; j < 20; ++j) {
      tree_err += (targets.col(j) - tree.apply(pts.col(j))).squaredNorm();
      mean_err += (targets.col(j) - mean).squaredNorm();
    }
    CHECK(tree_err <= mean_err + 1e-12);
  }
}

TEST_CASE("fit_tree: deterministic and rejects empty input") {
  const Matrix pts = test::random_matrix(3, 10, 113);
  const Matrix targets = test::random_matrix(2, 10, 114);
  const RegressionTree a = fit_tree(pts, targets, 2);
  const RegressionTree b = fit_tree(pts, targets, 2);
  REQUIRE(a.nodes().size() == b.nodes().size());
  for (size_t i = 0; i < a.nodes().size(); ++i) {
    CHECK(a.nodes()[i].feature == b.nodes()[i].feature);
    CHECK(a.nodes()[i].threshold == b.nodes()[i].threshold);
  }
  CHECK_THROWS_AS(fit_tree(Matrix(3, 0), Matrix(2, 0), 2), data_error);
}

TEST_CASE("negative gradients: satisfied pairs contribute nothing") {
  Matrix samples(2, 2);
  samples << 0.0, 0.1, 0.0, 0.0;
  const LabeledPairSet pairs(samples, {{0, 1, +1}});
  HyperParams hp;
  hp.r = 2;
  const Mapping map{LinearMap(Matrix::Identity(2, 2))};
  const GradientTable table = negative_gradients(map, pairs, nullptr, nullptr, nullptr, hp);
  CHECK(table.residuals.isZero(0.0));
  CHECK(table.points.cols() == 2);
}

TEST_CASE("negative gradients: exact fragment fit contributes nothing") {
  auto inst = make_instance(115, 2.0, 0.0);
  const LinearMap lin(test::random_matrix(4, 2, 116, 0.0, 1.0));
  // Make similar pairs trivially satisfied so only fragments could fire.
  Matrix samples(4, 2);
  samples.setZero();
  samples(0, 1) = 1e-3;
  const LabeledPairSet pairs(samples, {{0, 1, +1}});
  const FragmentMatrix f = fragment_matrix_from_table(map_columns_linear(lin.u, inst.x_u));
  HyperParams hp = inst.hp;
  const GradientTable table =
      negative_gradients(Mapping{lin}, pairs, &inst.x_u, &f, nullptr, hp);
  CHECK(table.residuals.isZero(0.0));
}

TEST_CASE("negative gradients: match finite differences in mapped space") {
  auto inst = make_instance(117, 0.8, 1.7);
  const LinearMap lin(test::random_matrix(4, 2, 118, 0.0, 1.0));
  const Mapping map{lin};
  const GradientTable table =
      negative_gradients(map, inst.pairs, &inst.x_u, &inst.fragments, &inst.graph, inst.hp);

  // Registry order: pair endpoints in pair order, then unlabeled columns.
  // Recover each unique point's registry index by matching columns.
  auto find_point = [&](const Vector& v) {
    for (Eigen::Index j = 0; j < table.points.cols(); ++j) {
      if ((table.points.col(j) - v).norm() == 0.0) return j;
    }
    REQUIRE(false);
    return Eigen::Index{-1};
  };

  Matrix phi = map_columns(map, table.points);
  std::vector<Eigen::Index> p1, p2, un;
  for (Eigen::Index i = 0; i < inst.pairs.n_pairs(); ++i) {
    p1.push_back(find_point(inst.pairs.endpoints1().col(i)));
    p2.push_back(find_point(inst.pairs.endpoints2().col(i)));
  }
  for (Eigen::Index n = 0; n < inst.x_u.cols(); ++n) un.push_back(find_point(inst.x_u.col(n)));

  auto objective_of_phi = [&](const Matrix& ph) {
    Matrix m1(2, inst.pairs.n_pairs()), m2(2, inst.pairs.n_pairs());
    for (Eigen::Index i = 0; i < inst.pairs.n_pairs(); ++i) {
      m1.col(i) = ph.col(p1[static_cast<size_t>(i)]);
      m2.col(i) = ph.col(p2[static_cast<size_t>(i)]);
    }
    Matrix phi_u(2, inst.x_u.cols());
    for (Eigen::Index n = 0; n < inst.x_u.cols(); ++n) {
      phi_u.col(n) = ph.col(un[static_cast<size_t>(n)]);
    }
    return objective_mapped(m1, m2, inst.pairs.labels(), inst.pairs.delta_inf_norms(), &phi_u,
                            &inst.fragments, &inst.graph, inst.hp);
  };

  const double h = 1e-6;
  for (Eigen::Index j = 0; j < table.points.cols(); ++j) {
    for (Eigen::Index c = 0; c < 2; ++c) {
      Matrix probe = phi;
      probe(c, j) = phi(c, j) + h;
      const double hi = objective_of_phi(probe);
      probe(c, j) = phi(c, j) - h;
      const double lo = objective_of_phi(probe);
      const double fd = (hi - lo) / (2.0 * h);
      CHECK(std::abs(-table.residuals(c, j) - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("negative gradients: chain rule reproduces the linear gradient") {
  for (unsigned seed : {119u, 120u}) {
    auto inst = make_instance(seed, 0.9, 1.1);
    const LinearMap lin(test::random_matrix(4, 2, seed + 30, 0.0, 1.0));
    const GradientTable table =
        negative_gradients(Mapping{lin}, inst.pairs, &inst.x_u, &inst.fragments, &inst.graph,
                           inst.hp);
    Matrix assembled = Matrix::Zero(4, 2);
    for (Eigen::Index j = 0; j < table.points.cols(); ++j) {
      assembled.noalias() -= table.points.col(j) * table.residuals.col(j).transpose();
    }
    const Matrix direct = gradient_smoothed(lin.u, inst.pairs, &inst.x_u, &inst.fragments,
                                            &inst.graph, inst.hp);
    CHECK((assembled - direct).norm() <= 1e-8 * std::max(1.0, direct.norm()));
  }
}

TEST_CASE("boost: zero learning rate leaves the objective untouched") {
  auto inst = make_instance(121, 0.6, 0.4);
  const LinearMap init(test::random_matrix(4, 2, 122, 0.0, 1.0));
  const BoostResult res = boost_train(init, inst.pairs, &inst.x_u, &inst.fragments, &inst.graph,
                                      inst.hp, 5, 0.0, 2);
  CHECK(res.trace.iterations.size() == 5);
  for (const auto& it : res.trace.iterations) {
    CHECK(it.objective == res.trace.initial_objective);
  }
}

TEST_CASE("boost: refinement does not worsen the objective on synthetic data") {
  SynthConfig cfg;
  cfg.n_classes = 3;
  cfg.d_s = 12;
  cfg.d_m = 6;
  cfg.latent_dim = 3;
  cfg.n_labeled_pairs_source = 60;
  cfg.n_labeled_pairs_target = 20;
  cfg.n_unlabeled = 40;
  cfg.n_test = 30;
  cfg.seed = 5;
  const SynthData data = generate_synthetic(cfg);
  HyperParams hp;
  hp.r = 3;
  hp.gamma = 1.0;
  hp.gamma_i = 1.0;
  hp.seed = 5;
  hp.max_iter = 100;
  const Matrix& x_u = data.correspondences.target();
  const NeighborGraph graph = build_neighbor_graph(x_u, 5, default_bandwidth(x_u));
  const LinearMap source = train_source_metric(data.source_pairs, 3, hp);
  const FragmentMatrix fragments = build_fragment_matrix(
      decompose_metric(normalized_source_metric(source), 3), data.correspondences,
      default_bandwidth(data.correspondences.source()));
  const TrainResult lin = pgm_train(data.target_pairs, &x_u, &fragments, &graph, hp);
  const BoostResult boosted =
      boost_train(lin.map, data.target_pairs, &x_u, &fragments, &graph, hp, 20, 0.05, 3);
  CHECK(boosted.trace.iterations.size() == 20);
  CHECK(boosted.trace.iterations.back().objective <=
        boosted.trace.initial_objective + 1e-9);
  CHECK(boosted.trace.initial_objective == lin.trace.final_objective());
}

TEST_CASE("boost: validation") {
  auto inst = make_instance(123, 0.0, 0.0);
  const LinearMap init(test::random_matrix(4, 2, 124, 0.0, 1.0));
  CHECK_THROWS_AS(boost_train(init, inst.pairs, nullptr, nullptr, nullptr, inst.hp, 0, 0.1, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(boost_train(init, inst.pairs, nullptr, nullptr, nullptr, inst.hp, 3, -0.1, 2),
                  std::invalid_argument);
  const LinearMap wrong(test::random_matrix(3, 2, 125, 0.0, 1.0));
  CHECK_THROWS_AS(boost_train(wrong, inst.pairs, nullptr, nullptr, nullptr, inst.hp, 3, 0.1, 2),
                  std::invalid_argument);
}

}  // TEST_SUITE
