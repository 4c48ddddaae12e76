#include <doctest.h>

#include "htdml/linear.hpp"
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

Instance make_instance(unsigned seed, double gamma, double gamma_i, Eigen::Index d = 5,
                       Eigen::Index r = 3, Eigen::Index n_pairs = 20, Eigen::Index n_u = 15) {
  Instance inst{test::random_pair_set(d, n_pairs / 2 + 2, n_pairs, seed),
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

LabeledPairSet separable_target_pairs() {
  Matrix samples(2, 3);
  samples << 0.0, 0.1, 0.0, 0.0, 0.0, 0.9;
  std::vector<PairConstraint> pairs = {{0, 1, +1}, {0, 2, -1}, {1, 2, -1}, {0, 1, +1}};
  return LabeledPairSet(std::move(samples), std::move(pairs));
}

}  // namespace

TEST_SUITE("linear") {

TEST_CASE("objective: zero map with all-similar pairs leaves only the fragment term") {
  auto inst = make_instance(71, 2.0, 0.0);
  // Rebuild pairs with all +1 labels.
  std::vector<PairConstraint> all_similar = inst.pairs.pairs();
  for (auto& p : all_similar) p.label = +1;
  const LabeledPairSet pairs(inst.pairs.samples(), all_similar);
  const Matrix u0 = Matrix::Zero(5, 3);
  const double obj = objective_smoothed(u0, pairs, &inst.x_u, &inst.fragments, nullptr, inst.hp);

  double expect = 0.0;
  for (Eigen::Index n = 0; n < inst.x_u.cols(); ++n) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      expect += smoothed_abs(-inst.fragments.values(c, n), inst.hp.sigma).value;
    }
  }
  expect *= inst.hp.gamma / static_cast<double>(inst.x_u.cols());
  CHECK(obj == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("objective: transfer-free case equals the mean smoothed hinge") {
  auto inst = make_instance(73, 0.0, 0.0);
  const Matrix u = test::random_matrix(5, 3, 74, 0.0, 1.0);
  const double obj = objective_smoothed(u, inst.pairs, nullptr, nullptr, nullptr, inst.hp);
  double expect = 0.0;
  for (Eigen::Index i = 0; i < inst.pairs.n_pairs(); ++i) {
    const Vector w = u.transpose() * (inst.pairs.endpoints1().col(i)) -
                     u.transpose() * (inst.pairs.endpoints2().col(i));
    expect += smoothed_hinge(inst.pairs.label(i), w.squaredNorm(),
                             inst.pairs.delta_inf_norms()[i], inst.hp.sigma)
                  .value;
  }
  expect /= static_cast<double>(inst.pairs.n_pairs());
  CHECK(obj == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("objective: finite on arbitrary finite inputs") {
  auto inst = make_instance(75, 5.0, 3.0);
  const Matrix u = test::random_matrix(5, 3, 76, -10.0, 10.0);
  const double obj =
      objective_smoothed(u, inst.pairs, &inst.x_u, &inst.fragments, &inst.graph, inst.hp);
  CHECK(std::isfinite(obj));
}

TEST_CASE("objective: missing inputs are rejected") {
  auto inst = make_instance(77, 1.0, 1.0);
  const Matrix u = Matrix::Zero(5, 3);
  CHECK_THROWS_AS(objective_smoothed(u, inst.pairs, &inst.x_u, nullptr, &inst.graph, inst.hp),
                  std::invalid_argument);
  CHECK_THROWS_AS(objective_smoothed(u, inst.pairs, &inst.x_u, &inst.fragments, nullptr, inst.hp),
                  std::invalid_argument);
  CHECK_THROWS_AS(objective_smoothed(u, inst.pairs, nullptr, &inst.fragments, &inst.graph, inst.hp),
                  std::invalid_argument);
}

TEST_CASE("gradient: vanishes when every term is inactive") {
  // Pairs satisfied (tiny distances, +1 labels), fragments fit exactly.
  Matrix samples = test::random_matrix(4, 5, 78, -0.1, 0.1);
  std::vector<PairConstraint> pairs;
  for (Eigen::Index i = 0; i < 6; ++i) pairs.push_back({i % 5, (i + 1) % 5, +1});
  const LabeledPairSet ps(samples, pairs);
  const Matrix u = test::random_matrix(4, 2, 79, 0.0, 0.5);
  const Matrix x_u = test::random_matrix(4, 8, 80);
  const FragmentMatrix f = fragment_matrix_from_table(map_columns_linear(u, x_u));
  HyperParams hp;
  hp.r = 2;
  hp.gamma = 3.0;
  const Matrix g = gradient_smoothed(u, ps, &x_u, &f, nullptr, hp);
  CHECK(g.isZero(0.0));
}

TEST_CASE("gradient: matches finite differences of the objective") {
  for (unsigned seed : {81u, 82u, 83u}) {
    auto inst = make_instance(seed, 0.7, 1.3);
    const Matrix u = test::random_matrix(5, 3, seed + 7, 0.0, 1.0);
    const Matrix analytic =
        gradient_smoothed(u, inst.pairs, &inst.x_u, &inst.fragments, &inst.graph, inst.hp);
    const Matrix fd = fd_gradient(
        [&](const Matrix& m) {
          return objective_smoothed(m, inst.pairs, &inst.x_u, &inst.fragments, &inst.graph,
                                    inst.hp);
        },
        u, 1e-5);
    CHECK((analytic - fd).norm() <= 1e-4 * std::max(1.0, fd.norm()));
  }
}

TEST_CASE("gradient: fragment component is exactly linear in gamma") {
  // Satisfied pairs zero out the hinge term, isolating the fragment part.
  Matrix samples = test::random_matrix(5, 6, 84, -0.05, 0.05);
  std::vector<PairConstraint> sat;
  for (Eigen::Index i = 0; i < 8; ++i) sat.push_back({i % 6, (i + 2) % 6, +1});
  const LabeledPairSet pairs(samples, sat);
  const Matrix x_u = test::random_matrix(5, 15, 85, -2.0, 2.0);
  const FragmentMatrix f = fragment_matrix_from_table(test::random_matrix(3, 15, 86, 0.0, 1.0));
  const Matrix u = test::random_matrix(5, 3, 87, 0.0, 0.3);
  HyperParams hp;
  hp.r = 3;
  hp.gamma = 1.25;
  const Matrix g1 = gradient_smoothed(u, pairs, &x_u, &f, nullptr, hp);
  hp.gamma = 2.5;
  const Matrix g2 = gradient_smoothed(u, pairs, &x_u, &f, nullptr, hp);
  CHECK(test::bitwise_equal(g2, Matrix(2.0 * g1)));
}

TEST_CASE("projection: clamps negatives and is idempotent") {
  Matrix v(2, 2);
  v << -1.0, 2.0, 0.0, -3.0;
  Matrix expect(2, 2);
  expect << 0.0, 2.0, 0.0, 0.0;
  CHECK(test::bitwise_equal(project_nonneg(v), expect));
  CHECK(test::bitwise_equal(project_nonneg(expect), expect));
  CHECK(test::bitwise_equal(project_nonneg(project_nonneg(v)), project_nonneg(v)));
}

TEST_CASE("pgm: reaches zero loss on separable data") {
  const LabeledPairSet pairs = separable_target_pairs();
  HyperParams hp;
  hp.r = 2;
  hp.seed = 9;
  hp.eps_stop = 1e-9;
  const TrainResult res = pgm_train(pairs, nullptr, nullptr, nullptr, hp);
  CHECK(res.trace.final_objective() <= 1e-3);
  CHECK((res.map.u.array() >= 0.0).all());
}

TEST_CASE("pgm: trace is monotone, non-negative, and Armijo-consistent") {
  auto inst = make_instance(87, 0.5, 0.5);
  const TrainResult res =
      pgm_train(inst.pairs, &inst.x_u, &inst.fragments, &inst.graph, inst.hp);
  REQUIRE(!res.trace.iterations.empty());
  double prev = res.trace.initial_objective;
  for (const auto& it : res.trace.iterations) {
    CHECK(it.objective <= prev);
    CHECK(it.min_entry >= 0.0);
    CHECK(it.armijo_lhs <= it.armijo_rhs);
    CHECK(it.armijo_rhs <= 0.0);
    prev = it.objective;
  }
}

TEST_CASE("pgm: identical seeds give bitwise-identical maps") {
  auto inst = make_instance(88, 1.0, 1.0);
  const TrainResult a = pgm_train(inst.pairs, &inst.x_u, &inst.fragments, &inst.graph, inst.hp);
  const TrainResult b = pgm_train(inst.pairs, &inst.x_u, &inst.fragments, &inst.graph, inst.hp);
  CHECK(test::bitwise_equal(a.map.u, b.map.u));
  CHECK(a.trace.iterations.size() == b.trace.iterations.size());
}

TEST_CASE("pgm: with gamma = 0 the solution ignores fragment contents") {
  auto inst = make_instance(89, 0.0, 0.0);
  const FragmentMatrix other =
      fragment_matrix_from_table(test::random_matrix(3, 15, 999, 0.0, 1.0));
  const TrainResult none =
      pgm_train(inst.pairs, &inst.x_u, nullptr, nullptr, inst.hp);
  const TrainResult f1 =
      pgm_train(inst.pairs, &inst.x_u, &inst.fragments, nullptr, inst.hp);
  const TrainResult f2 = pgm_train(inst.pairs, &inst.x_u, &other, nullptr, inst.hp);
  CHECK(test::bitwise_equal(none.map.u, f1.map.u));
  CHECK(test::bitwise_equal(none.map.u, f2.map.u));
}

TEST_CASE("pgm: with gamma_i = 0 the solution ignores the graph") {
  auto inst = make_instance(93, 0.0, 0.0);
  const NeighborGraph other = build_neighbor_graph(inst.x_u, 5, 0.3);
  const TrainResult none = pgm_train(inst.pairs, &inst.x_u, nullptr, nullptr, inst.hp);
  const TrainResult g1 = pgm_train(inst.pairs, &inst.x_u, nullptr, &inst.graph, inst.hp);
  const TrainResult g2 = pgm_train(inst.pairs, &inst.x_u, nullptr, &other, inst.hp);
  CHECK(test::bitwise_equal(none.map.u, g1.map.u));
  CHECK(test::bitwise_equal(none.map.u, g2.map.u));
}

TEST_CASE("pgm: explicit init is honored and validated") {
  auto inst = make_instance(90, 0.0, 0.0);
  const LinearMap init(Matrix::Constant(5, 3, 0.2));
  const TrainResult res =
      pgm_train(inst.pairs, nullptr, nullptr, nullptr, inst.hp, init);
  CHECK((res.map.u.array() >= 0.0).all());
  const LinearMap bad(Matrix::Constant(4, 3, 0.2));
  CHECK_THROWS_AS(pgm_train(inst.pairs, nullptr, nullptr, nullptr, inst.hp, bad),
                  std::invalid_argument);
}

TEST_CASE("pgm: input validation") {
  auto inst = make_instance(91, 1.0, 1.0);
  HyperParams hp = inst.hp;
  CHECK_THROWS_AS(pgm_train(inst.pairs, &inst.x_u, nullptr, &inst.graph, hp),
                  std::invalid_argument);
  CHECK_THROWS_AS(pgm_train(inst.pairs, &inst.x_u, &inst.fragments, nullptr, hp),
                  std::invalid_argument);
  const LabeledPairSet empty(Matrix::Identity(5, 5), {});
  CHECK_THROWS_AS(pgm_train(empty, &inst.x_u, &inst.fragments, &inst.graph, hp), data_error);
  hp.r = 0;
  CHECK_THROWS_AS(pgm_train(inst.pairs, &inst.x_u, &inst.fragments, &inst.graph, hp),
                  std::invalid_argument);
}

TEST_CASE("pgm: fragment fidelity improves with gamma") {
  // Small two-gamma sanity check; the full sweep lives in the acceptance run.
  auto inst = make_instance(92, 0.0, 0.0, 4, 2, 10, 12);
  auto fidelity = [&](double gamma) {
    HyperParams hp = inst.hp;
    hp.gamma = gamma;
    const FragmentMatrix* f = &inst.fragments;
    const TrainResult res = pgm_train(inst.pairs, &inst.x_u, f, nullptr, hp);
    return (map_columns_linear(res.map.u, inst.x_u) - inst.fragments.values)
               .cwiseAbs()
               .sum() /
           static_cast<double>(inst.x_u.cols());
  };
  CHECK(fidelity(100.0) <= fidelity(0.0) + 1e-6);
}

}  // TEST_SUITE
