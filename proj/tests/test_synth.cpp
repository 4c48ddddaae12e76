#include <doctest.h>

#include "htdml/eval.hpp"
#include "htdml/synth.hpp"
#include "test_util.hpp"

using namespace htdml;

namespace {

SynthConfig small_config(unsigned long long seed) {
  SynthConfig cfg;
  cfg.n_classes = 3;
  cfg.latent_dim = 3;
  cfg.d_s = 10;
  cfg.d_m = 5;
  cfg.n_labeled_pairs_source = 40;
  cfg.n_labeled_pairs_target = 16;
  cfg.n_unlabeled = 30;
  cfg.n_test = 24;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("generation is deterministic in the seed") {
  const SynthConfig cfg = small_config(11);
  const SynthData a = generate_synthetic(cfg);
  const SynthData b = generate_synthetic(cfg);
  CHECK(test::bitwise_equal(a.source_pairs.samples(), b.source_pairs.samples()));
  CHECK(test::bitwise_equal(a.target_pairs.samples(), b.target_pairs.samples()));
  CHECK(test::bitwise_equal(a.correspondences.source(), b.correspondences.source()));
  CHECK(test::bitwise_equal(a.correspondences.target(), b.correspondences.target()));
  CHECK(test::bitwise_equal(a.target_train.points(), b.target_train.points()));
  CHECK(test::bitwise_equal(a.target_test.points(), b.target_test.points()));
  CHECK(a.target_test.labels() == b.target_test.labels());

  SynthConfig other = cfg;
  other.seed = 12;
  const SynthData c = generate_synthetic(other);
  CHECK(!test::bitwise_equal(a.target_test.points(), c.target_test.points()));
}

TEST_CASE("pair labels are consistent with pool classes") {
  const SynthData data = generate_synthetic(small_config(13));
  // The target train set is the pair pool with its class ids.
  CHECK(test::bitwise_equal(data.target_pairs.samples(), data.target_train.points()));
  const auto& classes = data.target_train.labels();
  for (Eigen::Index i = 0; i < data.target_pairs.n_pairs(); ++i) {
    const auto& p = data.target_pairs.pairs()[static_cast<size_t>(i)];
    const bool same = classes[static_cast<size_t>(p.first)] ==
                      classes[static_cast<size_t>(p.second)];
    CHECK(same == (p.label == +1));
  }
}

TEST_CASE("clean full-rank target view classifies almost perfectly") {
  SynthConfig cfg = small_config(17);
  cfg.noise_target = 0.0;
  cfg.d_m = cfg.latent_dim;
  cfg.n_labeled_pairs_target = 30;
  cfg.n_test = 60;
  const SynthData data = generate_synthetic(cfg);
  const EvalReport rep = evaluate(data.target_train, data.target_test,
                                  Mapping{LinearMap::identity(cfg.d_m)}, 1, false);
  CHECK(rep.accuracy > 0.95);
}

TEST_CASE("config validation and warnings") {
  SynthConfig cfg = small_config(1);
  cfg.n_classes = 1;
  CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
  cfg = small_config(1);
  cfg.n_labeled_pairs_target = 3;
  CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
  cfg = small_config(1);
  cfg.noise_source = -0.5;
  CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
  cfg = small_config(1);
  cfg.d_m = 2;
  CHECK(!cfg.warnings().empty());
}

TEST_CASE("fd_gradient: quadratic and constant objectives") {
  const Matrix u = test::random_matrix(3, 2, 141);
  const Matrix fd = fd_gradient(
      [](const Matrix& m) { return m.array().square().sum(); }, u, 1e-6);
  CHECK((fd - 2.0 * u).norm() < 1e-6);
  const Matrix zero = fd_gradient([](const Matrix&) { return 4.2; }, u, 1e-6);
  CHECK(zero.isZero(0.0));
  CHECK_THROWS_AS(fd_gradient([](const Matrix&) { return 0.0; }, u, 0.0),
                  std::invalid_argument);
}

TEST_CASE("grid oracles: trivial anchors and validation") {
  CHECK(smoothed_loss_oracle_abs(0.0, 0.5, 2000) == 0.0);
  // Satisfied hinge: the maximand is non-positive everywhere on the grid.
  CHECK(smoothed_loss_oracle_hinge(+1, 0.5, 1.0, 0.5, 2000) <= 1e-6);
  CHECK_THROWS_AS(smoothed_loss_oracle_abs(0.0, 0.5, 999), std::invalid_argument);
  CHECK_THROWS_AS(smoothed_loss_oracle_hinge(+1, 0.5, 1.0, 0.5, 10), std::invalid_argument);
}

TEST_CASE("benchmark: report shape, determinism, and thread independence") {
  SynthConfig cfg = small_config(19);
  BenchParams params;
  params.hyper.r = 3;
  params.hyper.gamma = 1.0;
  params.hyper.gamma_i = 1.0;
  params.hyper.max_iter = 60;
  params.hyper.k_neighbors = 5;
  params.n_trees = 5;
  params.alpha = 0.05;
  params.depth = 2;
  const std::vector<unsigned long long> seeds = {1, 2, 3};

  const BenchReport a = run_benchmark(cfg, params, seeds);
  CHECK(a.method_names.size() == 6);
  CHECK(a.accuracy.rows() == 6);
  CHECK(a.accuracy.cols() == 3);
  CHECK(a.macro_f1.rows() == 6);
  for (Eigen::Index m = 0; m < 6; ++m) {
    for (Eigen::Index s = 0; s < 3; ++s) {
      CHECK(a.accuracy(m, s) >= 0.0);
      CHECK(a.accuracy(m, s) <= 1.0);
      CHECK(a.macro_f1(m, s) >= 0.0);
      CHECK(a.macro_f1(m, s) <= 1.0);
    }
  }

  const BenchReport b = run_benchmark(cfg, params, seeds);
  CHECK(test::bitwise_equal(a.accuracy, b.accuracy));
  CHECK(test::bitwise_equal(a.macro_f1, b.macro_f1));

  BenchParams threaded = params;
  threaded.threads = 3;
  const BenchReport c = run_benchmark(cfg, threaded, seeds);
  CHECK(test::bitwise_equal(a.accuracy, c.accuracy));

  const std::string csv = bench_csv(a);
  CHECK(csv.find("method,accuracy_mean") != std::string::npos);
  CHECK(csv.find("gb_htdml") != std::string::npos);
  const std::string md = bench_markdown(a);
  CHECK(md.find("| method |") != std::string::npos);

  CHECK_THROWS_AS(run_benchmark(cfg, params, {1, 2}), std::invalid_argument);
}

}  // TEST_SUITE
