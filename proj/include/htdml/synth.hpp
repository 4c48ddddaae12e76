#pragma once

#include <functional>
#include <string>
#include <vector>

#include "htdml/boosted.hpp"
#include "htdml/eval.hpp"

namespace htdml {

/// Configuration of the two-view synthetic generator. The source view is
/// informative (low noise, high dimension), the target view cheap and
/// noisy; both are fixed random linear images of shared latent draws.
struct SynthConfig {
  int n_classes = 5;
  int latent_dim = 5;
  int d_s = 40;
  int d_m = 10;
  int n_labeled_pairs_source = 500;
  int n_labeled_pairs_target = 50;
  int n_unlabeled = 500;
  int n_test = 300;
  double noise_source = 0.1;
  double noise_target = 0.8;
  unsigned long long seed = 0;

  void validate() const;
  std::vector<std::string> warnings() const;
};

struct SynthData {
  LabeledPairSet source_pairs;
  LabeledPairSet target_pairs;
  CorrespondenceSet correspondences;
  LabeledPointSet target_train;
  LabeledPointSet target_test;
};

SynthData generate_synthetic(const SynthConfig& cfg);

/// Central finite differences of a scalar function of a matrix.
Matrix fd_gradient(const std::function<double(const Matrix&)>& objective, const Matrix& u,
                   double h);

/// Direct grid maximization of the smoothed-loss inner problems; the
/// independent check for the closed forms. grid_n >= 1000.
double smoothed_loss_oracle_hinge(int y, double dist_sq, double delta_inf, double sigma,
                                  int grid_n);
double smoothed_loss_oracle_abs(double z, double sigma, int grid_n);

struct BenchParams {
  HyperParams hyper;  // gamma/gamma_i/r/etc. for the full model
  int n_trees = 100;
  double alpha = 0.01;
  int depth = 4;
  int eval_k = 1;
  int threads = 1;
};

/// Mean and standard deviation over seeds, per method and metric. Methods
/// are ordered: eu, no_kt_no_mr, no_kt, no_mr, htdml, gb_htdml.
struct BenchReport {
  std::vector<std::string> method_names;
  std::vector<unsigned long long> seeds;
  Matrix accuracy;  // methods x seeds
  Matrix macro_f1;  // methods x seeds

  double mean(const Matrix& m, Eigen::Index row) const;
  double stddev(const Matrix& m, Eigen::Index row) const;
  Eigen::Index method_index(const std::string& name) const;
};

BenchReport run_benchmark(const SynthConfig& cfg, const BenchParams& params,
                          const std::vector<unsigned long long>& seeds);

std::string bench_csv(const BenchReport& report);
std::string bench_markdown(const BenchReport& report);

}  // namespace htdml
