#include "htdml/synth.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "htdml/fragments.hpp"
#include "htdml/graph.hpp"
#include "htdml/io.hpp"

namespace htdml {

namespace {

// Generator shape constants: class centers on a sphere of this radius with
// a minimum pairwise separation, isotropic latent jitter around them, and
// sparse non-negative projections scaled to preserve typical magnitude.
constexpr double kCenterRadius = 3.0;
constexpr double kLatentNoise = 0.5;
constexpr double kCenterSeparation = 0.9;  // fraction of the radius
constexpr double kProjectionDensity = 0.5;

}  // namespace

void SynthConfig::validate() const {
  if (n_classes < 2) throw std::invalid_argument("synthetic config: need at least 2 classes");
  if (latent_dim < 1 || d_s < 1 || d_m < 1) {
    throw std::invalid_argument("synthetic config: dimensions must be positive");
  }
  if (n_unlabeled < 2) {
    throw std::invalid_argument("synthetic config: need at least 2 unlabeled correspondences");
  }
  if (n_test < n_classes) {
    throw std::invalid_argument("synthetic config: n_test must cover every class");
  }
  if (n_labeled_pairs_source < 2 * n_classes || n_labeled_pairs_target < 2 * n_classes) {
    throw std::invalid_argument(
        "synthetic config: pair counts must be at least twice the class count");
  }
  if (noise_source < 0.0 || noise_target < 0.0) {
    throw std::invalid_argument("synthetic config: noise levels must be non-negative");
  }
}

std::vector<std::string> SynthConfig::warnings() const {
  std::vector<std::string> out;
  if (d_s < latent_dim) {
    out.push_back("d_s = " + std::to_string(d_s) + " is below the latent dimension " +
                  std::to_string(latent_dim) + "; the source view loses information");
  }
  if (d_m < latent_dim) {
    out.push_back("d_m = " + std::to_string(d_m) + " is below the latent dimension " +
                  std::to_string(latent_dim) + "; the target view loses information");
  }
  return out;
}

SynthData generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto normal_vector = [&](Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
  };

  // Class centers on the non-negative orthant of a latent sphere, kept
  // pairwise-separated by rejection; with sparse non-negative projections
  // the views resemble the histogram-style feature vectors an elementwise
  // non-negative map can meaningfully rescale.
  Matrix centers(cfg.latent_dim, cfg.n_classes);
  double separation = kCenterSeparation * kCenterRadius;
  for (int c = 0; c < cfg.n_classes; ++c) {
    for (int attempt = 0;; ++attempt) {
      Vector v = normal_vector(cfg.latent_dim);
      while (v.norm() < 1e-12) v = normal_vector(cfg.latent_dim);
      const Vector candidate = kCenterRadius * v.cwiseAbs() / v.norm();
      bool ok = true;
      for (int prev = 0; prev < c; ++prev) {
        if ((candidate - centers.col(prev)).norm() < separation) {
          ok = false;
          break;
        }
      }
      if (ok) {
        centers.col(c) = candidate;
        break;
      }
      if (attempt >= 200) {  // crowded orthant: relax and keep going
        separation *= 0.9;
        attempt = 0;
      }
    }
  }

  std::uniform_real_distribution<double> unif01(0.0, 1.0);
  const double proj_scale =
      1.0 / std::sqrt(static_cast<double>(cfg.latent_dim) * kProjectionDensity);
  // Sparse non-negative mixing with one anchored response per latent
  // dimension, so no latent direction is lost even in square projections.
  auto sparse_nonneg_projection = [&](Eigen::Index rows) {
    Matrix proj(rows, cfg.latent_dim);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cfg.latent_dim; ++j) {
        const bool active = unif01(rng) < kProjectionDensity;
        const double magnitude = std::abs(gauss(rng));
        proj(i, j) = active ? proj_scale * magnitude : 0.0;
      }
    }
    for (Eigen::Index j = 0; j < cfg.latent_dim; ++j) {
      const Eigen::Index anchor_row = j % rows;
      proj(anchor_row, j) = proj_scale * (0.5 + std::abs(gauss(rng)));
    }
    return proj;
  };
  const Matrix proj_s = sparse_nonneg_projection(cfg.d_s);
  const Matrix proj_m = sparse_nonneg_projection(cfg.d_m);

  auto draw_latent = [&](int cls) {
    return Vector(centers.col(cls) + kLatentNoise * normal_vector(cfg.latent_dim));
  };
  // Views are L2-normalized, matching the usual treatment of the visual
  // descriptors this setting emulates; distances then live on [0, 4] and
  // the unit margin of the pair loss is well scaled.
  auto normalized = [](Vector v) {
    const double n = v.norm();
    return n > 1e-12 ? Vector(v / n) : v;
  };
  auto source_view = [&](const Vector& z) {
    return normalized(proj_s * z + cfg.noise_source * normal_vector(cfg.d_s));
  };
  auto target_view = [&](const Vector& z) {
    return normalized(proj_m * z + cfg.noise_target * normal_vector(cfg.d_m));
  };

  // A labeled pool per domain, classes assigned round-robin; pairs sample
  // pool members, alternating similar and dissimilar labels.
  auto build_pool_pairs = [&](int n_pool, int n_pairs, bool source) {
    Matrix pool(source ? cfg.d_s : cfg.d_m, n_pool);
    std::vector<int> classes(static_cast<size_t>(n_pool));
    for (int i = 0; i < n_pool; ++i) {
      const int cls = i % cfg.n_classes;
      classes[static_cast<size_t>(i)] = cls;
      const Vector z = draw_latent(cls);
      pool.col(i) = source ? source_view(z) : target_view(z);
    }
    std::vector<std::vector<Eigen::Index>> members(static_cast<size_t>(cfg.n_classes));
    for (int i = 0; i < n_pool; ++i) {
      members[static_cast<size_t>(classes[static_cast<size_t>(i)])].push_back(i);
    }
    std::uniform_int_distribution<int> any_class(0, cfg.n_classes - 1);
    std::vector<PairConstraint> pairs;
    pairs.reserve(static_cast<size_t>(n_pairs));
    for (int i = 0; i < n_pairs; ++i) {
      PairConstraint p;
      if (i % 2 == 0) {
        p.label = +1;
        const auto& m = members[static_cast<size_t>(any_class(rng))];
        std::uniform_int_distribution<size_t> first(0, m.size() - 1);
        std::uniform_int_distribution<size_t> second(0, m.size() - 2);
        const size_t a = first(rng);
        size_t b = second(rng);
        if (b >= a) ++b;
        p.first = m[a];
        p.second = m[b];
      } else {
        p.label = -1;
        const int c1 = any_class(rng);
        std::uniform_int_distribution<int> other(0, cfg.n_classes - 2);
        int c2 = other(rng);
        if (c2 >= c1) ++c2;
        const auto& m1 = members[static_cast<size_t>(c1)];
        const auto& m2 = members[static_cast<size_t>(c2)];
        std::uniform_int_distribution<size_t> from1(0, m1.size() - 1);
        std::uniform_int_distribution<size_t> from2(0, m2.size() - 1);
        p.first = m1[from1(rng)];
        p.second = m2[from2(rng)];
      }
      pairs.push_back(p);
    }
    return std::tuple<Matrix, std::vector<int>, std::vector<PairConstraint>>(
        std::move(pool), std::move(classes), std::move(pairs));
  };

  auto [source_pool, source_classes, source_pairs] =
      build_pool_pairs(cfg.n_labeled_pairs_source, cfg.n_labeled_pairs_source, true);
  auto [target_pool, target_classes, target_pairs] =
      build_pool_pairs(cfg.n_labeled_pairs_target, cfg.n_labeled_pairs_target, false);

  // Correspondences: both views of the same latent draw.
  Matrix corr_source(cfg.d_s, cfg.n_unlabeled);
  Matrix corr_target(cfg.d_m, cfg.n_unlabeled);
  for (int n = 0; n < cfg.n_unlabeled; ++n) {
    const Vector z = draw_latent(n % cfg.n_classes);
    corr_source.col(n) = source_view(z);
    corr_target.col(n) = target_view(z);
  }

  Matrix test_points(cfg.d_m, cfg.n_test);
  std::vector<int> test_labels(static_cast<size_t>(cfg.n_test));
  for (int i = 0; i < cfg.n_test; ++i) {
    const int cls = i % cfg.n_classes;
    test_labels[static_cast<size_t>(i)] = cls;
    test_points.col(i) = target_view(draw_latent(cls));
  }

  // The labeled target pool doubles as the kNN train set.
  LabeledPointSet target_train(target_pool, std::move(target_classes));

  return SynthData{
      LabeledPairSet(std::move(source_pool), std::move(source_pairs)),
      LabeledPairSet(std::move(target_pool), std::move(target_pairs)),
      CorrespondenceSet(std::move(corr_source), std::move(corr_target)),
      std::move(target_train),
      LabeledPointSet(std::move(test_points), std::move(test_labels)),
  };
}

Matrix fd_gradient(const std::function<double(const Matrix&)>& objective, const Matrix& u,
                   double h) {
  if (h <= 0.0) throw std::invalid_argument("fd_gradient: step must be positive");
  Matrix grad(u.rows(), u.cols());
  Matrix probe = u;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      probe(i, j) = u(i, j) + h;
      const double hi = objective(probe);
      probe(i, j) = u(i, j) - h;
      const double lo = objective(probe);
      probe(i, j) = u(i, j);
      grad(i, j) = (hi - lo) / (2.0 * h);
    }
  }
  return grad;
}

double smoothed_loss_oracle_hinge(int y, double dist_sq, double delta_inf, double sigma,
                                  int grid_n) {
  if (grid_n < 1000) throw std::invalid_argument("oracle grid must have at least 1000 points");
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  const double z = static_cast<double>(y) * (1.0 - dist_sq);
  double best = 0.0;
  for (int i = 0; i < grid_n; ++i) {
    const double nu = static_cast<double>(i) / static_cast<double>(grid_n - 1);
    const double v = nu * (-z) - 0.5 * sigma * delta_inf * nu * nu;
    if (i == 0 || v > best) best = v;
  }
  return best;
}

double smoothed_loss_oracle_abs(double z, double sigma, int grid_n) {
  if (grid_n < 1000) throw std::invalid_argument("oracle grid must have at least 1000 points");
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  const int n = grid_n % 2 == 0 ? grid_n + 1 : grid_n;  // keep q = 0 on the grid
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double q = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    const double v = z * q - 0.5 * sigma * q * q;
    if (i == 0 || v > best) best = v;
  }
  return best;
}

double BenchReport::mean(const Matrix& m, Eigen::Index row) const { return m.row(row).mean(); }

double BenchReport::stddev(const Matrix& m, Eigen::Index row) const {
  const Eigen::Index n = m.cols();
  if (n < 2) return 0.0;
  const double mu = m.row(row).mean();
  return std::sqrt((m.row(row).array() - mu).square().sum() / static_cast<double>(n - 1));
}

Eigen::Index BenchReport::method_index(const std::string& name) const {
  for (size_t i = 0; i < method_names.size(); ++i) {
    if (method_names[i] == name) return static_cast<Eigen::Index>(i);
  }
  throw std::invalid_argument("unknown method: " + name);
}

namespace {

struct SeedOutcome {
  std::vector<double> acc;
  std::vector<double> f1;
};

SeedOutcome run_seed(const SynthConfig& base, const BenchParams& params,
                     unsigned long long seed) {
  SynthConfig cfg = base;
  cfg.seed = seed;
  const SynthData data = generate_synthetic(cfg);

  HyperParams hp = params.hyper;
  hp.seed = seed;

  // Source knowledge: metric from labeled source pairs alone, decomposed
  // into fundamental elements, evaluated through the RBF kernel.
  const LinearMap source_map = train_source_metric(data.source_pairs, hp.r, hp);
  const Matrix source_metric = normalized_source_metric(source_map);
  const FundamentalElements elements = decompose_metric(source_metric, hp.r);
  const double omega_s = default_bandwidth(data.correspondences.source());
  const FragmentMatrix fragments =
      build_fragment_matrix(elements, data.correspondences, omega_s);

  const Matrix& x_u = data.correspondences.target();
  const double omega_m = default_bandwidth(x_u);
  const NeighborGraph graph = build_neighbor_graph(x_u, hp.k_neighbors, omega_m);

  auto train_variant = [&](double gamma, double gamma_i) {
    HyperParams v = hp;
    v.gamma = gamma;
    v.gamma_i = gamma_i;
    const Matrix* xu = (gamma > 0.0 || gamma_i > 0.0) ? &x_u : nullptr;
    const FragmentMatrix* fr = gamma > 0.0 ? &fragments : nullptr;
    const NeighborGraph* gr = gamma_i > 0.0 ? &graph : nullptr;
    return pgm_train(data.target_pairs, xu, fr, gr, v);
  };

  std::vector<Mapping> maps;
  maps.emplace_back(LinearMap::identity(cfg.d_m));       // eu
  maps.emplace_back(train_variant(0.0, 0.0).map);        // no_kt_no_mr
  maps.emplace_back(train_variant(0.0, hp.gamma_i).map); // no_kt
  maps.emplace_back(train_variant(hp.gamma, 0.0).map);   // no_mr
  const TrainResult full = train_variant(hp.gamma, hp.gamma_i);
  maps.emplace_back(full.map);                            // htdml
  const BoostResult boosted = boost_train(full.map, data.target_pairs, &x_u, &fragments, &graph,
                                          hp, params.n_trees, params.alpha, params.depth);
  maps.emplace_back(boosted.map);                         // gb_htdml

  SeedOutcome out;
  for (const auto& map : maps) {
    const EvalReport rep = evaluate(data.target_train, data.target_test, map, params.eval_k,
                                    /*with_map=*/false);
    out.acc.push_back(rep.accuracy);
    out.f1.push_back(rep.macro_f1);
  }
  return out;
}

}  // namespace

BenchReport run_benchmark(const SynthConfig& cfg, const BenchParams& params,
                          const std::vector<unsigned long long>& seeds) {
  if (seeds.size() < 3) throw std::invalid_argument("benchmark needs at least 3 seeds");
  params.hyper.validate();
  cfg.validate();

  BenchReport report;
  report.method_names = {"eu", "no_kt_no_mr", "no_kt", "no_mr", "htdml", "gb_htdml"};
  report.seeds = seeds;
  const Eigen::Index n_methods = static_cast<Eigen::Index>(report.method_names.size());
  const Eigen::Index n_seeds = static_cast<Eigen::Index>(seeds.size());
  report.accuracy.resize(n_methods, n_seeds);
  report.macro_f1.resize(n_methods, n_seeds);

  const int threads = std::max(1, std::min<int>(params.threads, static_cast<int>(seeds.size())));
  std::vector<SeedOutcome> outcomes(seeds.size());
  if (threads == 1) {
    for (size_t s = 0; s < seeds.size(); ++s) outcomes[s] = run_seed(cfg, params, seeds[s]);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          while (true) {
            const size_t s = next.fetch_add(1);
            if (s >= seeds.size()) break;
            outcomes[s] = run_seed(cfg, params, seeds[s]);
          }
        } catch (...) {
          errors[static_cast<size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  for (Eigen::Index s = 0; s < n_seeds; ++s) {
    for (Eigen::Index m = 0; m < n_methods; ++m) {
      report.accuracy(m, s) = outcomes[static_cast<size_t>(s)].acc[static_cast<size_t>(m)];
      report.macro_f1(m, s) = outcomes[static_cast<size_t>(s)].f1[static_cast<size_t>(m)];
    }
  }
  return report;
}

std::string bench_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "method,accuracy_mean,accuracy_std,macro_f1_mean,macro_f1_std,seeds\n";
  for (size_t m = 0; m < report.method_names.size(); ++m) {
    const Eigen::Index row = static_cast<Eigen::Index>(m);
    out << report.method_names[m] << ',' << format_double(report.mean(report.accuracy, row))
        << ',' << format_double(report.stddev(report.accuracy, row)) << ','
        << format_double(report.mean(report.macro_f1, row)) << ','
        << format_double(report.stddev(report.macro_f1, row)) << ',' << report.seeds.size()
        << '\n';
  }
  return out.str();
}

std::string bench_markdown(const BenchReport& report) {
  std::ostringstream out;
  out << "| method | accuracy | macroF1 |\n";
  out << "|---|---|---|\n";
  out.precision(4);
  out.setf(std::ios::fixed);
  for (size_t m = 0; m < report.method_names.size(); ++m) {
    const Eigen::Index row = static_cast<Eigen::Index>(m);
    out << "| " << report.method_names[m] << " | " << report.mean(report.accuracy, row)
        << " ± " << report.stddev(report.accuracy, row) << " | "
        << report.mean(report.macro_f1, row) << " ± " << report.stddev(report.macro_f1, row)
        << " |\n";
  }
  return out.str();
}

}  // namespace htdml
