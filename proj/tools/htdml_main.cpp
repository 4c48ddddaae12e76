#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "htdml/eval.hpp"
#include "htdml/io.hpp"
#include "htdml/model_io.hpp"
#include "htdml/synth.hpp"

namespace {

using namespace htdml;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct SharedFlags {
  std::string out;
  int threads = 1;
  bool deterministic = false;
};

void add_shared(CLI::App* cmd, SharedFlags& shared, bool out_required = true) {
  auto* out = cmd->add_option("--out", shared.out, "Output file or directory");
  if (out_required) out->required();
  cmd->add_option("--threads", shared.threads, "Worker threads for seed-parallel commands")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--deterministic", shared.deterministic,
                "Force sequential reductions (equivalent to --threads 1)");
  std::string ignored;
  cmd->add_option("--config", ignored,
                  "Read options from a key=value config file (flags take precedence)");
}

// Rewrites argv so that key=value lines from a --config file become options
// placed ahead of the explicit flags; with take-last semantics the command
// line then overrides the file. Unknown keys are rejected up front.
std::vector<std::string> expand_config(const CLI::App& app, int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2) return args;
  const CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[1]);
  } catch (const CLI::OptionNotFound&) {
    return args;  // not a subcommand invocation; let the parser complain
  }

  std::string config_path;
  std::vector<std::string> rest;
  for (size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file path");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  std::vector<std::string> out = {args[0], args[1]};
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw data_error("cannot open config file: " + config_path);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
      size_t start = line.find_first_not_of(" \t");
      if (start == std::string::npos || line[start] == '#') continue;
      const size_t eq = line.find('=', start);
      if (eq == std::string::npos) {
        throw std::invalid_argument(config_path + ": line " + std::to_string(line_no) +
                                    " is not key=value");
      }
      const std::string key = line.substr(start, eq - start);
      const std::string value = line.substr(eq + 1);
      if (sub->get_option_no_throw("--" + key) == nullptr) {
        throw std::invalid_argument(config_path + ": unknown config key '" + key + "'");
      }
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

void add_hyper(CLI::App* cmd, HyperParams& hp, bool with_transfer = true,
               bool with_seed = true) {
  if (with_transfer) {
    cmd->add_option("--gamma", hp.gamma, "Fragment-approximation weight")
        ->capture_default_str();
    cmd->add_option("--gamma-i", hp.gamma_i, "Manifold-regularization weight")
        ->capture_default_str();
    cmd->add_option("--k-neighbors", hp.k_neighbors, "Neighbor count for the manifold graph")
        ->capture_default_str();
  }
  cmd->add_option("--sigma", hp.sigma, "Smoothing parameter")->capture_default_str();
  cmd->add_option("--rho", hp.rho, "Armijo sufficient-decrease constant")->capture_default_str();
  cmd->add_option("--beta", hp.beta, "Backtracking factor")->capture_default_str();
  cmd->add_option("--eps", hp.eps_stop, "Relative-change stopping threshold")
      ->capture_default_str();
  cmd->add_option("--max-iter", hp.max_iter, "Iteration cap")->capture_default_str();
  if (with_seed) cmd->add_option("--seed", hp.seed, "Random seed")->capture_default_str();
}

void add_synth_config(CLI::App* cmd, SynthConfig& cfg) {
  cmd->add_option("--classes", cfg.n_classes, "Number of latent classes")->capture_default_str();
  cmd->add_option("--latent-dim", cfg.latent_dim, "Latent dimension")->capture_default_str();
  cmd->add_option("--ds", cfg.d_s, "Source feature dimension")->capture_default_str();
  cmd->add_option("--dm", cfg.d_m, "Target feature dimension")->capture_default_str();
  cmd->add_option("--source-pairs", cfg.n_labeled_pairs_source, "Labeled source pairs")
      ->capture_default_str();
  cmd->add_option("--target-pairs", cfg.n_labeled_pairs_target, "Labeled target pairs")
      ->capture_default_str();
  cmd->add_option("--unlabeled", cfg.n_unlabeled, "Unlabeled correspondences")
      ->capture_default_str();
  cmd->add_option("--test", cfg.n_test, "Held-out target test points")->capture_default_str();
  cmd->add_option("--noise-source", cfg.noise_source, "Source view noise level")
      ->capture_default_str();
  cmd->add_option("--noise-target", cfg.noise_target, "Target view noise level")
      ->capture_default_str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << content;
}

void write_trace_csv(const std::string& path, const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << "iter,objective,step,grad_norm,armijo_lhs,armijo_rhs,min_entry\n";
  out << "0," << format_double(trace.initial_objective) << ",0,0,0,0,0\n";
  int iter = 1;
  for (const auto& it : trace.iterations) {
    out << iter++ << ',' << format_double(it.objective) << ',' << format_double(it.step) << ','
        << format_double(it.grad_norm) << ',' << format_double(it.armijo_lhs) << ','
        << format_double(it.armijo_rhs) << ',' << format_double(it.min_entry) << '\n';
  }
}

ModelMeta meta_from(const HyperParams& hp, const TrainTrace& trace) {
  ModelMeta meta;
  meta.hyper = hp;
  meta.iterations = static_cast<int>(trace.iterations.size());
  meta.final_objective = trace.final_objective();
  meta.status = trace.status();
  return meta;
}

// ---- synth ----------------------------------------------------------------

int cmd_synth(const SynthConfig& cfg, const SharedFlags& shared) {
  for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << '\n';
  const SynthData data = generate_synthetic(cfg);
  const std::filesystem::path dir(shared.out);
  std::filesystem::create_directories(dir);
  save_samples(data.source_pairs.samples(), (dir / "source_pair_samples.csv").string());
  save_pairs(data.source_pairs.pairs(), (dir / "source_pairs.csv").string());
  save_samples(data.target_pairs.samples(), (dir / "target_pair_samples.csv").string());
  save_pairs(data.target_pairs.pairs(), (dir / "target_pairs.csv").string());
  save_samples(data.correspondences.source(), (dir / "corr_source.csv").string());
  save_samples(data.correspondences.target(), (dir / "corr_target.csv").string());
  save_point_set(data.target_train, (dir / "target_train_samples.csv").string(),
                 (dir / "target_train_labels.csv").string());
  save_point_set(data.target_test, (dir / "target_test_samples.csv").string(),
                 (dir / "target_test_labels.csv").string());
  std::cout << "wrote synthetic dataset to " << dir.string() << '\n';
  return 0;
}

// ---- fragments ------------------------------------------------------------

struct FragmentArgs {
  std::string source_samples, source_pairs, mapping_table;
  std::string corr_source, corr_target;
  std::string source_model_out;
  Eigen::Index r = 0;
  double omega = 0.0;  // 0 = use the bandwidth rule
  HyperParams hp;
};

int cmd_fragments(const FragmentArgs& args, const SharedFlags& shared) {
  const CorrespondenceSet corr = load_correspondences(args.corr_source, args.corr_target);
  FragmentMatrix fragments;
  if (!args.mapping_table.empty()) {
    if (!args.source_samples.empty() || !args.source_pairs.empty()) {
      throw std::invalid_argument(
          "--mapping-table excludes --source-samples/--source-pairs");
    }
    fragments = fragment_matrix_from_table(load_fragment_matrix(args.mapping_table).values);
    if (fragments.n_unlabeled() != corr.count()) {
      throw data_error("mapping table has " + std::to_string(fragments.n_unlabeled()) +
                       " columns but there are " + std::to_string(corr.count()) +
                       " correspondences");
    }
  } else {
    if (args.source_samples.empty() || args.source_pairs.empty()) {
      throw std::invalid_argument(
          "fragments needs --source-samples and --source-pairs, or --mapping-table");
    }
    const LabeledPairSet pairs = load_pair_dataset(args.source_samples, args.source_pairs);
    HyperParams hp = args.hp;
    hp.gamma = 0.0;
    hp.gamma_i = 0.0;
    hp.r = args.r;
    if (args.r > pairs.dim()) {
      throw std::invalid_argument("r = " + std::to_string(args.r) +
                                  " exceeds the source dimension " + std::to_string(pairs.dim()));
    }
    const TrainResult source = pgm_train(pairs, nullptr, nullptr, nullptr, hp);
    if (!args.source_model_out.empty()) {
      save_model(source.map, meta_from(hp, source.trace), args.source_model_out);
    }
    const Matrix metric = normalized_source_metric(source.map);
    const FundamentalElements elements = decompose_metric(metric, args.r);
    const double omega =
        args.omega > 0.0 ? args.omega : default_bandwidth(corr.source());
    fragments = build_fragment_matrix(elements, corr, omega);
  }
  save_fragment_matrix(fragments, shared.out);
  std::cout << "wrote " << fragments.count() << " x " << fragments.n_unlabeled()
            << " fragment matrix to " << shared.out << '\n';
  return 0;
}

// ---- train-linear / train-gbrt ---------------------------------------------

struct TrainArgs {
  std::string pair_samples, pairs, corr_target, fragments_path, trace_path;
  double omega = 0.0;
  HyperParams hp;
  // gbrt only
  std::string init_path;
  int trees = 100;
  double alpha = 0.01;
  int depth = 4;
};

struct TrainInputs {
  LabeledPairSet pairs;
  std::optional<Matrix> x_u;
  std::optional<FragmentMatrix> fragments;
  std::optional<NeighborGraph> graph;
};

TrainInputs load_train_inputs(const TrainArgs& args) {
  LabeledPairSet pairs = load_pair_dataset(args.pair_samples, args.pairs);
  std::optional<Matrix> x_u;
  std::optional<FragmentMatrix> fragments;
  std::optional<NeighborGraph> graph;
  if (args.hp.gamma > 0.0 && args.fragments_path.empty()) {
    throw std::invalid_argument("--fragments is required when --gamma > 0");
  }
  if ((args.hp.gamma > 0.0 || args.hp.gamma_i > 0.0) && args.corr_target.empty()) {
    throw std::invalid_argument("--corr-target is required when --gamma or --gamma-i > 0");
  }
  if (!args.corr_target.empty()) x_u = load_samples(args.corr_target);
  if (!args.fragments_path.empty()) fragments = load_fragment_matrix(args.fragments_path);
  if (args.hp.gamma_i > 0.0) {
    const double omega = args.omega > 0.0 ? args.omega : default_bandwidth(*x_u);
    graph = build_neighbor_graph(*x_u, args.hp.k_neighbors, omega);
  }
  return {std::move(pairs), std::move(x_u), std::move(fragments), std::move(graph)};
}

int cmd_train_linear(const TrainArgs& args, const SharedFlags& shared) {
  const TrainInputs in = load_train_inputs(args);
  const TrainResult res =
      pgm_train(in.pairs, in.x_u ? &*in.x_u : nullptr, in.fragments ? &*in.fragments : nullptr,
                in.graph ? &*in.graph : nullptr, args.hp);
  save_model(res.map, meta_from(args.hp, res.trace), shared.out);
  if (!args.trace_path.empty()) write_trace_csv(args.trace_path, res.trace);
  std::cout << "trained linear map in " << res.trace.iterations.size() << " iterations ("
            << res.trace.status() << "), objective " << format_double(res.trace.final_objective())
            << ", model written to " << shared.out << '\n';
  return 0;
}

int cmd_train_gbrt(const TrainArgs& args, const SharedFlags& shared) {
  const TrainInputs in = load_train_inputs(args);
  std::optional<LinearMap> init;
  HyperParams hp = args.hp;
  if (!args.init_path.empty()) {
    LoadedModel loaded = load_model(args.init_path);
    if (!std::holds_alternative<LinearMap>(loaded.mapping)) {
      throw data_error("--init must point to a linear model file");
    }
    init = std::get<LinearMap>(std::move(loaded.mapping));
    if (init->output_dim() != hp.r) {
      throw std::invalid_argument("--init has r = " + std::to_string(init->output_dim()) +
                                  " but the run requests r = " + std::to_string(hp.r));
    }
  } else {
    const TrainResult lin =
        pgm_train(in.pairs, in.x_u ? &*in.x_u : nullptr, in.fragments ? &*in.fragments : nullptr,
                  in.graph ? &*in.graph : nullptr, hp);
    init = lin.map;
  }
  const BoostResult res = boost_train(
      *init, in.pairs, in.x_u ? &*in.x_u : nullptr, in.fragments ? &*in.fragments : nullptr,
      in.graph ? &*in.graph : nullptr, hp, args.trees, args.alpha, args.depth);
  save_model(res.map, meta_from(hp, res.trace), shared.out);
  if (!args.trace_path.empty()) write_trace_csv(args.trace_path, res.trace);
  std::cout << "boosted " << res.map.trees.size() << " trees, objective "
            << format_double(res.trace.final_objective()) << ", model written to " << shared.out
            << '\n';
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string model, train_samples, train_labels, test_samples, test_labels, csv_path;
  int k = 1;
  bool with_map = false;
};

int cmd_eval(const EvalArgs& args, const SharedFlags& shared) {
  const LoadedModel model = load_model(args.model);
  const LabeledPointSet train = load_point_set(args.train_samples, args.train_labels);
  const LabeledPointSet test = load_point_set(args.test_samples, args.test_labels);
  EvalReport report = evaluate(train, test, model.mapping, args.k, args.with_map);
  report.config["model"] = args.model;
  const std::string text = render_report(report);
  std::cout << text;
  if (!shared.out.empty()) write_text(shared.out, text);
  if (!args.csv_path.empty()) {
    const bool fresh = !std::filesystem::exists(args.csv_path) ||
                       std::filesystem::file_size(args.csv_path) == 0;
    std::ofstream csv(args.csv_path, std::ios::app);
    if (!csv) throw data_error("cannot write file: " + args.csv_path);
    if (fresh) csv << report_csv_header(report) << '\n';
    csv << report_csv_row(report) << '\n';
  }
  return 0;
}

// ---- bench -------------------------------------------------------------------

struct BenchArgs {
  SynthConfig cfg;
  BenchParams params;
  int n_seeds = 10;
  unsigned long long base_seed = 0;
};

int cmd_bench(const BenchArgs& args, const SharedFlags& shared) {
  BenchParams params = args.params;
  params.threads = shared.deterministic ? 1 : shared.threads;
  std::vector<unsigned long long> seeds;
  for (int s = 0; s < args.n_seeds; ++s) {
    seeds.push_back(args.base_seed + static_cast<unsigned long long>(s));
  }
  const BenchReport report = run_benchmark(args.cfg, params, seeds);
  const std::filesystem::path dir(shared.out);
  std::filesystem::create_directories(dir);
  write_text((dir / "bench.csv").string(), bench_csv(report));
  write_text((dir / "bench.md").string(), bench_markdown(report));
  std::cout << bench_markdown(report);
  std::cout << "wrote " << (dir / "bench.csv").string() << " and " << (dir / "bench.md").string()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous transfer distance metric learning"};
  app.require_subcommand(1);

  // synth
  SynthConfig synth_cfg;
  SharedFlags synth_shared;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic two-domain dataset");
  add_synth_config(synth, synth_cfg);
  synth->add_option("--seed", synth_cfg.seed, "Random seed")->capture_default_str();
  add_shared(synth, synth_shared);

  // fragments
  FragmentArgs frag_args;
  SharedFlags frag_shared;
  auto* fragments = app.add_subcommand(
      "fragments", "Train a source metric and write its fragment matrix");
  fragments->add_option("--source-samples", frag_args.source_samples,
                        "CSV of labeled source samples");
  fragments->add_option("--source-pairs", frag_args.source_pairs, "CSV of source pair rows");
  fragments->add_option("--mapping-table", frag_args.mapping_table,
                        "Precomputed r x N fragment table (skips source training)");
  fragments->add_option("--corr-source", frag_args.corr_source, "Source-side correspondences")
      ->required();
  fragments->add_option("--corr-target", frag_args.corr_target, "Target-side correspondences")
      ->required();
  fragments->add_option("-r,--rank", frag_args.r, "Number of fundamental elements")->required();
  fragments->add_option("--omega", frag_args.omega,
                        "RBF bandwidth (default: mean squared pairwise distance)");
  fragments->add_option("--source-model-out", frag_args.source_model_out,
                        "Also save the trained source map");
  add_hyper(fragments, frag_args.hp, /*with_transfer=*/false);
  add_shared(fragments, frag_shared);

  // train-linear
  TrainArgs lin_args;
  SharedFlags lin_shared;
  auto* train_linear =
      app.add_subcommand("train-linear", "Train the projected-gradient linear map");
  train_linear->add_option("--pair-samples", lin_args.pair_samples, "CSV of target samples")
      ->required();
  train_linear->add_option("--pairs", lin_args.pairs, "CSV of target pair rows")->required();
  train_linear->add_option("--corr-target", lin_args.corr_target,
                           "Target-side correspondences (X_U)");
  train_linear->add_option("--fragments", lin_args.fragments_path, "Fragment matrix file");
  train_linear->add_option("-r,--rank", lin_args.hp.r, "Mapped dimension")->required();
  train_linear->add_option("--omega", lin_args.omega,
                           "Graph bandwidth (default: mean squared pairwise distance)");
  train_linear->add_option("--trace", lin_args.trace_path, "Write the per-iteration trace CSV");
  add_hyper(train_linear, lin_args.hp);
  add_shared(train_linear, lin_shared);

  // train-gbrt
  TrainArgs gb_args;
  SharedFlags gb_shared;
  auto* train_gbrt =
      app.add_subcommand("train-gbrt", "Boost regression trees from a linear initialization");
  train_gbrt->add_option("--pair-samples", gb_args.pair_samples, "CSV of target samples")
      ->required();
  train_gbrt->add_option("--pairs", gb_args.pairs, "CSV of target pair rows")->required();
  train_gbrt->add_option("--corr-target", gb_args.corr_target,
                         "Target-side correspondences (X_U)");
  train_gbrt->add_option("--fragments", gb_args.fragments_path, "Fragment matrix file");
  train_gbrt->add_option("-r,--rank", gb_args.hp.r, "Mapped dimension")->required();
  train_gbrt->add_option("--omega", gb_args.omega,
                         "Graph bandwidth (default: mean squared pairwise distance)");
  train_gbrt->add_option("--init", gb_args.init_path,
                         "Linear model file to start from (default: train one first)");
  train_gbrt->add_option("--trees", gb_args.trees, "Boosting rounds")->capture_default_str();
  train_gbrt->add_option("--alpha", gb_args.alpha, "Learning rate")->capture_default_str();
  train_gbrt->add_option("--depth", gb_args.depth, "Tree depth")->capture_default_str();
  train_gbrt->add_option("--trace", gb_args.trace_path, "Write the per-round trace CSV");
  add_hyper(train_gbrt, gb_args.hp);
  add_shared(train_gbrt, gb_shared);

  // eval
  EvalArgs eval_args;
  SharedFlags eval_shared;
  auto* eval_cmd = app.add_subcommand("eval", "kNN-evaluate a saved model");
  eval_cmd->add_option("--model", eval_args.model, "Model file")->required();
  eval_cmd->add_option("--train-samples", eval_args.train_samples, "Gallery samples CSV")
      ->required();
  eval_cmd->add_option("--train-labels", eval_args.train_labels, "Gallery labels CSV")
      ->required();
  eval_cmd->add_option("--test-samples", eval_args.test_samples, "Query samples CSV")->required();
  eval_cmd->add_option("--test-labels", eval_args.test_labels, "Query labels CSV")->required();
  eval_cmd->add_option("--knn", eval_args.k, "Neighbor count")->capture_default_str();
  eval_cmd->add_flag("--with-map", eval_args.with_map, "Also compute mean average precision");
  eval_cmd->add_option("--csv", eval_args.csv_path, "Append a CSV row for sweeps");
  add_shared(eval_cmd, eval_shared, /*out_required=*/false);

  // bench
  BenchArgs bench_args;
  // Transfer-on defaults for the benchmark; the train commands keep both
  // weights at 0 so transfer is an explicit opt-in there. The 1/N_U scaling
  // of the fragment term and 1/N_U^2 of the manifold term mean useful
  // weights sit well above 1.
  bench_args.params.hyper.gamma = 100.0;
  bench_args.params.hyper.gamma_i = 10.0;
  bench_args.params.hyper.r = 5;
  SharedFlags bench_shared;
  auto* bench = app.add_subcommand("bench", "Run the seeded ablation benchmark");
  add_synth_config(bench, bench_args.cfg);
  bench->add_option("--seeds", bench_args.n_seeds, "Number of seeds")->capture_default_str();
  bench->add_option("--seed", bench_args.base_seed, "First seed")->capture_default_str();
  bench->add_option("-r,--rank", bench_args.params.hyper.r, "Mapped dimension")
      ->capture_default_str();
  bench->add_option("--trees", bench_args.params.n_trees, "Boosting rounds")
      ->capture_default_str();
  bench->add_option("--alpha", bench_args.params.alpha, "Boosting learning rate")
      ->capture_default_str();
  bench->add_option("--depth", bench_args.params.depth, "Tree depth")->capture_default_str();
  bench->add_option("--knn", bench_args.params.eval_k, "Evaluation neighbor count")
      ->capture_default_str();
  add_hyper(bench, bench_args.params.hyper, /*with_transfer=*/true, /*with_seed=*/false);
  add_shared(bench, bench_shared);

  try {
    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
      for (auto* opt : sub->get_options()) {
        opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      }
    }
    const std::vector<std::string> expanded = expand_config(app, argc, argv);
    std::vector<const char*> cargv;
    cargv.reserve(expanded.size());
    for (const auto& s : expanded) cargv.push_back(s.c_str());
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message or requested help
    return code == 0 ? 0 : kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const htdml::data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_cfg, synth_shared);
    if (fragments->parsed()) return cmd_fragments(frag_args, frag_shared);
    if (train_linear->parsed()) return cmd_train_linear(lin_args, lin_shared);
    if (train_gbrt->parsed()) return cmd_train_gbrt(gb_args, gb_shared);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, eval_shared);
    if (bench->parsed()) return cmd_bench(bench_args, bench_shared);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const htdml::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const htdml::data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
