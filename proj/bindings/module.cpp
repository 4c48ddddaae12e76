#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "htdml/eval.hpp"
#include "htdml/fragments.hpp"
#include "htdml/io.hpp"
#include "htdml/smoothing.hpp"
#include "htdml/model_io.hpp"
#include "htdml/synth.hpp"

namespace py = pybind11;
using namespace htdml;

namespace {

// The Python surface uses the numpy convention (rows are samples); the core
// stores samples as columns.
Matrix to_cols(const Matrix& rows_are_samples) { return rows_are_samples.transpose(); }
Matrix to_rows(const Matrix& cols_are_samples) { return cols_are_samples.transpose(); }

LabeledPairSet make_pair_set(const Matrix& samples,
                             const std::vector<std::tuple<long, long, int>>& pairs) {
  std::vector<PairConstraint> pcs;
  pcs.reserve(pairs.size());
  for (const auto& [i, j, y] : pairs) {
    pcs.push_back({static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), y});
  }
  return LabeledPairSet(to_cols(samples), std::move(pcs));
}

const Matrix* opt_ptr(const std::optional<Matrix>& m) { return m ? &*m : nullptr; }
const FragmentMatrix* opt_ptr(const std::optional<FragmentMatrix>& f) { return f ? &*f : nullptr; }
const NeighborGraph* opt_ptr(const std::optional<NeighborGraph>& g) { return g ? &*g : nullptr; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Heterogeneous transfer distance metric learning (C++ core)";

  py::register_exception<data_error>(m, "DataError");
  py::register_exception<numeric_error>(m, "NumericError");

  // ---- data -----------------------------------------------------------------

  py::class_<LabeledPairSet>(m, "LabeledPairSet")
      .def(py::init(&make_pair_set), py::arg("samples"), py::arg("pairs"),
           "samples: (n, d) array; pairs: list of (i, j, y) with y in {+1, -1}")
      .def_property_readonly("dim", &LabeledPairSet::dim)
      .def_property_readonly("n_pairs", &LabeledPairSet::n_pairs)
      .def_property_readonly("samples", [](const LabeledPairSet& s) { return to_rows(s.samples()); })
      .def_property_readonly("labels", &LabeledPairSet::labels)
      .def_property_readonly("delta_inf_norms", [](const LabeledPairSet& s) {
        return Vector(s.delta_inf_norms());
      });

  py::class_<CorrespondenceSet>(m, "CorrespondenceSet")
      .def(py::init([](const Matrix& source, const Matrix& target) {
             return CorrespondenceSet(to_cols(source), to_cols(target));
           }),
           py::arg("source"), py::arg("target"),
           "source: (n, d_s) array; target: (n, d_m) array, row-aligned")
      .def_property_readonly("count", &CorrespondenceSet::count)
      .def_property_readonly("source", [](const CorrespondenceSet& c) { return to_rows(c.source()); })
      .def_property_readonly("target", [](const CorrespondenceSet& c) { return to_rows(c.target()); });

  py::class_<LabeledPointSet>(m, "LabeledPointSet")
      .def(py::init([](const Matrix& points, const std::vector<int>& labels) {
             return LabeledPointSet(to_cols(points), labels);
           }),
           py::arg("points"), py::arg("labels"), "points: (n, d) array; labels: contiguous ids")
      .def_property_readonly("size", &LabeledPointSet::size)
      .def_property_readonly("points", [](const LabeledPointSet& p) { return to_rows(p.points()); })
      .def_property_readonly("labels", &LabeledPointSet::labels);

  // ---- hyper-parameters and traces -------------------------------------------

  py::class_<HyperParams>(m, "HyperParams")
      .def(py::init<>())
      .def_readwrite("gamma", &HyperParams::gamma)
      .def_readwrite("gamma_i", &HyperParams::gamma_i)
      .def_readwrite("sigma", &HyperParams::sigma)
      .def_readwrite("rho", &HyperParams::rho)
      .def_readwrite("eps_stop", &HyperParams::eps_stop)
      .def_readwrite("max_iter", &HyperParams::max_iter)
      .def_readwrite("r", &HyperParams::r)
      .def_readwrite("seed", &HyperParams::seed)
      .def_readwrite("beta", &HyperParams::beta)
      .def_readwrite("k_neighbors", &HyperParams::k_neighbors);

  py::class_<TrainTrace>(m, "TrainTrace")
      .def_readonly("initial_objective", &TrainTrace::initial_objective)
      .def_readonly("converged", &TrainTrace::converged)
      .def_property_readonly("status", &TrainTrace::status)
      .def_property_readonly("final_objective", &TrainTrace::final_objective)
      .def_property_readonly("objectives", [](const TrainTrace& t) {
        std::vector<double> out;
        out.reserve(t.iterations.size());
        for (const auto& it : t.iterations) out.push_back(it.objective);
        return out;
      });

  // ---- mappings ----------------------------------------------------------------

  py::class_<LinearMap>(m, "LinearMap")
      .def(py::init<Matrix>(), py::arg("u"), "u: (d, r) non-negative matrix")
      .def_static("identity", &LinearMap::identity, py::arg("d"))
      .def_property_readonly("u", [](const LinearMap& lm) { return lm.u; })
      .def_property_readonly("input_dim", &LinearMap::input_dim)
      .def_property_readonly("output_dim", &LinearMap::output_dim)
      .def("apply", [](const LinearMap& lm, const Vector& x) { return lm.apply(x); },
           py::arg("x"));

  py::class_<RegressionTree>(m, "RegressionTree")
      .def("apply", [](const RegressionTree& t, const Vector& x) { return t.apply(x); },
           py::arg("x"))
      .def_property_readonly("n_nodes",
                             [](const RegressionTree& t) { return t.nodes().size(); });

  py::class_<BoostedMap>(m, "BoostedMap")
      .def_readonly("init", &BoostedMap::init)
      .def_readonly("alpha", &BoostedMap::alpha)
      .def_property_readonly("n_trees", [](const BoostedMap& b) { return b.trees.size(); })
      .def_property_readonly("input_dim", &BoostedMap::input_dim)
      .def_property_readonly("output_dim", &BoostedMap::output_dim)
      .def("apply", [](const BoostedMap& b, const Vector& x) { return b.apply(x); },
           py::arg("x"));

  // ---- fragments -----------------------------------------------------------------

  py::enum_<FragmentKind>(m, "FragmentKind")
      .value("metric_derived", FragmentKind::metric_derived)
      .value("mapping_derived", FragmentKind::mapping_derived);

  py::class_<FundamentalElements>(m, "FundamentalElements")
      .def_property_readonly("elements",
                             [](const FundamentalElements& f) { return f.elements; })
      .def_readonly("kind", &FundamentalElements::kind);

  py::class_<FragmentMatrix>(m, "FragmentMatrix")
      .def_property_readonly("values", [](const FragmentMatrix& f) { return f.values; })
      .def_readonly("kind", &FragmentMatrix::kind)
      .def_readonly("bandwidth", &FragmentMatrix::bandwidth);

  m.def("rbf_kernel", &rbf_kernel, py::arg("x"), py::arg("p"), py::arg("omega"));
  m.def("decompose_metric", &decompose_metric, py::arg("a"), py::arg("r"));
  m.def("train_source_metric", &train_source_metric, py::arg("source_pairs"), py::arg("r"),
        py::arg("hyper"));
  m.def("normalized_source_metric", &normalized_source_metric, py::arg("map"));
  m.def("build_fragment_matrix", &build_fragment_matrix, py::arg("elements"), py::arg("corr"),
        py::arg("omega"));
  m.def("fragment_matrix_from_table", &fragment_matrix_from_table, py::arg("table"),
        "table: (r, n_unlabeled) array of source-mapping evaluations");
  m.def("save_fragment_matrix", &save_fragment_matrix, py::arg("fragments"), py::arg("path"));
  m.def("load_fragment_matrix", &load_fragment_matrix, py::arg("path"));

  // ---- smoothing and graph ---------------------------------------------------------

  m.def(
      "smoothed_hinge",
      [](int y, double dist_sq, double delta_inf, double sigma) {
        const auto sv = smoothed_hinge(y, dist_sq, delta_inf, sigma);
        return py::make_tuple(sv.value, sv.inner);
      },
      py::arg("y"), py::arg("dist_sq"), py::arg("delta_inf"), py::arg("sigma"),
      "Returns (value, nu)");
  m.def(
      "smoothed_abs",
      [](double z, double sigma) {
        const auto sv = smoothed_abs(z, sigma);
        return py::make_tuple(sv.value, sv.inner);
      },
      py::arg("z"), py::arg("sigma"), "Returns (value, q)");

  py::class_<NeighborGraph>(m, "NeighborGraph")
      .def_readonly("bandwidth", &NeighborGraph::bandwidth)
      .def_readonly("k", &NeighborGraph::k)
      .def_property_readonly("size", &NeighborGraph::size)
      .def("weights_dense", [](const NeighborGraph& g) { return Matrix(g.weights); })
      .def("laplacian_dense", [](const NeighborGraph& g) { return Matrix(g.laplacian); });

  m.def(
      "default_bandwidth",
      [](const Matrix& samples) { return default_bandwidth(to_cols(samples)); },
      py::arg("samples"), "samples: (n, d) array");
  m.def(
      "build_neighbor_graph",
      [](const Matrix& samples, int k, double omega) {
        return build_neighbor_graph(to_cols(samples), k, omega);
      },
      py::arg("samples"), py::arg("k"), py::arg("omega"));
  m.def(
      "manifold_value_grad",
      [](const Matrix& u, const Matrix& samples, const NeighborGraph& graph) {
        const auto term = manifold_value_grad(u, to_cols(samples), graph);
        return py::make_tuple(term.value, term.grad);
      },
      py::arg("u"), py::arg("samples"), py::arg("graph"), "Returns (value, grad)");

  // ---- linear solver -------------------------------------------------------------

  m.def(
      "objective_smoothed",
      [](const Matrix& u, const LabeledPairSet& pairs, const std::optional<Matrix>& unlabeled,
         const std::optional<FragmentMatrix>& fragments,
         const std::optional<NeighborGraph>& graph, const HyperParams& hyper) {
        const std::optional<Matrix> cols =
            unlabeled ? std::optional<Matrix>(to_cols(*unlabeled)) : std::nullopt;
        return objective_smoothed(u, pairs, opt_ptr(cols), opt_ptr(fragments), opt_ptr(graph),
                                  hyper);
      },
      py::arg("u"), py::arg("pairs"), py::arg("unlabeled") = std::nullopt,
      py::arg("fragments") = std::nullopt, py::arg("graph") = std::nullopt, py::arg("hyper"));
  m.def(
      "gradient_smoothed",
      [](const Matrix& u, const LabeledPairSet& pairs, const std::optional<Matrix>& unlabeled,
         const std::optional<FragmentMatrix>& fragments,
         const std::optional<NeighborGraph>& graph, const HyperParams& hyper) {
        const std::optional<Matrix> cols =
            unlabeled ? std::optional<Matrix>(to_cols(*unlabeled)) : std::nullopt;
        return gradient_smoothed(u, pairs, opt_ptr(cols), opt_ptr(fragments), opt_ptr(graph),
                                 hyper);
      },
      py::arg("u"), py::arg("pairs"), py::arg("unlabeled") = std::nullopt,
      py::arg("fragments") = std::nullopt, py::arg("graph") = std::nullopt, py::arg("hyper"));
  m.def("project_nonneg", &project_nonneg, py::arg("v"));
  m.def(
      "pgm_train",
      [](const LabeledPairSet& pairs, const std::optional<Matrix>& unlabeled,
         const std::optional<FragmentMatrix>& fragments,
         const std::optional<NeighborGraph>& graph, const HyperParams& hyper,
         const std::optional<LinearMap>& init) {
        const std::optional<Matrix> cols =
            unlabeled ? std::optional<Matrix>(to_cols(*unlabeled)) : std::nullopt;
        TrainResult res =
            pgm_train(pairs, opt_ptr(cols), opt_ptr(fragments), opt_ptr(graph), hyper, init);
        return py::make_tuple(std::move(res.map), std::move(res.trace));
      },
      py::arg("pairs"), py::arg("unlabeled") = std::nullopt, py::arg("fragments") = std::nullopt,
      py::arg("graph") = std::nullopt, py::arg("hyper"), py::arg("init") = std::nullopt,
      "Returns (LinearMap, TrainTrace); unlabeled: (n, d_m) array");

  // ---- boosting -------------------------------------------------------------------

  m.def(
      "fit_tree",
      [](const Matrix& points, const Matrix& targets, int depth) {
        return fit_tree(to_cols(points), to_cols(targets), depth);
      },
      py::arg("points"), py::arg("targets"), py::arg("depth"),
      "points: (n, d) array; targets: (n, r) array");
  m.def(
      "boost_train",
      [](const LinearMap& init, const LabeledPairSet& pairs,
         const std::optional<Matrix>& unlabeled, const std::optional<FragmentMatrix>& fragments,
         const std::optional<NeighborGraph>& graph, const HyperParams& hyper, int n_trees,
         double alpha, int depth) {
        const std::optional<Matrix> cols =
            unlabeled ? std::optional<Matrix>(to_cols(*unlabeled)) : std::nullopt;
        BoostResult res = boost_train(init, pairs, opt_ptr(cols), opt_ptr(fragments),
                                      opt_ptr(graph), hyper, n_trees, alpha, depth);
        return py::make_tuple(std::move(res.map), std::move(res.trace));
      },
      py::arg("init"), py::arg("pairs"), py::arg("unlabeled") = std::nullopt,
      py::arg("fragments") = std::nullopt, py::arg("graph") = std::nullopt, py::arg("hyper"),
      py::arg("n_trees"), py::arg("alpha"), py::arg("depth"),
      "Returns (BoostedMap, TrainTrace)");

  // ---- evaluation ---------------------------------------------------------------

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("accuracy", &EvalReport::accuracy)
      .def_readonly("macro_f1", &EvalReport::macro_f1)
      .def_readonly("map_score", &EvalReport::map_score)
      .def("render", [](const EvalReport& r) { return render_report(r); });

  const auto bind_eval_ops = [&m](auto tag) {
    using MapT = decltype(tag);
    m.def(
        "pairwise_distance",
        [](const MapT& map, const Vector& x1, const Vector& x2) {
          return pairwise_distance(Mapping{map}, x1, x2);
        },
        py::arg("map"), py::arg("x1"), py::arg("x2"));
    m.def(
        "knn_classify",
        [](const LabeledPointSet& train, const MapT& map, const Vector& query, int k) {
          return knn_classify(train, Mapping{map}, query, k);
        },
        py::arg("train"), py::arg("map"), py::arg("query"), py::arg("k"));
    m.def(
        "mean_average_precision",
        [](const LabeledPointSet& queries, const LabeledPointSet& gallery, const MapT& map) {
          return mean_average_precision(queries, gallery, Mapping{map});
        },
        py::arg("queries"), py::arg("gallery"), py::arg("map"));
    m.def(
        "evaluate",
        [](const LabeledPointSet& train, const LabeledPointSet& test, const MapT& map, int k,
           bool with_map) { return evaluate(train, test, Mapping{map}, k, with_map); },
        py::arg("train"), py::arg("test"), py::arg("map"), py::arg("k"),
        py::arg("with_map") = false);
  };
  bind_eval_ops(LinearMap::identity(1));
  bind_eval_ops(BoostedMap{LinearMap::identity(1), {}, 0.0});
  m.def("accuracy", &accuracy, py::arg("preds"), py::arg("labels"));
  m.def("macro_f1", &macro_f1, py::arg("preds"), py::arg("labels"));

  // ---- synthetic benchmark --------------------------------------------------------

  py::class_<SynthConfig>(m, "SynthConfig")
      .def(py::init<>())
      .def_readwrite("n_classes", &SynthConfig::n_classes)
      .def_readwrite("latent_dim", &SynthConfig::latent_dim)
      .def_readwrite("d_s", &SynthConfig::d_s)
      .def_readwrite("d_m", &SynthConfig::d_m)
      .def_readwrite("n_labeled_pairs_source", &SynthConfig::n_labeled_pairs_source)
      .def_readwrite("n_labeled_pairs_target", &SynthConfig::n_labeled_pairs_target)
      .def_readwrite("n_unlabeled", &SynthConfig::n_unlabeled)
      .def_readwrite("n_test", &SynthConfig::n_test)
      .def_readwrite("noise_source", &SynthConfig::noise_source)
      .def_readwrite("noise_target", &SynthConfig::noise_target)
      .def_readwrite("seed", &SynthConfig::seed);

  py::class_<SynthData>(m, "SynthData")
      .def_readonly("source_pairs", &SynthData::source_pairs)
      .def_readonly("target_pairs", &SynthData::target_pairs)
      .def_readonly("correspondences", &SynthData::correspondences)
      .def_readonly("target_train", &SynthData::target_train)
      .def_readonly("target_test", &SynthData::target_test);

  m.def("generate_synthetic", &generate_synthetic, py::arg("config"));
  m.def(
      "fd_gradient",
      [](const std::function<double(const Matrix&)>& objective, const Matrix& u, double h) {
        return fd_gradient(objective, u, h);
      },
      py::arg("objective"), py::arg("u"), py::arg("h"));
  m.def("smoothed_loss_oracle_hinge", &smoothed_loss_oracle_hinge, py::arg("y"),
        py::arg("dist_sq"), py::arg("delta_inf"), py::arg("sigma"), py::arg("grid_n"));
  m.def("smoothed_loss_oracle_abs", &smoothed_loss_oracle_abs, py::arg("z"), py::arg("sigma"),
        py::arg("grid_n"));

  py::class_<BenchParams>(m, "BenchParams")
      .def(py::init<>())
      .def_readwrite("hyper", &BenchParams::hyper)
      .def_readwrite("n_trees", &BenchParams::n_trees)
      .def_readwrite("alpha", &BenchParams::alpha)
      .def_readwrite("depth", &BenchParams::depth)
      .def_readwrite("eval_k", &BenchParams::eval_k)
      .def_readwrite("threads", &BenchParams::threads);

  py::class_<BenchReport>(m, "BenchReport")
      .def_readonly("method_names", &BenchReport::method_names)
      .def_readonly("seeds", &BenchReport::seeds)
      .def_property_readonly("accuracy", [](const BenchReport& r) { return r.accuracy; })
      .def_property_readonly("macro_f1", [](const BenchReport& r) { return r.macro_f1; })
      .def("to_csv", [](const BenchReport& r) { return bench_csv(r); })
      .def("to_markdown", [](const BenchReport& r) { return bench_markdown(r); });

  m.def("run_benchmark", &run_benchmark, py::arg("config"), py::arg("params"), py::arg("seeds"));

  // ---- file I/O ---------------------------------------------------------------------

  m.def(
      "load_samples", [](const std::string& path) { return to_rows(load_samples(path)); },
      py::arg("path"), "Returns an (n, d) array");
  m.def(
      "save_samples",
      [](const Matrix& samples, const std::string& path) {
        save_samples(to_cols(samples), path);
      },
      py::arg("samples"), py::arg("path"), "samples: (n, d) array");
  m.def("load_pair_dataset", &load_pair_dataset, py::arg("samples_path"), py::arg("pairs_path"));
  m.def("load_correspondences", &load_correspondences, py::arg("source_path"),
        py::arg("target_path"));
  m.def("load_point_set", &load_point_set, py::arg("samples_path"), py::arg("labels_path"));

  py::class_<ModelMeta>(m, "ModelMeta")
      .def(py::init<>())
      .def_readwrite("hyper", &ModelMeta::hyper)
      .def_readwrite("iterations", &ModelMeta::iterations)
      .def_readwrite("final_objective", &ModelMeta::final_objective)
      .def_readwrite("status", &ModelMeta::status);

  m.def(
      "save_model",
      [](const LinearMap& map, const ModelMeta& meta, const std::string& path) {
        save_model(map, meta, path);
      },
      py::arg("map"), py::arg("meta"), py::arg("path"));
  m.def(
      "save_model",
      [](const BoostedMap& map, const ModelMeta& meta, const std::string& path) {
        save_model(map, meta, path);
      },
      py::arg("map"), py::arg("meta"), py::arg("path"));
  m.def(
      "load_model",
      [](const std::string& path) {
        LoadedModel loaded = load_model(path);
        py::object map = std::visit(
            [](auto&& concrete) { return py::cast(std::move(concrete)); },
            std::move(loaded.mapping));
        return py::make_tuple(std::move(map), std::move(loaded.meta));
      },
      py::arg("path"), "Returns (LinearMap | BoostedMap, ModelMeta)");
}
