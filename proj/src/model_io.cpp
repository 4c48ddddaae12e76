#include "htdml/model_io.hpp"

#include <fstream>
#include <sstream>

#include "htdml/io.hpp"

namespace htdml {

namespace {

constexpr const char* kLinearHeader = "HTDML-LINEAR";
constexpr const char* kGbrtHeader = "HTDML-GBRT";
constexpr const char* kVersion = "v1";

void write_hyper(std::ostream& out, const HyperParams& hp) {
  out << "hyper gamma " << format_double(hp.gamma) << " gamma_i " << format_double(hp.gamma_i)
      << " sigma " << format_double(hp.sigma) << " rho " << format_double(hp.rho) << " eps "
      << format_double(hp.eps_stop) << " max_iter " << hp.max_iter << " seed " << hp.seed
      << " beta " << format_double(hp.beta) << " k_neighbors " << hp.k_neighbors << '\n';
}

void write_trace(std::ostream& out, const ModelMeta& meta) {
  out << "trace iters " << meta.iterations << " final_objective "
      << format_double(meta.final_objective) << " status " << meta.status << '\n';
}

void write_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_tree_node(std::ostream& out, const RegressionTree& tree, int at) {
  const auto& n = tree.nodes()[static_cast<size_t>(at)];
  if (n.is_leaf()) {
    out << 'L';
    for (Eigen::Index i = 0; i < n.value.size(); ++i) out << ' ' << format_double(n.value[i]);
    out << '\n';
    return;
  }
  out << "N " << n.feature << ' ' << format_double(n.threshold) << '\n';
  write_tree_node(out, tree, n.left);
  write_tree_node(out, tree, n.right);
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) {
      throw data_error(path_ + ": truncated model file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  const std::string& path() const { return path_; }

 private:
  std::istream& in_;
  std::string path_;
};

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

HyperParams parse_hyper(const std::string& line, const std::string& path) {
  const auto t = tokens(line);
  if (t.size() != 19 || t[0] != "hyper") {
    throw data_error(path + ": malformed hyper line");
  }
  HyperParams hp;
  for (size_t i = 1; i + 1 < t.size(); i += 2) {
    const std::string& key = t[i];
    const std::string& val = t[i + 1];
    const std::string ctx = path + " hyper " + key;
    if (key == "gamma") hp.gamma = parse_double_token(val, ctx);
    else if (key == "gamma_i") hp.gamma_i = parse_double_token(val, ctx);
    else if (key == "sigma") hp.sigma = parse_double_token(val, ctx);
    else if (key == "rho") hp.rho = parse_double_token(val, ctx);
    else if (key == "eps") hp.eps_stop = parse_double_token(val, ctx);
    else if (key == "max_iter") hp.max_iter = static_cast<int>(parse_int_token(val, ctx));
    else if (key == "seed") hp.seed = static_cast<unsigned long long>(parse_int_token(val, ctx));
    else if (key == "beta") hp.beta = parse_double_token(val, ctx);
    else if (key == "k_neighbors") hp.k_neighbors = static_cast<int>(parse_int_token(val, ctx));
    else throw data_error(path + ": unknown hyper key '" + key + "'");
  }
  return hp;
}

void parse_trace(const std::string& line, const std::string& path, ModelMeta& meta) {
  const auto t = tokens(line);
  if (t.size() != 7 || t[0] != "trace" || t[1] != "iters" || t[3] != "final_objective" ||
      t[5] != "status") {
    throw data_error(path + ": malformed trace line");
  }
  meta.iterations = static_cast<int>(parse_int_token(t[2], path + " trace iters"));
  meta.final_objective = parse_double_token(t[4], path + " trace objective");
  meta.status = t[6];
}

Matrix parse_matrix(LineReader& reader, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto t = tokens(reader.next());
    if (static_cast<Eigen::Index>(t.size()) != cols) {
      throw data_error(reader.path() + ": matrix row " + std::to_string(i) + " has " +
                       std::to_string(t.size()) + " values, expected " + std::to_string(cols));
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = parse_double_token(t[static_cast<size_t>(j)],
                                   reader.path() + " matrix row " + std::to_string(i));
    }
  }
  return m;
}

int parse_tree_node(LineReader& reader, std::vector<RegressionTree::Node>& nodes,
                    Eigen::Index r) {
  const auto t = tokens(reader.next());
  if (t.empty()) throw data_error(reader.path() + ": empty tree node line");
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (t[0] == "L") {
    if (static_cast<Eigen::Index>(t.size()) != r + 1) {
      throw data_error(reader.path() + ": leaf has " + std::to_string(t.size() - 1) +
                       " values, expected " + std::to_string(r));
    }
    Vector v(r);
    for (Eigen::Index i = 0; i < r; ++i) {
      v[i] = parse_double_token(t[static_cast<size_t>(i + 1)], reader.path() + " leaf");
    }
    nodes[static_cast<size_t>(id)].value = std::move(v);
    return id;
  }
  if (t[0] != "N" || t.size() != 3) {
    throw data_error(reader.path() + ": malformed tree node line '" + t[0] + "'");
  }
  nodes[static_cast<size_t>(id)].feature =
      static_cast<int>(parse_int_token(t[1], reader.path() + " node feature"));
  nodes[static_cast<size_t>(id)].threshold =
      parse_double_token(t[2], reader.path() + " node threshold");
  const int left = parse_tree_node(reader, nodes, r);
  nodes[static_cast<size_t>(id)].left = left;
  const int right = parse_tree_node(reader, nodes, r);
  nodes[static_cast<size_t>(id)].right = right;
  return id;
}

void expect(const std::string& got, const std::string& want, const std::string& path) {
  if (got != want) {
    throw data_error(path + ": expected '" + want + "', found '" + got + "'");
  }
}

}  // namespace

void save_model(const LinearMap& map, const ModelMeta& meta, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << kLinearHeader << ' ' << kVersion << '\n';
  out << "dims " << map.input_dim() << ' ' << map.output_dim() << '\n';
  write_hyper(out, meta.hyper);
  write_trace(out, meta);
  out << "U\n";
  write_matrix(out, map.u);
  out << "end\n";
}

void save_model(const BoostedMap& map, const ModelMeta& meta, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << kGbrtHeader << ' ' << kVersion << '\n';
  out << "dims " << map.input_dim() << ' ' << map.output_dim() << '\n';
  out << "alpha " << format_double(map.alpha) << '\n';
  write_hyper(out, meta.hyper);
  write_trace(out, meta);
  out << "U\n";
  write_matrix(out, map.init.u);
  out << "trees " << map.trees.size() << '\n';
  for (const auto& tree : map.trees) {
    out << "tree\n";
    write_tree_node(out, tree, 0);
  }
  out << "end\n";
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open file: " + path);
  LineReader reader(in, path);

  const auto head = tokens(reader.next());
  if (head.size() != 2 || (head[0] != kLinearHeader && head[0] != kGbrtHeader)) {
    throw data_error(path + ": not a model file");
  }
  if (head[1] != kVersion) {
    throw data_error(path + ": unsupported model version '" + head[1] + "'");
  }
  const bool boosted = head[0] == kGbrtHeader;

  const auto dims = tokens(reader.next());
  if (dims.size() != 3 || dims[0] != "dims") throw data_error(path + ": malformed dims line");
  const Eigen::Index d = parse_int_token(dims[1], path + " dims");
  const Eigen::Index r = parse_int_token(dims[2], path + " dims");
  if (d < 1 || r < 1) throw data_error(path + ": dims must be positive");

  double alpha = 0.0;
  if (boosted) {
    const auto at = tokens(reader.next());
    if (at.size() != 2 || at[0] != "alpha") throw data_error(path + ": malformed alpha line");
    alpha = parse_double_token(at[1], path + " alpha");
  }

  ModelMeta meta;
  meta.hyper = parse_hyper(reader.next(), path);
  parse_trace(reader.next(), path, meta);
  expect(reader.next(), "U", path);
  Matrix u = parse_matrix(reader, d, r);

  if (!boosted) {
    expect(reader.next(), "end", path);
    return LoadedModel{Mapping(LinearMap(std::move(u))), std::move(meta)};
  }

  const auto tc = tokens(reader.next());
  if (tc.size() != 2 || tc[0] != "trees") throw data_error(path + ": malformed trees line");
  const long long n_trees = parse_int_token(tc[1], path + " trees");
  if (n_trees < 0) throw data_error(path + ": negative tree count");

  BoostedMap map{LinearMap(std::move(u)), {}, alpha};
  for (long long t = 0; t < n_trees; ++t) {
    expect(reader.next(), "tree", path);
    std::vector<RegressionTree::Node> nodes;
    parse_tree_node(reader, nodes, r);
    map.trees.emplace_back(std::move(nodes));
  }
  expect(reader.next(), "end", path);
  return LoadedModel{Mapping(std::move(map)), std::move(meta)};
}

}  // namespace htdml
