#include "htdml/fragments.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "htdml/io.hpp"
#include "htdml/linear.hpp"

namespace htdml {

double rbf_kernel(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& p,
                  double omega) {
  if (omega <= 0.0) throw std::invalid_argument("omega must be positive");
  if (x.size() != p.size()) {
    throw std::invalid_argument("rbf kernel: dimension mismatch (" + std::to_string(x.size()) +
                                " vs " + std::to_string(p.size()) + ")");
  }
  return std::exp(-(x - p).squaredNorm() / (2.0 * omega * omega));
}

FundamentalElements decompose_metric(const Matrix& a, Eigen::Index r) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw std::invalid_argument("metric matrix must be square and non-empty");
  }
  if (r < 1 || r > a.rows()) {
    throw std::invalid_argument("dimension error: r = " + std::to_string(r) +
                                " must lie in [1, " + std::to_string(a.rows()) + "]");
  }
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw data_error("metric matrix is not symmetric within 1e-10");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  if (eig.info() != Eigen::Success) throw numeric_error("eigendecomposition failed");
  const Vector& evals = eig.eigenvalues();  // ascending
  if (evals[0] < -1e-8) {
    throw data_error("metric matrix is not positive semidefinite (eigenvalue " +
                     format_double(evals[0]) + ")");
  }
  const Eigen::Index d = a.rows();
  FundamentalElements out;
  out.kind = FragmentKind::metric_derived;
  out.elements.resize(d, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    const Eigen::Index src = d - 1 - c;  // descending eigenvalue order
    const double lam = std::max(evals[src], 0.0);
    Vector v = eig.eigenvectors().col(src);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs(v[i]) > 1e-12) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    out.elements.col(c) = std::sqrt(lam) * v;
  }
  return out;
}

LinearMap train_source_metric(const LabeledPairSet& source_pairs, Eigen::Index r,
                              const HyperParams& hyper) {
  if (r > source_pairs.dim()) {
    throw std::invalid_argument("dimension error: r = " + std::to_string(r) +
                                " exceeds source dimension " +
                                std::to_string(source_pairs.dim()));
  }
  if (source_pairs.n_pairs() < 1) throw data_error("empty input: no labeled pairs");
  HyperParams hp = hyper;
  hp.gamma = 0.0;
  hp.gamma_i = 0.0;
  hp.r = r;
  return pgm_train(source_pairs, nullptr, nullptr, nullptr, hp).map;
}

Matrix normalized_source_metric(const LinearMap& map) {
  Matrix gram = map.u * map.u.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw numeric_error("eigendecomposition failed");
  const double top = eig.eigenvalues().maxCoeff();
  if (top <= 0.0) {
    throw data_error("source metric is zero; the trained source map is degenerate");
  }
  return gram / top;
}

FragmentMatrix build_fragment_matrix(const FundamentalElements& elements,
                                     const CorrespondenceSet& corr, double omega) {
  if (elements.dim() != corr.source_dim()) {
    throw data_error("fragment elements have dimension " + std::to_string(elements.dim()) +
                     " but source correspondences have dimension " +
                     std::to_string(corr.source_dim()));
  }
  FragmentMatrix f;
  f.kind = FragmentKind::metric_derived;
  f.bandwidth = omega;
  f.values.resize(elements.count(), corr.count());
  for (Eigen::Index n = 0; n < corr.count(); ++n) {
    for (Eigen::Index c = 0; c < elements.count(); ++c) {
      f.values(c, n) = rbf_kernel(elements.elements.col(c), corr.source().col(n), omega);
    }
  }
  return f;
}

FragmentMatrix fragment_matrix_from_table(Matrix table) {
  if (table.rows() < 1 || table.cols() < 1) {
    throw data_error("fragment table must be non-empty");
  }
  if (!table.allFinite()) throw data_error("fragment table contains non-finite values");
  FragmentMatrix f;
  f.kind = FragmentKind::mapping_derived;
  f.bandwidth = 0.0;
  f.values = std::move(table);
  return f;
}

void save_fragment_matrix(const FragmentMatrix& fragments, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << fragments.count() << ' ' << fragments.n_unlabeled() << '\n';
  for (Eigen::Index c = 0; c < fragments.count(); ++c) {
    for (Eigen::Index n = 0; n < fragments.n_unlabeled(); ++n) {
      if (n > 0) out << ' ';
      out << format_double(fragments.values(c, n));
    }
    out << '\n';
  }
}

FragmentMatrix load_fragment_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error(path + ": empty fragment file");
  std::istringstream header(line);
  std::string rs, ns;
  if (!(header >> rs >> ns)) throw data_error(path + ": malformed fragment header");
  const long long r = parse_int_token(rs, path + " header");
  const long long n = parse_int_token(ns, path + " header");
  if (r < 1 || n < 1) throw data_error(path + ": fragment dimensions must be positive");
  Matrix values(r, n);
  for (long long c = 0; c < r; ++c) {
    if (!std::getline(in, line)) {
      throw data_error(path + ": truncated fragment file (expected " + std::to_string(r) +
                       " rows)");
    }
    std::istringstream row(line);
    std::string tok;
    for (long long j = 0; j < n; ++j) {
      if (!(row >> tok)) {
        throw data_error(path + ": fragment row " + std::to_string(c) + " has fewer than " +
                         std::to_string(n) + " values");
      }
      values(c, j) = parse_double_token(tok, path + " row " + std::to_string(c));
    }
    if (row >> tok) {
      throw data_error(path + ": fragment row " + std::to_string(c) + " has more than " +
                       std::to_string(n) + " values");
    }
  }
  if (!values.allFinite()) throw data_error(path + ": fragment values must be finite");
  FragmentMatrix f;
  f.kind = FragmentKind::mapping_derived;  // provenance is not persisted
  f.bandwidth = 0.0;
  f.values = std::move(values);
  return f;
}

}  // namespace htdml
