#include "htdml/linear.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "htdml/smoothing.hpp"

namespace htdml {

namespace {

struct Problem {
  const LabeledPairSet& pairs;
  const Matrix* unlabeled = nullptr;
  const FragmentMatrix* fragments = nullptr;
  const NeighborGraph* graph = nullptr;
  const HyperParams& hp;
  Matrix quad;  // X_U L X_Uᵀ, cached when gamma_i > 0
};

void validate_inputs(const LabeledPairSet& pairs, const Matrix* unlabeled,
                     const FragmentMatrix* fragments, const NeighborGraph* graph,
                     const HyperParams& hp) {
  hp.validate();
  if (pairs.n_pairs() < 1) throw data_error("empty input: no labeled pairs");
  if (hp.gamma > 0.0 && fragments == nullptr) {
    throw std::invalid_argument("fragments are required when gamma > 0");
  }
  if (hp.gamma_i > 0.0 && graph == nullptr) {
    throw std::invalid_argument("a neighbor graph is required when gamma_i > 0");
  }
  if ((hp.gamma > 0.0 || hp.gamma_i > 0.0) && unlabeled == nullptr) {
    throw std::invalid_argument("unlabeled target data is required when gamma or gamma_i > 0");
  }
  if (unlabeled != nullptr && unlabeled->rows() != pairs.dim()) {
    throw data_error("unlabeled data dimension " + std::to_string(unlabeled->rows()) +
                     " does not match pair dimension " + std::to_string(pairs.dim()));
  }
  if (hp.gamma > 0.0) {
    if (fragments->values.rows() != hp.r) {
      throw data_error("fragment count " + std::to_string(fragments->values.rows()) +
                       " does not match r = " + std::to_string(hp.r));
    }
    if (fragments->values.cols() != unlabeled->cols()) {
      throw data_error("fragment matrix has " + std::to_string(fragments->values.cols()) +
                       " columns but there are " + std::to_string(unlabeled->cols()) +
                       " unlabeled samples");
    }
  }
  if (hp.gamma_i > 0.0 && graph->size() != unlabeled->cols()) {
    throw data_error("neighbor graph size " + std::to_string(graph->size()) +
                     " does not match unlabeled sample count " +
                     std::to_string(unlabeled->cols()));
  }
}

double objective_impl(const Matrix& u, const Problem& p) {
  const Matrix m1 = map_columns_linear(u, p.pairs.endpoints1());
  const Matrix m2 = map_columns_linear(u, p.pairs.endpoints2());
  Matrix phi;
  const Matrix* phi_ptr = nullptr;
  if (p.hp.gamma > 0.0 || p.hp.gamma_i > 0.0) {
    phi = map_columns_linear(u, *p.unlabeled);
    phi_ptr = &phi;
  }
  return objective_mapped(m1, m2, p.pairs.labels(), p.pairs.delta_inf_norms(), phi_ptr,
                          p.fragments, p.graph, p.hp);
}

Matrix gradient_impl(const Matrix& u, const Problem& p) {
  const double n_pairs = static_cast<double>(p.pairs.n_pairs());
  Matrix grad = hinge_grad_accum(p.pairs, u, p.hp.sigma) / n_pairs;
  if (p.hp.gamma > 0.0) {
    const double n_u = static_cast<double>(p.unlabeled->cols());
    grad.noalias() += (p.hp.gamma / n_u) * l1_grad(u, *p.unlabeled, p.fragments->values, p.hp.sigma);
  }
  if (p.hp.gamma_i > 0.0) {
    const double n_u = static_cast<double>(p.unlabeled->cols());
    grad.noalias() += (p.hp.gamma_i / (n_u * n_u)) * (4.0 * (p.quad * u));
  }
  return grad;
}

}  // namespace

double objective_mapped(const Matrix& m1, const Matrix& m2, const std::vector<int>& labels,
                        const Vector& delta_inf, const Matrix* phi_u,
                        const FragmentMatrix* fragments, const NeighborGraph* graph,
                        const HyperParams& hyper) {
  const Eigen::Index n_pairs = m1.cols();
  if (n_pairs < 1) throw data_error("empty input: no labeled pairs");
  if (m2.cols() != n_pairs || static_cast<Eigen::Index>(labels.size()) != n_pairs ||
      delta_inf.size() != n_pairs) {
    throw std::invalid_argument("objective: inconsistent pair inputs");
  }
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < n_pairs; ++i) {
    const double dist_sq = (m1.col(i) - m2.col(i)).squaredNorm();
    hinge += smoothed_hinge(labels[static_cast<size_t>(i)], dist_sq, delta_inf[i], hyper.sigma)
                 .value;
  }
  double obj = hinge / static_cast<double>(n_pairs);

  if (hyper.gamma > 0.0) {
    if (phi_u == nullptr || fragments == nullptr) {
      throw std::invalid_argument("objective: fragments and mapped unlabeled data required");
    }
    if (phi_u->rows() != fragments->values.rows() || phi_u->cols() != fragments->values.cols()) {
      throw std::invalid_argument("objective: fragment shape mismatch");
    }
    double dev = 0.0;
    for (Eigen::Index n = 0; n < phi_u->cols(); ++n) {
      for (Eigen::Index c = 0; c < phi_u->rows(); ++c) {
        dev += smoothed_abs((*phi_u)(c, n) - fragments->values(c, n), hyper.sigma).value;
      }
    }
    obj += hyper.gamma / static_cast<double>(phi_u->cols()) * dev;
  }

  if (hyper.gamma_i > 0.0) {
    if (phi_u == nullptr || graph == nullptr) {
      throw std::invalid_argument("objective: graph and mapped unlabeled data required");
    }
    const double n_u = static_cast<double>(phi_u->cols());
    obj += hyper.gamma_i / (n_u * n_u) * manifold_value_mapped(*phi_u, *graph);
  }
  return obj;
}

double objective_smoothed(const Matrix& u, const LabeledPairSet& pairs, const Matrix* unlabeled,
                          const FragmentMatrix* fragments, const NeighborGraph* graph,
                          const HyperParams& hyper) {
  validate_inputs(pairs, unlabeled, fragments, graph, hyper);
  Problem p{pairs, unlabeled, fragments, graph, hyper, {}};
  return objective_impl(u, p);
}

Matrix gradient_smoothed(const Matrix& u, const LabeledPairSet& pairs, const Matrix* unlabeled,
                         const FragmentMatrix* fragments, const NeighborGraph* graph,
                         const HyperParams& hyper) {
  validate_inputs(pairs, unlabeled, fragments, graph, hyper);
  Problem p{pairs, unlabeled, fragments, graph, hyper, {}};
  if (hyper.gamma_i > 0.0) p.quad = laplacian_quadratic(*unlabeled, *graph);
  return gradient_impl(u, p);
}

Matrix project_nonneg(const Matrix& v) { return v.cwiseMax(0.0); }

TrainResult pgm_train(const LabeledPairSet& pairs, const Matrix* unlabeled,
                      const FragmentMatrix* fragments, const NeighborGraph* graph,
                      const HyperParams& hyper, const std::optional<LinearMap>& init) {
  validate_inputs(pairs, unlabeled, fragments, graph, hyper);
  const Eigen::Index d = pairs.dim();
  const Eigen::Index r = hyper.r;

  Matrix u;
  if (init.has_value()) {
    if (init->u.rows() != d || init->u.cols() != r) {
      throw std::invalid_argument("init has shape " + std::to_string(init->u.rows()) + "x" +
                                  std::to_string(init->u.cols()) + ", expected " +
                                  std::to_string(d) + "x" + std::to_string(r));
    }
    u = init->u;
  } else {
    std::mt19937_64 rng(hyper.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    u.resize(d, r);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < r; ++j) u(i, j) = unif(rng);
    }
    u = project_nonneg(u);
  }

  Problem prob{pairs, unlabeled, fragments, graph, hyper, {}};
  if (hyper.gamma_i > 0.0) prob.quad = laplacian_quadratic(*unlabeled, *graph);

  const double f0 = objective_impl(u, prob);
  if (!std::isfinite(f0)) throw numeric_error("non-finite objective at the initial point");

  TrainTrace trace;
  trace.initial_objective = f0;
  double f_curr = f0;
  double mu = 1.0;

  struct Candidate {
    Matrix u;
    double f = 0.0, lhs = 0.0, rhs = 0.0;
    bool ok = false;
  };

  for (int t = 1; t <= hyper.max_iter; ++t) {
    const Matrix grad = gradient_impl(u, prob);
    if (!grad.allFinite()) {
      throw numeric_error("non-finite gradient at iteration " + std::to_string(t));
    }
    const double gnorm = grad.norm();

    auto attempt = [&](double step) {
      Candidate c;
      c.u = project_nonneg(u - step * grad);
      c.f = objective_impl(c.u, prob);
      c.lhs = c.f - f_curr;
      c.rhs = hyper.rho * (grad.array() * (c.u - u).array()).sum();
      c.ok = std::isfinite(c.f) && c.lhs <= c.rhs;
      return c;
    };

    // Sufficient decrease with rho > 0 is unsatisfiable in doubles once the
    // projected descent drops below objective resolution; treat that as
    // stationarity rather than shrinking into underflow.
    const double stationary_rhs = -1e-15 * hyper.rho * std::max(1.0, std::abs(f_curr));

    Candidate acc = attempt(mu);
    if (acc.ok) {
      // One growth attempt; keep the larger step only if it still passes.
      Candidate grown = attempt(mu / hyper.beta);
      if (grown.ok) {
        mu /= hyper.beta;
        acc = std::move(grown);
      }
    } else {
      bool stationary = false;
      while (!acc.ok) {
        if (acc.rhs >= stationary_rhs) {
          stationary = true;
          break;
        }
        mu *= hyper.beta;
        if (mu < 1e-20) {
          throw numeric_error("line search stagnated at iteration " + std::to_string(t) +
                              " (step underflow)");
        }
        acc = attempt(mu);
      }
      if (stationary) {
        trace.converged = true;
        break;
      }
    }

    u = std::move(acc.u);
    trace.iterations.push_back({acc.f, mu, gnorm, acc.lhs, acc.rhs, u.minCoeff()});

    const double delta = std::abs(acc.f - f_curr);
    const double denom = std::abs(acc.f - f0);
    f_curr = acc.f;
    if (denom < 1e-15 || delta / denom < hyper.eps_stop) {
      trace.converged = true;
      break;
    }
  }

  return {LinearMap(std::move(u)), std::move(trace)};
}

}  // namespace htdml
