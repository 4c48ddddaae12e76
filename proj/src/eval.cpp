#include "htdml/eval.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "htdml/io.hpp"

namespace htdml {

namespace {

// Gallery indices ordered by (squared distance to the query, index).
std::vector<Eigen::Index> rank_by_distance(const Matrix& gallery_mapped,
                                           const Vector& query_mapped) {
  std::vector<std::pair<double, Eigen::Index>> order;
  order.reserve(static_cast<size_t>(gallery_mapped.cols()));
  for (Eigen::Index j = 0; j < gallery_mapped.cols(); ++j) {
    order.emplace_back((gallery_mapped.col(j) - query_mapped).squaredNorm(), j);
  }
  std::sort(order.begin(), order.end());
  std::vector<Eigen::Index> ranked;
  ranked.reserve(order.size());
  for (const auto& [d, j] : order) ranked.push_back(j);
  return ranked;
}

int vote(const std::vector<Eigen::Index>& ranked, const Matrix& gallery_mapped,
         const Vector& query_mapped, const LabeledPointSet& train, int k) {
  std::map<int, int> votes;
  for (int t = 0; t < k; ++t) votes[train.label(ranked[static_cast<size_t>(t)])]++;
  int max_votes = 0;
  for (const auto& [cls, n] : votes) max_votes = std::max(max_votes, n);

  int winner = -1;
  double winner_dist = 0.0;
  for (const auto& [cls, n] : votes) {
    if (n != max_votes) continue;
    double nearest = 0.0;
    for (int t = 0; t < k; ++t) {
      const Eigen::Index j = ranked[static_cast<size_t>(t)];
      if (train.label(j) == cls) {
        nearest = (gallery_mapped.col(j) - query_mapped).squaredNorm();
        break;  // ranked order: the first member is the nearest
      }
    }
    // Ties on nearest-member distance resolve to the lower class id; the
    // map iterates class ids ascending, so strict < keeps the earlier one.
    if (winner < 0 || nearest < winner_dist) {
      winner = cls;
      winner_dist = nearest;
    }
  }
  return winner;
}

}  // namespace

double pairwise_distance(const Mapping& map, const Eigen::Ref<const Vector>& x1,
                         const Eigen::Ref<const Vector>& x2) {
  if (x1.size() != x2.size()) {
    throw std::invalid_argument("pairwise distance: dimension mismatch");
  }
  return (apply_mapping(map, x1) - apply_mapping(map, x2)).squaredNorm();
}

int knn_classify(const LabeledPointSet& train, const Mapping& map,
                 const Eigen::Ref<const Vector>& query, int k) {
  if (train.size() < 1) throw data_error("empty input: kNN needs a non-empty train set");
  if (k < 1 || k > train.size()) {
    throw std::invalid_argument("k = " + std::to_string(k) + " must lie in [1, " +
                                std::to_string(train.size()) + "]");
  }
  const Matrix gallery_mapped = map_columns(map, train.points());
  const Vector query_mapped = apply_mapping(map, query);
  const auto ranked = rank_by_distance(gallery_mapped, query_mapped);
  return vote(ranked, gallery_mapped, query_mapped, train, k);
}

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size()) {
    throw std::invalid_argument("accuracy: prediction/label length mismatch");
  }
  if (preds.empty()) throw std::invalid_argument("accuracy: empty input");
  size_t correct = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double macro_f1(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size()) {
    throw std::invalid_argument("macro F1: prediction/label length mismatch");
  }
  if (preds.empty()) throw std::invalid_argument("macro F1: empty input");
  const std::set<int> classes(labels.begin(), labels.end());
  double sum = 0.0;
  for (const int c : classes) {
    long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
      if (preds[i] == c && labels[i] == c) ++tp;
      if (preds[i] == c && labels[i] != c) ++fp;
      if (preds[i] != c && labels[i] == c) ++fn;
    }
    const double p = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double r = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    sum += p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  return sum / static_cast<double>(classes.size());
}

double mean_average_precision(const LabeledPointSet& queries, const LabeledPointSet& gallery,
                              const Mapping& map) {
  if (gallery.size() < 1) throw data_error("empty input: MAP needs a non-empty gallery");
  if (queries.size() < 1) throw data_error("empty input: MAP needs at least one query");
  const Matrix gallery_mapped = map_columns(map, gallery.points());
  double ap_sum = 0.0;
  for (Eigen::Index qi = 0; qi < queries.size(); ++qi) {
    const int cls = queries.label(qi);
    long relevant = 0;
    for (Eigen::Index j = 0; j < gallery.size(); ++j) {
      if (gallery.label(j) == cls) ++relevant;
    }
    if (relevant == 0) {
      throw data_error("query class " + std::to_string(cls) + " is absent from the gallery");
    }
    const Vector query_mapped = apply_mapping(map, queries.points().col(qi));
    const auto ranked = rank_by_distance(gallery_mapped, query_mapped);
    long hits = 0;
    double precision_sum = 0.0;
    for (size_t pos = 0; pos < ranked.size(); ++pos) {
      if (gallery.label(ranked[pos]) == cls) {
        ++hits;
        precision_sum += static_cast<double>(hits) / static_cast<double>(pos + 1);
      }
    }
    ap_sum += precision_sum / static_cast<double>(relevant);
  }
  return ap_sum / static_cast<double>(queries.size());
}

EvalReport evaluate(const LabeledPointSet& train, const LabeledPointSet& test,
                    const Mapping& map, int k, bool with_map) {
  if (train.size() < 1) throw data_error("empty input: evaluation needs train points");
  if (test.size() < 1) throw data_error("empty input: evaluation needs test points");
  if (train.dim() != test.dim()) {
    throw data_error("train/test dimension mismatch: " + std::to_string(train.dim()) + " vs " +
                     std::to_string(test.dim()));
  }
  const Matrix gallery_mapped = map_columns(map, train.points());
  std::vector<int> preds;
  preds.reserve(static_cast<size_t>(test.size()));
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    const Vector query_mapped = apply_mapping(map, test.points().col(i));
    const auto ranked = rank_by_distance(gallery_mapped, query_mapped);
    preds.push_back(vote(ranked, gallery_mapped, query_mapped, train, k));
  }

  EvalReport report;
  report.accuracy = accuracy(preds, test.labels());
  report.macro_f1 = macro_f1(preds, test.labels());
  if (with_map) report.map_score = mean_average_precision(test, train, map);

  const std::set<int> classes(test.labels().begin(), test.labels().end());
  for (const int c : classes) {
    long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
      if (preds[i] == c && test.labels()[i] == c) ++tp;
      if (preds[i] == c && test.labels()[i] != c) ++fp;
      if (preds[i] != c && test.labels()[i] == c) ++fn;
    }
    ClassStats cs;
    cs.class_id = c;
    cs.support = tp + fn;
    cs.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    cs.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    cs.f1 = cs.precision + cs.recall > 0.0
                ? 2.0 * cs.precision * cs.recall / (cs.precision + cs.recall)
                : 0.0;
    report.per_class.push_back(cs);
  }
  report.config["k"] = std::to_string(k);
  report.config["n_train"] = std::to_string(train.size());
  report.config["n_test"] = std::to_string(test.size());
  return report;
}

std::string render_report(const EvalReport& report) {
  std::ostringstream out;
  out << "accuracy=" << format_double(report.accuracy) << '\n';
  out << "macro_f1=" << format_double(report.macro_f1) << '\n';
  if (report.map_score.has_value()) {
    out << "map=" << format_double(*report.map_score) << '\n';
  }
  for (const auto& cs : report.per_class) {
    out << "class_" << cs.class_id << "_precision=" << format_double(cs.precision) << '\n';
    out << "class_" << cs.class_id << "_recall=" << format_double(cs.recall) << '\n';
    out << "class_" << cs.class_id << "_f1=" << format_double(cs.f1) << '\n';
    out << "class_" << cs.class_id << "_support=" << cs.support << '\n';
  }
  for (const auto& [key, value] : report.config) {
    out << key << '=' << value << '\n';
  }
  return out.str();
}

std::string report_csv_header(const EvalReport& report) {
  std::ostringstream out;
  out << "accuracy,macro_f1,map";
  for (const auto& [key, value] : report.config) out << ',' << key;
  return out.str();
}

std::string report_csv_row(const EvalReport& report) {
  std::ostringstream out;
  out << format_double(report.accuracy) << ',' << format_double(report.macro_f1) << ',';
  if (report.map_score.has_value()) out << format_double(*report.map_score);
  for (const auto& [key, value] : report.config) out << ',' << value;
  return out.str();
}

}  // namespace htdml
