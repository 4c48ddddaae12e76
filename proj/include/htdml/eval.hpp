#pragma once

#include <map>
#include <optional>
#include <string>

#include "htdml/boosted.hpp"

namespace htdml {

/// Squared Euclidean distance between the mapped images of x1 and x2.
double pairwise_distance(const Mapping& map, const Eigen::Ref<const Vector>& x1,
                         const Eigen::Ref<const Vector>& x2);

/// Majority class among the k nearest training points under the mapped
/// distance. Distance ties break by lower train index; vote ties go to the
/// class whose nearest member is closest, then to the lower class id.
int knn_classify(const LabeledPointSet& train, const Mapping& map,
                 const Eigen::Ref<const Vector>& query, int k);

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

/// Unweighted mean F1 over the classes present in `labels`; a zero
/// denominator makes the affected precision, recall, or F1 equal 0.
double macro_f1(const std::vector<int>& preds, const std::vector<int>& labels);

/// Mean over queries of average precision of the distance ranking over the
/// gallery (ascending, ties by lower gallery index). Every query's class
/// must appear in the gallery.
double mean_average_precision(const LabeledPointSet& queries, const LabeledPointSet& gallery,
                              const Mapping& map);

struct ClassStats {
  int class_id = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long support = 0;
};

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::optional<double> map_score;
  std::vector<ClassStats> per_class;
  std::map<std::string, std::string> config;
};

/// kNN-classify every test point against the train set and collect metrics.
EvalReport evaluate(const LabeledPointSet& train, const LabeledPointSet& test,
                    const Mapping& map, int k, bool with_map);

/// Flat key=value rendering, one entry per line.
std::string render_report(const EvalReport& report);
std::string report_csv_header(const EvalReport& report);
std::string report_csv_row(const EvalReport& report);

}  // namespace htdml
