#pragma once

#include <string>
#include <vector>

#include "htdml/data.hpp"

namespace htdml {

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

/// Parse a single decimal token exactly (std::from_chars); `context`
/// prefixes the error message on failure.
double parse_double_token(std::string_view token, const std::string& context);
long long parse_int_token(std::string_view token, const std::string& context);

/// Parse a CSV sample file: one comma-separated row per sample, '#' lines
/// ignored. Returns samples as matrix columns, in file order.
Matrix load_samples(const std::string& path);
void save_samples(const Matrix& samples, const std::string& path);

/// Pair file rows are "i,j,y" with 0-based sample indices and y in {+1,-1}.
LabeledPairSet load_pair_dataset(const std::string& samples_path, const std::string& pairs_path);
void save_pairs(const std::vector<PairConstraint>& pairs, const std::string& path);

/// Correspondences are aligned by row order across the two sample files.
CorrespondenceSet load_correspondences(const std::string& source_path,
                                       const std::string& target_path);

/// Label file: one non-negative integer class id per row.
std::vector<int> load_labels(const std::string& path);
void save_labels(const std::vector<int>& labels, const std::string& path);

LabeledPointSet load_point_set(const std::string& samples_path, const std::string& labels_path);
void save_point_set(const LabeledPointSet& points, const std::string& samples_path,
                    const std::string& labels_path);

}  // namespace htdml
