#include "htdml/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace htdml {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool skippable(std::string_view line) {
  const std::string_view t = trim(line);
  return t.empty() || t.front() == '#';
}

double parse_cell(std::string_view cell, const std::string& path, long line_no) {
  const double v =
      parse_double_token(cell, path + ": parse error at line " + std::to_string(line_no));
  if (!std::isfinite(v)) {
    throw data_error(path + ": parse error at line " + std::to_string(line_no) +
                     ": non-finite value '" + std::string(cell) + "'");
  }
  return v;
}

long long parse_int(std::string_view cell, const std::string& path, long line_no) {
  return parse_int_token(cell, path + ": parse error at line " + std::to_string(line_no));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  return out;
}

// Parses every non-comment row of a CSV file into a vector of rows.
std::vector<std::vector<double>> load_csv_rows(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto cells = split(trim(line), ',');
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_cell(c, path, line_no));
    if (rows.empty()) {
      width = row.size();
    } else if (row.size() != width) {
      throw data_error(path + ": format error at line " + std::to_string(line_no) + ": row has " +
                       std::to_string(row.size()) + " fields, expected " + std::to_string(width));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw data_error("empty input: no data rows in " + path);
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double_token(std::string_view token, const std::string& context) {
  std::string_view t = trim(token);
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto res = std::from_chars(t.data(), end, v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw data_error(context + ": non-numeric cell '" + std::string(token) + "'");
  }
  return v;
}

long long parse_int_token(std::string_view token, const std::string& context) {
  std::string_view t = trim(token);
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  long long v = 0;
  const auto* end = t.data() + t.size();
  const auto res = std::from_chars(t.data(), end, v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != end) {
    throw data_error(context + ": expected integer, got '" + std::string(token) + "'");
  }
  return v;
}

Matrix load_samples(const std::string& path) {
  const auto rows = load_csv_rows(path);
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(rows.front().size());
  Matrix samples(d, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      samples(i, j) = rows[static_cast<size_t>(j)][static_cast<size_t>(i)];
    }
  }
  return samples;
}

void save_samples(const Matrix& samples, const std::string& path) {
  std::ofstream out = open_output(path);
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      if (i > 0) out << ',';
      out << format_double(samples(i, j));
    }
    out << '\n';
  }
}

LabeledPairSet load_pair_dataset(const std::string& samples_path, const std::string& pairs_path) {
  Matrix samples = load_samples(samples_path);
  std::ifstream in = open_input(pairs_path);
  std::vector<PairConstraint> pairs;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != 3) {
      throw data_error(pairs_path + ": format error at line " + std::to_string(line_no) +
                       ": expected 'i,j,y', got " + std::to_string(cells.size()) + " fields");
    }
    PairConstraint p;
    p.first = static_cast<Eigen::Index>(parse_int(cells[0], pairs_path, line_no));
    p.second = static_cast<Eigen::Index>(parse_int(cells[1], pairs_path, line_no));
    const long long y = parse_int(cells[2], pairs_path, line_no);
    if (y != +1 && y != -1) {
      throw data_error(pairs_path + ": line " + std::to_string(line_no) + ": label " +
                       std::to_string(y) + " is not +1 or -1");
    }
    p.label = static_cast<int>(y);
    if (p.first < 0 || p.first >= samples.cols() || p.second < 0 || p.second >= samples.cols()) {
      throw data_error(pairs_path + ": line " + std::to_string(line_no) +
                       ": sample index out of range [0, " + std::to_string(samples.cols()) + ")");
    }
    pairs.push_back(p);
  }
  return LabeledPairSet(std::move(samples), std::move(pairs));
}

void save_pairs(const std::vector<PairConstraint>& pairs, const std::string& path) {
  std::ofstream out = open_output(path);
  for (const auto& p : pairs) {
    out << p.first << ',' << p.second << ',' << (p.label > 0 ? "1" : "-1") << '\n';
  }
}

CorrespondenceSet load_correspondences(const std::string& source_path,
                                       const std::string& target_path) {
  Matrix source = load_samples(source_path);
  Matrix target = load_samples(target_path);
  return CorrespondenceSet(std::move(source), std::move(target));
}

std::vector<int> load_labels(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<int> labels;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    labels.push_back(static_cast<int>(parse_int(trim(line), path, line_no)));
  }
  if (labels.empty()) throw data_error("empty input: no data rows in " + path);
  return labels;
}

void save_labels(const std::vector<int>& labels, const std::string& path) {
  std::ofstream out = open_output(path);
  for (int v : labels) out << v << '\n';
}

LabeledPointSet load_point_set(const std::string& samples_path, const std::string& labels_path) {
  Matrix points = load_samples(samples_path);
  std::vector<int> labels = load_labels(labels_path);
  return LabeledPointSet(std::move(points), std::move(labels));
}

void save_point_set(const LabeledPointSet& points, const std::string& samples_path,
                    const std::string& labels_path) {
  save_samples(points.points(), samples_path);
  save_labels(points.labels(), labels_path);
}

}  // namespace htdml
