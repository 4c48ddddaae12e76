#pragma once

#include <stdexcept>
#include <string>

namespace htdml {

/// Malformed or inconsistent input data: bad file contents, shape
/// mismatches, invalid labels, out-of-range indices.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Optimization failure: stagnated line search or a non-finite objective.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace htdml
