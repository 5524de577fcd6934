#include "locred/fields.hpp"

#include "locred/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace locred {

namespace {

void check_size(int n_squares, const std::vector<double>& values, const char* what) {
  if (n_squares < 1 || values.size() != static_cast<std::size_t>(n_squares) * n_squares) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(n_squares) + "^2 values, got " +
                      std::to_string(values.size()));
  }
}

}  // namespace

CoefficientField::CoefficientField(int n_squares, std::vector<double> values)
    : n_squares_(n_squares), values_(std::move(values)) {
  check_size(n_squares_, values_, "coefficient field");
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("coefficient field values must be positive and finite, got " + std::to_string(v));
    }
  }
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  kappa_min_ = *lo;
  kappa_max_ = *hi;
}

CoefficientField CoefficientField::constant(int n_squares, double value) {
  return CoefficientField(n_squares, std::vector<double>(static_cast<std::size_t>(n_squares) * n_squares, value));
}

SourceField::SourceField(int n_squares, std::vector<double> values)
    : n_squares_(n_squares), values_(std::move(values)) {
  check_size(n_squares_, values_, "source field");
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw ConfigError("source field values must be finite");
    }
  }
}

SourceField SourceField::constant(int n_squares, double value) {
  return SourceField(n_squares, std::vector<double>(static_cast<std::size_t>(n_squares) * n_squares, value));
}

}  // namespace locred
