#pragma once

#include <vector>

namespace locred {

class TriMesh;

/// Piecewise constant heat conductivity, one positive value per square.
class CoefficientField {
 public:
  /// Throws ConfigError if any value is not strictly positive and finite.
  CoefficientField(int n_squares, std::vector<double> values);

  static CoefficientField constant(int n_squares, double value);

  int n_squares() const { return n_squares_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](int square) const { return values_[square]; }
  double kappa_min() const { return kappa_min_; }
  double kappa_max() const { return kappa_max_; }
  double contrast() const { return kappa_max_ / kappa_min_; }

 private:
  int n_squares_;
  std::vector<double> values_;
  double kappa_min_;
  double kappa_max_;
};

/// Piecewise constant volumetric source, one finite value per square.
class SourceField {
 public:
  SourceField(int n_squares, std::vector<double> values);

  static SourceField constant(int n_squares, double value);

  int n_squares() const { return n_squares_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](int square) const { return values_[square]; }

 private:
  int n_squares_;
  std::vector<double> values_;
};

}  // namespace locred
