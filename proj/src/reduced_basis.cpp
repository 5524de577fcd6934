#include "locred/reduced_basis.hpp"

#include <cmath>
#include <stdexcept>

namespace locred {

DofVector ReducedBasis::orthogonal_complement(const DofVector& v) const {
  DofVector w = v;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < vectors_.size(); ++j) {
      w -= images_[j].dot(w) * vectors_[j];
    }
  }
  return w;
}

bool ReducedBasis::add(const SparseSpdMatrix& stiffness, const DofVector& candidate) {
  if (candidate.size() != stiffness.dimension()) {
    throw std::invalid_argument("ReducedBasis::add: dimension mismatch");
  }
  const double original = energy_norm(stiffness, candidate);
  if (!(original > 0.0)) {
    return false;
  }
  DofVector w = orthogonal_complement(candidate);
  DofVector image = stiffness.apply(w);
  const double norm = std::sqrt(std::max(0.0, w.dot(image)));
  if (!(norm > kDegeneracyThreshold * original)) {
    return false;
  }
  w /= norm;
  image /= norm;
  vectors_.push_back(std::move(w));
  images_.push_back(std::move(image));
  return true;
}

double ReducedBasis::gram_deviation(const SparseSpdMatrix& stiffness) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    const DofVector image = stiffness.apply(vectors_[i]);
    for (std::size_t j = 0; j < vectors_.size(); ++j) {
      const double target = i == j ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(image.dot(vectors_[j]) - target));
    }
  }
  return worst;
}

DofVector reduced_solve(const ReducedBasis& basis, const SparseSpdMatrix& stiffness, const DofVector& load) {
  if (load.size() != stiffness.dimension()) {
    throw std::invalid_argument("reduced_solve: dimension mismatch");
  }
  DofVector u = DofVector::Zero(load.size());
  for (const DofVector& v : basis.vectors()) {
    u += load.dot(v) * v;
  }
  return u;
}

}  // namespace locred
