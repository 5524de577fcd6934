#pragma once

#include "locred/linalg.hpp"

#include <vector>

namespace locred {

/// a-orthonormal global vectors spanning the reduced space, together with their
/// images under the stiffness matrix.
class ReducedBasis {
 public:
  /// Relative norm below which an orthogonalized candidate counts as already in the span.
  static constexpr double kDegeneracyThreshold = 1e-10;

  ReducedBasis() = default;

  int size() const { return static_cast<int>(vectors_.size()); }
  bool empty() const { return vectors_.empty(); }
  const std::vector<DofVector>& vectors() const { return vectors_; }
  /// images()[j] = A * vectors()[j].
  const std::vector<DofVector>& images() const { return images_; }

  /// Gram-Schmidt in the energy inner product with one reorthogonalization pass.
  /// Returns false (and leaves the basis unchanged) if the orthogonal
  /// complement has energy norm <= kDegeneracyThreshold * |candidate|_a.
  bool add(const SparseSpdMatrix& stiffness, const DofVector& candidate);

  /// a-orthogonal projection of v onto the complement of the span.
  DofVector orthogonal_complement(const DofVector& v) const;

  /// max |<v_i, v_j>_a - delta_ij|.
  double gram_deviation(const SparseSpdMatrix& stiffness) const;

 private:
  std::vector<DofVector> vectors_;
  std::vector<DofVector> images_;
};

/// Galerkin solution in span(basis): sum_j (b . v_j) v_j. Empty basis gives 0.
DofVector reduced_solve(const ReducedBasis& basis, const SparseSpdMatrix& stiffness, const DofVector& load);

}  // namespace locred
