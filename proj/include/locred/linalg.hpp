#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <span>

namespace locred {

/// Dense coefficients over the free DOFs of a mesh.
using DofVector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Tolerance every SPD solve must reach, either as relative residual
/// |Ax - b| / |b| or as normwise backward error |Ax - b| / (|A||x| + |b|).
/// With high-contrast coefficients the rounding of x alone leaves a relative
/// residual near eps |A||x| / |b|, so the backward error is the attainable form.
inline constexpr double kSolveTolerance = 1e-12;

/// Symmetric positive (semi)definite operator over free DOFs, stored in full
/// (both triangles) compressed column form.
class SparseSpdMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double>;

  SparseSpdMatrix() = default;
  /// Throws std::invalid_argument for non-square input.
  explicit SparseSpdMatrix(Storage entries);

  Eigen::Index dimension() const { return entries_.rows(); }
  const Storage& storage() const { return entries_; }

  DofVector apply(const DofVector& v) const;
  double entry(Eigen::Index row, Eigen::Index col) const { return entries_.coeff(row, col); }

  /// max |a_ij - a_ji| over stored entries.
  double asymmetry() const;

  /// Restriction to the rows/columns listed in `indices` (sorted, unique).
  SparseSpdMatrix principal_submatrix(std::span<const int> indices) const;
  DenseMatrix dense_principal_submatrix(std::span<const int> indices) const;

 private:
  Storage entries_;
};

struct SolveQuality {
  double residual = 0.0;   // |Ax - b|
  double rhs = 0.0;        // |b|
  double magnitude = 0.0;  // ||A||x||

  double relative_residual() const { return rhs > 0.0 ? residual / rhs : residual; }
  double backward_error() const { return residual / (magnitude + rhs); }
  bool acceptable() const {
    return residual == 0.0 || relative_residual() <= kSolveTolerance || backward_error() <= kSolveTolerance;
  }
};

/// Sparse Cholesky factorization with iterative refinement, reusable across
/// right-hand sides.
class SpdFactorization {
 public:
  /// Throws SolverError if the matrix is not numerically positive definite.
  explicit SpdFactorization(const SparseSpdMatrix& matrix);

  /// Solves with iterative refinement until SolveQuality::acceptable(); b = 0
  /// returns 0. Throws SolverError when refinement cannot reach the tolerance.
  DofVector solve(const DofVector& b) const;

  /// Solve followed by refinement sweeps with residuals accumulated in extended
  /// precision, continued while the residual decreases (at most `max_sweeps`).
  DofVector solve_extended(const DofVector& b, int max_sweeps = 8) const;

  Eigen::Index dimension() const { return matrix_.rows(); }

 private:
  SparseSpdMatrix::Storage matrix_;
  std::unique_ptr<Eigen::SimplicialLLT<SparseSpdMatrix::Storage>> llt_;
};

SolveQuality solve_quality(const SparseSpdMatrix::Storage& matrix, const DofVector& x, const DofVector& b);

DofVector solve_spd(const SparseSpdMatrix& matrix, const DofVector& b);

/// Throws std::invalid_argument on dimension mismatch.
double energy_inner(const SparseSpdMatrix& matrix, const DofVector& u, const DofVector& v);
double energy_norm(const SparseSpdMatrix& matrix, const DofVector& v);

struct PsdSolution {
  DofVector x;
  Eigen::Index rank = 0;
};

/// Solves a consistent symmetric positive semidefinite dense system by
/// diagonally pivoted Cholesky. The matrix is first scaled by `reference_diagonal`
/// (positive entries); pivots whose scaled value drops below `rank_tolerance`
/// are treated as null directions and the corresponding unknowns set to zero.
PsdSolution solve_psd_dense(const DenseMatrix& matrix, const DofVector& rhs, const DofVector& reference_diagonal,
                            double rank_tolerance = 1e-11);

}  // namespace locred
