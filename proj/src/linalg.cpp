#include "locred/linalg.hpp"

#include "locred/errors.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace locred {

SparseSpdMatrix::SparseSpdMatrix(Storage entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw std::invalid_argument("SparseSpdMatrix must be square");
  }
  entries_.makeCompressed();
}

DofVector SparseSpdMatrix::apply(const DofVector& v) const {
  if (v.size() != dimension()) {
    throw std::invalid_argument("SparseSpdMatrix::apply: dimension mismatch");
  }
  return entries_ * v;
}

double SparseSpdMatrix::asymmetry() const {
  const Storage transposed = entries_.transpose();
  double worst = 0.0;
  for (Eigen::Index col = 0; col < entries_.outerSize(); ++col) {
    for (Storage::InnerIterator it(entries_, col); it; ++it) {
      worst = std::max(worst, std::abs(it.value() - transposed.coeff(it.row(), it.col())));
    }
  }
  return worst;
}

SparseSpdMatrix SparseSpdMatrix::principal_submatrix(std::span<const int> indices) const {
  std::vector<int> local(static_cast<std::size_t>(dimension()), -1);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    local[indices[i]] = static_cast<int>(i);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    for (Storage::InnerIterator it(entries_, indices[j]); it; ++it) {
      const int i = local[it.row()];
      if (i >= 0) {
        triplets.emplace_back(i, static_cast<int>(j), it.value());
      }
    }
  }
  const auto m = static_cast<Eigen::Index>(indices.size());
  Storage sub(m, m);
  sub.setFromTriplets(triplets.begin(), triplets.end());
  return SparseSpdMatrix(std::move(sub));
}

DenseMatrix SparseSpdMatrix::dense_principal_submatrix(std::span<const int> indices) const {
  return DenseMatrix(principal_submatrix(indices).storage());
}

SpdFactorization::SpdFactorization(const SparseSpdMatrix& matrix)
    : matrix_(matrix.storage()), llt_(std::make_unique<Eigen::SimplicialLLT<SparseSpdMatrix::Storage>>()) {
  llt_->compute(matrix_);
  if (llt_->info() != Eigen::Success) {
    throw SolverError("sparse Cholesky failed: matrix is not positive definite (dimension " +
                      std::to_string(matrix_.rows()) + ")");
  }
}

DofVector SpdFactorization::solve(const DofVector& b) const {
  if (b.size() != matrix_.rows()) {
    throw std::invalid_argument("SpdFactorization::solve: dimension mismatch");
  }
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    return DofVector::Zero(b.size());
  }
  DofVector x = llt_->solve(b);
  SolveQuality quality = solve_quality(matrix_, x, b);
  for (int sweep = 0; sweep < 3 && !quality.acceptable(); ++sweep) {
    const DofVector r = b - matrix_ * x;
    const DofVector candidate = x + llt_->solve(r);
    const SolveQuality refined = solve_quality(matrix_, candidate, b);
    if (!(refined.residual < quality.residual)) {
      break;
    }
    x = candidate;
    quality = refined;
  }
  if (quality.acceptable()) {
    return x;
  }
  std::ostringstream msg;
  msg << "SPD solve missed tolerance " << kSolveTolerance << ": relative residual " << quality.relative_residual()
      << ", backward error " << quality.backward_error();
  throw SolverError(msg.str());
}

namespace {

DofVector extended_residual(const SparseSpdMatrix::Storage& matrix, const DofVector& x, const DofVector& b) {
  std::vector<long double> acc(b.data(), b.data() + b.size());
  for (Eigen::Index col = 0; col < matrix.outerSize(); ++col) {
    const long double xc = x(col);
    for (SparseSpdMatrix::Storage::InnerIterator it(matrix, col); it; ++it) {
      acc[it.row()] -= static_cast<long double>(it.value()) * xc;
    }
  }
  DofVector r(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    r(i) = static_cast<double>(acc[i]);
  }
  return r;
}

}  // namespace

DofVector SpdFactorization::solve_extended(const DofVector& b, int max_sweeps) const {
  DofVector x = solve(b);
  if (b.norm() == 0.0) {
    return x;
  }
  DofVector r = extended_residual(matrix_, x, b);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const DofVector candidate = x + llt_->solve(r);
    DofVector next = extended_residual(matrix_, candidate, b);
    if (!(next.norm() < r.norm())) {
      break;
    }
    x = candidate;
    r = std::move(next);
  }
  return x;
}

SolveQuality solve_quality(const SparseSpdMatrix::Storage& matrix, const DofVector& x, const DofVector& b) {
  SolveQuality q;
  q.residual = (b - matrix * x).norm();
  q.rhs = b.norm();
  q.magnitude = (matrix.cwiseAbs() * x.cwiseAbs()).norm();
  return q;
}

DofVector solve_spd(const SparseSpdMatrix& matrix, const DofVector& b) {
  if (b.size() != matrix.dimension()) {
    throw std::invalid_argument("solve_spd: dimension mismatch");
  }
  if (b.norm() == 0.0) {
    return DofVector::Zero(b.size());
  }
  return SpdFactorization(matrix).solve(b);
}

double energy_inner(const SparseSpdMatrix& matrix, const DofVector& u, const DofVector& v) {
  if (u.size() != matrix.dimension() || v.size() != matrix.dimension()) {
    throw std::invalid_argument("energy_inner: dimension mismatch");
  }
  return u.dot(matrix.storage() * v);
}

double energy_norm(const SparseSpdMatrix& matrix, const DofVector& v) {
  return std::sqrt(std::max(0.0, energy_inner(matrix, v, v)));
}

PsdSolution solve_psd_dense(const DenseMatrix& matrix, const DofVector& rhs, const DofVector& reference_diagonal,
                            double rank_tolerance) {
  const Eigen::Index m = matrix.rows();
  if (matrix.cols() != m || rhs.size() != m || reference_diagonal.size() != m) {
    throw std::invalid_argument("solve_psd_dense: dimension mismatch");
  }
  if ((reference_diagonal.array() <= 0.0).any()) {
    throw std::invalid_argument("solve_psd_dense: reference diagonal must be positive");
  }
  const DofVector scale = reference_diagonal.cwiseSqrt().cwiseInverse();
  DenseMatrix work = scale.asDiagonal() * matrix * scale.asDiagonal();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});

  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::Index j = 0;
    const double pivot = work.diagonal().tail(m - k).maxCoeff(&j);
    j += k;
    if (!(pivot > rank_tolerance)) {
      break;
    }
    if (j != k) {
      work.row(k).swap(work.row(j));
      work.col(k).swap(work.col(j));
      std::swap(perm[k], perm[j]);
    }
    const double d = std::sqrt(work(k, k));
    work(k, k) = d;
    const Eigen::Index rest = m - k - 1;
    if (rest > 0) {
      work.col(k).tail(rest) /= d;
      const DofVector column = work.col(k).tail(rest);
      work.bottomRightCorner(rest, rest).noalias() -= column * column.transpose();
    }
    rank = k + 1;
  }

  DofVector y(rank);
  for (Eigen::Index i = 0; i < rank; ++i) {
    y(i) = scale(perm[i]) * rhs(perm[i]);
  }
  const auto factor = work.topLeftCorner(rank, rank).triangularView<Eigen::Lower>();
  factor.solveInPlace(y);
  factor.transpose().solveInPlace(y);

  PsdSolution out{DofVector::Zero(m), rank};
  for (Eigen::Index i = 0; i < rank; ++i) {
    out.x(perm[i]) = scale(perm[i]) * y(i);
  }
  return out;
}

}  // namespace locred
