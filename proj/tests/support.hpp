#pragma once

#include "locred/decomposition.hpp"
#include "locred/fem.hpp"
#include "locred/fields.hpp"
#include "locred/linalg.hpp"
#include "locred/mesh.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace locred::test {

/// Seeded value generator for property checks.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  DofVector vector(Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    DofVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v(i) = uniform(lo, hi);
    }
    return v;
  }

  /// Piecewise constant field with values log-uniform in [lo, hi].
  std::vector<double> log_field(int n_squares, double lo, double hi) {
    std::vector<double> values(static_cast<std::size_t>(n_squares) * n_squares);
    for (double& v : values) {
      v = std::exp(uniform(std::log(lo), std::log(hi)));
    }
    return values;
  }

 private:
  std::mt19937_64 rng_;
};

inline DenseMatrix dense(const SparseSpdMatrix& a) { return DenseMatrix(a.storage()); }

/// Gaussian elimination with partial pivoting.
inline DofVector gauss_solve(DenseMatrix m, DofVector b) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index p = k;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (std::abs(m(i, k)) > std::abs(m(p, k))) {
        p = i;
      }
    }
    if (m(p, k) == 0.0) {
      throw std::runtime_error("gauss_solve: singular matrix");
    }
    m.row(k).swap(m.row(p));
    std::swap(b(k), b(p));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double factor = m(i, k) / m(k, k);
      m.row(i).tail(n - k) -= factor * m.row(k).tail(n - k);
      b(i) -= factor * b(k);
    }
  }
  DofVector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    x(i) = (b(i) - m.row(i).tail(n - i - 1).dot(x.tail(n - i - 1))) / m(i, i);
  }
  return x;
}

/// Dense Galerkin projection of the solution of A u = b onto the column span
/// of `generators`, which may be rank deficient.
inline DofVector dense_galerkin(const DenseMatrix& a, const DofVector& b, const DenseMatrix& generators) {
  const DenseMatrix gram = generators.transpose() * a * generators;
  const DofVector rhs = generators.transpose() * b;
  Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(gram);
  cod.setThreshold(1e-12);
  return generators * cod.solve(rhs);
}

/// Columns: unit vectors of `dofs` in a space of dimension n.
inline DenseMatrix indicator_columns(Eigen::Index n, const std::vector<int>& dofs) {
  DenseMatrix e = DenseMatrix::Zero(n, static_cast<Eigen::Index>(dofs.size()));
  for (std::size_t l = 0; l < dofs.size(); ++l) {
    e(dofs[l], static_cast<Eigen::Index>(l)) = 1.0;
  }
  return e;
}

inline double dense_energy(const DenseMatrix& a, const DofVector& v) { return std::sqrt(std::max(0.0, v.dot(a * v))); }

/// Random source with magnitudes in [0.5, 2] and random signs.
inline SourceField signed_source(int n, std::uint64_t seed) {
  Gen gen(seed);
  std::vector<double> values = gen.log_field(n, 0.5, 2.0);
  for (double& v : values) {
    v *= gen.integer(0, 1) == 0 ? -1.0 : 1.0;
  }
  return SourceField(n, std::move(values));
}

/// Small problem with random positive coefficients and a random source.
struct Instance {
  TriMesh mesh;
  CoefficientField kappa;
  SourceField f;
  SparseSpdMatrix a;
  DofVector b;
  DofVector u;
  DomainDecomposition dd;

  Instance(int n, double size, double step, std::uint64_t seed, double kappa_hi = 1e3)
      : mesh(n),
        kappa(n, Gen(seed).log_field(n, 1.0, kappa_hi)),
        f(signed_source(n, seed + 1)),
        a(assemble_stiffness(mesh, kappa)),
        b(assemble_load(mesh, f)),
        u(reference_solve(a, b)),
        dd(build_decomposition(mesh, size, step)) {}
};

}  // namespace locred::test
