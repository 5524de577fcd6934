#include "support.hpp"

#include "locred/errors.hpp"
#include "locred/fem.hpp"
#include "locred/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace locred;
using locred::test::Gen;

TEST_CASE("mesh counts") {
  SUBCASE("n = 1") {
    const TriMesh mesh(1);
    CHECK(mesh.node_count() == 5);
    CHECK(mesh.triangle_count() == 4);
    REQUIRE(mesh.free_count() == 1);
    const Point center = mesh.nodes()[mesh.node_of_free(0)];
    CHECK(center.x == 0.5);
    CHECK(center.y == 0.5);
  }
  SUBCASE("n = 2") {
    const TriMesh mesh(2);
    CHECK(mesh.node_count() == 13);
    CHECK(mesh.triangle_count() == 16);
  }
  SUBCASE("n = 200") {
    const TriMesh mesh(200);
    CHECK(mesh.node_count() == 80401);
    CHECK(mesh.triangle_count() == 160000);
  }
  CHECK_THROWS_AS(TriMesh(0), ConfigError);
}

TEST_CASE("mesh invariants") {
  for (int n : {1, 2, 3, 7, 16}) {
    const TriMesh mesh(n);
    CHECK(mesh.node_count() == (n + 1) * (n + 1) + n * n);
    CHECK(mesh.triangle_count() == 4 * n * n);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      CHECK(signed_double_area(mesh, t) > 0.0);
      const SquareIndex sq = mesh.square_of_triangle(t);
      CHECK(mesh.square_number(t) == sq.iy * n + sq.ix);
      for (int node : mesh.triangles()[t]) {
        const Point p = mesh.nodes()[node];
        CHECK(p.x >= static_cast<double>(sq.ix) / n - 1e-14);
        CHECK(p.x <= static_cast<double>(sq.ix + 1) / n + 1e-14);
      }
    }
    int free = 0;
    for (int node = 0; node < mesh.node_count(); ++node) {
      const Point p = mesh.nodes()[node];
      const bool on_edge = p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
      CHECK(mesh.is_boundary(node) == on_edge);
      if (!on_edge) {
        CHECK(mesh.free_index(node) == free);
        CHECK(mesh.node_of_free(free) == node);
        ++free;
      }
    }
    CHECK(mesh.free_count() == free);
  }
}

TEST_CASE("node ordering") {
  const TriMesh mesh(3);
  CHECK(mesh.vertex_node(0, 0) == 0);
  CHECK(mesh.vertex_node(3, 0) == 3);
  CHECK(mesh.vertex_node(0, 1) == 4);
  CHECK(mesh.center_node(0, 0) == 16);
  const Point c = mesh.nodes()[mesh.center_node(2, 1)];
  CHECK(c.x == doctest::Approx(2.5 / 3.0));
  CHECK(c.y == doctest::Approx(1.5 / 3.0));
  const auto hp = mesh.half_pitch_coords(mesh.center_node(2, 1));
  CHECK(hp[0] == 5);
  CHECK(hp[1] == 3);
}

TEST_CASE("fields") {
  CHECK_THROWS_AS(CoefficientField(2, {1.0, 1.0, 0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(CoefficientField(2, {1.0, 1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(SourceField(1, {std::nan("")}), ConfigError);
  const CoefficientField k(2, {1.0, 5.0, 2.0, 1e5});
  CHECK(k.kappa_min() == 1.0);
  CHECK(k.kappa_max() == 1e5);
  CHECK(k.contrast() == 1e5);
}

TEST_CASE("stiffness symmetry and kappa scaling") {
  Gen gen(11);
  const int n = 6;
  const TriMesh mesh(n);
  const std::vector<double> values = gen.log_field(n, 1.0, 1e4);
  std::vector<double> doubled = values;
  for (double& v : doubled) {
    v *= 2.0;
  }
  const SparseSpdMatrix a = assemble_stiffness(mesh, CoefficientField(n, values));
  const SparseSpdMatrix a2 = assemble_stiffness(mesh, CoefficientField(n, doubled));
  CHECK(a.asymmetry() == 0.0);
  CHECK(a.dimension() == mesh.free_count());
  const DenseMatrix d = test::dense(a);
  const DenseMatrix d2 = test::dense(a2);
  CHECK((d2 - 2.0 * d).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(d);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
  CHECK_THROWS_AS(assemble_stiffness(TriMesh(5), CoefficientField(n, values)), ConfigError);
}

TEST_CASE("stiffness pattern follows mesh adjacency") {
  const TriMesh mesh(4);
  const SparseSpdMatrix a = assemble_stiffness(mesh, CoefficientField::constant(4, 1.0));
  std::vector<std::vector<bool>> adjacent(mesh.free_count(), std::vector<bool>(mesh.free_count(), false));
  for (const auto& tri : mesh.triangles()) {
    for (int p : tri) {
      for (int q : tri) {
        const int i = mesh.free_index(p);
        const int j = mesh.free_index(q);
        if (i >= 0 && j >= 0) {
          adjacent[i][j] = true;
        }
      }
    }
  }
  for (Eigen::Index col = 0; col < a.storage().outerSize(); ++col) {
    for (SparseSpdMatrix::Storage::InnerIterator it(a.storage(), col); it; ++it) {
      CHECK(adjacent[it.row()][it.col()]);
    }
  }
}

TEST_CASE("stiffness reproduces the Dirichlet energy of a smooth function") {
  const int n = 64;
  const TriMesh mesh(n);
  const SparseSpdMatrix a = assemble_stiffness(mesh, CoefficientField::constant(n, 1.0));
  DofVector v(mesh.free_count());
  for (int dof = 0; dof < mesh.free_count(); ++dof) {
    const Point p = mesh.nodes()[mesh.node_of_free(dof)];
    v(dof) = std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y);
  }
  const double exact = std::numbers::pi * std::numbers::pi / 2.0;
  CHECK(energy_inner(a, v, v) == doctest::Approx(exact).epsilon(0.01));
}

namespace {

/// Integral of every hat function by edge-midpoint quadrature, which is exact
/// for the linear restriction of a hat function to a triangle.
std::vector<double> hat_integrals(const TriMesh& mesh, const SourceField& f) {
  std::vector<double> out(static_cast<std::size_t>(mesh.node_count()), 0.0);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Point p0 = mesh.nodes()[tri[0]];
    const Point p1 = mesh.nodes()[tri[1]];
    const Point p2 = mesh.nodes()[tri[2]];
    const double area = 0.5 * std::abs((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
    const Point mids[3] = {{(p0.x + p1.x) / 2, (p0.y + p1.y) / 2},
                           {(p1.x + p2.x) / 2, (p1.y + p2.y) / 2},
                           {(p2.x + p0.x) / 2, (p2.y + p0.y) / 2}};
    const Point verts[3] = {p0, p1, p2};
    for (int j = 0; j < 3; ++j) {
      const Point a = verts[j];
      const Point b = verts[(j + 1) % 3];
      const Point c = verts[(j + 2) % 3];
      // Barycentric coordinate of vertex j: ratio of the sub-triangle (q, b, c).
      const double full = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
      double sum = 0.0;
      for (const Point& q : mids) {
        sum += ((b.x - q.x) * (c.y - q.y) - (c.x - q.x) * (b.y - q.y)) / full;
      }
      out[tri[j]] += f[mesh.square_number(t)] * area * sum / 3.0;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("load vector") {
  for (int n : {1, 3, 8}) {
    const TriMesh mesh(n);
    const DofVector b = assemble_load(mesh, SourceField::constant(n, 1.0));
    const std::vector<double> oracle = hat_integrals(mesh, SourceField::constant(n, 1.0));
    double interior = 0.0;
    double boundary = 0.0;
    for (int node = 0; node < mesh.node_count(); ++node) {
      (mesh.is_boundary(node) ? boundary : interior) += oracle[node];
    }
    CHECK(interior == doctest::Approx(1.0 - boundary).epsilon(1e-14));
    CHECK(b.sum() == doctest::Approx(interior).epsilon(1e-13));
    for (int dof = 0; dof < mesh.free_count(); ++dof) {
      CHECK(b(dof) == doctest::Approx(oracle[mesh.node_of_free(dof)]).epsilon(1e-13));
    }
  }
  Gen gen(5);
  const int n = 5;
  const TriMesh mesh(n);
  std::vector<double> values = gen.log_field(n, 0.1, 10.0);
  const DofVector b = assemble_load(mesh, SourceField(n, values));
  const std::vector<double> oracle = hat_integrals(mesh, SourceField(n, values));
  for (int dof = 0; dof < mesh.free_count(); ++dof) {
    CHECK(b(dof) == doctest::Approx(oracle[mesh.node_of_free(dof)]).epsilon(1e-13));
  }
  for (double& v : values) {
    v = -v;
  }
  CHECK((assemble_load(mesh, SourceField(n, values)) + b).norm() == 0.0);
  CHECK(assemble_load(mesh, SourceField::constant(n, 0.0)).norm() == 0.0);
  CHECK_THROWS_AS(assemble_load(TriMesh(4), SourceField::constant(n, 1.0)), ConfigError);
}

TEST_CASE("solve_spd") {
  SUBCASE("zero right-hand side") {
    const TriMesh mesh(4);
    const SparseSpdMatrix a = assemble_stiffness(mesh, CoefficientField::constant(4, 1.0));
    CHECK(solve_spd(a, DofVector::Zero(a.dimension())).norm() == 0.0);
  }
  SUBCASE("diagonal") {
    Gen gen(3);
    const DofVector diag = gen.vector(7, 0.5, 4.0);
    const DofVector rhs = gen.vector(7);
    SparseSpdMatrix::Storage s(7, 7);
    for (int i = 0; i < 7; ++i) {
      s.insert(i, i) = diag(i);
    }
    const DofVector x = solve_spd(SparseSpdMatrix(s), rhs);
    for (int i = 0; i < 7; ++i) {
      CHECK(x(i) == doctest::Approx(rhs(i) / diag(i)).epsilon(1e-15));
    }
  }
  SUBCASE("random 10 x 10 against Gaussian elimination") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
      Gen gen(seed);
      DenseMatrix m(10, 10);
      for (int i = 0; i < 10; ++i) {
        m.col(i) = gen.vector(10);
      }
      const DenseMatrix spd = m.transpose() * m + 0.1 * DenseMatrix::Identity(10, 10);
      const DofVector rhs = gen.vector(10);
      const DofVector x = solve_spd(SparseSpdMatrix(spd.sparseView()), rhs);
      const DofVector oracle = test::gauss_solve(spd, rhs);
      CHECK((x - oracle).norm() <= 1e-10 * oracle.norm());
    }
  }
  SUBCASE("indefinite input is rejected") {
    DenseMatrix m = DenseMatrix::Identity(3, 3);
    m(1, 1) = -1.0;
    CHECK_THROWS_AS(solve_spd(SparseSpdMatrix(m.sparseView()), DofVector::Ones(3)), SolverError);
  }
  SUBCASE("dimension mismatch") {
    const DenseMatrix m = DenseMatrix::Identity(3, 3);
    CHECK_THROWS_AS(solve_spd(SparseSpdMatrix(m.sparseView()), DofVector::Ones(4)), std::invalid_argument);
  }
}

TEST_CASE("energy inner product") {
  const int n = 6;
  const TriMesh mesh(n);
  Gen gen(17);
  const SparseSpdMatrix a = assemble_stiffness(mesh, CoefficientField(n, gen.log_field(n, 1.0, 1e5)));
  CHECK(energy_norm(a, DofVector::Zero(a.dimension())) == 0.0);
  for (int trial = 0; trial < 50; ++trial) {
    const DofVector u = gen.vector(a.dimension());
    const DofVector v = gen.vector(a.dimension());
    const double uv = energy_inner(a, u, v);
    CHECK(uv == doctest::Approx(energy_inner(a, v, u)).epsilon(1e-14));
    CHECK(std::abs(uv) <= energy_norm(a, u) * energy_norm(a, v) * (1.0 + 1e-14));
    CHECK(energy_norm(a, u) >= 0.0);
  }
  CHECK_THROWS_AS(energy_inner(a, DofVector::Zero(3), DofVector::Zero(3)), std::invalid_argument);
}

namespace {

/// Series solution of -laplace(u) = 1 on the unit square with zero boundary values.
double poisson_series(double x, double y) {
  const double pi = std::numbers::pi;
  double sum = 0.0;
  for (int m = 1; m < 400; m += 2) {
    for (int k = 1; k < 400; k += 2) {
      sum += std::sin(m * pi * x) * std::sin(k * pi * y) / (m * k * static_cast<double>(m * m + k * k));
    }
  }
  return 16.0 / (pi * pi * pi * pi) * sum;
}

}  // namespace

TEST_CASE("reference solve against the series solution") {
  const int n = 32;
  const TriMesh mesh(n);
  const SparseSpdMatrix a = assemble_stiffness(mesh, CoefficientField::constant(n, 1.0));
  const DofVector u = reference_solve(a, assemble_load(mesh, SourceField::constant(n, 1.0)));
  Eigen::Index arg = 0;
  const double peak = u.maxCoeff(&arg);
  const Point p = mesh.nodes()[mesh.node_of_free(static_cast<int>(arg))];
  CHECK(p.x == 0.5);
  CHECK(p.y == 0.5);
  const double series = poisson_series(p.x, p.y);
  CHECK(series == doctest::Approx(0.0736).epsilon(0.002 / 0.0736));
  CHECK(std::abs(peak - series) <= 0.002);
  CHECK(std::abs(peak - 0.0736) <= 0.002);
}

TEST_CASE("reference solve linearity") {
  const int n = 8;
  const TriMesh mesh(n);
  Gen gen(23);
  const SparseSpdMatrix a = assemble_stiffness(mesh, CoefficientField(n, gen.log_field(n, 1.0, 1e3)));
  const DofVector b = assemble_load(mesh, test::signed_source(n, 4));
  const DofVector u = reference_solve(a, b);
  CHECK(reference_solve(a, DofVector::Zero(b.size())).norm() == 0.0);
  CHECK((reference_solve(a, 2.0 * b) - 2.0 * u).norm() <= 1e-12 * u.norm());
}

TEST_CASE("Galerkin orthogonality and energy expansion") {
  for (double contrast : {1.0, 1e5}) {
    const int n = 20;
    const TriMesh mesh(n);
    Gen gen(contrast > 1.0 ? 41 : 42);
    const SparseSpdMatrix a = assemble_stiffness(mesh, CoefficientField(n, gen.log_field(n, 1.0, contrast)));
    const DofVector b = assemble_load(mesh, test::signed_source(n, 9));
    const DofVector u = reference_solve(a, b);
    const DofVector au = a.apply(u);
    for (int trial = 0; trial < 20; ++trial) {
      const DofVector phi = gen.vector(a.dimension());
      CHECK(std::abs(b.dot(phi) - phi.dot(au)) <= 1e-10 * b.norm() * phi.norm());
      const DofVector x = gen.vector(a.dimension(), -0.01, 0.01);
      const double lhs = std::pow(energy_norm(a, u - x), 2);
      const double rhs = std::pow(energy_norm(a, u), 2) - 2.0 * b.dot(x) + std::pow(energy_norm(a, x), 2);
      const double scale = std::pow(energy_norm(a, u), 2) + std::pow(energy_norm(a, x), 2);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("energy of the reference solution grows under nested refinement") {
  auto field = [](int n, double inside, double outside) {
    std::vector<double> values(static_cast<std::size_t>(n) * n);
    for (int iy = 0; iy < n; ++iy) {
      for (int ix = 0; ix < n; ++ix) {
        const bool in = ix >= n / 4 && ix < n / 2 && iy >= n / 2;
        values[iy * n + ix] = in ? inside : outside;
      }
    }
    return values;
  };
  double previous = 0.0;
  for (int n : {4, 8, 16, 32}) {
    const TriMesh mesh(n);
    const SparseSpdMatrix a = assemble_stiffness(mesh, CoefficientField(n, field(n, 100.0, 1.0)));
    const DofVector b = assemble_load(mesh, SourceField(n, field(n, -3.0, 1.0)));
    const double energy = energy_norm(a, reference_solve(a, b));
    CHECK(energy >= previous);
    previous = energy;
  }
}

TEST_CASE("nodal transfer") {
  const TriMesh mesh(3);
  Gen gen(2);
  const DofVector v = gen.vector(mesh.free_count());
  const Eigen::VectorXd nodal = to_nodal(mesh, v);
  CHECK(nodal.size() == mesh.node_count());
  for (int node = 0; node < mesh.node_count(); ++node) {
    if (mesh.is_boundary(node)) {
      CHECK(nodal(node) == 0.0);
    }
  }
  CHECK((to_free(mesh, nodal) - v).norm() == 0.0);
}
