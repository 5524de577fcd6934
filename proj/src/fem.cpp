#include "locred/fem.hpp"

#include "locred/errors.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace locred {

namespace {

void check_resolution(const TriMesh& mesh, int field_squares, const char* what) {
  if (field_squares != mesh.n_squares()) {
    throw ConfigError(std::string(what) + " resolution " + std::to_string(field_squares) +
                      " does not match mesh resolution " + std::to_string(mesh.n_squares()));
  }
}

}  // namespace

SparseSpdMatrix assemble_stiffness(const TriMesh& mesh, const CoefficientField& kappa) {
  check_resolution(mesh, kappa.n_squares(), "coefficient field");
  const auto nodes = mesh.nodes();
  const auto triangles = mesh.triangles();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(triangles.size() * 9);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = triangles[t];
    std::array<double, 3> bx{};
    std::array<double, 3> cy{};
    for (int i = 0; i < 3; ++i) {
      const Point pj = nodes[tri[(i + 1) % 3]];
      const Point pk = nodes[tri[(i + 2) % 3]];
      bx[i] = pj.y - pk.y;
      cy[i] = pk.x - pj.x;
    }
    // grad phi_i = (bx_i, cy_i) / (2 area); the element integral carries one factor of area.
    const double scale = kappa[mesh.square_number(t)] / (2.0 * signed_double_area(mesh, t));
    for (int i = 0; i < 3; ++i) {
      const int row = mesh.free_index(tri[i]);
      if (row == TriMesh::kConstrained) {
        continue;
      }
      for (int j = 0; j < 3; ++j) {
        const int col = mesh.free_index(tri[j]);
        if (col == TriMesh::kConstrained) {
          continue;
        }
        triplets.emplace_back(row, col, scale * (bx[i] * bx[j] + cy[i] * cy[j]));
      }
    }
  }
  SparseSpdMatrix::Storage entries(mesh.free_count(), mesh.free_count());
  entries.setFromTriplets(triplets.begin(), triplets.end());
  return SparseSpdMatrix(std::move(entries));
}

DofVector assemble_load(const TriMesh& mesh, const SourceField& f) {
  check_resolution(mesh, f.n_squares(), "source field");
  DofVector load = DofVector::Zero(mesh.free_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double share = f[mesh.square_number(t)] * signed_double_area(mesh, t) / 6.0;
    for (int node : mesh.triangles()[t]) {
      const int dof = mesh.free_index(node);
      if (dof != TriMesh::kConstrained) {
        load(dof) += share;
      }
    }
  }
  return load;
}

DofVector reference_solve(const SparseSpdMatrix& stiffness, const DofVector& load) {
  if (load.size() != stiffness.dimension()) {
    throw std::invalid_argument("reference_solve: dimension mismatch");
  }
  return SpdFactorization(stiffness).solve_extended(load);
}

Eigen::VectorXd to_nodal(const TriMesh& mesh, const DofVector& free_values) {
  Eigen::VectorXd nodal = Eigen::VectorXd::Zero(mesh.node_count());
  for (int dof = 0; dof < mesh.free_count(); ++dof) {
    nodal(mesh.node_of_free(dof)) = free_values(dof);
  }
  return nodal;
}

DofVector to_free(const TriMesh& mesh, const Eigen::VectorXd& nodal_values) {
  DofVector out(mesh.free_count());
  for (int dof = 0; dof < mesh.free_count(); ++dof) {
    out(dof) = nodal_values(mesh.node_of_free(dof));
  }
  return out;
}

}  // namespace locred
