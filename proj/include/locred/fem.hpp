#pragma once

#include "locred/fields.hpp"
#include "locred/linalg.hpp"
#include "locred/mesh.hpp"

namespace locred {

/// Stiffness matrix a(phi_j, phi_i) = int kappa grad phi_j . grad phi_i over
/// free DOFs. Element integrals are exact for piecewise constant kappa.
/// Throws ConfigError when the field resolution does not match the mesh.
SparseSpdMatrix assemble_stiffness(const TriMesh& mesh, const CoefficientField& kappa);

/// Load vector f(phi_j) = int f phi_j over free DOFs, exact for piecewise constant f.
DofVector assemble_load(const TriMesh& mesh, const SourceField& f);

/// Finite element solution u of a(u, phi) = f(phi) for all phi in V_h.
DofVector reference_solve(const SparseSpdMatrix& stiffness, const DofVector& load);

/// Expands a free-DOF vector to all mesh nodes (zero on the boundary).
Eigen::VectorXd to_nodal(const TriMesh& mesh, const DofVector& free_values);
/// Restricts nodal values to free DOFs.
DofVector to_free(const TriMesh& mesh, const Eigen::VectorXd& nodal_values);

}  // namespace locred
