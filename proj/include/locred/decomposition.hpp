#pragma once

#include "locred/fields.hpp"
#include "locred/linalg.hpp"
#include "locred/mesh.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace locred {

/// Axis-aligned square [x0, x0 + size] x [y0, y0 + size] on mesh grid lines,
/// stored in units of the mesh pitch.
struct Box {
  int cell_x0 = 0;
  int cell_y0 = 0;
  int cells = 0;
  int n_squares = 1;

  double x0() const { return static_cast<double>(cell_x0) / n_squares; }
  double y0() const { return static_cast<double>(cell_y0) / n_squares; }
  double size() const { return static_cast<double>(cells) / n_squares; }
};

/// One overlapping subdomain and the free DOFs of its local space H^1_0(box).
struct Subdomain {
  Box box;
  /// Free-DOF indices of nodes strictly inside the box, ascending.
  std::vector<int> interior_dofs;

  /// Position of a global free DOF in interior_dofs, if present.
  std::optional<int> local_index(int dof) const;
  int size() const { return static_cast<int>(interior_dofs.size()); }
};

struct DomainDecomposition {
  std::vector<Subdomain> subdomains;
  double size = 0.0;
  double step = 0.0;
  int size_cells = 0;
  int step_cells = 0;
  int n_squares = 0;
  /// Maximum number of (lower-left half-open) boxes covering any point.
  int max_cover = 0;

  int count() const { return static_cast<int>(subdomains.size()); }
};

/// Checks that `size` and `step` lie on the mesh grid, tile [0,1] and overlap.
/// Throws ConfigError otherwise.
void check_decomposition_geometry(int n_squares, double size, double step);

/// Lattice of boxes with origins {0, step, ..., 1 - size}^2.
DomainDecomposition build_decomposition(const TriMesh& mesh, double size, double step);

/// Nodal partition of unity built from clamped tensor-product ramps.
struct PartitionOfUnity {
  /// weights[i][node] = rho_i(node) over all mesh nodes.
  std::vector<std::vector<double>> weights;
  /// Ramp width (the overlap S - step).
  double ramp_width = 0.0;
  double max_grad_sq = 0.0;
  double max_val_sq = 0.0;
};

/// Throws PartitionError when the ramps cannot sum to one (no overlap, or the
/// overlap exceeds the lattice step).
PartitionOfUnity build_pu(const DomainDecomposition& dd, const TriMesh& mesh);

/// 1 / (sqrt(2) pi), the Friedrichs constant plug-in value used for the unit square.
double default_friedrichs_constant();

/// 2 J (c_f contrast max_grad_sq + max_val_sq).
double cpu_upper_bound(int max_cover, double c_f, double contrast, double max_grad_sq, double max_val_sq);

struct RateBound {
  double c = 0.0;
  double one_minus_c = 0.0;
};

/// c = sqrt(1 - 1/(N_D cpu_sq)), with 1 - c evaluated without cancellation.
/// Throws std::invalid_argument when cpu_sq * N_D < 1 or N_D < 1.
RateBound rate_bound(double cpu_sq, int n_subdomains);

struct TheoryConstants {
  double c_f = 0.0;
  double contrast = 1.0;
  int max_cover = 0;
  double max_grad_sq = 0.0;
  double max_val_sq = 0.0;
  double cpu_sq_bound = 0.0;
  int n_subdomains = 0;
  double c = 0.0;
  double one_minus_c = 0.0;
};

TheoryConstants theory_constants(int max_cover, double c_f, double contrast, double max_grad_sq, double max_val_sq,
                                 int n_subdomains);
TheoryConstants theory_constants(const DomainDecomposition& dd, const PartitionOfUnity& pu,
                                 const CoefficientField& kappa, double c_f);

/// Sampled lower estimate of c_pu^2: the maximum over seeded random vectors (and
/// any `extra` vectors) of sum_i |I_h(rho_i phi)|_a^2 / |phi|_a^2.
/// Throws std::invalid_argument for samples == 0.
double cpu_rayleigh_sample(const PartitionOfUnity& pu, const TriMesh& mesh, const SparseSpdMatrix& stiffness,
                           int samples, std::uint64_t seed, const std::vector<DofVector>& extra = {});

}  // namespace locred
