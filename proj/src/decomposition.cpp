#include "locred/decomposition.hpp"

#include "locred/errors.hpp"
#include "locred/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace locred {

namespace {

int to_cells(double length, int n_squares, const char* what) {
  const double scaled = length * n_squares;
  const double rounded = std::round(scaled);
  if (!std::isfinite(scaled) || std::abs(scaled - rounded) > 1e-9 * std::max(1.0, std::abs(scaled))) {
    std::ostringstream msg;
    msg << what << " " << length << " is not a multiple of the mesh pitch 1/" << n_squares;
    throw ConfigError(msg.str());
  }
  return static_cast<int>(rounded);
}

struct LatticeCells {
  int size = 0;
  int step = 0;
};

LatticeCells lattice_cells(int n_squares, double size, double step) {
  if (n_squares < 1) {
    throw ConfigError("decomposition needs a mesh with at least one square");
  }
  if (!(size > 0.0) || size > 1.0 + 1e-12) {
    throw ConfigError("subdomain size must lie in (0, 1]");
  }
  if (!(step > 0.0)) {
    throw ConfigError("subdomain step must be positive");
  }
  const LatticeCells cells{to_cells(size, n_squares, "subdomain size"), to_cells(step, n_squares, "subdomain step")};
  if (cells.size < 1 || cells.step < 1) {
    throw ConfigError("subdomain size and step must span at least one mesh square");
  }
  if (cells.step > cells.size) {
    throw ConfigError("subdomain step exceeds subdomain size: the boxes would leave gaps");
  }
  if ((n_squares - cells.size) % cells.step != 0) {
    std::ostringstream msg;
    msg << "boxes of size " << size << " with step " << step << " do not tile the unit square";
    throw ConfigError(msg.str());
  }
  return cells;
}

// One-dimensional trapezoid of a box on [lo, hi] (half-pitch units), clamped to
// one at the domain boundary.
double ramp(int coord, int lo, int hi, int width, int domain_end) {
  if (coord < lo || coord > hi) {
    return 0.0;
  }
  const double rise = lo == 0 ? 1.0 : std::min(1.0, static_cast<double>(coord - lo) / width);
  const double fall = hi == domain_end ? 1.0 : std::min(1.0, static_cast<double>(hi - coord) / width);
  return std::min(rise, fall);
}

}  // namespace

std::optional<int> Subdomain::local_index(int dof) const {
  const auto it = std::lower_bound(interior_dofs.begin(), interior_dofs.end(), dof);
  if (it == interior_dofs.end() || *it != dof) {
    return std::nullopt;
  }
  return static_cast<int>(it - interior_dofs.begin());
}

void check_decomposition_geometry(int n_squares, double size, double step) {
  (void)lattice_cells(n_squares, size, step);
}

DomainDecomposition build_decomposition(const TriMesh& mesh, double size, double step) {
  const int n = mesh.n_squares();
  const LatticeCells cells = lattice_cells(n, size, step);

  DomainDecomposition dd;
  dd.size = size;
  dd.step = step;
  dd.size_cells = cells.size;
  dd.step_cells = cells.step;
  dd.n_squares = n;

  std::vector<int> origins;
  for (int o = 0; o + cells.size <= n; o += cells.step) {
    origins.push_back(o);
  }

  for (int oy : origins) {
    for (int ox : origins) {
      Subdomain sub;
      sub.box = Box{ox, oy, cells.size, n};
      for (int iy = oy; iy <= oy + cells.size; ++iy) {
        for (int ix = ox; ix <= ox + cells.size; ++ix) {
          const bool inside = ix > ox && ix < ox + cells.size && iy > oy && iy < oy + cells.size;
          if (inside) {
            sub.interior_dofs.push_back(mesh.free_index(mesh.vertex_node(ix, iy)));
          }
          if (ix < ox + cells.size && iy < oy + cells.size) {
            sub.interior_dofs.push_back(mesh.free_index(mesh.center_node(ix, iy)));
          }
        }
      }
      std::sort(sub.interior_dofs.begin(), sub.interior_dofs.end());
      dd.subdomains.push_back(std::move(sub));
    }
  }

  // Cover count per mesh square; box edges lie on grid lines so squares are the atoms.
  std::vector<int> cover_x(static_cast<std::size_t>(n), 0);
  for (int o : origins) {
    for (int c = o; c < o + cells.size; ++c) {
      ++cover_x[c];
    }
  }
  const int max_1d = *std::max_element(cover_x.begin(), cover_x.end());
  dd.max_cover = max_1d * max_1d;
  return dd;
}

PartitionOfUnity build_pu(const DomainDecomposition& dd, const TriMesh& mesh) {
  if (dd.n_squares != mesh.n_squares()) {
    throw PartitionError("decomposition and mesh resolutions differ");
  }
  const int n = mesh.n_squares();
  const int width_cells = dd.size_cells - dd.step_cells;
  const bool single = dd.count() == 1;
  if (!single && width_cells == 0) {
    throw PartitionError("subdomains do not overlap: no continuous partition of unity exists");
  }

  PartitionOfUnity pu;
  pu.ramp_width = static_cast<double>(width_cells) / n;
  pu.weights.assign(dd.subdomains.size(), std::vector<double>(static_cast<std::size_t>(mesh.node_count()), 0.0));
  const int end = 2 * n;
  const int width = 2 * width_cells;
  for (std::size_t i = 0; i < dd.subdomains.size(); ++i) {
    const Box& box = dd.subdomains[i].box;
    const int x_lo = 2 * box.cell_x0;
    const int y_lo = 2 * box.cell_y0;
    const int x_hi = x_lo + 2 * box.cells;
    const int y_hi = y_lo + 2 * box.cells;
    for (int node = 0; node < mesh.node_count(); ++node) {
      const auto [hx, hy] = mesh.half_pitch_coords(node);
      pu.weights[i][node] = ramp(hx, x_lo, x_hi, width, end) * ramp(hy, y_lo, y_hi, width, end);
    }
  }

  for (int node = 0; node < mesh.node_count(); ++node) {
    double sum = 0.0;
    for (const auto& w : pu.weights) {
      sum += w[node];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream msg;
      msg << "clamped ramps of width " << pu.ramp_width << " do not sum to one (sum " << sum << " at node " << node
          << "); the overlap must not exceed the lattice step";
      throw PartitionError(msg.str());
    }
  }

  // |grad rho_i|^2 peaks at 1/width^2 per ramped direction.
  int ramped_directions = 0;
  for (const auto& sub : dd.subdomains) {
    const bool ramp_x = sub.box.cell_x0 != 0 || sub.box.cell_x0 + sub.box.cells != n;
    const bool ramp_y = sub.box.cell_y0 != 0 || sub.box.cell_y0 + sub.box.cells != n;
    ramped_directions = std::max(ramped_directions, static_cast<int>(ramp_x) + static_cast<int>(ramp_y));
  }
  pu.max_grad_sq = ramped_directions == 0
                       ? 0.0
                       : static_cast<double>(ramped_directions) * n * n / (static_cast<double>(width_cells) * width_cells);
  double max_val = 0.0;
  for (const auto& w : pu.weights) {
    max_val = std::max(max_val, *std::max_element(w.begin(), w.end()));
  }
  pu.max_val_sq = max_val * max_val;
  return pu;
}

double default_friedrichs_constant() { return 1.0 / (std::numbers::sqrt2 * std::numbers::pi); }

double cpu_upper_bound(int max_cover, double c_f, double contrast, double max_grad_sq, double max_val_sq) {
  return 2.0 * max_cover * (c_f * contrast * max_grad_sq + max_val_sq);
}

RateBound rate_bound(double cpu_sq, int n_subdomains) {
  if (n_subdomains < 1) {
    throw std::invalid_argument("rate_bound: need at least one subdomain");
  }
  if (!(cpu_sq * n_subdomains >= 1.0)) {
    throw std::invalid_argument("rate_bound: cpu_sq * N_D must be at least 1");
  }
  const double x = 1.0 / (n_subdomains * cpu_sq);
  const double root = std::sqrt(1.0 - x);
  return RateBound{root, x / (1.0 + root)};
}

TheoryConstants theory_constants(int max_cover, double c_f, double contrast, double max_grad_sq, double max_val_sq,
                                 int n_subdomains) {
  TheoryConstants t;
  t.c_f = c_f;
  t.contrast = contrast;
  t.max_cover = max_cover;
  t.max_grad_sq = max_grad_sq;
  t.max_val_sq = max_val_sq;
  t.n_subdomains = n_subdomains;
  t.cpu_sq_bound = cpu_upper_bound(max_cover, c_f, contrast, max_grad_sq, max_val_sq);
  const RateBound rate = rate_bound(t.cpu_sq_bound, n_subdomains);
  t.c = rate.c;
  t.one_minus_c = rate.one_minus_c;
  return t;
}

TheoryConstants theory_constants(const DomainDecomposition& dd, const PartitionOfUnity& pu,
                                 const CoefficientField& kappa, double c_f) {
  return theory_constants(dd.max_cover, c_f, kappa.contrast(), pu.max_grad_sq, pu.max_val_sq, dd.count());
}

double cpu_rayleigh_sample(const PartitionOfUnity& pu, const TriMesh& mesh, const SparseSpdMatrix& stiffness,
                           int samples, std::uint64_t seed, const std::vector<DofVector>& extra) {
  if (samples <= 0) {
    throw std::invalid_argument("cpu_rayleigh_sample: need at least one sample");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coefficient(-1.0, 1.0);

  std::vector<DofVector> candidates;
  candidates.reserve(static_cast<std::size_t>(samples) + extra.size());
  for (int s = 0; s < samples; ++s) {
    DofVector phi(mesh.free_count());
    if (s % 2 == 0) {
      for (Eigen::Index k = 0; k < phi.size(); ++k) {
        phi(k) = coefficient(rng);
      }
    } else {
      // Smooth sample: random combination of the first 4x4 sine modes.
      std::array<double, 16> a{};
      for (double& v : a) {
        v = coefficient(rng);
      }
      for (int dof = 0; dof < mesh.free_count(); ++dof) {
        const Point p = mesh.nodes()[mesh.node_of_free(dof)];
        double value = 0.0;
        for (int q = 0; q < 4; ++q) {
          for (int r = 0; r < 4; ++r) {
            value += a[4 * q + r] * std::sin((q + 1) * std::numbers::pi * p.x) * std::sin((r + 1) * std::numbers::pi * p.y);
          }
        }
        phi(dof) = value;
      }
    }
    candidates.push_back(std::move(phi));
  }
  candidates.insert(candidates.end(), extra.begin(), extra.end());

  double best = 0.0;
  for (const DofVector& phi : candidates) {
    const double denominator = energy_inner(stiffness, phi, phi);
    if (!(denominator > 0.0)) {
      continue;
    }
    const Eigen::VectorXd nodal = to_nodal(mesh, phi);
    double numerator = 0.0;
    for (const auto& w : pu.weights) {
      const Eigen::VectorXd weighted = nodal.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(w.data(), nodal.size()));
      const DofVector local = to_free(mesh, weighted);
      numerator += energy_inner(stiffness, local, local);
    }
    best = std::max(best, numerator / denominator);
  }
  return best;
}

}  // namespace locred
