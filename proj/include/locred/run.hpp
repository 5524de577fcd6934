#pragma once

#include "locred/decomposition.hpp"
#include "locred/diagnostics.hpp"
#include "locred/enrichment.hpp"
#include "locred/fields.hpp"
#include "locred/mesh.hpp"

#include <optional>

namespace locred {

/// Iteration stops at the first rule that fires, checked in this order before
/// every step: relative energy error <= tol_rel, n >= max_iter, stopping value
/// (largest local indicator) <= tol_abs.
struct StoppingRule {
  double tol_abs = 0.0;
  double tol_rel = 0.0;
  int max_iter = 600;
};

struct RunOptions {
  int threads = 1;
  bool coupled_dual_norms = true;
  double c_f = default_friedrichs_constant();
};

/// Assembled problem with its finite element reference solution.
struct DiscreteProblem {
  SparseSpdMatrix stiffness;
  DofVector load;
  DofVector reference;
  double reference_energy = 0.0;

  static DiscreteProblem assemble(const TriMesh& mesh, const CoefficientField& kappa, const SourceField& f);
};

/// Theory constants for a decomposition, or nullopt when no partition of unity
/// exists for its geometry.
std::optional<TheoryConstants> try_theory_constants(const TriMesh& mesh, const CoefficientField& kappa,
                                                    const DomainDecomposition& dd, double c_f);

EnrichmentTrace run(Algorithm algorithm, const DiscreteProblem& problem, const DomainDecomposition& dd,
                    const std::optional<TheoryConstants>& theory, const StoppingRule& stop,
                    const RunOptions& options = {});

EnrichmentTrace run(Algorithm algorithm, const TriMesh& mesh, const CoefficientField& kappa, const SourceField& f,
                    const DomainDecomposition& dd, const StoppingRule& stop, const RunOptions& options = {});

}  // namespace locred
