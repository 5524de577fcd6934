#include "locred/run.hpp"

#include "locred/errors.hpp"
#include "locred/fem.hpp"

#include <limits>
#include <stdexcept>

namespace locred {

DiscreteProblem DiscreteProblem::assemble(const TriMesh& mesh, const CoefficientField& kappa, const SourceField& f) {
  DiscreteProblem p;
  p.stiffness = assemble_stiffness(mesh, kappa);
  p.load = assemble_load(mesh, f);
  p.reference = reference_solve(p.stiffness, p.load);
  p.reference_energy = energy_norm(p.stiffness, p.reference);
  return p;
}

std::optional<TheoryConstants> try_theory_constants(const TriMesh& mesh, const CoefficientField& kappa,
                                                    const DomainDecomposition& dd, double c_f) {
  try {
    const PartitionOfUnity pu = build_pu(dd, mesh);
    return theory_constants(dd, pu, kappa, c_f);
  } catch (const PartitionError&) {
    return std::nullopt;
  }
}

EnrichmentTrace run(Algorithm algorithm, const DiscreteProblem& problem, const DomainDecomposition& dd,
                    const std::optional<TheoryConstants>& theory, const StoppingRule& stop,
                    const RunOptions& options) {
  if (stop.max_iter < 0 || stop.tol_abs < 0.0 || stop.tol_rel < 0.0) {
    throw ConfigError("stopping rule values must be non-negative");
  }
  EnrichmentTrace trace;
  trace.algorithm = algorithm;
  trace.theory = theory;
  trace.reference_energy = problem.reference_energy;
  const double cpu_sq = theory ? theory->cpu_sq_bound : std::numeric_limits<double>::quiet_NaN();
  const auto relative = [&](double error) {
    return problem.reference_energy > 0.0 ? error / problem.reference_energy : 0.0;
  };

  EnrichmentOptions enrichment_options;
  enrichment_options.threads = options.threads;
  enrichment_options.tol_abs = stop.tol_abs;
  enrichment_options.coupled_dual_norms = options.coupled_dual_norms;
  OnlineEnrichment enrichment(algorithm, problem.stiffness, problem.load, dd, enrichment_options);

  double error = problem.reference_energy;  // u_tilde_0 = 0
  for (int n = 0;; ++n) {
    if (relative(error) <= stop.tol_rel) {
      trace.status = RunStatus::Converged;
      break;
    }
    if (n >= stop.max_iter) {
      trace.status = RunStatus::MaxIterations;
      break;
    }
    const StepReport report = enrichment.step();
    if (report.status == StepStatus::BelowTolerance) {
      trace.status = RunStatus::Converged;
      break;
    }
    if (report.status == StepStatus::Stagnated) {
      trace.status = RunStatus::Stagnated;
      break;
    }
    const double next_error =
        energy_norm(problem.stiffness, problem.reference - enrichment.state().u_tilde);
    trace.records.push_back(compute_record(n, report, error, next_error, problem.reference_energy, cpu_sq));
    error = next_error;
  }
  trace.final_rel_error = relative(error);
  trace.final_solution = enrichment.state().u_tilde;
  return trace;
}

EnrichmentTrace run(Algorithm algorithm, const TriMesh& mesh, const CoefficientField& kappa, const SourceField& f,
                    const DomainDecomposition& dd, const StoppingRule& stop, const RunOptions& options) {
  const DiscreteProblem problem = DiscreteProblem::assemble(mesh, kappa, f);
  return run(algorithm, problem, dd, try_theory_constants(mesh, kappa, dd, options.c_f), stop, options);
}

}  // namespace locred
