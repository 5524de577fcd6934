#pragma once

#include "locred/decomposition.hpp"
#include "locred/linalg.hpp"
#include "locred/reduced_basis.hpp"

#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace locred {

enum class Algorithm { ResidualBased, GloballyCoupled };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

/// Reduced space, Galerkin solution in it and the residual vector b - A u_tilde.
struct EnrichmentState {
  ReducedBasis basis;
  DofVector u_tilde;
  DofVector residual;
  int iteration = 0;

  /// Empty reduced space: u_tilde = 0, residual = b.
  static EnrichmentState initial(const DofVector& load);
};

enum class StepStatus {
  Enriched,
  /// The stopping value did not exceed tol_abs; nothing was added.
  BelowTolerance,
  /// The selected enrichment lies numerically in the reduced space.
  Stagnated,
};

struct StepReport {
  StepStatus status = StepStatus::BelowTolerance;
  Algorithm algorithm = Algorithm::ResidualBased;
  /// argmax of `indicators`, lowest index on ties.
  int selected_k = -1;
  /// Selection criterion per subdomain: local residual dual norms for the
  /// residual based step, solution shifts |u_tilde - u_e^(i)|_a for the coupled step.
  std::vector<double> indicators;
  /// Local residual dual norms |R_n|_{O_i'}; for the coupled step only when requested.
  std::vector<double> dual_norms;
  /// Local Riesz representative (residual based) or coupled solution u_e^(k).
  DofVector enrichment_vector;
  double stopping_value = 0.0;
};

struct LocalRiesz {
  DofVector representative;  // global free-DOF vector supported in the subdomain
  double dual_norm = 0.0;
};

/// Riesz representative of the residual in H^1_0(subdomain) and its dual norm.
LocalRiesz local_riesz(const DofVector& residual, const Subdomain& sub, const SparseSpdMatrix& stiffness);

/// Factorized principal blocks A_ii, reused across iterations.
class LocalProblems {
 public:
  LocalProblems(const SparseSpdMatrix& stiffness, const DomainDecomposition& dd);

  LocalRiesz riesz(int i, const DofVector& residual) const;
  std::vector<double> dual_norms(const DofVector& residual, int threads) const;

 private:
  const DomainDecomposition* dd_;
  std::vector<SpdFactorization> factors_;
};

/// Galerkin solution on span(basis) + H^1_0(sub). The generating set may be
/// linearly dependent; the semidefinite coupled system is solved consistently.
DofVector solve_coupled(const ReducedBasis& basis, const Subdomain& sub, const SparseSpdMatrix& stiffness,
                        const DofVector& load);

/// Schur complement A_ii - C^T C of the coupled system, C_jl = (A v_j)(dof_l).
DenseMatrix coupled_schur_complement(const ReducedBasis& basis, const Subdomain& sub,
                                     const SparseSpdMatrix& stiffness);

/// Local part x of u_e^(i) - u_tilde = (I - P) E_i x, with P the a-projection
/// onto the reduced space, and the shift |u_e^(i) - u_tilde|_a.
struct CoupledCorrection {
  DofVector local;
  double shift = 0.0;
};

CoupledCorrection coupled_correction(const DenseMatrix& schur, const DofVector& local_residual,
                                     const DofVector& reference_diagonal);

/// Per-subdomain Schur complements kept in sync with a growing basis through
/// rank-one downdates. Falls back to recomputation when the cache would
/// exceed `cache_budget_bytes`.
class CoupledProblems {
 public:
  CoupledProblems(const SparseSpdMatrix& stiffness, const DomainDecomposition& dd,
                  std::size_t cache_budget_bytes = std::size_t{2} << 30);

  bool cached() const { return !schur_.empty(); }
  /// Registers a new basis vector by its image A v.
  void absorb(const DofVector& image);
  CoupledCorrection correction(int i, const DofVector& residual, const ReducedBasis& basis) const;

 private:
  const SparseSpdMatrix* stiffness_;
  const DomainDecomposition* dd_;
  std::vector<DenseMatrix> schur_;
  std::vector<DofVector> diagonals_;
};

struct EnrichmentOptions {
  int threads = 1;
  /// Enrichment is skipped when the stopping value is <= tol_abs.
  double tol_abs = 0.0;
  /// Coupled steps also compute local residual dual norms (for sharpness output).
  bool coupled_dual_norms = true;
};

/// One step of residual based enrichment, factorizing local problems afresh.
std::pair<EnrichmentState, StepReport> step_residual_based(const EnrichmentState& state,
                                                           const DomainDecomposition& dd,
                                                           const SparseSpdMatrix& stiffness, const DofVector& load,
                                                           const EnrichmentOptions& options = {});

/// One step of globally coupled enrichment, assembling all coupled systems afresh.
std::pair<EnrichmentState, StepReport> step_globally_coupled(const EnrichmentState& state,
                                                             const DomainDecomposition& dd,
                                                             const SparseSpdMatrix& stiffness,
                                                             const DofVector& load,
                                                             const EnrichmentOptions& options = {});

/// Iterative enrichment with cached local factorizations and Schur complements.
class OnlineEnrichment {
 public:
  OnlineEnrichment(Algorithm algorithm, const SparseSpdMatrix& stiffness, const DofVector& load,
                   const DomainDecomposition& dd, EnrichmentOptions options = {});
  ~OnlineEnrichment();

  OnlineEnrichment(const OnlineEnrichment&) = delete;
  OnlineEnrichment& operator=(const OnlineEnrichment&) = delete;

  Algorithm algorithm() const { return algorithm_; }
  const EnrichmentState& state() const { return state_; }
  StepReport step();

 private:
  Algorithm algorithm_;
  const SparseSpdMatrix* stiffness_;
  const DofVector* load_;
  const DomainDecomposition* dd_;
  EnrichmentOptions options_;
  EnrichmentState state_;
  LocalProblems local_;
  std::unique_ptr<CoupledProblems> coupled_;
};

}  // namespace locred
