#include "locred/enrichment.hpp"

#include "locred/parallel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace locred {

namespace {

// Lowest index among maximal entries.
int argmax_lowest(const std::vector<double>& values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) {
      best = i;
    }
  }
  return best;
}

DofVector gather(const DofVector& global, const Subdomain& sub) {
  DofVector local(sub.size());
  for (int l = 0; l < sub.size(); ++l) {
    local(l) = global(sub.interior_dofs[l]);
  }
  return local;
}

DofVector scatter(const DofVector& local, const Subdomain& sub, Eigen::Index dimension) {
  DofVector global = DofVector::Zero(dimension);
  for (int l = 0; l < sub.size(); ++l) {
    global(sub.interior_dofs[l]) = local(l);
  }
  return global;
}

// The newest basis vector extends the Galerkin solution by (b . v) v because the basis is a-orthonormal.
void accept_newest(EnrichmentState& state, const SparseSpdMatrix& stiffness, const DofVector& load) {
  const DofVector& v = state.basis.vectors().back();
  state.u_tilde += load.dot(v) * v;
  state.residual = load - stiffness.apply(state.u_tilde);
  ++state.iteration;
}

template <class RieszFn>
StepReport residual_step(EnrichmentState& state, const SparseSpdMatrix& stiffness, const DofVector& load, int count,
                         RieszFn&& riesz, const EnrichmentOptions& options) {
  StepReport report;
  report.algorithm = Algorithm::ResidualBased;
  std::vector<LocalRiesz> reps(static_cast<std::size_t>(count));
  parallel_for(count, options.threads, [&](int i) { reps[i] = riesz(i, state.residual); });
  report.indicators.resize(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    report.indicators[i] = reps[i].dual_norm;
  }
  report.dual_norms = report.indicators;
  if (count == 0) {
    return report;
  }
  report.selected_k = argmax_lowest(report.indicators);
  report.stopping_value = report.indicators[report.selected_k];
  if (!(report.stopping_value > options.tol_abs)) {
    report.status = StepStatus::BelowTolerance;
    return report;
  }
  report.enrichment_vector = std::move(reps[report.selected_k].representative);
  if (!state.basis.add(stiffness, report.enrichment_vector)) {
    report.status = StepStatus::Stagnated;
    return report;
  }
  accept_newest(state, stiffness, load);
  report.status = StepStatus::Enriched;
  return report;
}

template <class CorrectionFn, class DualFn>
StepReport coupled_step(EnrichmentState& state, const SparseSpdMatrix& stiffness, const DofVector& load,
                        const DomainDecomposition& dd, CorrectionFn&& correction, DualFn&& dual_norms,
                        const EnrichmentOptions& options, CoupledProblems* cache) {
  StepReport report;
  report.algorithm = Algorithm::GloballyCoupled;
  const int count = dd.count();
  std::vector<CoupledCorrection> corrections(static_cast<std::size_t>(count));
  parallel_for(count, options.threads, [&](int i) { corrections[i] = correction(i, state.residual); });
  report.indicators.resize(corrections.size());
  for (std::size_t i = 0; i < corrections.size(); ++i) {
    report.indicators[i] = corrections[i].shift;
  }
  if (options.coupled_dual_norms) {
    report.dual_norms = dual_norms(state.residual);
  }
  if (count == 0) {
    return report;
  }
  report.selected_k = argmax_lowest(report.indicators);
  report.stopping_value = report.indicators[report.selected_k];
  if (!(report.stopping_value > options.tol_abs)) {
    report.status = StepStatus::BelowTolerance;
    return report;
  }
  // span(V_n, u_e^(k)) = span(V_n, E_k x): enrich with the local function, report u_e^(k).
  const DofVector local_function =
      scatter(corrections[report.selected_k].local, dd.subdomains[report.selected_k], load.size());
  report.enrichment_vector = state.u_tilde + state.basis.orthogonal_complement(local_function);
  if (!state.basis.add(stiffness, local_function)) {
    report.status = StepStatus::Stagnated;
    return report;
  }
  if (cache != nullptr) {
    cache->absorb(state.basis.images().back());
  }
  accept_newest(state, stiffness, load);
  report.status = StepStatus::Enriched;
  return report;
}

DenseMatrix coupling_block(const ReducedBasis& basis, const Subdomain& sub) {
  DenseMatrix coupling(basis.size(), sub.size());
  for (int j = 0; j < basis.size(); ++j) {
    const DofVector& image = basis.images()[j];
    for (int l = 0; l < sub.size(); ++l) {
      coupling(j, l) = image(sub.interior_dofs[l]);
    }
  }
  return coupling;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::ResidualBased:
      return "residual_based";
    case Algorithm::GloballyCoupled:
      return "globally_coupled";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "residual_based") {
    return Algorithm::ResidualBased;
  }
  if (name == "globally_coupled") {
    return Algorithm::GloballyCoupled;
  }
  return std::nullopt;
}

EnrichmentState EnrichmentState::initial(const DofVector& load) {
  EnrichmentState state;
  state.u_tilde = DofVector::Zero(load.size());
  state.residual = load;
  return state;
}

LocalRiesz local_riesz(const DofVector& residual, const Subdomain& sub, const SparseSpdMatrix& stiffness) {
  if (sub.interior_dofs.empty()) {
    throw std::invalid_argument("local_riesz: subdomain has no interior DOFs");
  }
  const SpdFactorization factor(stiffness.principal_submatrix(sub.interior_dofs));
  const DofVector local_residual = gather(residual, sub);
  const DofVector w = factor.solve(local_residual);
  const double squared = local_residual.dot(w);
  if (squared < -1e-14) {
    throw std::logic_error("local_riesz: negative dual norm squared " + std::to_string(squared));
  }
  return {scatter(w, sub, residual.size()), std::sqrt(std::max(0.0, squared))};
}

LocalProblems::LocalProblems(const SparseSpdMatrix& stiffness, const DomainDecomposition& dd) : dd_(&dd) {
  factors_.reserve(dd.subdomains.size());
  for (const Subdomain& sub : dd.subdomains) {
    if (sub.interior_dofs.empty()) {
      throw std::invalid_argument("LocalProblems: subdomain without interior DOFs");
    }
    factors_.emplace_back(stiffness.principal_submatrix(sub.interior_dofs));
  }
}

LocalRiesz LocalProblems::riesz(int i, const DofVector& residual) const {
  const Subdomain& sub = dd_->subdomains[i];
  const DofVector local_residual = gather(residual, sub);
  const DofVector w = factors_[i].solve(local_residual);
  const double squared = local_residual.dot(w);
  if (squared < -1e-14) {
    throw std::logic_error("local Riesz solve produced negative dual norm squared " + std::to_string(squared));
  }
  return {scatter(w, sub, residual.size()), std::sqrt(std::max(0.0, squared))};
}

std::vector<double> LocalProblems::dual_norms(const DofVector& residual, int threads) const {
  std::vector<double> norms(factors_.size());
  parallel_for(static_cast<int>(factors_.size()), threads, [&](int i) {
    const DofVector local_residual = gather(residual, dd_->subdomains[i]);
    const double squared = local_residual.dot(factors_[i].solve(local_residual));
    if (squared < -1e-14) {
      throw std::logic_error("local Riesz solve produced negative dual norm squared " + std::to_string(squared));
    }
    norms[i] = std::sqrt(std::max(0.0, squared));
  });
  return norms;
}

DenseMatrix coupled_schur_complement(const ReducedBasis& basis, const Subdomain& sub,
                                     const SparseSpdMatrix& stiffness) {
  DenseMatrix schur = stiffness.dense_principal_submatrix(sub.interior_dofs);
  if (!basis.empty()) {
    const DenseMatrix coupling = coupling_block(basis, sub);
    schur.noalias() -= coupling.transpose() * coupling;
  }
  return schur;
}

CoupledCorrection coupled_correction(const DenseMatrix& schur, const DofVector& local_residual,
                                     const DofVector& reference_diagonal) {
  CoupledCorrection out;
  out.local = solve_psd_dense(schur, local_residual, reference_diagonal).x;
  out.shift = std::sqrt(std::max(0.0, out.local.dot(local_residual)));
  return out;
}

DofVector solve_coupled(const ReducedBasis& basis, const Subdomain& sub, const SparseSpdMatrix& stiffness,
                        const DofVector& load) {
  if (sub.interior_dofs.empty()) {
    throw std::invalid_argument("solve_coupled: subdomain has no interior DOFs");
  }
  // Block system [I C; C^T A_ii] [c; x] = [V^T b; b_i]; eliminate c = V^T b - C x.
  const DenseMatrix a_ii = stiffness.dense_principal_submatrix(sub.interior_dofs);
  const DenseMatrix coupling = coupling_block(basis, sub);
  DofVector reduced_rhs(basis.size());
  for (int j = 0; j < basis.size(); ++j) {
    reduced_rhs(j) = load.dot(basis.vectors()[j]);
  }
  const DenseMatrix schur = a_ii - coupling.transpose() * coupling;
  const DofVector local_rhs = gather(load, sub) - coupling.transpose() * reduced_rhs;
  const DofVector x = solve_psd_dense(schur, local_rhs, a_ii.diagonal()).x;
  const DofVector c = reduced_rhs - coupling * x;

  DofVector u = scatter(x, sub, load.size());
  for (int j = 0; j < basis.size(); ++j) {
    u += c(j) * basis.vectors()[j];
  }
  return u;
}

CoupledProblems::CoupledProblems(const SparseSpdMatrix& stiffness, const DomainDecomposition& dd,
                                 std::size_t cache_budget_bytes)
    : stiffness_(&stiffness), dd_(&dd) {
  std::size_t bytes = 0;
  for (const Subdomain& sub : dd.subdomains) {
    bytes += static_cast<std::size_t>(sub.size()) * sub.size() * sizeof(double);
  }
  const bool cache = bytes <= cache_budget_bytes;
  for (const Subdomain& sub : dd.subdomains) {
    DenseMatrix block = stiffness.dense_principal_submatrix(sub.interior_dofs);
    diagonals_.push_back(block.diagonal());
    if (cache) {
      schur_.push_back(std::move(block));
    }
  }
}

void CoupledProblems::absorb(const DofVector& image) {
  for (std::size_t i = 0; i < schur_.size(); ++i) {
    const DofVector c = gather(image, dd_->subdomains[i]);
    if (!c.isZero(0.0)) {
      schur_[i].noalias() -= c * c.transpose();
    }
  }
}

CoupledCorrection CoupledProblems::correction(int i, const DofVector& residual, const ReducedBasis& basis) const {
  const Subdomain& sub = dd_->subdomains[i];
  const DofVector local_residual = gather(residual, sub);
  if (cached()) {
    return coupled_correction(schur_[i], local_residual, diagonals_[i]);
  }
  return coupled_correction(coupled_schur_complement(basis, sub, *stiffness_), local_residual, diagonals_[i]);
}

std::pair<EnrichmentState, StepReport> step_residual_based(const EnrichmentState& state,
                                                           const DomainDecomposition& dd,
                                                           const SparseSpdMatrix& stiffness, const DofVector& load,
                                                           const EnrichmentOptions& options) {
  EnrichmentState next = state;
  const LocalProblems local(stiffness, dd);
  StepReport report = residual_step(
      next, stiffness, load, dd.count(), [&](int i, const DofVector& r) { return local.riesz(i, r); }, options);
  return {std::move(next), std::move(report)};
}

std::pair<EnrichmentState, StepReport> step_globally_coupled(const EnrichmentState& state,
                                                             const DomainDecomposition& dd,
                                                             const SparseSpdMatrix& stiffness,
                                                             const DofVector& load,
                                                             const EnrichmentOptions& options) {
  EnrichmentState next = state;
  StepReport report = coupled_step(
      next, stiffness, load, dd,
      [&](int i, const DofVector& r) {
        const Subdomain& sub = dd.subdomains[i];
        const DenseMatrix schur = coupled_schur_complement(state.basis, sub, stiffness);
        const DofVector diagonal = stiffness.dense_principal_submatrix(sub.interior_dofs).diagonal();
        return coupled_correction(schur, gather(r, sub), diagonal);
      },
      [&](const DofVector& r) { return LocalProblems(stiffness, dd).dual_norms(r, options.threads); }, options,
      nullptr);
  return {std::move(next), std::move(report)};
}

OnlineEnrichment::OnlineEnrichment(Algorithm algorithm, const SparseSpdMatrix& stiffness, const DofVector& load,
                                   const DomainDecomposition& dd, EnrichmentOptions options)
    : algorithm_(algorithm),
      stiffness_(&stiffness),
      load_(&load),
      dd_(&dd),
      options_(options),
      state_(EnrichmentState::initial(load)),
      local_(stiffness, dd) {
  if (load.size() != stiffness.dimension()) {
    throw std::invalid_argument("OnlineEnrichment: load and stiffness dimensions differ");
  }
  if (algorithm_ == Algorithm::GloballyCoupled) {
    coupled_ = std::make_unique<CoupledProblems>(stiffness, dd);
  }
}

OnlineEnrichment::~OnlineEnrichment() = default;

StepReport OnlineEnrichment::step() {
  if (algorithm_ == Algorithm::ResidualBased) {
    return residual_step(
        state_, *stiffness_, *load_, dd_->count(), [&](int i, const DofVector& r) { return local_.riesz(i, r); },
        options_);
  }
  return coupled_step(
      state_, *stiffness_, *load_, *dd_,
      [&](int i, const DofVector& r) { return coupled_->correction(i, r, state_.basis); },
      [&](const DofVector& r) { return local_.dual_norms(r, options_.threads); }, options_, coupled_.get());
}

}  // namespace locred
