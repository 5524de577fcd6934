#pragma once

#include "locred/decomposition.hpp"
#include "locred/enrichment.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace locred {

/// Relative energy errors below this are numerical noise; such records are
/// excluded from inequality checks.
inline constexpr double kNoiseFloor = 1e-13;

/// One enrichment iteration n -> n+1. Sharpness quotients are oriented as
/// (bound side) / (bounded side), so values >= 1 mean the inequality holds and
/// 1 means it is sharp.
struct IterationRecord {
  int n = 0;
  int selected_k = -1;
  double energy_error = 0.0;       // |u_tilde_n - u|_a
  double next_energy_error = 0.0;  // |u_tilde_{n+1} - u|_a
  double rel_energy_error = 0.0;
  /// 1 - |u_tilde_{n+1} - u|_a / |u_tilde_n - u|_a
  double rate_metric = 0.0;
  /// (|u_tilde_n - u|^2 - |R_n|^2_{O_k'}) / |u_tilde_{n+1} - u|^2
  double sharpness_chungend = 0.0;
  /// |R_n|^2_{O_k'} / mean_i |R_n|^2_{O_i'}
  double sharpness_r1 = 0.0;
  /// c_pu^2 sum_i |R_n|^2_{O_i'} / |R_n|^2_{V'}
  double sharpness_r2 = 0.0;
  bool noise = false;
  std::vector<double> local_dual_norms;
  std::vector<double> shifts;
};

enum class RunStatus { Converged, MaxIterations, Stagnated };

std::string_view to_string(RunStatus status);

struct EnrichmentTrace {
  Algorithm algorithm = Algorithm::ResidualBased;
  std::vector<IterationRecord> records;
  std::optional<TheoryConstants> theory;
  double reference_energy = 0.0;  // |u|_a
  double final_rel_error = 0.0;
  RunStatus status = RunStatus::MaxIterations;
  DofVector final_solution;

  int iterations() const { return static_cast<int>(records.size()); }
};

/// Builds the record for a step from n to n+1. `cpu_sq` enters the r2 quotient
/// only; pass NaN when no bound is available. Quotients with a denominator
/// below 1e-300 are reported as +infinity.
IterationRecord compute_record(int n, const StepReport& report, double energy_error, double next_energy_error,
                               double reference_energy, double cpu_sq);

/// Same, evaluating |u_tilde_{n+1} - u|_a from the post-step state.
IterationRecord compute_record(double previous_error, const EnrichmentState& state, const StepReport& report,
                               const DofVector& reference, const SparseSpdMatrix& stiffness, double cpu_sq);

/// Plain-text column files, one row per record, values as %.17g:
/// residual based runs write errors.dat, convergence.dat and ineq.dat; globally
/// coupled runs write errors_g_c.dat and convergence_g_c.dat.
/// Returns the written paths. Throws std::runtime_error on I/O failure.
std::vector<std::filesystem::path> emit_dat(const EnrichmentTrace& trace, const std::filesystem::path& directory);

/// Parses a file written by emit_dat into rows of values.
std::vector<std::vector<double>> read_dat(const std::filesystem::path& file);

/// 17-significant-digit decimal text; round-trips every double exactly.
std::string format_double(double value);

}  // namespace locred
