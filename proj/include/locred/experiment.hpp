#pragma once

#include "locred/decomposition.hpp"
#include "locred/diagnostics.hpp"
#include "locred/fields.hpp"
#include "locred/mesh.hpp"
#include "locred/run.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace locred {

/// Axis-aligned rectangle [x0, x1] x [y0, y1] carrying a field value.
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  double value = 0.0;
};

/// Background value plus rectangles painted in order (later ones win).
struct FieldSpec {
  double background = 0.0;
  std::vector<Rect> rects;
};

/// Background 1 with three horizontal channels of conductivity 1e5 and height
/// 0.04 spanning x in [0.06, 0.94]. Aligned for any n_squares divisible by 50.
FieldSpec default_kappa_spec();
/// Zero background, +1e5 on [0.1, 0.2]^2 and -1e5 on [0.7, 0.8]^2.
FieldSpec default_source_spec();

/// Throws ConfigError for rectangles outside the unit square, off the mesh grid,
/// or (for kappa) non-positive values.
CoefficientField generate_kappa(const FieldSpec& spec, const TriMesh& mesh);
SourceField generate_f(const FieldSpec& spec, const TriMesh& mesh);

enum class AlgorithmChoice { ResidualBased, GloballyCoupled, Both };

struct ExperimentConfig {
  int n_squares = 50;
  double subdomain_size = 0.2;
  double subdomain_step = 0.1;
  AlgorithmChoice algorithm = AlgorithmChoice::Both;
  FieldSpec kappa = default_kappa_spec();
  FieldSpec source = default_source_spec();
  StoppingRule stopping{0.0, 1e-9, 600};
  double c_f = default_friedrichs_constant();
  bool coupled_dual_norms = true;
  /// Run location and parallelism; not part of the experiment definition.
  std::string output_dir;
  int threads = 1;

  std::vector<Algorithm> algorithms() const;
};

/// Checks every field against the preconditions of the modules it feeds.
/// Throws ConfigError.
void validate(const ExperimentConfig& config);

/// Sets one key. Rectangle keys append; callers clear the list first when a
/// file starts redefining it. Throws ConfigError for unknown keys or bad values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Reads `key = value` lines ('#' comments). The first kappa_rect / f_rect line
/// replaces the inherited rectangle list; `kappa_rect = none` clears it. Keys
/// starting with "result." are ignored so summaries can be fed back in.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& file, ExperimentConfig base = {});

/// Resolved experiment definition in config syntax (excludes output_dir and threads).
std::string format_config(const ExperimentConfig& config);

struct ExperimentResult {
  ExperimentConfig config;
  int n_dofs = 0;
  int n_subdomains = 0;
  int max_cover = 0;
  std::optional<TheoryConstants> theory;
  std::vector<EnrichmentTrace> traces;
  double wall_seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Deterministic run summary: resolved config followed by `result.*` keys.
std::string format_summary(const ExperimentResult& result);

/// Writes the .dat files of every trace, summary.txt and timing.txt (wall
/// time, kept apart so the other files are reproducible); returns the paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result,
                                                 const std::filesystem::path& directory);

enum ExitCode : int {
  kExitConverged = 0,
  kExitFailure = 1,
  kExitMaxIterations = 2,
  kExitStagnated = 3,
  kExitConfigError = 4,
  kExitSolverError = 5,
};

int exit_code(const ExperimentResult& result);

}  // namespace locred
