// Command line driver: runs the configured enrichment experiment(s), writes the
// .dat convergence files and summary.txt.

#include "locred/errors.hpp"
#include "locred/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr const char* kDefaultOutputDir = "locred_output";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online enrichment for localized reduced basis approximation of the 2D stationary heat equation"};
  app.footer(
      "Exit codes: 0 converged, 2 max_iter reached without convergence, 3 stagnation,\n"
      "            4 configuration error, 5 solver error, 1 other failure.\n"
      "Output directory: --output-dir, then output_dir in the config file, then $LOCRED_OUTPUT_DIR,\n"
      "then ./" +
      std::string(kDefaultOutputDir) + ".");

  std::string config_path;
  std::optional<std::string> algorithm;
  std::optional<int> n_squares;
  std::optional<int> max_iter;
  std::optional<double> tol_rel;
  std::optional<double> tol_abs;
  std::optional<std::string> output_dir;
  std::optional<int> threads;
  app.add_option("--config", config_path, "Config file with key = value lines")->check(CLI::ExistingFile);
  app.add_option("--algorithm", algorithm, "residual_based, globally_coupled or both");
  app.add_option("--n-squares", n_squares, "Squares per side of the mesh");
  app.add_option("--max-iter", max_iter, "Maximum number of enrichment iterations");
  app.add_option("--tol-rel", tol_rel, "Stop when the relative energy error is at most this");
  app.add_option("--tol-abs", tol_abs, "Stop when the largest local indicator is at most this");
  app.add_option("--output-dir", output_dir, "Directory for .dat files and summary.txt");
  app.add_option("--threads", threads, "Worker threads for per-subdomain solves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return locred::kExitConfigError;
  }

  locred::ExperimentConfig config;
  try {
    if (!config_path.empty()) {
      config = locred::load_config(config_path, config);
    }
    if (algorithm) {
      locred::apply_setting(config, "algorithm", *algorithm);
    }
    if (n_squares) {
      config.n_squares = *n_squares;
    }
    if (max_iter) {
      config.stopping.max_iter = *max_iter;
    }
    if (tol_rel) {
      config.stopping.tol_rel = *tol_rel;
    }
    if (tol_abs) {
      config.stopping.tol_abs = *tol_abs;
    }
    if (threads) {
      config.threads = *threads;
    }
    if (output_dir) {
      config.output_dir = *output_dir;
    }
    if (config.output_dir.empty()) {
      const char* env = std::getenv("LOCRED_OUTPUT_DIR");
      config.output_dir = env != nullptr && *env != '\0' ? env : kDefaultOutputDir;
    }
    locred::validate(config);
  } catch (const locred::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return locred::kExitConfigError;
  }

  try {
    const locred::ExperimentResult result = locred::run_experiment(config);
    locred::write_outputs(result, config.output_dir);
    std::cout << locred::format_summary(result);
    std::cout << "# wall time: " << result.wall_seconds << " s\n";
    std::cout << "# outputs written to " << config.output_dir << '\n';
    return locred::exit_code(result);
  } catch (const locred::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return locred::kExitConfigError;
  } catch (const locred::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return locred::kExitSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return locred::kExitFailure;
  }
}
