#include "locred/experiment.hpp"

#include "locred/errors.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace locred {

namespace {

struct CellRect {
  int x0, y0, x1, y1;
};

int grid_line(double coordinate, int n_squares) {
  const double scaled = coordinate * n_squares;
  const double rounded = std::round(scaled);
  if (!std::isfinite(scaled) || std::abs(scaled - rounded) > 1e-9 * std::max(1.0, std::abs(scaled))) {
    std::ostringstream msg;
    msg << "rectangle edge " << coordinate << " is not on the mesh grid (pitch 1/" << n_squares << ")";
    throw ConfigError(msg.str());
  }
  return static_cast<int>(rounded);
}

CellRect check_rect(const Rect& r, int n_squares, bool positive) {
  const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(r.x0) || !in_unit(r.x1) || !in_unit(r.y0) || !in_unit(r.y1) || !(r.x0 < r.x1) || !(r.y0 < r.y1)) {
    std::ostringstream msg;
    msg << "rectangle [" << r.x0 << ", " << r.x1 << "] x [" << r.y0 << ", " << r.y1
        << "] must be non-empty and lie within the unit square";
    throw ConfigError(msg.str());
  }
  if (!std::isfinite(r.value) || (positive && !(r.value > 0.0))) {
    throw ConfigError("rectangle value " + format_double(r.value) +
                      (positive ? " must be positive and finite" : " must be finite"));
  }
  return {grid_line(r.x0, n_squares), grid_line(r.y0, n_squares), grid_line(r.x1, n_squares),
          grid_line(r.y1, n_squares)};
}

std::vector<double> paint(const FieldSpec& spec, int n_squares, bool positive) {
  if (!std::isfinite(spec.background) || (positive && !(spec.background > 0.0))) {
    throw ConfigError("field background " + format_double(spec.background) + " is not admissible");
  }
  std::vector<double> values(static_cast<std::size_t>(n_squares) * n_squares, spec.background);
  for (const Rect& r : spec.rects) {
    const CellRect cells = check_rect(r, n_squares, positive);
    for (int iy = cells.y0; iy < cells.y1; ++iy) {
      for (int ix = cells.x0; ix < cells.x1; ++ix) {
        values[static_cast<std::size_t>(iy) * n_squares + ix] = r.value;
      }
    }
  }
  return values;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') {
    throw ConfigError("value for '" + std::string(key) + "' is not a number: '" + s + "'");
  }
  return value;
}

int parse_int(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  char* end = nullptr;
  const long value = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || value < std::numeric_limits<int>::min() ||
      value > std::numeric_limits<int>::max()) {
    throw ConfigError("value for '" + std::string(key) + "' is not an integer: '" + s + "'");
  }
  return static_cast<int>(value);
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") {
    return true;
  }
  if (s == "false" || s == "0" || s == "no") {
    return false;
  }
  throw ConfigError("value for '" + std::string(key) + "' is not a boolean: '" + s + "'");
}

Rect parse_rect(std::string_view key, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string token;
  std::vector<double> values;
  while (in >> token) {
    values.push_back(parse_double(key, token));
  }
  if (values.size() != 5) {
    throw ConfigError("'" + std::string(key) + "' expects 'x0 y0 x1 y1 value', got '" + trim(text) + "'");
  }
  return {values[0], values[1], values[2], values[3], values[4]};
}

std::string_view choice_name(AlgorithmChoice choice) {
  switch (choice) {
    case AlgorithmChoice::ResidualBased:
      return "residual_based";
    case AlgorithmChoice::GloballyCoupled:
      return "globally_coupled";
    case AlgorithmChoice::Both:
      return "both";
  }
  return "both";
}

void format_rects(std::ostringstream& out, std::string_view key, const FieldSpec& spec) {
  if (spec.rects.empty()) {
    out << key << " = none\n";
  }
  for (const Rect& r : spec.rects) {
    out << key << " = " << format_double(r.x0) << ' ' << format_double(r.y0) << ' ' << format_double(r.x1) << ' '
        << format_double(r.y1) << ' ' << format_double(r.value) << '\n';
  }
}

}  // namespace

FieldSpec default_kappa_spec() {
  FieldSpec spec;
  spec.background = 1.0;
  spec.rects.push_back({0.06, 0.24, 0.94, 0.28, 1e5});
  spec.rects.push_back({0.06, 0.48, 0.94, 0.52, 1e5});
  spec.rects.push_back({0.06, 0.72, 0.94, 0.76, 1e5});
  return spec;
}

FieldSpec default_source_spec() {
  FieldSpec spec;
  spec.background = 0.0;
  spec.rects.push_back({0.1, 0.1, 0.2, 0.2, 1e5});
  spec.rects.push_back({0.7, 0.7, 0.8, 0.8, -1e5});
  return spec;
}

CoefficientField generate_kappa(const FieldSpec& spec, const TriMesh& mesh) {
  return CoefficientField(mesh.n_squares(), paint(spec, mesh.n_squares(), true));
}

SourceField generate_f(const FieldSpec& spec, const TriMesh& mesh) {
  return SourceField(mesh.n_squares(), paint(spec, mesh.n_squares(), false));
}

std::vector<Algorithm> ExperimentConfig::algorithms() const {
  switch (algorithm) {
    case AlgorithmChoice::ResidualBased:
      return {Algorithm::ResidualBased};
    case AlgorithmChoice::GloballyCoupled:
      return {Algorithm::GloballyCoupled};
    case AlgorithmChoice::Both:
      break;
  }
  return {Algorithm::ResidualBased, Algorithm::GloballyCoupled};
}

void validate(const ExperimentConfig& config) {
  if (config.n_squares < 1) {
    throw ConfigError("n_squares must be at least 1");
  }
  check_decomposition_geometry(config.n_squares, config.subdomain_size, config.subdomain_step);
  (void)paint(config.kappa, config.n_squares, true);
  (void)paint(config.source, config.n_squares, false);
  if (config.stopping.max_iter < 0) {
    throw ConfigError("max_iter must be non-negative");
  }
  if (!(config.stopping.tol_abs >= 0.0) || !(config.stopping.tol_rel >= 0.0)) {
    throw ConfigError("tolerances must be non-negative");
  }
  if (!(config.c_f > 0.0) || !std::isfinite(config.c_f)) {
    throw ConfigError("c_f must be positive");
  }
  if (config.threads < 1) {
    throw ConfigError("threads must be at least 1");
  }
}

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (key == "n_squares") {
    config.n_squares = parse_int(key, v);
  } else if (key == "subdomain_size") {
    config.subdomain_size = parse_double(key, v);
  } else if (key == "subdomain_step") {
    config.subdomain_step = parse_double(key, v);
  } else if (key == "algorithm") {
    if (v == "both") {
      config.algorithm = AlgorithmChoice::Both;
    } else if (const auto a = parse_algorithm(v)) {
      config.algorithm =
          *a == Algorithm::ResidualBased ? AlgorithmChoice::ResidualBased : AlgorithmChoice::GloballyCoupled;
    } else {
      throw ConfigError("unknown algorithm '" + v + "' (residual_based, globally_coupled, both)");
    }
  } else if (key == "kappa_background") {
    config.kappa.background = parse_double(key, v);
  } else if (key == "kappa_rect") {
    if (v != "none") {
      config.kappa.rects.push_back(parse_rect(key, v));
    }
  } else if (key == "f_background") {
    config.source.background = parse_double(key, v);
  } else if (key == "f_rect") {
    if (v != "none") {
      config.source.rects.push_back(parse_rect(key, v));
    }
  } else if (key == "tol_abs") {
    config.stopping.tol_abs = parse_double(key, v);
  } else if (key == "tol_rel") {
    config.stopping.tol_rel = parse_double(key, v);
  } else if (key == "max_iter") {
    config.stopping.max_iter = parse_int(key, v);
  } else if (key == "c_f") {
    config.c_f = parse_double(key, v);
  } else if (key == "coupled_dual_norms") {
    config.coupled_dual_norms = parse_bool(key, v);
  } else if (key == "output_dir") {
    config.output_dir = v;
  } else if (key == "threads") {
    config.threads = parse_int(key, v);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  bool kappa_rects_seen = false;
  bool f_rects_seen = false;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string content = trim(line.substr(0, line.find('#')));
    if (content.empty()) {
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_number) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.starts_with("result.")) {
      continue;
    }
    if (key == "kappa_rect" && !kappa_rects_seen) {
      base.kappa.rects.clear();
      kappa_rects_seen = true;
    }
    if (key == "f_rect" && !f_rects_seen) {
      base.source.rects.clear();
      f_rects_seen = true;
    }
    try {
      apply_setting(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& file, ExperimentConfig base) {
  std::ifstream in(file);
  if (!in) {
    throw ConfigError("cannot read config file " + file.string());
  }
  try {
    return parse_config(in, std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

std::string format_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "n_squares = " << config.n_squares << '\n';
  out << "subdomain_size = " << format_double(config.subdomain_size) << '\n';
  out << "subdomain_step = " << format_double(config.subdomain_step) << '\n';
  out << "algorithm = " << choice_name(config.algorithm) << '\n';
  out << "kappa_background = " << format_double(config.kappa.background) << '\n';
  format_rects(out, "kappa_rect", config.kappa);
  out << "f_background = " << format_double(config.source.background) << '\n';
  format_rects(out, "f_rect", config.source);
  out << "tol_abs = " << format_double(config.stopping.tol_abs) << '\n';
  out << "tol_rel = " << format_double(config.stopping.tol_rel) << '\n';
  out << "max_iter = " << config.stopping.max_iter << '\n';
  out << "c_f = " << format_double(config.c_f) << '\n';
  out << "coupled_dual_norms = " << (config.coupled_dual_norms ? "true" : "false") << '\n';
  return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();

  ExperimentResult result;
  result.config = config;
  const TriMesh mesh(config.n_squares);
  const CoefficientField kappa = generate_kappa(config.kappa, mesh);
  const SourceField f = generate_f(config.source, mesh);
  const DomainDecomposition dd = build_decomposition(mesh, config.subdomain_size, config.subdomain_step);
  result.n_dofs = mesh.free_count();
  result.n_subdomains = dd.count();
  result.max_cover = dd.max_cover;
  result.theory = try_theory_constants(mesh, kappa, dd, config.c_f);

  const DiscreteProblem problem = DiscreteProblem::assemble(mesh, kappa, f);
  RunOptions options;
  options.threads = config.threads;
  options.coupled_dual_norms = config.coupled_dual_norms;
  options.c_f = config.c_f;
  for (Algorithm algorithm : config.algorithms()) {
    result.traces.push_back(run(algorithm, problem, dd, result.theory, config.stopping, options));
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::string format_summary(const ExperimentResult& result) {
  std::ostringstream out;
  out << "# resolved configuration\n" << format_config(result.config) << "# results\n";
  out << "result.free_dofs = " << result.n_dofs << '\n';
  out << "result.n_subdomains = " << result.n_subdomains << '\n';
  out << "result.max_cover = " << result.max_cover << '\n';
  if (result.theory) {
    out << "result.contrast = " << format_double(result.theory->contrast) << '\n';
    out << "result.max_grad_sq = " << format_double(result.theory->max_grad_sq) << '\n';
    out << "result.cpu_sq_bound = " << format_double(result.theory->cpu_sq_bound) << '\n';
    out << "result.c = " << format_double(result.theory->c) << '\n';
    out << "result.one_minus_c = " << format_double(result.theory->one_minus_c) << '\n';
  } else {
    out << "result.cpu_sq_bound = unavailable\n";
  }
  for (const EnrichmentTrace& trace : result.traces) {
    const std::string prefix = "result." + std::string(to_string(trace.algorithm)) + ".";
    out << prefix << "status = " << to_string(trace.status) << '\n';
    out << prefix << "iterations = " << trace.iterations() << '\n';
    out << prefix << "final_rel_error = " << format_double(trace.final_rel_error) << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result,
                                                 const std::filesystem::path& directory) {
  std::vector<std::filesystem::path> written;
  for (const EnrichmentTrace& trace : result.traces) {
    const auto files = emit_dat(trace, directory);
    written.insert(written.end(), files.begin(), files.end());
  }
  const auto summary = directory / "summary.txt";
  std::ofstream out(summary, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + summary.string() + " for writing");
  }
  out << format_summary(result);
  out.flush();
  if (!out) {
    throw std::runtime_error("failed writing " + summary.string());
  }
  written.push_back(summary);

  const auto timing = directory / "timing.txt";
  std::ofstream time_out(timing, std::ios::binary | std::ios::trunc);
  time_out << "wall_seconds = " << format_double(result.wall_seconds) << '\n';
  time_out.flush();
  if (!time_out) {
    throw std::runtime_error("failed writing " + timing.string());
  }
  written.push_back(timing);
  return written;
}

int exit_code(const ExperimentResult& result) {
  int code = kExitConverged;
  for (const EnrichmentTrace& trace : result.traces) {
    if (trace.status == RunStatus::Stagnated) {
      return kExitStagnated;
    }
    if (trace.status == RunStatus::MaxIterations) {
      code = kExitMaxIterations;
    }
  }
  return code;
}

}  // namespace locred
