#include "locred/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace locred {

namespace {

double quotient(double numerator, double denominator) {
  if (std::isnan(numerator) || std::isnan(denominator)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (std::abs(denominator) < 1e-300) {
    return std::numeric_limits<double>::infinity();
  }
  return numerator / denominator;
}

void write_columns(const std::filesystem::path& file, const std::vector<std::vector<double>>& rows) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + file.string() + " for writing");
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) {
        out << ' ';
      }
      out << format_double(row[c]);
    }
    out << '\n';
  }
  out.flush();
  if (!out) {
    throw std::runtime_error("failed writing " + file.string());
  }
}

}  // namespace

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged:
      return "converged";
    case RunStatus::MaxIterations:
      return "max_iterations";
    case RunStatus::Stagnated:
      return "stagnated";
  }
  return "unknown";
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

IterationRecord compute_record(int n, const StepReport& report, double energy_error, double next_energy_error,
                               double reference_energy, double cpu_sq) {
  IterationRecord rec;
  rec.n = n;
  rec.selected_k = report.selected_k;
  rec.energy_error = energy_error;
  rec.next_energy_error = next_energy_error;
  rec.rel_energy_error = reference_energy > 0.0 ? energy_error / reference_energy : 0.0;
  rec.rate_metric = 1.0 - quotient(next_energy_error, energy_error);
  rec.noise = rec.rel_energy_error < kNoiseFloor;
  if (report.algorithm == Algorithm::GloballyCoupled) {
    rec.shifts = report.indicators;
  }
  rec.local_dual_norms = report.dual_norms;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.sharpness_chungend = nan;
  rec.sharpness_r1 = nan;
  rec.sharpness_r2 = nan;
  if (!report.dual_norms.empty() && report.selected_k >= 0) {
    double sum_sq = 0.0;
    for (double d : report.dual_norms) {
      sum_sq += d * d;
    }
    const double selected_sq = report.dual_norms[report.selected_k] * report.dual_norms[report.selected_k];
    const double error_sq = energy_error * energy_error;
    rec.sharpness_chungend = quotient(error_sq - selected_sq, next_energy_error * next_energy_error);
    rec.sharpness_r1 = quotient(selected_sq, sum_sq / static_cast<double>(report.dual_norms.size()));
    // |R_n|_{V'} equals the energy error of u_tilde_n.
    rec.sharpness_r2 = quotient(cpu_sq * sum_sq, error_sq);
  }
  return rec;
}

IterationRecord compute_record(double previous_error, const EnrichmentState& state, const StepReport& report,
                               const DofVector& reference, const SparseSpdMatrix& stiffness, double cpu_sq) {
  const double next_error = energy_norm(stiffness, reference - state.u_tilde);
  return compute_record(state.iteration - 1, report, previous_error, next_error, energy_norm(stiffness, reference),
                        cpu_sq);
}

std::vector<std::filesystem::path> emit_dat(const EnrichmentTrace& trace, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + directory.string() + ": " + ec.message());
  }
  std::vector<std::vector<double>> errors;
  std::vector<std::vector<double>> convergence;
  std::vector<std::vector<double>> ineq;
  for (const IterationRecord& rec : trace.records) {
    errors.push_back({rec.rel_energy_error});
    convergence.push_back({rec.rate_metric});
    ineq.push_back({rec.sharpness_chungend, rec.sharpness_r1, rec.sharpness_r2});
  }
  std::vector<std::filesystem::path> written;
  if (trace.algorithm == Algorithm::ResidualBased) {
    written = {directory / "errors.dat", directory / "convergence.dat", directory / "ineq.dat"};
    write_columns(written[0], errors);
    write_columns(written[1], convergence);
    write_columns(written[2], ineq);
  } else {
    written = {directory / "errors_g_c.dat", directory / "convergence_g_c.dat"};
    write_columns(written[0], errors);
    write_columns(written[1], convergence);
  }
  return written;
}

std::vector<std::vector<double>> read_dat(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("cannot open " + file.string());
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') {
      continue;
    }
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      char* end = nullptr;
      const double value = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0') {
        throw std::runtime_error("malformed value '" + token + "' in " + file.string());
      }
      row.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace locred
