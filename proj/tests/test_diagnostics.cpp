#include "support.hpp"

#include "locred/diagnostics.hpp"
#include "locred/run.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

using namespace locred;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("locred_diag_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("record of the first iteration") {
  const test::Instance inst(8, 0.5, 0.25, 7, 1e3);
  const EnrichmentState start = EnrichmentState::initial(inst.b);
  const auto [next, report] = step_residual_based(start, inst.dd, inst.a, inst.b);
  const double u_norm = energy_norm(inst.a, inst.u);
  const IterationRecord rec = compute_record(u_norm, next, report, inst.u, inst.a, 10.0);
  CHECK(rec.n == 0);
  CHECK(rec.rel_energy_error == 1.0);
  CHECK(rec.selected_k == report.selected_k);
  CHECK(rec.next_energy_error == energy_norm(inst.a, inst.u - next.u_tilde));
  CHECK(rec.rate_metric == doctest::Approx(1.0 - rec.next_energy_error / u_norm).epsilon(1e-14));
  CHECK(rec.local_dual_norms == report.dual_norms);
  CHECK(rec.shifts.empty());
  CHECK_FALSE(rec.noise);
}

TEST_CASE("single subdomain makes the selection quotient exactly one") {
  const test::Instance inst(6, 1.0, 1.0, 9);
  const auto [next, report] = step_residual_based(EnrichmentState::initial(inst.b), inst.dd, inst.a, inst.b);
  const IterationRecord rec =
      compute_record(energy_norm(inst.a, inst.u), next, report, inst.u, inst.a, std::nan(""));
  CHECK(rec.sharpness_r1 == 1.0);
  CHECK(std::isnan(rec.sharpness_r2));
}

TEST_CASE("sharpness quotients against dense recomputation") {
  const test::Instance inst(8, 0.5, 0.25, 13, 1e4);
  REQUIRE(inst.dd.count() == 9);
  const DenseMatrix a = test::dense(inst.a);
  const DofVector u = test::gauss_solve(a, inst.b);
  const double cpu_sq = 123.0;
  EnrichmentState state = EnrichmentState::initial(inst.b);
  for (int n = 0; n < 10; ++n) {
    const double error = test::dense_energy(a, u - state.u_tilde);
    auto [next, report] = step_residual_based(state, inst.dd, inst.a, inst.b);
    const IterationRecord rec = compute_record(error, next, report, inst.u, inst.a, cpu_sq);

    std::vector<double> dual_sq;
    for (const Subdomain& sub : inst.dd.subdomains) {
      const DenseMatrix e = test::indicator_columns(a.rows(), sub.interior_dofs);
      const DofVector r = e.transpose() * (inst.b - a * state.u_tilde);
      dual_sq.push_back(r.dot(test::gauss_solve(e.transpose() * a * e, r)));
    }
    const auto k = static_cast<std::size_t>(std::max_element(dual_sq.begin(), dual_sq.end()) - dual_sq.begin());
    double sum = 0.0;
    for (double d : dual_sq) {
      sum += d;
    }
    const double next_error = test::dense_energy(a, u - next.u_tilde);
    const double chungend = (error * error - dual_sq[k]) / (next_error * next_error);
    CHECK(rec.sharpness_chungend == doctest::Approx(chungend).epsilon(1e-8));
    CHECK(rec.sharpness_r1 == doctest::Approx(dual_sq[k] / (sum / 9.0)).epsilon(1e-8));
    CHECK(rec.sharpness_r2 == doctest::Approx(cpu_sq * sum / (error * error)).epsilon(1e-8));
    CHECK(rec.sharpness_chungend >= 1.0 - 1e-8);
    CHECK(rec.sharpness_r1 >= 1.0 - 1e-12);
    state = std::move(next);
  }
}

TEST_CASE("quotient guards") {
  StepReport report;
  report.algorithm = Algorithm::GloballyCoupled;
  report.selected_k = 1;
  report.indicators = {0.5, 2.0};
  report.dual_norms = {1.0, 2.0};
  const IterationRecord rec = compute_record(3, report, 3.0, 0.0, 6.0, 4.0);
  CHECK(rec.rel_energy_error == 0.5);
  CHECK(rec.rate_metric == 1.0);
  CHECK(rec.sharpness_chungend == std::numeric_limits<double>::infinity());
  CHECK(rec.sharpness_r1 == doctest::Approx(4.0 / 2.5));
  CHECK(rec.sharpness_r2 == doctest::Approx(4.0 * 5.0 / 9.0));
  CHECK(rec.shifts == report.indicators);

  report.dual_norms.clear();
  const IterationRecord bare = compute_record(0, report, 1e-14, 1e-15, 1.0, 4.0);
  CHECK(bare.noise);
  CHECK(std::isnan(bare.sharpness_chungend));
  CHECK(std::isnan(bare.sharpness_r1));
  CHECK(std::isnan(bare.sharpness_r2));
}

TEST_CASE("number formatting round-trips") {
  test::Gen gen(77);
  for (int k = 0; k < 500; ++k) {
    const double v = std::ldexp(gen.uniform(-1.0, 1.0), gen.integer(-1000, 1000));
    CHECK(same_bits(std::strtod(format_double(v).c_str(), nullptr), v));
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(200.0) == "200");
}

TEST_CASE("dat files") {
  const int n = 10;
  const TriMesh mesh(n);
  const CoefficientField kappa(n, test::Gen(4).log_field(n, 1.0, 1e4));
  const SourceField f = test::signed_source(n, 5);
  const DomainDecomposition dd = build_decomposition(mesh, 0.4, 0.2);

  SUBCASE("single iteration") {
    const EnrichmentTrace trace = run(Algorithm::ResidualBased, mesh, kappa, f, dd, {0.0, 0.0, 1});
    const fs::path dir = scratch("single");
    const auto files = emit_dat(trace, dir);
    REQUIRE(files.size() == 3);
    CHECK(files[0].filename() == "errors.dat");
    CHECK(slurp(dir / "errors.dat") == "1\n");
    const auto ineq = read_dat(dir / "ineq.dat");
    REQUIRE(ineq.size() == 1);
    CHECK(ineq[0].size() == 3);
    fs::remove_all(dir);
  }
  SUBCASE("round trip and determinism") {
    for (Algorithm algorithm : {Algorithm::ResidualBased, Algorithm::GloballyCoupled}) {
      const EnrichmentTrace trace = run(algorithm, mesh, kappa, f, dd, {0.0, 0.0, 25});
      const EnrichmentTrace again = run(algorithm, mesh, kappa, f, dd, {0.0, 0.0, 25});
      const fs::path first = scratch("first");
      const fs::path second = scratch("second");
      const auto files = emit_dat(trace, first);
      emit_dat(again, second);
      CHECK(files.size() == (algorithm == Algorithm::ResidualBased ? 3u : 2u));
      for (const fs::path& file : files) {
        const std::string text = slurp(file);
        CHECK(text == slurp(second / file.filename()));
        CHECK(text.find('\r') == std::string::npos);
        CHECK(text.find('#') == std::string::npos);
      }
      const auto errors = read_dat(files[0]);
      const auto rates = read_dat(files[1]);
      REQUIRE(errors.size() == trace.records.size());
      for (std::size_t k = 0; k < errors.size(); ++k) {
        CHECK(same_bits(errors[k][0], trace.records[k].rel_energy_error));
        CHECK(same_bits(rates[k][0], trace.records[k].rate_metric));
      }
      if (algorithm == Algorithm::ResidualBased) {
        const auto ineq = read_dat(first / "ineq.dat");
        for (std::size_t k = 0; k < ineq.size(); ++k) {
          CHECK(same_bits(ineq[k][0], trace.records[k].sharpness_chungend));
          CHECK(same_bits(ineq[k][1], trace.records[k].sharpness_r1));
          CHECK(same_bits(ineq[k][2], trace.records[k].sharpness_r2));
        }
      } else {
        CHECK(files[0].filename() == "errors_g_c.dat");
        CHECK(files[1].filename() == "convergence_g_c.dat");
      }
      fs::remove_all(first);
      fs::remove_all(second);
    }
  }
  SUBCASE("errors carry the path") {
    const EnrichmentTrace trace = run(Algorithm::ResidualBased, mesh, kappa, f, dd, {0.0, 0.0, 1});
    const fs::path blocker = scratch("blocker");
    std::ofstream(blocker) << "x";
    try {
      emit_dat(trace, blocker / "sub");
      FAIL("expected an I/O error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("blocker") != std::string::npos);
    }
    fs::remove(blocker);
    CHECK_THROWS_AS(read_dat(blocker), std::runtime_error);
  }
}

TEST_CASE("read_dat rejects malformed values and skips comments") {
  const fs::path file = fs::temp_directory_path() / "locred_diag_malformed.dat";
  std::ofstream(file) << "# header\n1 2\n";
  CHECK(read_dat(file) == std::vector<std::vector<double>>{{1.0, 2.0}});
  std::ofstream(file) << "1 x2\n";
  CHECK_THROWS_AS(read_dat(file), std::runtime_error);
  fs::remove(file);
}

TEST_CASE("error decay along a trace") {
  const int n = 10;
  const TriMesh mesh(n);
  const CoefficientField kappa(n, test::Gen(14).log_field(n, 1.0, 1e3));
  const DomainDecomposition dd = build_decomposition(mesh, 0.4, 0.2);
  for (Algorithm algorithm : {Algorithm::ResidualBased, Algorithm::GloballyCoupled}) {
    const EnrichmentTrace trace = run(algorithm, mesh, kappa, test::signed_source(n, 15), dd, {0.0, 1e-9, 300});
    CHECK(trace.status == RunStatus::Converged);
    REQUIRE(trace.theory.has_value());
    for (std::size_t k = 0; k < trace.records.size(); ++k) {
      const IterationRecord& rec = trace.records[k];
      if (rec.noise) {
        continue;
      }
      CHECK(rec.rate_metric == doctest::Approx(1.0 - rec.next_energy_error / rec.energy_error).epsilon(1e-12));
      CHECK(rec.next_energy_error <= rec.energy_error * (1.0 + 1e-10));
      CHECK(rec.rate_metric >= trace.theory->one_minus_c);
      CHECK(rec.sharpness_r1 >= 1.0 - 1e-12);
      CHECK(rec.sharpness_r2 >= 1.0 - 1e-12);
      if (algorithm == Algorithm::ResidualBased) {
        CHECK(rec.sharpness_chungend >= 1.0 - 1e-8);
      } else {
        CHECK(rec.shifts.size() == static_cast<std::size_t>(dd.count()));
      }
    }
  }
}
