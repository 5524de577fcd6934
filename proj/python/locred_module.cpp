#include "locred/decomposition.hpp"
#include "locred/diagnostics.hpp"
#include "locred/enrichment.hpp"
#include "locred/errors.hpp"
#include "locred/experiment.hpp"
#include "locred/fem.hpp"
#include "locred/fields.hpp"
#include "locred/mesh.hpp"
#include "locred/run.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace locred;

namespace {

Eigen::MatrixXd node_array(const TriMesh& mesh) {
  Eigen::MatrixXd out(mesh.node_count(), 2);
  for (int i = 0; i < mesh.node_count(); ++i) {
    out(i, 0) = mesh.nodes()[i].x;
    out(i, 1) = mesh.nodes()[i].y;
  }
  return out;
}

Eigen::MatrixXi triangle_array(const TriMesh& mesh) {
  Eigen::MatrixXi out(mesh.triangle_count(), 3);
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    for (int j = 0; j < 3; ++j) {
      out(t, j) = mesh.triangles()[t][j];
    }
  }
  return out;
}

std::vector<int> free_nodes(const TriMesh& mesh) {
  std::vector<int> out(mesh.free_count());
  for (int d = 0; d < mesh.free_count(); ++d) {
    out[d] = mesh.node_of_free(d);
  }
  return out;
}

py::dict record_dict(const IterationRecord& r) {
  py::dict d;
  d["n"] = r.n;
  d["selected_k"] = r.selected_k;
  d["energy_error"] = r.energy_error;
  d["next_energy_error"] = r.next_energy_error;
  d["rel_energy_error"] = r.rel_energy_error;
  d["rate_metric"] = r.rate_metric;
  d["sharpness_chungend"] = r.sharpness_chungend;
  d["sharpness_r1"] = r.sharpness_r1;
  d["sharpness_r2"] = r.sharpness_r2;
  d["noise"] = r.noise;
  return d;
}

ExperimentConfig config_from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace

PYBIND11_MODULE(locred, m) {
  m.doc() = "Online enrichment of localized reduced bases for 2D heat conduction";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<PartitionError>(m, "PartitionError", PyExc_RuntimeError);

  py::enum_<Algorithm>(m, "Algorithm")
      .value("residual_based", Algorithm::ResidualBased)
      .value("globally_coupled", Algorithm::GloballyCoupled);
  py::enum_<RunStatus>(m, "RunStatus")
      .value("converged", RunStatus::Converged)
      .value("max_iterations", RunStatus::MaxIterations)
      .value("stagnated", RunStatus::Stagnated);

  py::class_<TriMesh>(m, "TriMesh")
      .def(py::init<int>(), py::arg("n_squares"))
      .def_property_readonly("n_squares", &TriMesh::n_squares)
      .def_property_readonly("pitch", &TriMesh::pitch)
      .def_property_readonly("node_count", &TriMesh::node_count)
      .def_property_readonly("triangle_count", &TriMesh::triangle_count)
      .def_property_readonly("free_count", &TriMesh::free_count)
      .def_property_readonly("nodes", &node_array)
      .def_property_readonly("triangles", &triangle_array)
      .def_property_readonly("free_nodes", &free_nodes)
      .def("is_boundary", &TriMesh::is_boundary, py::arg("node"));

  py::class_<CoefficientField>(m, "CoefficientField")
      .def(py::init<int, std::vector<double>>(), py::arg("n_squares"), py::arg("values"))
      .def_static("constant", &CoefficientField::constant, py::arg("n_squares"), py::arg("value"))
      .def_property_readonly("values", &CoefficientField::values)
      .def_property_readonly("contrast", &CoefficientField::contrast);
  py::class_<SourceField>(m, "SourceField")
      .def(py::init<int, std::vector<double>>(), py::arg("n_squares"), py::arg("values"))
      .def_static("constant", &SourceField::constant, py::arg("n_squares"), py::arg("value"))
      .def_property_readonly("values", &SourceField::values);

  m.def(
      "assemble_stiffness",
      [](const TriMesh& mesh, const CoefficientField& kappa) { return assemble_stiffness(mesh, kappa).storage(); },
      py::arg("mesh"), py::arg("kappa"), "Stiffness matrix over free DOFs as a scipy.sparse matrix.");
  m.def("assemble_load", &assemble_load, py::arg("mesh"), py::arg("f"));
  m.def(
      "reference_solve",
      [](const TriMesh& mesh, const CoefficientField& kappa, const SourceField& f) {
        return reference_solve(assemble_stiffness(mesh, kappa), assemble_load(mesh, f));
      },
      py::arg("mesh"), py::arg("kappa"), py::arg("f"), "Finite element solution over free DOFs.");
  m.def("to_nodal", &to_nodal, py::arg("mesh"), py::arg("free_values"));

  py::class_<Subdomain>(m, "Subdomain")
      .def_property_readonly("x0", [](const Subdomain& s) { return s.box.x0(); })
      .def_property_readonly("y0", [](const Subdomain& s) { return s.box.y0(); })
      .def_property_readonly("size", [](const Subdomain& s) { return s.box.size(); })
      .def_readonly("interior_dofs", &Subdomain::interior_dofs);
  py::class_<DomainDecomposition>(m, "DomainDecomposition")
      .def_readonly("subdomains", &DomainDecomposition::subdomains)
      .def_readonly("size", &DomainDecomposition::size)
      .def_readonly("step", &DomainDecomposition::step)
      .def_readonly("max_cover", &DomainDecomposition::max_cover)
      .def_property_readonly("count", &DomainDecomposition::count);
  m.def("build_decomposition", &build_decomposition, py::arg("mesh"), py::arg("size"), py::arg("step"));

  py::class_<TheoryConstants>(m, "TheoryConstants")
      .def_readonly("c_f", &TheoryConstants::c_f)
      .def_readonly("contrast", &TheoryConstants::contrast)
      .def_readonly("max_cover", &TheoryConstants::max_cover)
      .def_readonly("max_grad_sq", &TheoryConstants::max_grad_sq)
      .def_readonly("max_val_sq", &TheoryConstants::max_val_sq)
      .def_readonly("cpu_sq_bound", &TheoryConstants::cpu_sq_bound)
      .def_readonly("n_subdomains", &TheoryConstants::n_subdomains)
      .def_readonly("c", &TheoryConstants::c)
      .def_readonly("one_minus_c", &TheoryConstants::one_minus_c);
  m.def(
      "theory_constants",
      [](const TriMesh& mesh, const CoefficientField& kappa, const DomainDecomposition& dd, double c_f) {
        return try_theory_constants(mesh, kappa, dd, c_f);
      },
      py::arg("mesh"), py::arg("kappa"), py::arg("dd"), py::arg("c_f") = default_friedrichs_constant(),
      "Bound constants, or None when no partition of unity exists.");
  m.def("cpu_upper_bound", &cpu_upper_bound, py::arg("max_cover"), py::arg("c_f"), py::arg("contrast"),
        py::arg("max_grad_sq"), py::arg("max_val_sq"));
  m.def(
      "rate_bound",
      [](double cpu_sq, int n_subdomains) {
        const RateBound r = rate_bound(cpu_sq, n_subdomains);
        return py::make_tuple(r.c, r.one_minus_c);
      },
      py::arg("cpu_sq"), py::arg("n_subdomains"), "Returns (c, 1 - c).");
  m.def("default_friedrichs_constant", &default_friedrichs_constant);

  py::class_<EnrichmentTrace>(m, "EnrichmentTrace")
      .def_readonly("algorithm", &EnrichmentTrace::algorithm)
      .def_readonly("status", &EnrichmentTrace::status)
      .def_readonly("reference_energy", &EnrichmentTrace::reference_energy)
      .def_readonly("final_rel_error", &EnrichmentTrace::final_rel_error)
      .def_readonly("final_solution", &EnrichmentTrace::final_solution)
      .def_readonly("theory", &EnrichmentTrace::theory)
      .def_property_readonly("iterations", &EnrichmentTrace::iterations)
      .def_property_readonly("rel_errors",
                             [](const EnrichmentTrace& t) {
                               std::vector<double> out;
                               for (const IterationRecord& r : t.records) {
                                 out.push_back(r.rel_energy_error);
                               }
                               return out;
                             })
      .def_property_readonly("records", [](const EnrichmentTrace& t) {
        py::list out;
        for (const IterationRecord& r : t.records) {
          out.append(record_dict(r));
        }
        return out;
      });
  m.def(
      "run",
      [](Algorithm algorithm, const TriMesh& mesh, const CoefficientField& kappa, const SourceField& f,
         const DomainDecomposition& dd, int max_iter, double tol_rel, double tol_abs, int threads) {
        py::gil_scoped_release release;
        return run(algorithm, mesh, kappa, f, dd, StoppingRule{tol_abs, tol_rel, max_iter}, RunOptions{threads});
      },
      py::arg("algorithm"), py::arg("mesh"), py::arg("kappa"), py::arg("f"), py::arg("dd"), py::arg("max_iter") = 600,
      py::arg("tol_rel") = 0.0, py::arg("tol_abs") = 0.0, py::arg("threads") = 1);
  m.def("emit_dat", &emit_dat, py::arg("trace"), py::arg("directory"));
  m.def("read_dat", &read_dat, py::arg("file"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_static("parse", &config_from_text, py::arg("text"))
      .def_static(
          "load", [](const std::filesystem::path& file) { return load_config(file); }, py::arg("file"))
      .def("set", [](ExperimentConfig& c, const std::string& key, const std::string& value) {
        apply_setting(c, key, value);
      })
      .def("validate", [](const ExperimentConfig& c) { validate(c); })
      .def("format", [](const ExperimentConfig& c) { return format_config(c); })
      .def_readwrite("n_squares", &ExperimentConfig::n_squares)
      .def_readwrite("subdomain_size", &ExperimentConfig::subdomain_size)
      .def_readwrite("subdomain_step", &ExperimentConfig::subdomain_step)
      .def_readwrite("c_f", &ExperimentConfig::c_f)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_property(
          "max_iter", [](const ExperimentConfig& c) { return c.stopping.max_iter; },
          [](ExperimentConfig& c, int v) { c.stopping.max_iter = v; })
      .def_property(
          "tol_rel", [](const ExperimentConfig& c) { return c.stopping.tol_rel; },
          [](ExperimentConfig& c, double v) { c.stopping.tol_rel = v; })
      .def_property(
          "tol_abs", [](const ExperimentConfig& c) { return c.stopping.tol_abs; },
          [](ExperimentConfig& c, double v) { c.stopping.tol_abs = v; });

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("config", &ExperimentResult::config)
      .def_readonly("n_dofs", &ExperimentResult::n_dofs)
      .def_readonly("n_subdomains", &ExperimentResult::n_subdomains)
      .def_readonly("max_cover", &ExperimentResult::max_cover)
      .def_readonly("theory", &ExperimentResult::theory)
      .def_readonly("traces", &ExperimentResult::traces)
      .def_readonly("wall_seconds", &ExperimentResult::wall_seconds)
      .def_property_readonly("exit_code", [](const ExperimentResult& r) { return exit_code(r); })
      .def("summary", [](const ExperimentResult& r) { return format_summary(r); })
      .def("write_outputs", &write_outputs, py::arg("directory"));
  m.def(
      "run_experiment",
      [](const ExperimentConfig& config) {
        py::gil_scoped_release release;
        return run_experiment(config);
      },
      py::arg("config"));
}
