#include "dvrvqe/ansatz_search.hpp"
#include "dvrvqe/dvr.hpp"
#include "dvrvqe/measurement.hpp"
#include "dvrvqe/pauli.hpp"
#include "dvrvqe/runner.hpp"
#include "dvrvqe/statevector.hpp"
#include "dvrvqe/vqe.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <iostream>
#include <sstream>

namespace py = pybind11;
using namespace dvrvqe;

namespace {

double number(const py::dict& d, const char* key) {
  if (!d.contains(key)) throw InvalidArgument(std::string("potential is missing '") + key + "'");
  return d[key].cast<double>();
}

dvr::PotentialModel potential_from(const py::dict& d) {
  const auto type = d.contains("type") ? d["type"].cast<std::string>() : std::string();
  if (type == "harmonic")
    return dvr::Harmonic{number(d, "force_constant"), d.contains("center") ? d["center"].cast<double>() : 0.0};
  if (type == "morse") return dvr::Morse{number(d, "well_depth"), number(d, "range"), number(d, "equilibrium")};
  if (type == "tabulated") return dvr::read_tabulated_file(d["file"].cast<std::string>());
  throw InvalidArgument("potential type must be harmonic, morse or tabulated");
}

sv::QuantumState state_from(const ComplexVector& amps) {
  const int n = log2_exact(amps.size());
  if (n < 1) throw InvalidArgument("state length must be a power of two");
  return sv::QuantumState(n, amps);
}

vqe::AnsatzSpec ansatz_from(int n_qubits, int blocks, const std::optional<std::vector<std::vector<std::pair<int, int>>>>& ent) {
  if (!ent) return vqe::AnsatzSpec::linear(n_qubits, blocks);
  auto spec = vqe::AnsatzSpec::empty(n_qubits, static_cast<int>(ent->size()));
  for (std::size_t d = 0; d < ent->size(); ++d)
    for (const auto& [c, t] : (*ent)[d]) spec.entanglers[d].push_back({c, t});
  spec.validate();
  return spec;
}

vqe::OptimizerConfig optimizer(std::uint64_t seed, int restarts, int max_iterations, const std::string& method) {
  vqe::OptimizerConfig opt;
  opt.seed = seed;
  opt.restarts = restarts;
  opt.max_iterations = max_iterations;
  if (method == "simplex") {
    opt.method = vqe::Method::Simplex;
  } else if (method != "quasi-newton") {
    throw InvalidArgument("method must be quasi-newton or simplex");
  }
  return opt;
}

py::dict result_dict(const vqe::VqeResult& r) {
  py::dict d;
  d["energy"] = r.energy;
  d["objective"] = r.objective;
  d["params"] = r.params;
  d["converged"] = r.converged;
  d["overlaps"] = r.overlaps;
  d["gradient_norm"] = r.gradient_norm;
  py::list trace;
  for (const auto& t : r.trace) trace.append(py::make_tuple(t.iteration, t.objective, t.energy));
  d["trace"] = trace;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "DVR Hamiltonians, measurement plans and VQE on a statevector simulator";
  m.attr("__version__") = "0.3.0";
  m.attr("hartree_to_wavenumber") = units::kHartreeToWavenumber;

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ResourceLimit>(m, "ResourceLimit", PyExc_MemoryError);

  py::enum_<dvr::GridVariant>(m, "GridVariant")
      .value("INFINITE", dvr::GridVariant::Infinite)
      .value("HALF_INFINITE", dvr::GridVariant::HalfInfinite)
      .value("FINITE", dvr::GridVariant::Finite);

  py::class_<dvr::DvrHamiltonian>(m, "Hamiltonian")
      .def_property_readonly("n_qubits", [](const dvr::DvrHamiltonian& h) { return h.grid.n_qubits; })
      .def_property_readonly("points", [](const dvr::DvrHamiltonian& h) { return h.grid.points; })
      .def_property_readonly("dx", [](const dvr::DvrHamiltonian& h) { return h.grid.dx; })
      .def_property_readonly("kinetic_scale", [](const dvr::DvrHamiltonian& h) { return h.grid.kinetic_scale; })
      .def_readonly("matrix", &dvr::DvrHamiltonian::full)
      .def_readonly("kinetic", &dvr::DvrHamiltonian::kinetic)
      .def_readonly("potential", &dvr::DvrHamiltonian::potential_diag)
      .def_property_readonly("band_diagonal", [](const dvr::DvrHamiltonian& h) { return h.profile.d; })
      .def_property_readonly("band_values", [](const dvr::DvrHamiltonian& h) { return h.profile.f; })
      .def_property_readonly("antidiagonal_values", [](const dvr::DvrHamiltonian& h) { return h.profile.g; });

  m.def(
      "assemble",
      [](dvr::GridVariant variant, int n_qubits, double mass, const py::dict& potential, double x_min, double dx,
         double a, double b) {
        dvr::GridParams p;
        p.x_min = x_min;
        p.dx = dx;
        p.a = a;
        p.b = b;
        return dvr::assemble(dvr::build_grid(variant, p, n_qubits, mass), potential_from(potential));
      },
      py::arg("variant"), py::arg("n_qubits"), py::arg("mass"), py::arg("potential"), py::kw_only(),
      py::arg("x_min") = 0.0, py::arg("dx") = 0.0, py::arg("a") = 0.0, py::arg("b") = 0.0,
      "DVR Hamiltonian on 2**n_qubits points; mass in electron masses, potential a dict with a 'type' key.");

  m.def("classical_spectrum", &dvr::classical_spectrum, py::arg("matrix"), py::arg("count"));
  m.def(
      "truncate",
      [](const dvr::DvrHamiltonian& h, int s, int r, bool streamlined) {
        return dvr::truncate(h.profile, s, r,
                             streamlined ? dvr::AntiDiagonalWindow::InnerOnly : dvr::AntiDiagonalWindow::InnerAndOuter);
      },
      py::arg("hamiltonian"), py::arg("s"), py::arg("r"), py::arg("streamlined") = false);
  m.def(
      "truncation_error_bound",
      [](const dvr::DvrHamiltonian& h, int s, int r, bool streamlined) {
        return dvr::truncation_error_bound(
            h.profile, s, r, streamlined ? dvr::AntiDiagonalWindow::InnerOnly : dvr::AntiDiagonalWindow::InnerAndOuter);
      },
      py::arg("hamiltonian"), py::arg("s"), py::arg("r"), py::arg("streamlined") = false);

  m.def(
      "decompose",
      [](const Matrix& matrix, double tolerance) {
        std::map<std::string, double> out;
        const auto sum = pauli::decompose(matrix, tolerance);
        for (const auto& [word, coeff] : sum.terms()) out[word.str()] = coeff;
        return out;
      },
      py::arg("matrix"), py::arg("tolerance") = 1e-12, "Pauli coefficients keyed by word, qubit 0 first.");
  m.def(
      "reconstruct",
      [](const std::map<std::string, double>& terms, int n_qubits) {
        pauli::PauliSum sum(n_qubits, 0.0);
        for (const auto& [word, coeff] : terms) sum.add(pauli::PauliWord(word), coeff);
        return pauli::reconstruct(sum);
      },
      py::arg("terms"), py::arg("n_qubits"));

  py::class_<sv::Circuit>(m, "Circuit")
      .def(py::init<int, int>(), py::arg("n_qubits"), py::arg("n_slots") = 0)
      .def("ry", [](sv::Circuit& c, int q, int s) -> sv::Circuit& { return c.ry(q, s); }, py::return_value_policy::reference_internal)
      .def("cnot", [](sv::Circuit& c, int a, int b) -> sv::Circuit& { return c.cnot(a, b); }, py::return_value_policy::reference_internal)
      .def("h", [](sv::Circuit& c, int q) -> sv::Circuit& { return c.h(q); }, py::return_value_policy::reference_internal)
      .def("x", [](sv::Circuit& c, int q) -> sv::Circuit& { return c.x(q); }, py::return_value_policy::reference_internal)
      .def_property_readonly("n_qubits", &sv::Circuit::num_qubits)
      .def_property_readonly("n_slots", &sv::Circuit::num_slots)
      .def("depth", &sv::Circuit::depth)
      .def("__len__", &sv::Circuit::size)
      .def("to_text",
           [](const sv::Circuit& c) {
             std::ostringstream out;
             sv::write_circuit(out, c);
             return out.str();
           })
      .def_static("from_text", [](const std::string& text) {
        std::istringstream in(text);
        return sv::read_circuit(in);
      });

  m.def(
      "run_circuit",
      [](const sv::Circuit& c, const std::vector<double>& params) { return sv::run(c, params).amplitudes(); },
      py::arg("circuit"), py::arg("params") = std::vector<double>{}, "Amplitudes after applying the circuit to |0...0>.");

  py::class_<meas::TruncationSpec>(m, "TruncationSpec")
      .def_static("from_epsilon", &meas::TruncationSpec::from_epsilon, py::arg("epsilon"), py::arg("n_qubits"),
                  py::arg("alpha") = 1.0, py::arg("beta") = 1.0)
      .def_static("with_cutoffs", &meas::TruncationSpec::with_cutoffs, py::arg("s"), py::arg("r"),
                  py::arg("streamlined") = false)
      .def_readwrite("s", &meas::TruncationSpec::s)
      .def_readwrite("r", &meas::TruncationSpec::r)
      .def_readwrite("streamlined", &meas::TruncationSpec::streamlined)
      .def_readonly("epsilon", &meas::TruncationSpec::epsilon);

  py::class_<meas::MeasurementPlan>(m, "MeasurementPlan")
      .def_readonly("n_qubits", &meas::MeasurementPlan::n_qubits)
      .def_property_readonly("num_bases", &meas::MeasurementPlan::num_bases)
      .def("operator_matrix", &meas::MeasurementPlan::operator_matrix)
      .def("evaluate_exact",
           [](const meas::MeasurementPlan& p, const ComplexVector& amps) {
             return meas::evaluate_exact(p, state_from(amps));
           })
      .def(
          "evaluate_sampled",
          [](const meas::MeasurementPlan& p, const ComplexVector& amps, std::uint64_t shots, std::uint64_t seed) {
            const auto r = meas::evaluate_sampled(p, state_from(amps), shots, seed);
            return py::make_tuple(r.estimate, r.standard_error);
          },
          py::arg("amplitudes"), py::arg("shots"), py::arg("seed") = 1)
      .def("complexity",
           [](const meas::MeasurementPlan& p) {
             const auto c = meas::plan_complexity(p);
             py::dict d;
             d["num_bases"] = c.num_bases;
             d["band_bases"] = c.band_bases;
             d["antidiag_bases"] = c.antidiag_bases;
             d["max_circuit_depth"] = c.max_circuit_depth;
             d["bound_num_bases"] = c.bound_num_bases;
             d["within_bound"] = c.total_within_bound && c.bands_within_bound && c.depth_within_bound;
             return d;
           })
      .def("to_text", [](const meas::MeasurementPlan& p) {
        std::ostringstream out;
        meas::write_plan(out, p);
        return out.str();
      });

  m.def(
      "full_plan", [](const dvr::DvrHamiltonian& h, const meas::TruncationSpec& spec) { return meas::full_plan(h.profile, spec); },
      py::arg("hamiltonian"), py::arg("spec"));

  m.def(
      "minimize",
      [](const Matrix& matrix, int n_qubits, int blocks,
         const std::optional<std::vector<std::vector<std::pair<int, int>>>>& entanglers, std::uint64_t seed,
         int restarts, int max_iterations, const std::string& method) {
        const auto spec = ansatz_from(n_qubits, blocks, entanglers);
        const auto opt = optimizer(seed, restarts, max_iterations, method);
        vqe::VqeResult r;
        {
          py::gil_scoped_release release;
          r = vqe::minimize(spec, vqe::ObjectiveConfig{matrix, {}}, opt);
        }
        return result_dict(r);
      },
      py::arg("matrix"), py::arg("n_qubits"), py::arg("blocks") = 3, py::arg("entanglers") = py::none(),
      py::arg("seed") = 1, py::arg("restarts") = 5, py::arg("max_iterations") = 2000,
      py::arg("method") = "quasi-newton",
      "Ground-state VQE; entanglers is one list of (control, target) per block, linear when omitted.");

  m.def(
      "excited_states",
      [](const Matrix& matrix, int n_qubits, int v_max, int blocks,
         const std::optional<std::vector<std::vector<std::pair<int, int>>>>& entanglers, std::uint64_t seed,
         int restarts) {
        const auto spec = ansatz_from(n_qubits, blocks, entanglers);
        std::vector<vqe::VqeResult> results;
        {
          py::gil_scoped_release release;
          results = vqe::excited_states(spec, matrix, v_max, optimizer(seed, restarts, 2000, "quasi-newton"));
        }
        py::list out;
        for (const auto& r : results) out.append(result_dict(r));
        return out;
      },
      py::arg("matrix"), py::arg("n_qubits"), py::arg("v_max"), py::arg("blocks") = 3,
      py::arg("entanglers") = py::none(), py::arg("seed") = 1, py::arg("restarts") = 5);

  m.def(
      "greedy_search",
      [](const Matrix& matrix, int n_qubits, int blocks, const std::vector<double>& thresholds, std::uint64_t seed) {
        search::SearchConfig sc;
        sc.blocks = blocks;
        sc.thresholds_cm1 = thresholds;
        sc.optimizer.seed = seed;
        search::SearchResult r;
        {
          py::gil_scoped_release release;
          r = search::greedy_search(matrix, n_qubits, sc);
        }
        py::list trace;
        for (const auto& s : r.trace) {
          py::object gate = py::none();
          if (s.gate) gate = py::make_tuple(s.gate->block, s.gate->control, s.gate->target);
          trace.append(py::make_tuple(s.step, gate, s.energy, s.error_cm1));
        }
        py::list snapshots;
        for (const auto& s : r.snapshots) {
          py::dict d;
          std::vector<std::vector<std::pair<int, int>>> ent;
          for (const auto& block : s.ansatz.entanglers) {
            ent.emplace_back();
            for (const auto& e : block) ent.back().emplace_back(e.control, e.target);
          }
          d["threshold_cm1"] = s.threshold_cm1;
          d["entanglers"] = ent;
          d["params"] = s.params;
          d["energy"] = s.energy;
          d["error_cm1"] = s.error_cm1;
          snapshots.append(d);
        }
        py::dict out;
        out["reference_energy"] = r.reference_energy;
        out["trace"] = trace;
        out["snapshots"] = snapshots;
        return out;
      },
      py::arg("matrix"), py::arg("n_qubits"), py::arg("blocks") = 3,
      py::arg("thresholds") = std::vector<double>{1.0, 0.01}, py::arg("seed") = 1);

  m.def(
      "run_config",
      [](const std::filesystem::path& path, std::optional<std::filesystem::path> out, std::optional<std::uint64_t> seed,
         std::optional<std::string> task) {
        runner::Overrides o;
        o.output = std::move(out);
        o.seed = seed;
        if (task) {
          o.task = runner::parse_task(*task);
          if (!o.task) throw InvalidArgument("unknown task '" + *task + "'");
        }
        std::ostringstream log;
        std::ostringstream err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = runner::run(path, o, log, err);
        }
        return py::make_tuple(code, log.str(), err.str());
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(), py::arg("task") = py::none(),
      "Runs a YAML config; returns (exit_code, log, diagnostics).");
}
