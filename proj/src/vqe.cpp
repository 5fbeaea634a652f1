#include "dvrvqe/vqe.hpp"

#include "dvrvqe/dvr.hpp"
#include "dvrvqe/parallel.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

namespace dvrvqe::vqe {

namespace {

const bool kGslHandlerOff = [] {
  gsl_set_error_handler_off();
  return true;
}();

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using GslVector = std::unique_ptr<gsl_vector, VectorDeleter>;

GslVector to_gsl(std::span<const double> values) {
  GslVector v(gsl_vector_alloc(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) gsl_vector_set(v.get(), i, values[i]);
  return v;
}

std::vector<double> from_gsl(const gsl_vector* v) {
  std::vector<double> out(v->size);
  for (std::size_t i = 0; i < v->size; ++i) out[i] = gsl_vector_get(v, i);
  return out;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void check_config(const sv::Circuit& ansatz, const ObjectiveConfig& config) {
  const auto dim = std::int64_t{1} << ansatz.num_qubits();
  if (config.hamiltonian.rows() != dim || config.hamiltonian.cols() != dim)
    throw InvalidArgument("hamiltonian is " + std::to_string(config.hamiltonian.rows()) + "x" +
                          std::to_string(config.hamiltonian.cols()) + ", ansatz expects dimension " +
                          std::to_string(dim));
  for (const auto& d : config.deflation) {
    if (d.reference.num_qubits() != ansatz.num_qubits())
      throw InvalidArgument("deflation reference has the wrong number of qubits");
    if (!(d.beta > 0.0)) throw InvalidArgument("deflation weight must be positive");
  }
}

void check_params(std::span<const double> params, const sv::Circuit& ansatz) {
  if (static_cast<int>(params.size()) != ansatz.num_slots())
    throw InvalidArgument("expected " + std::to_string(ansatz.num_slots()) + " parameters, got " +
                          std::to_string(params.size()));
}

double objective_of_state(const sv::QuantumState& state, const ObjectiveConfig& config) {
  double value = sv::expectation_dense(state, config.hamiltonian);
  for (const auto& d : config.deflation) value += d.beta * sv::overlap_sq(d.reference, state);
  return value;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Problem {
  const sv::Circuit* ansatz;
  const ObjectiveConfig* config;
};

double gsl_f(const gsl_vector* x, void* data) {
  auto* p = static_cast<Problem*>(data);
  const auto params = from_gsl(x);
  return objective(params, *p->ansatz, *p->config);
}

void gsl_df(const gsl_vector* x, void* data, gsl_vector* g) {
  auto* p = static_cast<Problem*>(data);
  const auto params = from_gsl(x);
  const auto grad = gradient(params, *p->ansatz, *p->config);
  for (std::size_t i = 0; i < grad.size(); ++i) gsl_vector_set(g, i, grad[i]);
}

void gsl_fdf(const gsl_vector* x, void* data, double* f, gsl_vector* g) {
  *f = gsl_f(x, data);
  gsl_df(x, data, g);
}

/// Relative objective change over the last `window` accepted iterates.
class StallDetector {
 public:
  StallDetector(int window, double tolerance) : window_(window), tolerance_(tolerance) {}
  bool push(double value) {
    history_.push_back(value);
    if (static_cast<int>(history_.size()) > window_ + 1) history_.pop_front();
    if (static_cast<int>(history_.size()) <= window_) return false;
    const double change = std::abs(history_.front() - history_.back());
    const double scale = std::max(std::abs(history_.back()), 1e-300);
    return change <= tolerance_ * scale;
  }

 private:
  int window_;
  double tolerance_;
  std::deque<double> history_;
};

void finish(VqeResult& result, const sv::Circuit& ansatz, const ObjectiveConfig& config) {
  const auto state = sv::run(ansatz, result.params);
  result.energy = sv::expectation_dense(state, config.hamiltonian);
  result.objective = objective_of_state(state, config);
  result.overlaps.clear();
  for (const auto& d : config.deflation) result.overlaps.push_back(sv::overlap_sq(d.reference, state));
  result.gradient_norm = inf_norm(gradient(result.params, ansatz, config));
}

VqeResult run_quasi_newton(const sv::Circuit& ansatz, const ObjectiveConfig& config,
                           const OptimizerConfig& options, std::span<const double> start) {
  VqeResult result;
  const std::size_t n = start.size();
  Problem problem{&ansatz, &config};
  gsl_multimin_function_fdf fn{&gsl_f, &gsl_df, &gsl_fdf, n, &problem};
  std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> solver(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n),
      &gsl_multimin_fdfminimizer_free);
  auto x0 = to_gsl(start);
  gsl_multimin_fdfminimizer_set(solver.get(), &fn, x0.get(), 0.1, 0.1);

  StallDetector stall(options.stall_window, options.relative_tolerance);
  auto record = [&](int iter) {
    const auto params = from_gsl(solver->x);
    result.trace.push_back({iter, solver->f, energy(params, ansatz, config.hamiltonian)});
    stall.push(solver->f);
  };
  record(0);
  if (inf_norm(from_gsl(solver->gradient)) < options.gradient_tolerance) result.converged = true;

  for (int iter = 1; !result.converged && iter <= options.max_iterations; ++iter) {
    const int status = gsl_multimin_fdfminimizer_iterate(solver.get());
    if (status != GSL_SUCCESS) break;  // no further progress along the search direction
    const auto params = from_gsl(solver->x);
    result.trace.push_back({iter, solver->f, energy(params, ansatz, config.hamiltonian)});
    const bool stalled = stall.push(solver->f);
    if (inf_norm(from_gsl(solver->gradient)) < options.gradient_tolerance || stalled) result.converged = true;
  }
  result.params = from_gsl(solver->x);
  finish(result, ansatz, config);
  if (!result.converged && result.gradient_norm < options.gradient_tolerance) result.converged = true;
  return result;
}

VqeResult run_simplex(const sv::Circuit& ansatz, const ObjectiveConfig& config, const OptimizerConfig& options,
                      std::span<const double> start) {
  VqeResult result;
  const std::size_t n = start.size();
  Problem problem{&ansatz, &config};
  gsl_multimin_function fn{&gsl_f, n, &problem};
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), &gsl_multimin_fminimizer_free);
  auto x0 = to_gsl(start);
  GslVector step(gsl_vector_alloc(n));
  gsl_vector_set_all(step.get(), 0.1);
  gsl_multimin_fminimizer_set(solver.get(), &fn, x0.get(), step.get());

  StallDetector stall(options.stall_window, options.relative_tolerance);
  // fminimizer_set does not fill fval, so the starting point is evaluated here.
  const double f0 = objective(start, ansatz, config);
  result.trace.push_back({0, f0, energy(start, ansatz, config.hamiltonian)});
  stall.push(f0);
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    result.trace.push_back({iter, solver->fval, energy(from_gsl(solver->x), ansatz, config.hamiltonian)});
    const bool stalled = stall.push(solver->fval);
    // The best vertex can repeat for many iterations while the simplex
    // contracts, so stalling only counts once the simplex has shrunk too.
    const double size = gsl_multimin_fminimizer_size(solver.get());
    if (size < 1e-10 || (stalled && size < 1e-6)) {
      result.converged = true;
      break;
    }
  }
  result.params = from_gsl(solver->x);
  finish(result, ansatz, config);
  return result;
}

std::vector<double> initial_params(int count, const OptimizerConfig& options, int restart) {
  std::mt19937_64 rng(sv::derive_seed(options.seed, static_cast<std::uint64_t>(restart)));
  const double scale = restart == 0 ? options.init_scale : std::numbers::pi;
  std::vector<double> params(static_cast<std::size_t>(count));
  for (auto& p : params) p = scale * (2.0 * uniform01(rng) - 1.0);
  return params;
}

}  // namespace

AnsatzSpec AnsatzSpec::empty(int n_qubits, int blocks) {
  AnsatzSpec spec;
  spec.n_qubits = n_qubits;
  spec.blocks = blocks;
  spec.entanglers.assign(static_cast<std::size_t>(std::max(blocks, 0)), {});
  spec.validate();
  return spec;
}

AnsatzSpec AnsatzSpec::linear(int n_qubits, int blocks) {
  auto spec = empty(n_qubits, blocks);
  for (auto& block : spec.entanglers)
    for (int q = 0; q + 1 < n_qubits; ++q) block.push_back({q, q + 1});
  return spec;
}

AnsatzSpec AnsatzSpec::from_circuit(const sv::Circuit& circuit) {
  const int n = circuit.num_qubits();
  if (n < 1 || circuit.num_slots() % n != 0)
    throw InvalidArgument("circuit slot count is not a multiple of the qubit count");
  const int layers = circuit.num_slots() / n;
  if (layers < 1) throw InvalidArgument("circuit has no rotation layer");
  auto spec = empty(n, layers - 1);
  int layer = 0;
  int in_layer = 0;
  for (const auto& gate : circuit.gates()) {
    if (const auto* ry = std::get_if<sv::RY>(&gate)) {
      if (in_layer == n) {
        ++layer;
        in_layer = 0;
      }
      if (ry->qubit != in_layer || ry->slot != layer * n + in_layer)
        throw InvalidArgument("rotation " + sv::format_gate(gate) + " breaks the layered ansatz structure");
      ++in_layer;
    } else if (const auto* cx = std::get_if<sv::CNOT>(&gate)) {
      if (in_layer != n || layer >= spec.blocks)
        throw InvalidArgument("entangler " + sv::format_gate(gate) + " is not between two rotation layers");
      spec.entanglers[static_cast<std::size_t>(layer)].push_back({cx->control, cx->target});
    } else {
      throw InvalidArgument("ansatz circuits may only contain ry and cnot gates");
    }
  }
  if (layer != layers - 1 || in_layer != n) throw InvalidArgument("circuit ends before the final rotation layer");
  return spec;
}

int AnsatzSpec::num_entanglers() const {
  int count = 0;
  for (const auto& block : entanglers) count += static_cast<int>(block.size());
  return count;
}

void AnsatzSpec::validate() const {
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw InvalidArgument("ansatz qubit count " + std::to_string(n_qubits) + " out of range");
  if (blocks < 0) throw InvalidArgument("ansatz block count must be non-negative");
  if (static_cast<int>(entanglers.size()) != blocks)
    throw InvalidArgument("ansatz has " + std::to_string(entanglers.size()) + " entangler lists for " +
                          std::to_string(blocks) + " blocks");
  for (const auto& block : entanglers)
    for (const auto& e : block) {
      if (e.control == e.target) throw InvalidArgument("entangler control equals target");
      if (e.control < 0 || e.control >= n_qubits || e.target < 0 || e.target >= n_qubits)
        throw InvalidArgument("entangler qubit out of range");
    }
}

sv::Circuit AnsatzSpec::circuit() const {
  validate();
  sv::Circuit c(n_qubits, num_params());
  for (int d = 0; d <= blocks; ++d) {
    for (int q = 0; q < n_qubits; ++q) c.ry(q, d * n_qubits + q);
    if (d < blocks)
      for (const auto& e : entanglers[static_cast<std::size_t>(d)]) c.cnot(e.control, e.target);
  }
  return c;
}

double objective(std::span<const double> params, const sv::Circuit& ansatz, const ObjectiveConfig& config) {
  check_params(params, ansatz);
  check_config(ansatz, config);
  return objective_of_state(sv::run(ansatz, params), config);
}

double energy(std::span<const double> params, const sv::Circuit& ansatz, const Matrix& hamiltonian) {
  check_params(params, ansatz);
  return sv::expectation_dense(sv::run(ansatz, params), hamiltonian);
}

std::vector<double> gradient(std::span<const double> params, const sv::Circuit& ansatz,
                             const ObjectiveConfig& config) {
  check_params(params, ansatz);
  check_config(ansatz, config);
  constexpr double kShift = std::numbers::pi / 2.0;
  std::vector<double> shifted(params.begin(), params.end());
  std::vector<double> grad(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    shifted[j] = params[j] + kShift;
    const double plus = objective_of_state(sv::run(ansatz, shifted), config);
    shifted[j] = params[j] - kShift;
    const double minus = objective_of_state(sv::run(ansatz, shifted), config);
    shifted[j] = params[j];
    grad[j] = 0.5 * (plus - minus);
  }
  return grad;
}

VqeResult optimize_from(const sv::Circuit& ansatz, const ObjectiveConfig& config, const OptimizerConfig& options,
                        std::span<const double> start) {
  check_params(start, ansatz);
  check_config(ansatz, config);
  if (!(options.gradient_tolerance > 0.0) || !(options.relative_tolerance > 0.0))
    throw InvalidArgument("optimizer tolerances must be positive");
  if (options.max_iterations < 0) throw InvalidArgument("max_iterations must be non-negative");
  return options.method == Method::QuasiNewton ? run_quasi_newton(ansatz, config, options, start)
                                               : run_simplex(ansatz, config, options, start);
}

VqeResult minimize(const AnsatzSpec& ansatz, const ObjectiveConfig& config, const OptimizerConfig& options) {
  if (options.restarts < 1) throw InvalidArgument("restart count must be at least 1");
  const auto circuit = ansatz.circuit();
  check_config(circuit, config);
  std::vector<VqeResult> runs(static_cast<std::size_t>(options.restarts));
  parallel_for(runs.size(), options.threads, [&](std::size_t r) {
    const auto start = initial_params(ansatz.num_params(), options, static_cast<int>(r));
    runs[r] = optimize_from(circuit, config, options, start);
    runs[r].restart = static_cast<int>(r);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].objective < runs[best].objective) best = r;
  return std::move(runs[best]);
}

double deflation_beta(const Matrix& hamiltonian, double energy) {
  return 1.1 * (dvr::gershgorin_upper(hamiltonian) - energy);
}

std::vector<VqeResult> excited_states(const AnsatzSpec& ansatz, const Matrix& hamiltonian, int v_max,
                                      const OptimizerConfig& options) {
  if (v_max < 0) throw InvalidArgument("v_max must be non-negative");
  const auto circuit = ansatz.circuit();
  ObjectiveConfig config{hamiltonian, {}};
  std::vector<VqeResult> results;
  for (int v = 0; v <= v_max; ++v) {
    auto level_options = options;
    level_options.seed = sv::derive_seed(options.seed, 1000 + static_cast<std::uint64_t>(v));
    auto result = minimize(ansatz, config, level_options);
    if (v < v_max) {
      const double beta = deflation_beta(hamiltonian, result.energy);
      if (!(beta > 0.0)) throw InvalidArgument("deflation weight is not positive; hamiltonian has a flat spectrum");
      config.deflation.push_back({sv::run(circuit, result.params), beta});
    }
    results.push_back(std::move(result));
  }
  return results;
}

void write_trace_csv(std::ostream& out, const VqeResult& result) {
  out << "iter,objective,energy_hartree,energy_cm1\n";
  char buf[160];
  for (const auto& t : result.trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", t.iteration, t.objective, t.energy,
                  units::to_wavenumber(t.energy));
    out << buf;
  }
}

}  // namespace dvrvqe::vqe
