#pragma once

// Variational eigensolver over hardware-efficient RY/CNOT ansaetze, with
// overlap deflation for excited states and parameter-shift gradients.

#include "dvrvqe/common.hpp"
#include "dvrvqe/statevector.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace dvrvqe::vqe {

struct Entangler {
  int control = 0;
  int target = 0;
  friend bool operator==(const Entangler&, const Entangler&) = default;
};

/// RY layer, entangler block 0, RY layer, ..., entangler block k-1, final RY
/// layer. Slot of qubit q in layer d is d * n + q.
struct AnsatzSpec {
  int n_qubits = 1;
  int blocks = 0;
  std::vector<std::vector<Entangler>> entanglers;  // one list per block

  static AnsatzSpec empty(int n_qubits, int blocks);
  /// CNOT(q, q+1) for q = 0..n-2 in every block.
  static AnsatzSpec linear(int n_qubits, int blocks);

  /// Inverse of circuit(): accepts exactly the layered RY/CNOT structure it emits.
  static AnsatzSpec from_circuit(const sv::Circuit& circuit);

  int num_params() const { return n_qubits * (blocks + 1); }
  int num_entanglers() const;
  sv::Circuit circuit() const;
  void validate() const;
};

struct Deflation {
  sv::QuantumState reference;
  double beta = 0.0;
};

struct ObjectiveConfig {
  Matrix hamiltonian;
  std::vector<Deflation> deflation;
};

enum class Method { QuasiNewton, Simplex };

struct OptimizerConfig {
  Method method = Method::QuasiNewton;
  double gradient_tolerance = 1e-8;
  /// Stop when the relative objective change stays below this over `stall_window` iterations.
  double relative_tolerance = 1e-12;
  int stall_window = 5;
  int max_iterations = 2000;
  int restarts = 5;
  std::uint64_t seed = 1;
  /// Restart 0 draws from [-init_scale, init_scale]; later restarts from [-pi, pi].
  double init_scale = 0.1;
  unsigned threads = 0;
};

struct TraceEntry {
  int iteration = 0;
  double objective = 0.0;
  double energy = 0.0;
};

struct VqeResult {
  double energy = 0.0;
  double objective = 0.0;
  std::vector<double> params;
  std::vector<TraceEntry> trace;
  bool converged = false;
  /// |<ref_i|psi>|^2 at the optimum, one per deflation reference.
  std::vector<double> overlaps;
  int restart = 0;
  double gradient_norm = 0.0;  // infinity norm at the optimum
};

/// <psi|H|psi> + sum_i beta_i |<ref_i|psi>|^2.
double objective(std::span<const double> params, const sv::Circuit& ansatz, const ObjectiveConfig& config);
/// Energy term only.
double energy(std::span<const double> params, const sv::Circuit& ansatz, const Matrix& hamiltonian);

/// Parameter-shift gradient of the full objective. Exact for circuits in
/// which every slot feeds exactly one RY gate.
std::vector<double> gradient(std::span<const double> params, const sv::Circuit& ansatz,
                             const ObjectiveConfig& config);

/// Single optimization from a given start.
VqeResult optimize_from(const sv::Circuit& ansatz, const ObjectiveConfig& config, const OptimizerConfig& options,
                        std::span<const double> start);

/// Best of `restarts` seeded runs, ranked by (objective, restart index).
VqeResult minimize(const AnsatzSpec& ansatz, const ObjectiveConfig& config, const OptimizerConfig& options);

/// beta_i = 1.1 (E_max - E_i) with E_max the Gershgorin upper bound of H.
double deflation_beta(const Matrix& hamiltonian, double energy);

/// Sequential deflation for v = 0..v_max.
std::vector<VqeResult> excited_states(const AnsatzSpec& ansatz, const Matrix& hamiltonian, int v_max,
                                      const OptimizerConfig& options);

/// `iter,objective,energy_hartree,energy_cm1`.
void write_trace_csv(std::ostream& out, const VqeResult& result);

}  // namespace dvrvqe::vqe
