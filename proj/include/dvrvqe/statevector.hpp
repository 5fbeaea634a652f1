#pragma once

// Dense simulation of the {RY, CNOT, H, X} gate set. Qubit 0 is the most
// significant bit of the basis index (number encoding of DVR points).

#include "dvrvqe/common.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dvrvqe::sv {

/// RY(theta) = exp(-i theta Y / 2), theta read from a parameter slot.
struct RY {
  int qubit = 0;
  int slot = 0;
};
struct CNOT {
  int control = 0;
  int target = 0;
};
struct Hadamard {
  int qubit = 0;
};
struct PauliX {
  int qubit = 0;
};

using Gate = std::variant<RY, CNOT, Hadamard, PauliX>;

bool operator==(const Gate& a, const Gate& b);

class Circuit {
 public:
  Circuit() = default;
  Circuit(int n_qubits, int n_slots = 0);

  int num_qubits() const { return n_qubits_; }
  int num_slots() const { return n_slots_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }

  /// Validates qubit and slot indices.
  Circuit& add(const Gate& gate);
  Circuit& ry(int qubit, int slot) { return add(RY{qubit, slot}); }
  Circuit& cnot(int control, int target) { return add(CNOT{control, target}); }
  Circuit& h(int qubit) { return add(Hadamard{qubit}); }
  Circuit& x(int qubit) { return add(PauliX{qubit}); }
  Circuit& append(const Circuit& other);

  /// Reversed gate order; valid only for parameter-free circuits (H, X and
  /// CNOT are self-inverse).
  Circuit inverse() const;

  /// Layered depth, every gate counting one time step.
  int depth() const;

  friend bool operator==(const Circuit& a, const Circuit& b);

 private:
  int n_qubits_ = 0;
  int n_slots_ = 0;
  std::vector<Gate> gates_;
};

class QuantumState {
 public:
  /// |0...0>.
  explicit QuantumState(int n_qubits);
  QuantumState(int n_qubits, ComplexVector amplitudes);

  static QuantumState basis(int n_qubits, std::uint64_t index);

  int num_qubits() const { return n_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const ComplexVector& amplitudes() const { return amps_; }
  double norm() const { return amps_.norm(); }

  void apply(const Gate& gate, std::span<const double> params = {});
  void apply(const Circuit& circuit, std::span<const double> params = {});

  /// |amp_j|^2 for every basis index.
  std::vector<double> probabilities() const;

 private:
  std::uint64_t bit(int qubit) const { return std::uint64_t{1} << (n_qubits_ - 1 - qubit); }

  int n_qubits_;
  ComplexVector amps_;
};

/// Applies the circuit to |0...0>.
QuantumState run(const Circuit& circuit, std::span<const double> params = {});

/// <psi|H|psi> for real symmetric H.
double expectation_dense(const QuantumState& state, const Matrix& matrix);

/// |<a|b>|^2.
double overlap_sq(const QuantumState& a, const QuantumState& b);

/// Deterministic stream for (seed, stream index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Histogram of `shots` computational-basis outcomes after applying
/// `analysis` to the state.
std::vector<std::uint64_t> sample_counts(const QuantumState& state, const Circuit& analysis,
                                         std::uint64_t shots, std::uint64_t seed);

/// Header `qubits <n> slots <m>`, then one gate per line.
void write_circuit(std::ostream& out, const Circuit& circuit);
Circuit read_circuit(std::istream& in);
/// Parses one gate line (`ry q s`, `cnot c t`, `h q`, `x q`).
Gate parse_gate(const std::string& line);
Circuit read_circuit_file(const std::string& path);
std::string format_gate(const Gate& gate);

}  // namespace dvrvqe::sv
