#pragma once

#include "dvrvqe/common.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace dvrvqe::pauli {

/// A word over {I, X, Y, Z}; character 0 acts on qubit 0, the most
/// significant bit of the basis index.
class PauliWord {
 public:
  PauliWord() = default;
  explicit PauliWord(std::string letters);

  static PauliWord from_masks(int n_qubits, std::uint64_t x_mask, std::uint64_t z_mask);

  int num_qubits() const { return static_cast<int>(letters_.size()); }
  const std::string& str() const { return letters_; }
  /// Bit (n-1-q) set when qubit q carries X or Y.
  std::uint64_t x_mask() const;
  /// Bit (n-1-q) set when qubit q carries Z or Y.
  std::uint64_t z_mask() const;
  int y_count() const;

  friend bool operator<(const PauliWord& a, const PauliWord& b) { return a.letters_ < b.letters_; }
  friend bool operator==(const PauliWord& a, const PauliWord& b) { return a.letters_ == b.letters_; }

 private:
  std::string letters_;
};

/// Real-weighted Pauli expansion of a real symmetric matrix. Terms are kept
/// in lexicographic word order (I < X < Y < Z).
class PauliSum {
 public:
  PauliSum() = default;
  PauliSum(int n_qubits, double drop_tolerance) : n_qubits_(n_qubits), tolerance_(drop_tolerance) {}

  int num_qubits() const { return n_qubits_; }
  double drop_tolerance() const { return tolerance_; }
  const std::map<PauliWord, double>& terms() const { return terms_; }

  /// Adds a term; coefficients at or below the drop tolerance are not stored.
  void add(const PauliWord& word, double coefficient);
  double coefficient(const std::string& word) const;

 private:
  int n_qubits_ = 0;
  double tolerance_ = 0.0;
  std::map<PauliWord, double> terms_;
};

inline constexpr double kDefaultDropTolerance = 1e-12;

/// A_w = 2^-n Tr[P_w H] for every word with an even number of Y letters.
PauliSum decompose(const Matrix& matrix, double tolerance = kDefaultDropTolerance);

Matrix reconstruct(const PauliSum& sum);

/// sum_w A_w <psi|P_w|psi>.
double expectation(const PauliSum& sum, const ComplexVector& state);

std::size_t term_count(const PauliSum& sum);

/// One `<word> <coefficient>` line per term.
void write_terms(std::ostream& out, const PauliSum& sum);

}  // namespace dvrvqe::pauli
