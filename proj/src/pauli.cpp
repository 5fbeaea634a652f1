#include "dvrvqe/pauli.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace dvrvqe::pauli {

namespace {

double parity_sign(std::uint64_t bits) { return (std::popcount(bits) & 1) ? -1.0 : 1.0; }

}  // namespace

PauliWord::PauliWord(std::string letters) : letters_(std::move(letters)) {
  for (char c : letters_) {
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
      throw InvalidArgument("invalid Pauli letter '" + std::string(1, c) + "'");
  }
}

PauliWord PauliWord::from_masks(int n_qubits, std::uint64_t x_mask, std::uint64_t z_mask) {
  std::string letters(static_cast<std::size_t>(n_qubits), 'I');
  for (int q = 0; q < n_qubits; ++q) {
    const std::uint64_t bit = std::uint64_t{1} << (n_qubits - 1 - q);
    const bool x = x_mask & bit, z = z_mask & bit;
    letters[static_cast<std::size_t>(q)] = x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
  }
  PauliWord w;
  w.letters_ = std::move(letters);
  return w;
}

std::uint64_t PauliWord::x_mask() const {
  std::uint64_t mask = 0;
  const int n = num_qubits();
  for (int q = 0; q < n; ++q) {
    const char c = letters_[static_cast<std::size_t>(q)];
    if (c == 'X' || c == 'Y') mask |= std::uint64_t{1} << (n - 1 - q);
  }
  return mask;
}

std::uint64_t PauliWord::z_mask() const {
  std::uint64_t mask = 0;
  const int n = num_qubits();
  for (int q = 0; q < n; ++q) {
    const char c = letters_[static_cast<std::size_t>(q)];
    if (c == 'Z' || c == 'Y') mask |= std::uint64_t{1} << (n - 1 - q);
  }
  return mask;
}

int PauliWord::y_count() const {
  int count = 0;
  for (char c : letters_) count += (c == 'Y');
  return count;
}

void PauliSum::add(const PauliWord& word, double coefficient) {
  if (word.num_qubits() != n_qubits_) throw InvalidArgument("Pauli word length does not match the sum");
  const double total = terms_[word] + coefficient;
  if (std::abs(total) <= tolerance_) {
    terms_.erase(word);
  } else {
    terms_[word] = total;
  }
}

double PauliSum::coefficient(const std::string& word) const {
  auto it = terms_.find(PauliWord(word));
  return it == terms_.end() ? 0.0 : it->second;
}

// P_w |j> = i^{#Y} (-1)^{popcount(j & z)} |j ^ x>, so
// Tr[P_w H] = i^{#Y} sum_j (-1)^{popcount(j & z)} H(j, j ^ x).
// For real symmetric H the odd-#Y traces vanish identically.
PauliSum decompose(const Matrix& matrix, double tolerance) {
  if (matrix.rows() != matrix.cols()) throw InvalidArgument("matrix must be square");
  const int n = log2_exact(matrix.rows());
  if (n < 0) throw InvalidArgument("matrix dimension must be a power of two");
  if (tolerance < 0.0) throw InvalidArgument("drop tolerance must be non-negative");

  const std::uint64_t dim = std::uint64_t{1} << n;
  const double norm = 1.0 / static_cast<double>(dim);
  PauliSum sum(n, tolerance);
  for (std::uint64_t x = 0; x < dim; ++x) {
    for (std::uint64_t z = 0; z < dim; ++z) {
      const int ny = std::popcount(x & z);
      if (ny & 1) continue;
      double acc = 0.0;
      for (std::uint64_t j = 0; j < dim; ++j) {
        acc += parity_sign(j & z) * matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j ^ x));
      }
      const double phase = (ny / 2) % 2 ? -1.0 : 1.0;
      const double coeff = phase * acc * norm;
      if (std::abs(coeff) > tolerance) sum.add(PauliWord::from_masks(n, x, z), coeff);
    }
  }
  return sum;
}

Matrix reconstruct(const PauliSum& sum) {
  const int n = sum.num_qubits();
  const auto dim = static_cast<Eigen::Index>(std::int64_t{1} << n);
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& [word, coeff] : sum.terms()) {
    const std::uint64_t x = word.x_mask(), z = word.z_mask();
    const int ny = word.y_count();
    // Real matrices only: odd-Y words would contribute imaginary entries.
    if (ny & 1) throw InvalidArgument("odd-Y word " + word.str() + " has no real matrix");
    const double phase = (ny / 2) % 2 ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      const auto row = static_cast<Eigen::Index>(static_cast<std::uint64_t>(j) ^ x);
      m(row, j) += coeff * phase * parity_sign(static_cast<std::uint64_t>(j) & z);
    }
  }
  return m;
}

double expectation(const PauliSum& sum, const ComplexVector& state) {
  const auto dim = static_cast<Eigen::Index>(std::int64_t{1} << sum.num_qubits());
  if (state.size() != dim) throw InvalidArgument("state dimension does not match the Pauli sum");
  double total = 0.0;
  for (const auto& [word, coeff] : sum.terms()) {
    const std::uint64_t x = word.x_mask(), z = word.z_mask();
    const int ny = word.y_count();
    Complex phase = 1.0;
    for (int i = 0; i < ny % 4; ++i) phase *= Complex(0.0, 1.0);
    Complex acc = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      const auto row = static_cast<Eigen::Index>(static_cast<std::uint64_t>(j) ^ x);
      acc += std::conj(state(row)) * state(j) * parity_sign(static_cast<std::uint64_t>(j) & z);
    }
    total += coeff * (phase * acc).real();
  }
  return total;
}

std::size_t term_count(const PauliSum& sum) { return sum.terms().size(); }

void write_terms(std::ostream& out, const PauliSum& sum) {
  char buf[48];
  for (const auto& [word, coeff] : sum.terms()) {
    std::snprintf(buf, sizeof buf, "%.17e", coeff);
    out << word.str() << ' ' << buf << '\n';
  }
}

}  // namespace dvrvqe::pauli
