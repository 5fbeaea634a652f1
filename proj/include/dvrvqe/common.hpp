#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dvrvqe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

/// Bad input: sizes, ranges, malformed files.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Request exceeds what dense 2^n x 2^n storage can serve.
class ResourceLimit : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// An internal consistency check failed; indicates a bug, not bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Atomic units throughout: hbar = 1, hartree, bohr, electron mass.
namespace units {
inline constexpr double kHartreeToWavenumber = 219474.6313632;  // cm^-1
inline constexpr double kAmuToElectronMass = 1822.888486209;

inline constexpr double to_wavenumber(double hartree) { return hartree * kHartreeToWavenumber; }
inline constexpr double from_wavenumber(double cm1) { return cm1 / kHartreeToWavenumber; }
inline constexpr double amu_to_me(double amu) { return amu * kAmuToElectronMass; }
}  // namespace units

inline constexpr int kMaxQubits = 14;

/// Returns n when dim == 2^n, otherwise -1.
inline int log2_exact(std::int64_t dim) {
  if (dim <= 0 || (dim & (dim - 1)) != 0) return -1;
  int n = 0;
  while ((std::int64_t{1} << n) < dim) ++n;
  return n;
}

/// Smallest p with 2^p >= value (value >= 1).
inline int ceil_log2(std::int64_t value) {
  int p = 0;
  while ((std::int64_t{1} << p) < value) ++p;
  return p;
}

}  // namespace dvrvqe
