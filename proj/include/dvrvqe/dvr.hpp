#pragma once

// Colbert-Miller discrete variable representation on uniform grids of 2^n
// points, plus the band structure used by the measurement planner.

#include "dvrvqe/common.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dvrvqe::dvr {

enum class GridVariant { Infinite, HalfInfinite, Finite };

std::string to_string(GridVariant variant);
GridVariant parse_variant(const std::string& name);

/// Endpoint/spacing inputs; which fields are read depends on the variant.
struct GridParams {
  double a = 0.0;      // Finite
  double b = 0.0;      // Finite
  double x_min = 0.0;  // Infinite
  double dx = 0.0;     // Infinite, HalfInfinite
};

struct GridSpec {
  GridVariant variant = GridVariant::Infinite;
  int n_qubits = 0;
  double mass = 0.0;  // electron masses
  GridParams params;
  double dx = 0.0;
  std::vector<double> points;
  /// hbar^2 / (2 m dx^2), hartree.
  double kinetic_scale = 0.0;

  std::size_t size() const { return points.size(); }
};

/// Finite grids keep only the 2^n interior points of 2^n + 1 divisions of [a, b].
GridSpec build_grid(GridVariant variant, const GridParams& params, int n_qubits, double mass);

struct Harmonic {
  double force_constant = 0.0;
  double center = 0.0;
};

/// V(x) = D_e [(1 - exp(-a (x - r_e)))^2 - 1]; zero at dissociation.
struct Morse {
  double well_depth = 0.0;
  double range = 0.0;
  double equilibrium = 0.0;
};

/// Piecewise-linear interpolation of strictly increasing samples, no extrapolation.
struct Tabulated {
  std::vector<std::pair<double, double>> samples;
};

using PotentialModel = std::variant<Harmonic, Morse, Tabulated>;

double evaluate(const PotentialModel& potential, double x);

/// Two-column text (x, V); blank lines and '#' comments skipped.
Tabulated read_tabulated(std::istream& in);
Tabulated read_tabulated_file(const std::string& path);

/// d, f, g of H_ij = d(i) for i == j, f(|i-j|) + g(i+j) otherwise, with the
/// kinetic scale folded in. Indices are zero-based: f has 2^n entries (f[0]
/// unused), g has 2^(n+1) - 1 entries covering every anti-diagonal i + j.
struct BandProfile {
  int n_qubits = 0;
  Vector d;
  Vector f;
  Vector g;

  std::size_t dim() const { return static_cast<std::size_t>(d.size()); }
  std::size_t num_antidiagonals() const { return static_cast<std::size_t>(g.size()); }
  /// Dense matrix implied by the profile.
  Matrix to_matrix() const;
};

struct DvrHamiltonian {
  GridSpec grid;
  Matrix kinetic;
  Vector potential_diag;
  Matrix full;
  /// Profile of the full matrix: the diagonal d includes the potential.
  BandProfile profile;
};

Matrix kinetic_matrix(const GridSpec& grid);

/// Kinetic-only profile, checked against kinetic_matrix.
BandProfile band_profile(const GridSpec& grid);

/// Which anti-diagonals a truncation of width r keeps: the r inner ones
/// (m < r) and, unless InnerOnly, the r outer ones (m > 2^(n+1) - 2 - r).
enum class AntiDiagonalWindow { InnerAndOuter, InnerOnly };

struct TailSums {
  double band = 0.0;         // F_s = sum_{k>=s} |f(k)|
  double antidiagonal = 0.0; // G_r = sum over dropped anti-diagonals of |g|
};

bool antidiagonal_retained(std::size_t num_antidiagonals, std::size_t m, int r,
                           AntiDiagonalWindow window = AntiDiagonalWindow::InnerAndOuter);

/// s in [1, 2^n] (s = 2^n keeps every band); r in [0, 2^n].
TailSums tail_sums(const BandProfile& profile, int s, int r,
                   AntiDiagonalWindow window = AntiDiagonalWindow::InnerAndOuter);

Vector potential_on_grid(const PotentialModel& potential, const GridSpec& grid);

DvrHamiltonian assemble(const GridSpec& grid, const PotentialModel& potential);

/// Keeps band k = |i-j| only for k < s and anti-diagonal terms only inside the
/// retention window of width r; the diagonal (kinetic + potential) is kept whole.
Matrix truncate(const DvrHamiltonian& hamiltonian, int s, int r);
Matrix truncate(const BandProfile& profile, int s, int r,
                AntiDiagonalWindow window = AntiDiagonalWindow::InnerAndOuter);

/// Upper bound on |<psi|(H - H^(s,r))|psi>| for normalized psi: 2 F_s + G_r.
double truncation_error_bound(const BandProfile& profile, int s, int r,
                              AntiDiagonalWindow window = AntiDiagonalWindow::InnerAndOuter);

/// Lowest `count` eigenvalues, ascending. Throws InvalidArgument on asymmetric input.
Vector classical_spectrum(const Matrix& hamiltonian, int count);

/// Largest-eigenvalue upper bound from Gershgorin discs.
double gershgorin_upper(const Matrix& hamiltonian);

void write_csv(std::ostream& out, const Matrix& matrix);

}  // namespace dvrvqe::dvr
