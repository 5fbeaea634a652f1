#include "dvrvqe/dvr.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace dvrvqe::dvr {

namespace {

constexpr double kPi = std::numbers::pi;

double sign_of_parity(long long k) { return (k % 2 == 0) ? 1.0 : -1.0; }

double inv_sin2(double angle) {
  const double s = std::sin(angle);
  return 1.0 / (s * s);
}

// Finite lattice: number of divisions of [a, b].
long long finite_divisions(const GridSpec& grid) {
  return static_cast<long long>(grid.size()) + 1;
}

}  // namespace

std::string to_string(GridVariant variant) {
  switch (variant) {
    case GridVariant::Infinite:
      return "infinite";
    case GridVariant::HalfInfinite:
      return "half-infinite";
    case GridVariant::Finite:
      return "finite";
  }
  return "?";
}

GridVariant parse_variant(const std::string& name) {
  if (name == "infinite") return GridVariant::Infinite;
  if (name == "half-infinite" || name == "half_infinite" || name == "radial")
    return GridVariant::HalfInfinite;
  if (name == "finite") return GridVariant::Finite;
  throw InvalidArgument("unknown grid variant '" + name + "'");
}

GridSpec build_grid(GridVariant variant, const GridParams& params, int n_qubits, double mass) {
  if (n_qubits < 1) throw InvalidArgument("n_qubits must be >= 1");
  if (n_qubits > kMaxQubits)
    throw ResourceLimit("n_qubits = " + std::to_string(n_qubits) + " exceeds the dense limit of " +
                        std::to_string(kMaxQubits));
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");

  GridSpec grid;
  grid.variant = variant;
  grid.n_qubits = n_qubits;
  grid.mass = mass;
  grid.params = params;
  const std::size_t count = std::size_t{1} << n_qubits;
  grid.points.resize(count);

  switch (variant) {
    case GridVariant::Finite: {
      if (!(params.b > params.a)) throw InvalidArgument("finite grid requires b > a");
      grid.dx = (params.b - params.a) / static_cast<double>(count + 1);
      for (std::size_t j = 0; j < count; ++j)
        grid.points[j] = params.a + static_cast<double>(j + 1) * grid.dx;
      break;
    }
    case GridVariant::HalfInfinite: {
      if (!(params.dx > 0.0)) throw InvalidArgument("grid spacing dx must be positive");
      grid.dx = params.dx;
      for (std::size_t j = 0; j < count; ++j) grid.points[j] = static_cast<double>(j + 1) * grid.dx;
      break;
    }
    case GridVariant::Infinite: {
      if (!(params.dx > 0.0)) throw InvalidArgument("grid spacing dx must be positive");
      grid.dx = params.dx;
      for (std::size_t j = 0; j < count; ++j)
        grid.points[j] = params.x_min + static_cast<double>(j) * grid.dx;
      break;
    }
  }
  grid.kinetic_scale = 1.0 / (2.0 * mass * grid.dx * grid.dx);
  return grid;
}

double evaluate(const PotentialModel& potential, double x) {
  return std::visit(
      [x](const auto& model) -> double {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, Harmonic>) {
          const double dx = x - model.center;
          return 0.5 * model.force_constant * dx * dx;
        } else if constexpr (std::is_same_v<T, Morse>) {
          const double e = 1.0 - std::exp(-model.range * (x - model.equilibrium));
          return model.well_depth * (e * e - 1.0);
        } else {
          const auto& s = model.samples;
          if (s.empty()) throw InvalidArgument("empty tabulated potential");
          if (x < s.front().first || x > s.back().first) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "grid point x = %.17g outside tabulated range [%.17g, %.17g]", x,
                          s.front().first, s.back().first);
            throw InvalidArgument(buf);
          }
          auto hi = std::lower_bound(s.begin(), s.end(), x,
                                     [](const auto& p, double v) { return p.first < v; });
          if (hi->first == x) return hi->second;
          auto lo = hi - 1;
          const double t = (x - lo->first) / (hi->first - lo->first);
          return lo->second + t * (hi->second - lo->second);
        }
      },
      potential);
}

Tabulated read_tabulated(std::istream& in) {
  Tabulated table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    double x = 0.0, v = 0.0;
    if (!(fields >> x >> v))
      throw InvalidArgument("tabulated potential line " + std::to_string(lineno) + ": expected 'x V'");
    if (!table.samples.empty() && !(x > table.samples.back().first))
      throw InvalidArgument("tabulated potential line " + std::to_string(lineno) +
                            ": x values must be strictly increasing");
    table.samples.emplace_back(x, v);
  }
  if (table.samples.size() < 2) throw InvalidArgument("tabulated potential needs at least two samples");
  return table;
}

Tabulated read_tabulated_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open tabulated potential '" + path + "'");
  return read_tabulated(in);
}

Matrix BandProfile::to_matrix() const {
  const auto n = static_cast<Eigen::Index>(dim());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = (i == j) ? d(i) : f(std::abs(i - j)) + g(i + j);
    }
  }
  return m;
}

Matrix kinetic_matrix(const GridSpec& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double et = grid.kinetic_scale;
  Matrix t(n, n);
  switch (grid.variant) {
    case GridVariant::Infinite:
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          const double k = static_cast<double>(i - j);
          t(i, j) = (i == j) ? et * kPi * kPi / 3.0 : et * sign_of_parity(i - j) * 2.0 / (k * k);
        }
      }
      break;
    case GridVariant::HalfInfinite:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double ii = static_cast<double>(i + 1);
        for (Eigen::Index j = 0; j < n; ++j) {
          const double jj = static_cast<double>(j + 1);
          if (i == j) {
            t(i, j) = et * (kPi * kPi / 3.0 - 1.0 / (2.0 * ii * ii));
          } else {
            t(i, j) = et * sign_of_parity(i - j) *
                      (2.0 / ((ii - jj) * (ii - jj)) - 2.0 / ((ii + jj) * (ii + jj)));
          }
        }
      }
      break;
    case GridVariant::Finite: {
      const long long big_n = finite_divisions(grid);
      const double nn = static_cast<double>(big_n);
      const double length = grid.params.b - grid.params.a;
      const double pref = (1.0 / (2.0 * grid.mass)) / (length * length) * kPi * kPi / 2.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double ii = static_cast<double>(i + 1);
        for (Eigen::Index j = 0; j < n; ++j) {
          const double jj = static_cast<double>(j + 1);
          if (i == j) {
            t(i, j) = pref * ((2.0 * nn * nn + 1.0) / 3.0 - inv_sin2(kPi * jj / nn));
          } else {
            t(i, j) = pref * sign_of_parity(i - j) *
                      (inv_sin2(kPi * (ii - jj) / (2.0 * nn)) - inv_sin2(kPi * (ii + jj) / (2.0 * nn)));
          }
        }
      }
      break;
    }
  }
  return t;
}

BandProfile band_profile(const GridSpec& grid) {
  const auto dim = static_cast<Eigen::Index>(grid.size());
  const double et = grid.kinetic_scale;
  BandProfile p;
  p.n_qubits = grid.n_qubits;
  p.d = Vector::Zero(dim);
  p.f = Vector::Zero(dim);
  p.g = Vector::Zero(2 * dim - 1);

  switch (grid.variant) {
    case GridVariant::Infinite:
      p.d.setConstant(et * kPi * kPi / 3.0);
      for (Eigen::Index k = 1; k < dim; ++k) p.f(k) = et * sign_of_parity(k) * 2.0 / double(k * k);
      break;
    case GridVariant::HalfInfinite:
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double ii = static_cast<double>(i + 1);
        p.d(i) = et * (kPi * kPi / 3.0 - 1.0 / (2.0 * ii * ii));
      }
      for (Eigen::Index k = 1; k < dim; ++k) p.f(k) = et * sign_of_parity(k) * 2.0 / double(k * k);
      // (-1)^(i-j) == (-1)^(i+j), so the sign folds into g.
      for (Eigen::Index m = 0; m < p.g.size(); ++m) {
        const double sum = static_cast<double>(m + 2);
        p.g(m) = -et * sign_of_parity(m) * 2.0 / (sum * sum);
      }
      break;
    case GridVariant::Finite: {
      const double nn = static_cast<double>(finite_divisions(grid));
      const double pref = et * kPi * kPi / (2.0 * nn * nn);
      for (Eigen::Index i = 0; i < dim; ++i) {
        p.d(i) = pref * ((2.0 * nn * nn + 1.0) / 3.0 - inv_sin2(kPi * double(i + 1) / nn));
      }
      for (Eigen::Index k = 1; k < dim; ++k)
        p.f(k) = pref * sign_of_parity(k) * inv_sin2(kPi * double(k) / (2.0 * nn));
      for (Eigen::Index m = 0; m < p.g.size(); ++m)
        p.g(m) = -pref * sign_of_parity(m) * inv_sin2(kPi * double(m + 2) / (2.0 * nn));
      break;
    }
  }

  const Matrix direct = kinetic_matrix(grid);
  const Matrix rebuilt = p.to_matrix();
  const double scale = std::max(direct.cwiseAbs().maxCoeff(), 1e-300);
  const double err = (direct - rebuilt).cwiseAbs().maxCoeff();
  if (err > 1e-13 * scale) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "band profile does not reconstruct the kinetic matrix (max dev %.3e)", err);
    throw InvariantViolation(buf);
  }
  return p;
}

bool antidiagonal_retained(std::size_t num_antidiagonals, std::size_t m, int r, AntiDiagonalWindow window) {
  if (r <= 0) return false;
  const auto width = static_cast<std::size_t>(r);
  if (m < width) return true;
  const std::size_t last = num_antidiagonals - 1;  // 2^(n+1) - 2
  return window == AntiDiagonalWindow::InnerAndOuter && m + width > last;
}

TailSums tail_sums(const BandProfile& profile, int s, int r, AntiDiagonalWindow window) {
  const auto dim = static_cast<int>(profile.dim());
  if (s < 1 || s > dim) throw InvalidArgument("band cutoff s must lie in [1, 2^n]");
  if (r < 0 || r > dim) throw InvalidArgument("anti-diagonal width r must lie in [0, 2^n]");
  TailSums sums;
  for (int k = s; k < dim; ++k) sums.band += std::abs(profile.f(k));
  for (std::size_t m = 0; m < profile.num_antidiagonals(); ++m) {
    if (!antidiagonal_retained(profile.num_antidiagonals(), m, r, window)) sums.antidiagonal += std::abs(profile.g(static_cast<Eigen::Index>(m)));
  }
  return sums;
}

Vector potential_on_grid(const PotentialModel& potential, const GridSpec& grid) {
  Vector v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) v(static_cast<Eigen::Index>(i)) = evaluate(potential, grid.points[i]);
  return v;
}

DvrHamiltonian assemble(const GridSpec& grid, const PotentialModel& potential) {
  DvrHamiltonian h;
  h.grid = grid;
  h.kinetic = kinetic_matrix(grid);
  h.potential_diag = potential_on_grid(potential, grid);
  h.full = h.kinetic;
  h.full.diagonal() += h.potential_diag;
  h.profile = band_profile(grid);
  h.profile.d += h.potential_diag;
  return h;
}

Matrix truncate(const BandProfile& profile, int s, int r, AntiDiagonalWindow window) {
  const auto dim = static_cast<Eigen::Index>(profile.dim());
  Matrix t = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    t(i, i) = profile.d(i);
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (i == j) continue;
      double value = 0.0;
      if (std::abs(i - j) < s) value += profile.f(std::abs(i - j));
      if (antidiagonal_retained(profile.num_antidiagonals(), static_cast<std::size_t>(i + j), r, window))
        value += profile.g(i + j);
      t(i, j) = value;
    }
  }
  return t;
}

Matrix truncate(const DvrHamiltonian& hamiltonian, int s, int r) { return truncate(hamiltonian.profile, s, r); }

double truncation_error_bound(const BandProfile& profile, int s, int r, AntiDiagonalWindow window) {
  const TailSums sums = tail_sums(profile, s, r, window);
  return 2.0 * sums.band + sums.antidiagonal;
}

Vector classical_spectrum(const Matrix& hamiltonian, int count) {
  if (hamiltonian.rows() != hamiltonian.cols()) throw InvalidArgument("matrix is not square");
  const double scale = std::max(hamiltonian.cwiseAbs().maxCoeff(), 1.0);
  if ((hamiltonian - hamiltonian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("matrix is not symmetric");
  if (count < 0) throw InvalidArgument("eigenvalue count must be non-negative");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hamiltonian, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw InvariantViolation("symmetric eigensolver failed");
  const auto take = std::min<Eigen::Index>(count, solver.eigenvalues().size());
  return solver.eigenvalues().head(take);
}

double gershgorin_upper(const Matrix& hamiltonian) {
  double upper = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < hamiltonian.rows(); ++i) {
    const double radius = hamiltonian.row(i).cwiseAbs().sum() - std::abs(hamiltonian(i, i));
    upper = std::max(upper, hamiltonian(i, i) + radius);
  }
  return upper;
}

void write_csv(std::ostream& out, const Matrix& matrix) {
  char buf[40];
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", matrix(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace dvrvqe::dvr
