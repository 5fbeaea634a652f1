#include <doctest.h>

#include "dvrvqe/dvr.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace dvrvqe;
using namespace dvrvqe::dvr;

namespace {

constexpr double kPi = std::numbers::pi;

GridParams infinite(double x_min, double dx) {
  GridParams p;
  p.x_min = x_min;
  p.dx = dx;
  return p;
}

GridParams half(double dx) {
  GridParams p;
  p.dx = dx;
  return p;
}

GridParams finite(double a, double b) {
  GridParams p;
  p.a = a;
  p.b = b;
  return p;
}

double inv_sin2(double x) {
  const double s = std::sin(x);
  return 1.0 / (s * s);
}

// Morse system on a grid converged to ~1e-10 cm^-1 for v <= 5.
const Morse kMorse{0.07, 1.0, 2.5};
constexpr double kMorseMass = 2000.0;
GridSpec morse_grid() { return build_grid(GridVariant::Infinite, infinite(1.2, 5.8 / 128.0), 7, kMorseMass); }

double morse_level(int v) {
  const double omega = kMorse.range * std::sqrt(2.0 * kMorse.well_depth / kMorseMass);
  const double x = v + 0.5;
  return -kMorse.well_depth + omega * x - omega * omega * x * x / (4.0 * kMorse.well_depth);
}

Vector random_unit(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (auto& x : v) x = normal(rng);
  return v.normalized();
}

}  // namespace

TEST_CASE("grid construction") {
  SUBCASE("finite grid keeps interior points") {
    auto g = build_grid(GridVariant::Finite, finite(0.0, 1.0), 2, 0.5);
    REQUIRE(g.size() == 4);
    CHECK(g.dx == doctest::Approx(0.2).epsilon(1e-15));
    for (int j = 0; j < 4; ++j) CHECK(g.points[j] == doctest::Approx(0.2 * (j + 1)).epsilon(1e-15));
    CHECK(g.kinetic_scale == doctest::Approx(1.0 / (0.2 * 0.2)));
  }
  SUBCASE("infinite grid starts at x_min") {
    auto g = build_grid(GridVariant::Infinite, infinite(0.0, 1.0), 1, 0.5);
    CHECK(g.points == std::vector<double>{0.0, 1.0});
    CHECK(g.kinetic_scale == 1.0);
  }
  SUBCASE("half-infinite grid skips the origin") {
    auto g = build_grid(GridVariant::HalfInfinite, half(0.05), 5, units::amu_to_me(1.9));
    CHECK(g.size() == 32);
    CHECK(g.points.front() == doctest::Approx(0.05));
    CHECK(g.points.back() == doctest::Approx(1.6));
  }
  SUBCASE("points strictly increasing with uniform spacing") {
    for (auto variant : {GridVariant::Infinite, GridVariant::HalfInfinite, GridVariant::Finite}) {
      GridParams p;
      p.x_min = -1.0;
      p.dx = 0.3;
      p.a = -2.0;
      p.b = 3.0;
      auto g = build_grid(variant, p, 5, 3.0);
      for (std::size_t i = 1; i < g.size(); ++i) CHECK(g.points[i] - g.points[i - 1] == doctest::Approx(g.dx));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_grid(GridVariant::Infinite, infinite(0.0, 0.0), 2, 1.0), InvalidArgument);
    CHECK_THROWS_AS(build_grid(GridVariant::HalfInfinite, half(-1.0), 2, 1.0), InvalidArgument);
    CHECK_THROWS_AS(build_grid(GridVariant::Finite, finite(1.0, 1.0), 2, 1.0), InvalidArgument);
    CHECK_THROWS_AS(build_grid(GridVariant::Infinite, infinite(0.0, 1.0), 2, 0.0), InvalidArgument);
    CHECK_THROWS_AS(build_grid(GridVariant::Infinite, infinite(0.0, 1.0), 0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(build_grid(GridVariant::Infinite, infinite(0.0, 1.0), 15, 1.0), ResourceLimit);
  }
}

TEST_CASE("kinetic matrix elements") {
  SUBCASE("infinite n=1") {
    auto t = kinetic_matrix(build_grid(GridVariant::Infinite, infinite(0.0, 1.0), 1, 0.5));
    CHECK(t(0, 0) == doctest::Approx(kPi * kPi / 3.0).epsilon(1e-15));
    CHECK(t(1, 1) == doctest::Approx(kPi * kPi / 3.0).epsilon(1e-15));
    CHECK(t(0, 1) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(t(1, 0) == doctest::Approx(-2.0).epsilon(1e-15));
  }
  SUBCASE("half-infinite (1,2) element") {
    auto t = kinetic_matrix(build_grid(GridVariant::HalfInfinite, half(1.0), 2, 0.5));
    CHECK(t(0, 1) == doctest::Approx(-16.0 / 9.0).epsilon(1e-15));
    CHECK(t(0, 0) == doctest::Approx(kPi * kPi / 3.0 - 0.5).epsilon(1e-15));
  }
  SUBCASE("finite lattice matches the sine-basis spectrum") {
    // Particle in a box of length 1 with hbar^2/2m = 1: E_k = pi^2 k^2.
    for (int n = 1; n <= 6; ++n) {
      auto grid = build_grid(GridVariant::Finite, finite(0.0, 1.0), n, 0.5);
      auto ev = classical_spectrum(kinetic_matrix(grid), 1 << n);
      for (int k = 1; k <= (1 << n); ++k) {
        const double exact = kPi * kPi * k * k;
        CHECK(std::abs(ev(k - 1) - exact) <= 1e-10 * exact);
      }
    }
  }
  SUBCASE("symmetric for every variant") {
    for (auto variant : {GridVariant::Infinite, GridVariant::HalfInfinite, GridVariant::Finite}) {
      for (int n = 1; n <= 7; ++n) {
        GridParams p;
        p.x_min = 0.5;
        p.dx = 0.17;
        p.a = 0.0;
        p.b = 4.0;
        auto t = kinetic_matrix(build_grid(variant, p, n, 7.0));
        CHECK((t - t.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * t.cwiseAbs().maxCoeff());
      }
    }
  }
}

TEST_CASE("band profile") {
  SUBCASE("infinite values") {
    auto p = band_profile(build_grid(GridVariant::Infinite, infinite(0.0, 1.0), 3, 0.5));
    CHECK(p.f(1) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(p.f(2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.f(3) == doctest::Approx(-2.0 / 9.0).epsilon(1e-15));
    CHECK(p.g.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("half-infinite g is the residual after removing f") {
    auto grid = build_grid(GridVariant::HalfInfinite, half(1.0), 4, 0.5);
    auto t = kinetic_matrix(grid);
    auto p = band_profile(grid);
    // (iota, iota') = (1, 2): residual -(-1)^1 * 2/9 at anti-diagonal i + j = 1.
    CHECK(p.g(1) == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        if (i == j) continue;
        const double residual = t(i, j) - p.f(std::abs(i - j));
        CHECK(residual == doctest::Approx(p.g(i + j)).epsilon(1e-13));
      }
    }
  }
  SUBCASE("finite f and g follow inverse squared sines") {
    const int n = 4;
    auto grid = build_grid(GridVariant::Finite, finite(-1.0, 2.0), n, 3.0);
    auto p = band_profile(grid);
    const double big_n = (1 << n) + 1;
    const double c = grid.kinetic_scale * kPi * kPi / (2.0 * big_n * big_n);
    for (int k = 1; k < (1 << n); ++k)
      CHECK(std::abs(p.f(k)) == doctest::Approx(c * inv_sin2(kPi * k / (2.0 * big_n))).epsilon(1e-13));
    for (Eigen::Index m = 0; m < p.g.size(); ++m)
      CHECK(std::abs(p.g(m)) == doctest::Approx(c * inv_sin2(kPi * double(m + 2) / (2.0 * big_n))).epsilon(1e-13));
  }
  SUBCASE("reconstruction for every variant, n <= 7") {
    for (auto variant : {GridVariant::Infinite, GridVariant::HalfInfinite, GridVariant::Finite}) {
      for (int n = 1; n <= 7; ++n) {
        GridParams params;
        params.x_min = -3.0;
        params.dx = 0.21;
        params.a = -3.0;
        params.b = 5.0;
        auto grid = build_grid(variant, params, n, 1.7);
        auto t = kinetic_matrix(grid);
        auto rebuilt = band_profile(grid).to_matrix();
        CHECK((t - rebuilt).cwiseAbs().maxCoeff() <= 1e-14 * t.cwiseAbs().maxCoeff());
      }
    }
  }
}

TEST_CASE("tail sums") {
  auto p = band_profile(build_grid(GridVariant::Infinite, infinite(0.0, 1.0), 4, 0.5));
  SUBCASE("F_2 by exact summation") {
    // 2 * sum_{k=2}^{15} 1/k^2 as an exact fraction.
    const double exact = 1.1608805668899742;
    CHECK(tail_sums(p, 2, 0).band == doctest::Approx(exact).epsilon(1e-14));
    CHECK(tail_sums(p, 2, 0).band < 1.5);
  }
  SUBCASE("last band only") { CHECK(tail_sums(p, 15, 0).band == doctest::Approx(2.0 / 225.0).epsilon(1e-15)); }
  SUBCASE("g vanishes on the infinite lattice") {
    for (int r = 0; r <= 16; ++r) CHECK(tail_sums(p, 1, r).antidiagonal == 0.0);
  }
  SUBCASE("full retention") {
    CHECK(tail_sums(p, 16, 16).band == 0.0);
    CHECK(truncation_error_bound(p, 16, 16) == 0.0);
  }
  SUBCASE("bound is 2F_s + G_r") {
    auto hp = band_profile(build_grid(GridVariant::HalfInfinite, half(0.1), 4, 3.0));
    auto sums = tail_sums(hp, 3, 2);
    CHECK(truncation_error_bound(hp, 3, 2) == doctest::Approx(2.0 * sums.band + sums.antidiagonal));
    CHECK(truncation_error_bound(p, 2, 5) == doctest::Approx(2.0 * 1.1608805668899742).epsilon(1e-14));
  }
  SUBCASE("range errors") {
    CHECK_THROWS_AS(tail_sums(p, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(tail_sums(p, 17, 1), InvalidArgument);
    CHECK_THROWS_AS(tail_sums(p, 2, -1), InvalidArgument);
    CHECK_THROWS_AS(tail_sums(p, 2, 17), InvalidArgument);
  }
}

TEST_CASE("potential on grid") {
  GridSpec g = build_grid(GridVariant::Infinite, infinite(2.5, 0.25), 2, 1.0);
  CHECK(potential_on_grid(kMorse, g)(0) == doctest::Approx(-kMorse.well_depth).epsilon(1e-15));
  CHECK(potential_on_grid(Harmonic{3.0, 2.5}, g)(0) == 0.0);
  CHECK(evaluate(Tabulated{{{0.0, 0.0}, {1.0, 2.0}}}, 0.5) == doctest::Approx(1.0));
  CHECK(evaluate(kMorse, 1e6) == doctest::Approx(0.0));

  std::istringstream text("# x V\n0 0\n\n1 2\n2 0\n");
  auto table = read_tabulated(text);
  CHECK(table.samples.size() == 3);
  CHECK(evaluate(table, 1.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(potential_on_grid(table, g), InvalidArgument);
  try {
    potential_on_grid(table, g);
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("2.5") != std::string::npos);
  }
  std::istringstream unsorted("0 0\n0 1\n");
  CHECK_THROWS_AS(read_tabulated(unsorted), InvalidArgument);
}

TEST_CASE("assembled Hamiltonians") {
  SUBCASE("zero potential") {
    auto grid = build_grid(GridVariant::HalfInfinite, half(0.1), 3, 2.0);
    auto h = assemble(grid, Tabulated{{{0.0, 0.0}, {10.0, 0.0}}});
    CHECK((h.full - h.kinetic).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("profile absorbs the potential") {
    auto h = assemble(morse_grid(), kMorse);
    CHECK((h.profile.to_matrix() - h.full).cwiseAbs().maxCoeff() <= 1e-14 * h.full.cwiseAbs().maxCoeff());
  }
  SUBCASE("harmonic oscillator levels") {
    const double k = 1.0, m = 1.0;
    auto h = assemble(build_grid(GridVariant::Infinite, infinite(-7.875, 0.25), 6, m), Harmonic{k, 0.0});
    const double omega = std::sqrt(k / m);
    auto ev = classical_spectrum(h.full, 6);
    for (int v = 0; v <= 5; ++v) {
      const double exact = omega * (v + 0.5);
      CHECK(std::abs(ev(v) - exact) <= 1e-6 * exact);
    }
  }
  SUBCASE("Morse levels at a converged grid") {
    auto h = assemble(morse_grid(), kMorse);
    auto ev = classical_spectrum(h.full, 6);
    for (int v = 0; v <= 5; ++v) CHECK(std::abs(units::to_wavenumber(ev(v) - morse_level(v))) < 0.01);
  }
}

TEST_CASE("truncation") {
  auto h = assemble(build_grid(GridVariant::HalfInfinite, half(0.2), 4, 100.0), Harmonic{0.3, 1.5});
  SUBCASE("full retention is the identity map") { CHECK((truncate(h, 16, 16) - h.full).cwiseAbs().maxCoeff() == 0.0); }
  SUBCASE("s = 1 keeps the diagonal only") {
    Matrix t = truncate(h, 1, 0);
    CHECK((Matrix(t.diagonal().asDiagonal()) - t).cwiseAbs().maxCoeff() == 0.0);
    CHECK((t.diagonal() - h.full.diagonal()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("bound dominates the expectation error on random states") {
    std::mt19937_64 rng(7);
    for (auto [s, r] : {std::pair{1, 0}, {2, 1}, {3, 4}, {8, 2}, {5, 16}}) {
      Matrix diff = h.full - truncate(h, s, r);
      const double bound = truncation_error_bound(h.profile, s, r);
      for (int t = 0; t < 100; ++t) {
        Vector psi = random_unit(rng, 16);
        CHECK(std::abs(psi.dot(diff * psi)) <= bound + 1e-12);
      }
    }
  }
  SUBCASE("inner-only window drops the outer anti-diagonals") {
    Matrix both = truncate(h.profile, 16, 3);
    Matrix inner = truncate(h.profile, 16, 3, AntiDiagonalWindow::InnerOnly);
    CHECK(both(15, 15) == inner(15, 15));
    CHECK(both(14, 15) != inner(14, 15));
    CHECK(both(0, 1) == inner(0, 1));
  }
}

TEST_CASE("classical spectrum") {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  auto ev = classical_spectrum(x, 2);
  CHECK(ev(0) == doctest::Approx(-1.0));
  CHECK(ev(1) == doctest::Approx(1.0));
  Matrix bad(2, 2);
  bad << 0, 1, 0, 0;
  CHECK_THROWS_AS(classical_spectrum(bad, 1), InvalidArgument);
  CHECK(gershgorin_upper(x) == 1.0);
}

// Inequalities from the decay analysis of the kinetic matrix.

TEST_CASE("band tail bound F_s < 3 E_T / s") {
  for (auto variant : {GridVariant::Infinite, GridVariant::HalfInfinite}) {
    for (int n = 1; n <= 10; ++n) {
      GridParams params;
      params.dx = 0.1;
      auto grid = build_grid(variant, params, n, 50.0);
      auto p = band_profile(grid);
      // Running suffix sums: one pass per n.
      double tail = 0.0;
      for (int s = (1 << n) - 1; s >= 2; --s) {
        tail += std::abs(p.f(s));
        CHECK(tail < 3.0 * grid.kinetic_scale / s);
      }
    }
  }
}

TEST_CASE("finite-lattice cotangent bound") {
  for (int big_n = 3; big_n <= 1025; ++big_n) {
    double tail = 0.0;
    bool ok = true;
    for (int s = big_n - 1; s >= 2; --s) {
      tail += inv_sin2(kPi * s / (2.0 * big_n));
      const double bound = (2.0 * big_n / kPi) / std::tan(kPi * (s - 1) / (2.0 * big_n));
      ok = ok && tail < bound;
    }
    CHECK_MESSAGE(ok, "N = " << big_n);
  }
}

TEST_CASE("inverse squared sine reflection identity") {
  // Reflection k -> 2N - k pairs the terms below and above N; k = N contributes 1.
  for (int n = 1; n <= 10; ++n) {
    const int big_n = 1 << n;
    for (int r = 1; r < big_n; ++r) {
      double lhs = 0.0, half_sum = 0.0;
      for (int k = r; k <= 2 * big_n - r; ++k) lhs += inv_sin2(kPi * k / (2.0 * big_n));
      for (int k = r; k <= big_n - 1; ++k) half_sum += inv_sin2(kPi * k / (2.0 * big_n));
      const double rhs = 1.0 + 2.0 * half_sum;
      CHECK(std::abs(lhs - rhs) <= 1e-9 * rhs);
      // Stopping one short at 2N - 1 - r loses exactly the k = 2N - r term.
      const double short_lhs = lhs - inv_sin2(kPi * (2 * big_n - r) / (2.0 * big_n));
      CHECK(std::abs((rhs - short_lhs) - inv_sin2(kPi * r / (2.0 * big_n))) <= 1e-9 * rhs);
    }
  }
}

TEST_CASE("truncated spectra approach the full spectrum as s grows") {
  auto h = assemble(build_grid(GridVariant::Infinite, infinite(2.85, 0.08), 4, units::amu_to_me(26.0)),
                    Morse{0.055, 1.44, 3.17});
  const Vector exact = classical_spectrum(h.full, 16);
  double previous = std::numeric_limits<double>::infinity();
  for (int s = 1; s <= 16; ++s) {
    const Vector approx = classical_spectrum(truncate(h, s, 16), 16);
    const double dev = (approx - exact).cwiseAbs().maxCoeff();
    CHECK_MESSAGE(dev <= previous + 1e-12, "s = " << s << " deviation " << dev << " previous " << previous);
    previous = dev;
  }
  CHECK(previous == 0.0);
}

TEST_CASE("csv export") {
  Matrix m(2, 2);
  m << 1, 0.5, 0.5, -2;
  std::ostringstream out;
  write_csv(out, m);
  CHECK(out.str() == "1,0.5\n0.5,-2\n");
  CHECK(to_string(parse_variant("half-infinite")) == "half-infinite");
  CHECK_THROWS_AS(parse_variant("torus"), InvalidArgument);
}
