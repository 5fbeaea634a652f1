#include <doctest.h>

#include "dvrvqe/dvr.hpp"
#include "dvrvqe/vqe.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace dvrvqe;
using namespace dvrvqe::vqe;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix pauli_z() {
  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}

Matrix morse16() {
  dvr::GridParams p;
  p.x_min = 2.85;
  p.dx = 0.08;
  return dvr::assemble(dvr::build_grid(dvr::GridVariant::Infinite, p, 4, units::amu_to_me(26.0)),
                       dvr::Morse{0.055, 1.44, 3.17})
      .full;
}

Matrix random_symmetric(std::mt19937_64& rng, Eigen::Index dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(dim, dim);
  for (auto& x : m.reshaped()) x = u(rng);
  return 0.5 * (m + m.transpose());
}

std::vector<double> random_params(std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> u(-kPi, kPi);
  std::vector<double> p(static_cast<std::size_t>(count));
  for (auto& x : p) x = u(rng);
  return p;
}

double lowest(const Matrix& h) { return dvr::classical_spectrum(h, 1)(0); }

}  // namespace

TEST_CASE("ansatz layout") {
  auto spec = AnsatzSpec::linear(3, 2);
  CHECK(spec.num_params() == 9);
  CHECK(spec.num_entanglers() == 4);
  auto c = spec.circuit();
  std::ostringstream text;
  sv::write_circuit(text, c);
  CHECK(text.str() ==
        "qubits 3 slots 9\nry 0 0\nry 1 1\nry 2 2\ncnot 0 1\ncnot 1 2\nry 0 3\nry 1 4\nry 2 5\ncnot 0 1\ncnot 1 2\n"
        "ry 0 6\nry 1 7\nry 2 8\n");
  auto back = AnsatzSpec::from_circuit(c);
  CHECK(back.blocks == 2);
  CHECK(back.entanglers == spec.entanglers);

  auto custom = AnsatzSpec::empty(3, 2);
  custom.entanglers[1].push_back({2, 0});
  CHECK(AnsatzSpec::from_circuit(custom.circuit()).entanglers == custom.entanglers);

  auto bad = AnsatzSpec::empty(2, 1);
  bad.entanglers[0].push_back({1, 1});
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad.entanglers[0][0] = {0, 2};
  CHECK_THROWS_AS(bad.circuit(), InvalidArgument);

  sv::Circuit stray(2, 4);
  stray.cnot(0, 1).ry(0, 0).ry(1, 1).ry(0, 2).ry(1, 3);
  CHECK_THROWS_AS(AnsatzSpec::from_circuit(stray), InvalidArgument);
}

TEST_CASE("objective") {
  const auto ansatz = AnsatzSpec::empty(1, 0).circuit();
  ObjectiveConfig config{pauli_z(), {}};
  const double theta[] = {0.4};
  CHECK(objective(theta, ansatz, config) == doctest::Approx(std::cos(0.4)));
  SUBCASE("orthogonal reference adds nothing") {
    config.deflation.push_back({sv::QuantumState::basis(1, 1), 5.0});
    const double zero[] = {0.0};
    CHECK(objective(zero, ansatz, config) == doctest::Approx(1.0));
  }
  SUBCASE("identical reference adds beta") {
    config.deflation.push_back({sv::run(ansatz, theta), 10.0});
    CHECK(objective(theta, ansatz, config) == doctest::Approx(std::cos(0.4) + 10.0));
  }
  SUBCASE("errors") {
    const double two[] = {0.1, 0.2};
    CHECK_THROWS_AS(objective(two, ansatz, config), InvalidArgument);
    ObjectiveConfig wrong{Matrix::Identity(4, 4), {}};
    CHECK_THROWS_AS(objective(theta, ansatz, wrong), InvalidArgument);
    config.deflation.push_back({sv::QuantumState(1), 0.0});
    CHECK_THROWS_AS(objective(theta, ansatz, config), InvalidArgument);
  }
}

TEST_CASE("parameter-shift gradient") {
  SUBCASE("closed form for RY on Z") {
    const auto ansatz = AnsatzSpec::empty(1, 0).circuit();
    const double theta[] = {0.7};
    auto g = gradient(theta, ansatz, {pauli_z(), {}});
    CHECK(g[0] == doctest::Approx(-std::sin(0.7)).epsilon(1e-14));
  }
  SUBCASE("central differences at 50 random points") {
    std::mt19937_64 rng(77);
    auto spec = AnsatzSpec::empty(3, 2);
    spec.entanglers[0] = {{0, 1}, {2, 1}};
    spec.entanglers[1] = {{1, 2}, {0, 2}};
    const auto ansatz = spec.circuit();
    ObjectiveConfig config{random_symmetric(rng, 8), {}};
    config.deflation.push_back({sv::run(ansatz, random_params(rng, spec.num_params())), 0.8});
    const double h = 1e-5;
    double worst = 0.0;
    for (int point = 0; point < 50; ++point) {
      auto params = random_params(rng, spec.num_params());
      auto g = gradient(params, ansatz, config);
      for (std::size_t j = 0; j < params.size(); ++j) {
        auto plus = params, minus = params;
        plus[j] += h;
        minus[j] -= h;
        const double fd = (objective(plus, ansatz, config) - objective(minus, ansatz, config)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - g[j]));
      }
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("minimization") {
  OptimizerConfig options;
  SUBCASE("one qubit on Z") {
    auto r = minimize(AnsatzSpec::empty(1, 0), {pauli_z(), {}}, options);
    CHECK(r.energy == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(std::abs(std::abs(r.params[0]) - kPi) < 1e-3);
    CHECK(r.converged);
    CHECK(r.gradient_norm < options.gradient_tolerance * 10);
  }
  SUBCASE("random two-qubit matrix with the linear ansatz") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix h = random_symmetric(rng, 4);
      auto r = minimize(AnsatzSpec::linear(2, 2), {h, {}}, options);
      CHECK(std::abs(r.energy - lowest(h)) < 1e-6);
    }
  }
  SUBCASE("Morse, 16 points, linear k=3") {
    const Matrix h = morse16();
    auto r = minimize(AnsatzSpec::linear(4, 3), {h, {}}, options);
    CHECK(units::to_wavenumber(r.energy - lowest(h)) < 1.0);
    CHECK(r.energy >= lowest(h) - 1e-9);
  }
  SUBCASE("simplex") {
    options.method = Method::Simplex;
    auto r = minimize(AnsatzSpec::empty(1, 0), {pauli_z(), {}}, options);
    CHECK(r.energy == doctest::Approx(-1.0).epsilon(1e-8));
  }
  SUBCASE("budget exhaustion is reported, not thrown") {
    options.max_iterations = 1;
    options.restarts = 1;
    auto r = minimize(AnsatzSpec::linear(4, 3), {morse16(), {}}, options);
    CHECK_FALSE(r.converged);
  }
  SUBCASE("trace is non-increasing at accepted iterates") {
    std::mt19937_64 rng(8);
    const Matrix h = random_symmetric(rng, 8);
    for (auto method : {Method::QuasiNewton, Method::Simplex}) {
      options.method = method;
      auto r = minimize(AnsatzSpec::linear(3, 2), {h, {}}, options);
      for (std::size_t i = 1; i < r.trace.size(); ++i)
        CHECK_MESSAGE(r.trace[i].objective <= r.trace[i - 1].objective + 1e-12, "method " << int(method) << " iter " << i << " of " << r.trace.size());
      CHECK(r.energy >= lowest(h) - 1e-9);
    }
  }
  SUBCASE("deterministic across thread counts") {
    const Matrix h = morse16();
    options.threads = 1;
    auto a = minimize(AnsatzSpec::linear(4, 2), {h, {}}, options);
    options.threads = 4;
    auto b = minimize(AnsatzSpec::linear(4, 2), {h, {}}, options);
    CHECK(a.params == b.params);
    CHECK(a.restart == b.restart);
    options.seed = 2;
    auto c = minimize(AnsatzSpec::linear(4, 2), {h, {}}, options);
    CHECK(c.params != a.params);
  }
}

TEST_CASE("excited states") {
  OptimizerConfig options;
  SUBCASE("two-level diagonal") {
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = 1.0;
    auto levels = excited_states(AnsatzSpec::empty(1, 0), h, 1, options);
    REQUIRE(levels.size() == 2);
    CHECK(std::abs(levels[0].energy) < 1e-8);
    CHECK(std::abs(levels[1].energy - 1.0) < 1e-8);
    CHECK(levels[1].overlaps.size() == 1);
    CHECK(levels[1].overlaps[0] < 1e-3);
  }
  SUBCASE("deflation weight exceeds every gap") {
    const Matrix h = morse16();
    const auto ev = dvr::classical_spectrum(h, 16);
    for (int v = 0; v + 1 < 16; ++v) CHECK(deflation_beta(h, ev(v)) >= ev(v + 1) - ev(v));
  }
  SUBCASE("three-qubit random matrix") {
    std::mt19937_64 rng(12);
    const Matrix h = random_symmetric(rng, 8);
    const auto ev = dvr::classical_spectrum(h, 8);
    auto levels = excited_states(AnsatzSpec::linear(3, 3), h, 2, options);
    for (std::size_t v = 0; v < levels.size(); ++v) {
      CHECK(levels[v].energy >= ev(0) - 1e-9);
      bool orthogonal = true;
      for (double o : levels[v].overlaps) orthogonal = orthogonal && o < 1e-6;
      if (orthogonal && v > 0) CHECK(levels[v].energy >= ev(Eigen::Index(v)) - 1e-6);
    }
    CHECK(std::abs(levels[0].energy - ev(0)) < 1e-6);
  }
  SUBCASE("negative level count") { CHECK_THROWS_AS(excited_states(AnsatzSpec::empty(1, 0), pauli_z(), -1, options), InvalidArgument); }
}

TEST_CASE("trace export") {
  VqeResult r;
  r.trace = {{0, -0.5, -0.5}, {1, -1.0, -1.0}};
  std::ostringstream out;
  write_trace_csv(out, r);
  CHECK(out.str() ==
        "iter,objective,energy_hartree,energy_cm1\n0,-0.5,-0.5,-109737.3156816\n1,-1,-1,-219474.63136319999\n");
}
