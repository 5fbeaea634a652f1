#include <doctest.h>

#include "dvrvqe/dvr.hpp"
#include "dvrvqe/pauli.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace dvrvqe;
using namespace dvrvqe::pauli;

namespace {

using CMatrix = Eigen::MatrixXcd;

Matrix random_symmetric(std::mt19937_64& rng, Eigen::Index dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(dim, dim);
  for (auto& x : m.reshaped()) x = u(rng);
  return 0.5 * (m + m.transpose());
}

ComplexVector random_state(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> normal;
  ComplexVector v(dim);
  for (auto& x : v) x = Complex(normal(rng), normal(rng));
  return v.normalized();
}

CMatrix letter_matrix(char c) {
  CMatrix m(2, 2);
  const Complex i(0.0, 1.0);
  switch (c) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

// Kronecker product with letter 0 as the most significant factor.
CMatrix word_matrix(const std::string& word) {
  CMatrix m = CMatrix::Identity(1, 1);
  for (char c : word) {
    const CMatrix l = letter_matrix(c);
    CMatrix next(m.rows() * 2, m.cols() * 2);
    for (Eigen::Index a = 0; a < m.rows(); ++a)
      for (Eigen::Index b = 0; b < m.cols(); ++b) next.block(2 * a, 2 * b, 2, 2) = m(a, b) * l;
    m = next;
  }
  return m;
}

std::vector<std::string> all_words(int n) {
  std::vector<std::string> words{""};
  for (int q = 0; q < n; ++q) {
    std::vector<std::string> next;
    for (const auto& w : words)
      for (char c : std::string("IXYZ")) next.push_back(w + c);
    words = std::move(next);
  }
  return words;
}

// Independent brute-force trace over dense Kronecker products.
std::map<std::string, Complex> brute_force(const Matrix& h) {
  const int n = log2_exact(h.rows());
  std::map<std::string, Complex> out;
  for (const auto& w : all_words(n)) {
    out[w] = (word_matrix(w) * h.cast<Complex>()).trace() / double(h.rows());
  }
  return out;
}

dvr::DvrHamiltonian morse16() {
  dvr::GridParams p;
  p.x_min = 2.85;
  p.dx = 0.08;
  return dvr::assemble(dvr::build_grid(dvr::GridVariant::Infinite, p, 4, units::amu_to_me(26.0)),
                       dvr::Morse{0.055, 1.44, 3.17});
}

}  // namespace

TEST_CASE("words and masks") {
  PauliWord w("XYZI");
  CHECK(w.num_qubits() == 4);
  CHECK(w.x_mask() == 0b1100);
  CHECK(w.z_mask() == 0b0110);
  CHECK(w.y_count() == 1);
  CHECK(PauliWord::from_masks(4, 0b1100, 0b0110) == w);
  CHECK_THROWS_AS(PauliWord("XQ"), InvalidArgument);
}

TEST_CASE("small decompositions") {
  SUBCASE("identity") {
    auto s = decompose(Matrix::Identity(2, 2));
    CHECK(term_count(s) == 1);
    CHECK(s.coefficient("I") == doctest::Approx(1.0));
    CHECK(term_count(decompose(Matrix::Identity(8, 8))) == 1);
  }
  SUBCASE("generic 2x2") {
    Matrix m(2, 2);
    m << 3.0, 0.25, 0.25, -1.0;
    auto s = decompose(m);
    CHECK(s.coefficient("I") == doctest::Approx(1.0));
    CHECK(s.coefficient("X") == doctest::Approx(0.25));
    CHECK(s.coefficient("Z") == doctest::Approx(2.0));
    CHECK(s.coefficient("Y") == 0.0);
  }
  SUBCASE("one-qubit infinite-lattice kinetic matrix") {
    const double d = std::numbers::pi * std::numbers::pi / 3.0;
    Matrix m(2, 2);
    m << d, -2.0, -2.0, d;
    auto s = decompose(m);
    CHECK(term_count(s) == 2);
    CHECK(s.coefficient("I") == doctest::Approx(d));
    CHECK(s.coefficient("X") == doctest::Approx(-2.0));
  }
  SUBCASE("non-power-of-two dimension") { CHECK_THROWS_AS(decompose(Matrix::Identity(3, 3)), InvalidArgument); }
}

TEST_CASE("agreement with a brute-force Kronecker trace") {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 4; ++n) {
    const Matrix h = random_symmetric(rng, Eigen::Index{1} << n);
    const auto oracle = brute_force(h);
    const auto sum = decompose(h, 0.0);
    for (const auto& [word, value] : oracle) {
      CHECK(std::abs(value.imag()) < 1e-14);
      CHECK(sum.coefficient(word) == doctest::Approx(value.real()).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("reconstruction round trip") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 6;
    const Matrix h = random_symmetric(rng, Eigen::Index{1} << n);
    CHECK((reconstruct(decompose(h)) - h).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(reconstruct(PauliSum(2, 0.0)).cwiseAbs().maxCoeff() == 0.0);
  PauliSum z(1, 0.0);
  z.add(PauliWord("Z"), 1.0);
  Matrix expected(2, 2);
  expected << 1, 0, 0, -1;
  CHECK(reconstruct(z) == expected);
}

TEST_CASE("expectation values") {
  PauliSum z(1, 0.0), x(1, 0.0);
  z.add(PauliWord("Z"), 1.0);
  x.add(PauliWord("X"), 1.0);
  ComplexVector zero(2), plus(2);
  zero << 1, 0;
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  CHECK(expectation(z, zero) == doctest::Approx(1.0));
  CHECK(expectation(x, plus) == doctest::Approx(1.0));
  CHECK_THROWS_AS(expectation(z, ComplexVector::Zero(4)), InvalidArgument);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix h = random_symmetric(rng, 32);
    const ComplexVector psi = random_state(rng, 32);
    const double dense = (psi.adjoint() * h.cast<Complex>() * psi)(0).real();
    CHECK(std::abs(expectation(decompose(h), psi) - dense) < 1e-10);
  }
}

TEST_CASE("term counts") {
  std::mt19937_64 rng(9);
  SUBCASE("diagonal matrices only carry I/Z words") {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n = 1; n <= 6; ++n) {
      Vector v(Eigen::Index{1} << n);
      for (auto& x : v) x = u(rng);
      auto s = decompose(Matrix(v.asDiagonal()));
      CHECK(term_count(s) <= (std::size_t{1} << n));
      for (const auto& [w, c] : s.terms()) CHECK(w.x_mask() == 0);
    }
  }
  SUBCASE("no odd-Y words for real symmetric input") {
    for (int n = 1; n <= 5; ++n) {
      auto s = decompose(random_symmetric(rng, Eigen::Index{1} << n), 0.0);
      CHECK(term_count(s) == (std::size_t{1} << (n - 1)) * ((std::size_t{1} << n) + 1));
      for (const auto& [w, c] : s.terms()) CHECK(w.y_count() % 2 == 0);
    }
  }
  SUBCASE("16-point Morse DVR Hamiltonian") {
    auto h = morse16();
    const auto oracle = brute_force(h.full);
    std::size_t nonzero = 0;
    for (const auto& [w, c] : oracle) nonzero += std::abs(c) > kDefaultDropTolerance;
    const auto count = term_count(decompose(h.full));
    CHECK(count == nonzero);
    CHECK(count <= 136);
    // Toeplitz kinetic plus a diagonal potential leaves 56 words at n = 4 for any potential.
    CHECK(count == 56);
  }
  SUBCASE("32-point DVR Hamiltonian with a generic potential") {
    dvr::GridParams p;
    p.dx = 0.1;
    auto h = dvr::assemble(dvr::build_grid(dvr::GridVariant::HalfInfinite, p, 5, 3000.0),
                           dvr::Morse{0.01, 1.1, 1.7});
    const auto count = term_count(decompose(h.full));
    CHECK(count <= 528);
    MESSAGE("half-infinite n=5 term count: " << count);
  }
}

TEST_CASE("linearity") {
  std::mt19937_64 rng(21);
  for (int n = 1; n <= 5; ++n) {
    const Matrix a = random_symmetric(rng, Eigen::Index{1} << n);
    const Matrix b = random_symmetric(rng, Eigen::Index{1} << n);
    const double alpha = 0.7, beta = -1.3;
    auto sa = decompose(a, 0.0), sb = decompose(b, 0.0), sc = decompose(alpha * a + beta * b, 0.0);
    for (const auto& [w, c] : sc.terms())
      CHECK(c == doctest::Approx(alpha * sa.coefficient(w.str()) + beta * sb.coefficient(w.str())).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("drop tolerance and export") {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = m(1, 0) = 1e-13;
  auto s = decompose(m);
  CHECK(term_count(s) == 1);
  for (const auto& [w, c] : s.terms()) CHECK(std::abs(c) > s.drop_tolerance());
  std::ostringstream out;
  write_terms(out, s);
  CHECK(out.str() == "I 1.00000000000000000e+00\n");
}
