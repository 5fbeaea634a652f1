#include "dvrvqe/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace dvrvqe::sv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_qubit(int qubit, int n_qubits) {
  if (qubit < 0 || qubit >= n_qubits)
    throw InvalidArgument("qubit index " + std::to_string(qubit) + " out of range for " +
                          std::to_string(n_qubits) + " qubits");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

bool operator==(const Gate& a, const Gate& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      overloaded{
          [&](const RY& g) { const auto& o = std::get<RY>(b); return g.qubit == o.qubit && g.slot == o.slot; },
          [&](const CNOT& g) {
            const auto& o = std::get<CNOT>(b);
            return g.control == o.control && g.target == o.target;
          },
          [&](const Hadamard& g) { return g.qubit == std::get<Hadamard>(b).qubit; },
          [&](const PauliX& g) { return g.qubit == std::get<PauliX>(b).qubit; },
      },
      a);
}

Circuit::Circuit(int n_qubits, int n_slots) : n_qubits_(n_qubits), n_slots_(n_slots) {
  if (n_qubits < 1) throw InvalidArgument("circuit needs at least one qubit");
  if (n_qubits > kMaxQubits) throw ResourceLimit("too many qubits for dense simulation");
  if (n_slots < 0) throw InvalidArgument("slot count must be non-negative");
}

Circuit& Circuit::add(const Gate& gate) {
  std::visit(overloaded{
                 [&](const RY& g) {
                   check_qubit(g.qubit, n_qubits_);
                   if (g.slot < 0 || g.slot >= n_slots_)
                     throw InvalidArgument("RY slot " + std::to_string(g.slot) + " out of range");
                 },
                 [&](const CNOT& g) {
                   check_qubit(g.control, n_qubits_);
                   check_qubit(g.target, n_qubits_);
                   if (g.control == g.target) throw InvalidArgument("CNOT control equals target");
                 },
                 [&](const Hadamard& g) { check_qubit(g.qubit, n_qubits_); },
                 [&](const PauliX& g) { check_qubit(g.qubit, n_qubits_); },
             },
             gate);
  gates_.push_back(gate);
  return *this;
}

Circuit& Circuit::append(const Circuit& other) {
  if (other.n_qubits_ != n_qubits_) throw InvalidArgument("cannot append circuits of different width");
  n_slots_ = std::max(n_slots_, other.n_slots_);
  for (const auto& g : other.gates_) add(g);
  return *this;
}

Circuit Circuit::inverse() const {
  Circuit inv(n_qubits_, n_slots_);
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
    if (std::holds_alternative<RY>(*it)) throw InvalidArgument("inverse() needs a parameter-free circuit");
    inv.gates_.push_back(*it);
  }
  return inv;
}

int Circuit::depth() const {
  std::vector<int> level(static_cast<std::size_t>(n_qubits_), 0);
  auto at = [&](int q) -> int& { return level[static_cast<std::size_t>(q)]; };
  for (const auto& gate : gates_) {
    std::visit(overloaded{
                   [&](const RY& g) { ++at(g.qubit); },
                   [&](const CNOT& g) {
                     const int t = std::max(at(g.control), at(g.target)) + 1;
                     at(g.control) = at(g.target) = t;
                   },
                   [&](const Hadamard& g) { ++at(g.qubit); },
                   [&](const PauliX& g) { ++at(g.qubit); },
               },
               gate);
  }
  return level.empty() ? 0 : *std::max_element(level.begin(), level.end());
}

bool operator==(const Circuit& a, const Circuit& b) {
  return a.n_qubits_ == b.n_qubits_ && a.n_slots_ == b.n_slots_ && a.gates_ == b.gates_;
}

QuantumState::QuantumState(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1) throw InvalidArgument("state needs at least one qubit");
  if (n_qubits > kMaxQubits) throw ResourceLimit("too many qubits for dense simulation");
  amps_ = ComplexVector::Zero(Eigen::Index{1} << n_qubits);
  amps_(0) = 1.0;
}

QuantumState::QuantumState(int n_qubits, ComplexVector amplitudes) : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw InvalidArgument("unsupported qubit count");
  if (amps_.size() != (Eigen::Index{1} << n_qubits)) throw InvalidArgument("amplitude count must be 2^n");
  if (std::abs(amps_.norm() - 1.0) > 1e-10) throw InvalidArgument("state is not normalized");
}

QuantumState QuantumState::basis(int n_qubits, std::uint64_t index) {
  QuantumState s(n_qubits);
  if (index >= s.dim()) throw InvalidArgument("basis index out of range");
  s.amps_(0) = 0.0;
  s.amps_(static_cast<Eigen::Index>(index)) = 1.0;
  return s;
}

void QuantumState::apply(const Gate& gate, std::span<const double> params) {
  const auto dim = static_cast<std::uint64_t>(amps_.size());
  auto amp = [&](std::uint64_t i) -> Complex& { return amps_(static_cast<Eigen::Index>(i)); };
  std::visit(overloaded{
                 [&](const RY& g) {
                   if (static_cast<std::size_t>(g.slot) >= params.size())
                     throw InvalidArgument("missing parameter for RY slot " + std::to_string(g.slot));
                   const double c = std::cos(0.5 * params[static_cast<std::size_t>(g.slot)]);
                   const double s = std::sin(0.5 * params[static_cast<std::size_t>(g.slot)]);
                   const std::uint64_t b = bit(g.qubit);
                   for (std::uint64_t i = 0; i < dim; ++i) {
                     if (i & b) continue;
                     const Complex a0 = amp(i), a1 = amp(i | b);
                     amp(i) = c * a0 - s * a1;
                     amp(i | b) = s * a0 + c * a1;
                   }
                 },
                 [&](const CNOT& g) {
                   const std::uint64_t cb = bit(g.control), tb = bit(g.target);
                   for (std::uint64_t i = 0; i < dim; ++i) {
                     if ((i & cb) && !(i & tb)) std::swap(amp(i), amp(i | tb));
                   }
                 },
                 [&](const Hadamard& g) {
                   const double r = std::numbers::sqrt2 / 2.0;
                   const std::uint64_t b = bit(g.qubit);
                   for (std::uint64_t i = 0; i < dim; ++i) {
                     if (i & b) continue;
                     const Complex a0 = amp(i), a1 = amp(i | b);
                     amp(i) = r * (a0 + a1);
                     amp(i | b) = r * (a0 - a1);
                   }
                 },
                 [&](const PauliX& g) {
                   const std::uint64_t b = bit(g.qubit);
                   for (std::uint64_t i = 0; i < dim; ++i) {
                     if (!(i & b)) std::swap(amp(i), amp(i | b));
                   }
                 },
             },
             gate);
}

void QuantumState::apply(const Circuit& circuit, std::span<const double> params) {
  if (circuit.num_qubits() != n_qubits_) throw InvalidArgument("circuit and state widths differ");
  for (const auto& g : circuit.gates()) apply(g, params);
}

std::vector<double> QuantumState::probabilities() const {
  std::vector<double> p(dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amps_(static_cast<Eigen::Index>(i)));
  return p;
}

QuantumState run(const Circuit& circuit, std::span<const double> params) {
  if (params.size() != static_cast<std::size_t>(circuit.num_slots()))
    throw InvalidArgument("expected " + std::to_string(circuit.num_slots()) + " parameters, got " +
                          std::to_string(params.size()));
  QuantumState state(circuit.num_qubits());
  state.apply(circuit, params);
  return state;
}

double expectation_dense(const QuantumState& state, const Matrix& matrix) {
  const auto& a = state.amplitudes();
  if (matrix.rows() != a.size() || matrix.cols() != a.size())
    throw InvalidArgument("matrix dimension does not match the state");
  const ComplexVector ha = matrix.cast<Complex>() * a;
  return a.dot(ha).real();  // Eigen's dot conjugates the first argument
}

double overlap_sq(const QuantumState& a, const QuantumState& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("state dimensions differ");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

std::vector<std::uint64_t> sample_counts(const QuantumState& state, const Circuit& analysis, std::uint64_t shots,
                                         std::uint64_t seed) {
  if (shots < 1) throw InvalidArgument("shots must be >= 1");
  QuantumState rotated = state;
  rotated.apply(analysis);
  const std::vector<double> probs = rotated.probabilities();
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) cdf[i] = (acc += probs[i]);

  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> counts(probs.size(), 0);
  for (std::uint64_t s = 0; s < shots; ++s) {
    // 53-bit uniform in [0, acc); avoids implementation-defined distributions.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx >= probs.size()) idx = probs.size() - 1;
    while (probs[idx] == 0.0 && idx > 0) --idx;  // land on a populated outcome
    ++counts[idx];
  }
  return counts;
}

std::string format_gate(const Gate& gate) {
  return std::visit(overloaded{
                        [](const RY& g) { return "ry " + std::to_string(g.qubit) + " " + std::to_string(g.slot); },
                        [](const CNOT& g) {
                          return "cnot " + std::to_string(g.control) + " " + std::to_string(g.target);
                        },
                        [](const Hadamard& g) { return "h " + std::to_string(g.qubit); },
                        [](const PauliX& g) { return "x " + std::to_string(g.qubit); },
                    },
                    gate);
}

void write_circuit(std::ostream& out, const Circuit& circuit) {
  out << "qubits " << circuit.num_qubits() << " slots " << circuit.num_slots() << '\n';
  for (const auto& g : circuit.gates()) out << format_gate(g) << '\n';
}

Gate parse_gate(const std::string& line) {
  std::istringstream in(line);
  std::string op;
  in >> op;
  int a = 0, b = 0;
  if (op == "ry" && (in >> a >> b)) return RY{a, b};
  if (op == "cnot" && (in >> a >> b)) return CNOT{a, b};
  if (op == "h" && (in >> a)) return Hadamard{a};
  if (op == "x" && (in >> a)) return PauliX{a};
  throw InvalidArgument("malformed gate line '" + line + "'");
}

Circuit read_circuit(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  std::istringstream header(line);
  std::string kq, ks;
  int n = 0, m = 0;
  if (!(header >> kq >> n >> ks >> m) || kq != "qubits" || ks != "slots")
    throw InvalidArgument("circuit header must read 'qubits <n> slots <m>'");
  Circuit c(n, m);
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    c.add(parse_gate(line));
  }
  return c;
}

Circuit read_circuit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open circuit file '" + path + "'");
  return read_circuit(in);
}

}  // namespace dvrvqe::sv
