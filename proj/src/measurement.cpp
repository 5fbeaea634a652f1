#include "dvrvqe/measurement.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace dvrvqe::meas {

namespace {

// Qubit q acts on index bit (n - 1 - q).
int qubit_of_bit(int bit, int n_qubits) { return n_qubits - 1 - bit; }

int top_bit(std::uint64_t mask) { return static_cast<int>(std::bit_width(mask)) - 1; }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_qubits(int n_qubits) {
  if (n_qubits < 1) throw InvalidArgument("need at least one qubit");
  if (n_qubits > kMaxQubits) throw ResourceLimit("too many qubits for dense plans");
}

}  // namespace

TruncationSpec TruncationSpec::from_epsilon(double epsilon, int n_qubits, double alpha, double beta) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw InvalidArgument("decay exponents must be positive");
  require_qubits(n_qubits);
  const double dim = std::ldexp(1.0, n_qubits);
  // The small offset keeps exact powers (eps = 1/4 -> 4) from rounding up.
  auto cutoff = [&](double exponent) {
    const double raw = std::ceil(std::pow(epsilon, -1.0 / exponent) - 1e-9);
    return static_cast<int>(std::clamp(raw, 1.0, dim));
  };
  TruncationSpec spec;
  spec.epsilon = epsilon;
  spec.alpha = alpha;
  spec.beta = beta;
  spec.s = cutoff(alpha);
  spec.r = cutoff(beta);
  return spec;
}

TruncationSpec TruncationSpec::with_cutoffs(int s, int r, bool streamlined) {
  if (s < 1) throw InvalidArgument("s must be >= 1");
  if (r < 0) throw InvalidArgument("r must be >= 0");
  TruncationSpec spec;
  spec.s = s;
  spec.r = r;
  spec.streamlined = streamlined;
  return spec;
}

Matrix MeasurementPlan::operator_matrix() const {
  const auto dim = static_cast<Eigen::Index>(std::int64_t{1} << n_qubits);
  Matrix op = Matrix::Zero(dim, dim);
  op.diagonal() = diagonal;
  auto accumulate = [&](const MeasBasis& basis) {
    const sv::Circuit back = basis.analysis.inverse();
    for (Eigen::Index o = 0; o < dim; ++o) {
      const double w = basis.weights[static_cast<std::size_t>(o)];
      if (w == 0.0) continue;
      sv::QuantumState v = sv::QuantumState::basis(n_qubits, static_cast<std::uint64_t>(o));
      v.apply(back);
      const Vector re = v.amplitudes().real();
      op.noalias() += (basis.coeff * w) * re * re.transpose();
    }
  };
  for (const auto& b : band_bases) accumulate(b);
  for (const auto& b : antidiag_bases) accumulate(b);
  return op;
}

sv::Circuit plus_prep_circuit(std::uint64_t j, std::uint64_t p, int n_qubits) {
  require_qubits(n_qubits);
  const std::uint64_t limit = std::uint64_t{1} << n_qubits;
  if (j >= limit || p >= limit) throw InvalidArgument("basis index out of range");
  if (j == p) throw InvalidArgument("'+' state needs two distinct basis states");
  const std::uint64_t diff = j ^ p;
  const std::uint64_t common = j & p;
  const int pivot_bit = top_bit(diff);
  const int pivot = qubit_of_bit(pivot_bit, n_qubits);

  sv::Circuit c(n_qubits);
  for (int q = 0; q < n_qubits; ++q) {
    if (common & (std::uint64_t{1} << (n_qubits - 1 - q))) c.x(q);
  }
  c.h(pivot);
  for (int q = 0; q < n_qubits; ++q) {
    if (q != pivot && (diff & (std::uint64_t{1} << (n_qubits - 1 - q)))) c.cnot(pivot, q);
  }
  // Differing qubits now hold |0..0> + |1..1>; flip those where j has a 1.
  for (int q = 0; q < n_qubits; ++q) {
    const std::uint64_t b = std::uint64_t{1} << (n_qubits - 1 - q);
    if ((diff & b) && (j & b)) c.x(q);
  }
  return c;
}

sv::Circuit mask_analysis_circuit(std::uint64_t mask, int n_qubits) {
  require_qubits(n_qubits);
  if (mask == 0 || mask >= (std::uint64_t{1} << n_qubits)) throw InvalidArgument("invalid XOR mask");
  const int pivot = qubit_of_bit(top_bit(mask), n_qubits);
  sv::Circuit c(n_qubits);
  for (int q = 0; q < n_qubits; ++q) {
    if (q != pivot && (mask & (std::uint64_t{1} << (n_qubits - 1 - q)))) c.cnot(pivot, q);
  }
  c.h(pivot);
  return c;
}

BandPlan band_plan(int k, int n_qubits) {
  require_qubits(n_qubits);
  const std::uint64_t dim = std::uint64_t{1} << n_qubits;
  if (k < 1 || static_cast<std::uint64_t>(k) >= dim)
    throw InvalidArgument("band index k must lie in [1, 2^n - 1]");
  const auto kk = static_cast<std::uint64_t>(k);

  std::map<std::uint64_t, std::vector<std::uint64_t>> groups;
  BandPlan plan;
  plan.q.assign(dim, 0);
  for (std::uint64_t i = 0; i + kk < dim; ++i) {
    groups[i ^ (i + kk)].push_back(i);
    ++plan.q[i];
    ++plan.q[i + kk];
  }
  for (const auto& [mask, lowers] : groups) {
    MeasBasis basis;
    basis.kind = BasisKind::Band;
    basis.label = kk;
    basis.analysis = mask_analysis_circuit(mask, n_qubits);
    basis.weights.assign(dim, 0.0);
    // i < i + k, so i carries the 0 on the pivot bit and is the "+" outcome.
    for (std::uint64_t i : lowers) basis.weights[i] = 2.0;
    plan.bases.push_back(std::move(basis));
  }
  return plan;
}

int q_vector_bitcount(int k, int n_qubits, std::uint64_t i) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  require_qubits(n_qubits);
  if (i >= (std::uint64_t{1} << n_qubits)) throw InvalidArgument("index out of range");
  const int l = ceil_log2(static_cast<std::int64_t>(k) + 1);
  const std::int64_t last_l_bits = static_cast<std::int64_t>(i % (std::uint64_t{1} << l));
  const std::int64_t anti_last_l_bits = (std::int64_t{1} << l) - last_l_bits;
  int output = 1;
  for (int j = l + 1; j <= n_qubits; ++j) {
    if ((i >> (j - 1)) & 1U) {
      if (last_l_bits < k || anti_last_l_bits < l) output += 1;
    }
  }
  return output;
}

std::vector<MeasBasis> antidiag_plan(int r, int n_qubits, bool streamlined, std::span<const double> g) {
  require_qubits(n_qubits);
  const std::uint64_t dim = std::uint64_t{1} << n_qubits;
  const std::size_t num_antidiag = 2 * dim - 1;
  if (g.size() != num_antidiag) throw InvalidArgument("need one coefficient per anti-diagonal (2^(n+1) - 1)");
  if (r < 1 || static_cast<std::uint64_t>(r) > dim) throw InvalidArgument("anti-diagonal width r must lie in [1, 2^n]");
  const auto window = streamlined ? dvr::AntiDiagonalWindow::InnerOnly : dvr::AntiDiagonalWindow::InnerAndOuter;
  const int p = r <= 1 ? 0 : ceil_log2(r);

  // Qubits on the p low bits are measured in Z or X; X-set `xs` picks the
  // basis. For outcome o the digit string over {P0, X, P1} is 1 on xs and
  // 2 * o elsewhere, so the outcome lands on anti-diagonal xs + 2 (o & ~xs),
  // signed by the X outcomes. High qubits stay in Z and only the all-0 /
  // all-1 outcomes can reach the retained windows.
  std::vector<MeasBasis> bases;
  for (std::uint64_t xs = 0; xs < (std::uint64_t{1} << p); ++xs) {
    MeasBasis basis;
    basis.kind = BasisKind::AntiDiagonal;
    basis.label = xs;
    basis.analysis = sv::Circuit(n_qubits);
    for (int b = 0; b < n_qubits; ++b) {
      if (xs & (std::uint64_t{1} << b)) basis.analysis.h(qubit_of_bit(b, n_qubits));
    }
    basis.weights.assign(dim, 0.0);
    bool any = false;
    for (std::uint64_t o = 0; o < dim; ++o) {
      const std::uint64_t m = xs + 2 * (o & ~xs);
      if (!dvr::antidiagonal_retained(num_antidiag, m, r, window)) continue;
      const double sign = (std::popcount(o & xs) & 1) ? -1.0 : 1.0;
      const double w = sign * g[m];
      basis.weights[o] = w;
      any = any || w != 0.0;
    }
    if (any) bases.push_back(std::move(basis));
  }
  return bases;
}

MeasurementPlan full_plan(const dvr::BandProfile& profile, const TruncationSpec& spec) {
  const int n = profile.n_qubits;
  require_qubits(n);
  const auto dim = static_cast<int>(profile.dim());
  if (dim != (1 << n)) throw InvalidArgument("profile dimension must be 2^n");
  if (spec.s < 1 || spec.s > dim) throw InvalidArgument("s must lie in [1, 2^n]");
  if (spec.r < 0 || spec.r > dim) throw InvalidArgument("r must lie in [0, 2^n]");

  MeasurementPlan plan;
  plan.n_qubits = n;
  plan.spec = spec;
  plan.diagonal = profile.d;

  for (int k = 1; k < spec.s && k < dim; ++k) {
    BandPlan band = band_plan(k, n);
    const double fk = profile.f(k);
    for (int i = 0; i < dim; ++i) plan.diagonal(i) -= fk * band.q[static_cast<std::size_t>(i)];
    for (auto& basis : band.bases) {
      basis.coeff = fk;
      plan.band_bases.push_back(std::move(basis));
    }
    plan.q_vectors[k] = std::move(band.q);
  }

  if (spec.r >= 1) {
    const std::span<const double> g(profile.g.data(), static_cast<std::size_t>(profile.g.size()));
    plan.antidiag_bases = antidiag_plan(spec.r, n, spec.streamlined, g);
    // The Z-only anti-diagonal basis re-adds g(2i) on retained diagonals.
    for (int i = 0; i < dim; ++i) {
      if (dvr::antidiagonal_retained(profile.num_antidiagonals(), static_cast<std::size_t>(2 * i), spec.r,
                                     spec.window()))
        plan.diagonal(i) -= profile.g(2 * i);
    }
  }
  return plan;
}

double evaluate_exact(const MeasurementPlan& plan, const sv::QuantumState& state) {
  if (state.num_qubits() != plan.n_qubits) throw InvalidArgument("state and plan widths differ");
  const std::vector<double> p0 = state.probabilities();
  double tau = 0.0;
  for (std::size_t i = 0; i < p0.size(); ++i) tau += plan.diagonal(static_cast<Eigen::Index>(i)) * p0[i];
  auto add_basis = [&](const MeasBasis& basis) {
    sv::QuantumState rotated = state;
    rotated.apply(basis.analysis);
    const std::vector<double> probs = rotated.probabilities();
    double acc = 0.0;
    for (std::size_t o = 0; o < probs.size(); ++o) acc += basis.weights[o] * probs[o];
    tau += basis.coeff * acc;
  };
  for (const auto& b : plan.band_bases) add_basis(b);
  for (const auto& b : plan.antidiag_bases) add_basis(b);
  return tau;
}

SampledEstimate evaluate_sampled(const MeasurementPlan& plan, const sv::QuantumState& state,
                                 std::uint64_t shots_per_basis, std::uint64_t seed) {
  if (shots_per_basis < 1) throw InvalidArgument("shots must be >= 1");
  if (state.num_qubits() != plan.n_qubits) throw InvalidArgument("state and plan widths differ");
  SampledEstimate result;
  double variance = 0.0;
  std::uint64_t stream = 0;
  auto sample_basis = [&](const sv::Circuit& analysis, auto&& weight_of) {
    const auto counts = sv::sample_counts(state, analysis, shots_per_basis, sv::derive_seed(seed, stream++));
    const double n = static_cast<double>(shots_per_basis);
    // Shifted by the first observed weight so a single outcome has zero variance.
    double shift = 0.0, sum = 0.0, sum_sq = 0.0;
    bool first = true;
    for (std::size_t o = 0; o < counts.size(); ++o) {
      if (counts[o] == 0) continue;
      const double w = weight_of(o);
      if (first) {
        shift = w;
        first = false;
      }
      sum += static_cast<double>(counts[o]) * (w - shift);
      sum_sq += static_cast<double>(counts[o]) * (w - shift) * (w - shift);
    }
    const double mean = shift + sum / n;
    if (shots_per_basis > 1) {
      const double sample_var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
      variance += sample_var / n;
    }
    result.estimate += mean;
    result.shots_per_basis.push_back(shots_per_basis);
  };

  sample_basis(sv::Circuit(plan.n_qubits), [&](std::size_t o) { return plan.diagonal(static_cast<Eigen::Index>(o)); });
  for (const auto* list : {&plan.band_bases, &plan.antidiag_bases}) {
    for (const auto& b : *list) sample_basis(b.analysis, [&](std::size_t o) { return b.coeff * b.weights[o]; });
  }
  result.standard_error = std::sqrt(variance);
  return result;
}

std::uint64_t default_shots(double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  return static_cast<std::uint64_t>(std::max(1.0, std::ceil(1.0 / std::sqrt(epsilon) - 1e-9)));
}

double band_basis_bound(int k, int n_qubits) { return (n_qubits + 1 - std::log2(double(k))) * k; }

double band_basis_count_bound(int k, int n_qubits) {
  const int l = ceil_log2(static_cast<std::int64_t>(k) + 1);
  return std::ldexp(1.0, l) - k + double(n_qubits - l) * k;
}

PlanComplexity plan_complexity(const MeasurementPlan& plan) {
  const int n = plan.n_qubits;
  PlanComplexity c;
  c.band_bases = plan.band_bases.size();
  c.antidiag_bases = plan.antidiag_bases.size();
  c.num_bases = plan.num_bases();

  std::map<std::uint64_t, std::size_t> per_band;
  for (const auto& b : plan.band_bases) ++per_band[b.label];
  for (const auto& [k, count] : per_band) {
    if (double(count) > band_basis_bound(int(k), n)) c.bands_within_bound = false;
  }
  for (int k = 1; k < plan.spec.s && k < (1 << n); ++k)
    c.bound_band += std::min(band_basis_count_bound(k, n), band_basis_bound(k, n));

  if (plan.spec.r >= 1) {
    const int p = plan.spec.p();
    c.bound_antidiag = plan.spec.streamlined ? std::ldexp(1.0, p - 1) + 1.0 : std::ldexp(1.0, p);
  }
  c.antidiag_within_bound = double(c.antidiag_bases) <= c.bound_antidiag;
  c.bound_num_bases = 1.0 + c.bound_band + c.bound_antidiag;
  c.total_within_bound = double(c.num_bases) <= c.bound_num_bases;

  const int depth_bound = ceil_log2(2 * static_cast<std::int64_t>(plan.spec.s)) + n;
  for (const auto* list : {&plan.band_bases, &plan.antidiag_bases}) {
    for (const auto& b : *list) c.max_circuit_depth = std::max(c.max_circuit_depth, b.analysis.depth());
  }
  c.depth_within_bound = c.max_circuit_depth <= depth_bound;
  return c;
}

void write_plan(std::ostream& out, const MeasurementPlan& plan) {
  out << "plan qubits " << plan.n_qubits << " s " << plan.spec.s << " r " << plan.spec.r << " streamlined "
      << (plan.spec.streamlined ? 1 : 0) << " epsilon " << fmt17(plan.spec.epsilon) << " alpha "
      << fmt17(plan.spec.alpha) << " beta " << fmt17(plan.spec.beta) << '\n';
  out << "diag\n";
  for (Eigen::Index i = 0; i < plan.diagonal.size(); ++i) out << "w " << i << ' ' << fmt17(plan.diagonal(i)) << '\n';
  std::size_t idx = 0;
  auto write_basis = [&](const MeasBasis& b) {
    out << "basis " << idx++ << " coeff " << fmt17(b.coeff)
        << (b.kind == BasisKind::Band ? " band " : " antidiag ") << b.label << '\n';
    for (const auto& g : b.analysis.gates()) out << sv::format_gate(g) << '\n';
    for (std::size_t o = 0; o < b.weights.size(); ++o) {
      if (b.weights[o] != 0.0) out << "w " << o << ' ' << fmt17(b.weights[o]) << '\n';
    }
  };
  for (const auto& b : plan.band_bases) write_basis(b);
  for (const auto& b : plan.antidiag_bases) write_basis(b);
}

MeasurementPlan read_plan(std::istream& in) {
  MeasurementPlan plan;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw InvalidArgument("plan line " + std::to_string(lineno) + ": " + what);
  };

  bool have_header = false;
  enum class Block { None, Diag, Basis } block = Block::None;
  MeasBasis* current = nullptr;
  std::uint64_t dim = 0;

  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string key;
    fields >> key;
    if (!have_header) {
      std::string kq, ks, kr, kst, ke, ka, kb;
      int streamlined = 0;
      if (key != "plan" ||
          !(fields >> kq >> plan.n_qubits >> ks >> plan.spec.s >> kr >> plan.spec.r >> kst >> streamlined >> ke >>
            plan.spec.epsilon >> ka >> plan.spec.alpha >> kb >> plan.spec.beta) ||
          kq != "qubits" || ks != "s" || kr != "r" || kst != "streamlined")
        fail("expected 'plan qubits <n> s <s> r <r> streamlined <0|1> epsilon <e> alpha <a> beta <b>'");
      require_qubits(plan.n_qubits);
      plan.spec.streamlined = streamlined != 0;
      dim = std::uint64_t{1} << plan.n_qubits;
      plan.diagonal = Vector::Zero(static_cast<Eigen::Index>(dim));
      have_header = true;
      continue;
    }
    if (key == "diag") {
      block = Block::Diag;
      current = nullptr;
    } else if (key == "basis") {
      std::size_t idx = 0;
      std::string kc, kind;
      MeasBasis b;
      if (!(fields >> idx >> kc >> b.coeff) || kc != "coeff") fail("expected 'basis <idx> coeff <c>'");
      if (fields >> kind) {
        if (kind == "band") {
          b.kind = BasisKind::Band;
        } else if (kind == "antidiag") {
          b.kind = BasisKind::AntiDiagonal;
        } else {
          fail("unknown basis kind '" + kind + "'");
        }
        if (!(fields >> b.label)) fail("missing basis label");
      }
      b.analysis = sv::Circuit(plan.n_qubits);
      b.weights.assign(dim, 0.0);
      auto& list = b.kind == BasisKind::Band ? plan.band_bases : plan.antidiag_bases;
      list.push_back(std::move(b));
      current = &list.back();
      block = Block::Basis;
    } else if (key == "w") {
      std::uint64_t o = 0;
      double w = 0.0;
      if (!(fields >> o >> w)) fail("expected 'w <outcome> <weight>'");
      if (o >= dim) fail("outcome index out of range");
      if (block == Block::Diag) {
        plan.diagonal(static_cast<Eigen::Index>(o)) = w;
      } else if (block == Block::Basis) {
        current->weights[o] = w;
      } else {
        fail("weight outside a block");
      }
    } else {
      if (block != Block::Basis) fail("gate line outside a basis block");
      try {
        current->analysis.add(sv::parse_gate(line));
      } catch (const InvalidArgument& e) {
        fail(e.what());
      }
    }
  }
  if (!have_header) throw InvalidArgument("empty plan");
  return plan;
}

}  // namespace dvrvqe::meas
