#include "dvrvqe/ansatz_search.hpp"

#include "dvrvqe/dvr.hpp"
#include "dvrvqe/parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

namespace dvrvqe::search {

namespace {

bool contains(const vqe::AnsatzSpec& ansatz, const Candidate& c) {
  const auto& block = ansatz.entanglers[static_cast<std::size_t>(c.block)];
  return std::find(block.begin(), block.end(), vqe::Entangler{c.control, c.target}) != block.end();
}

vqe::AnsatzSpec with_candidate(const vqe::AnsatzSpec& base, const Candidate& c) {
  auto next = base;
  next.entanglers[static_cast<std::size_t>(c.block)].push_back({c.control, c.target});
  return next;
}

double error_cm1(double energy, double reference) { return units::to_wavenumber(energy - reference); }

std::vector<double> jittered(std::span<const double> params, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(params.begin(), params.end());
  for (auto& p : out) p += scale * (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0);
  return out;
}

}  // namespace

void SearchConfig::validate() const {
  if (blocks < 1) throw InvalidArgument("search needs at least one entangler block");
  if (thresholds_cm1.empty()) throw InvalidArgument("search needs at least one threshold");
  for (std::size_t i = 0; i < thresholds_cm1.size(); ++i) {
    if (!(thresholds_cm1[i] > 0.0)) throw InvalidArgument("search thresholds must be positive");
    if (i > 0 && !(thresholds_cm1[i] < thresholds_cm1[i - 1]))
      throw InvalidArgument("search thresholds must be strictly decreasing");
  }
  if (max_entanglers < 0) throw InvalidArgument("max_entanglers must be non-negative");
  if (candidate_budget < 1) throw InvalidArgument("candidate budget must be positive");
}

const Snapshot* SearchResult::snapshot(double threshold_cm1) const {
  for (const auto& s : snapshots)
    if (s.threshold_cm1 == threshold_cm1) return &s;
  return nullptr;
}

CandidateResult candidate_evaluation(const vqe::AnsatzSpec& base, const Candidate& candidate,
                                     const Matrix& hamiltonian, std::span<const double> warm_params, int budget,
                                     const vqe::OptimizerConfig& optimizer, int fresh_restarts) {
  if (contains(base, candidate)) throw InvalidArgument("candidate is already part of the ansatz");
  const auto ansatz = with_candidate(base, candidate);
  auto options = optimizer;
  options.max_iterations = budget;
  const vqe::ObjectiveConfig objective{hamiltonian, {}};
  auto result = vqe::optimize_from(ansatz.circuit(), objective, options, warm_params);
  if (fresh_restarts > 0) {
    options.restarts = fresh_restarts;
    auto fresh = vqe::minimize(ansatz, objective, options);
    if (fresh.energy < result.energy) result = std::move(fresh);
  }
  return {result.energy, result.params};
}

std::vector<Candidate> open_candidates(const vqe::AnsatzSpec& ansatz) {
  std::vector<Candidate> out;
  for (int d = 0; d < ansatz.blocks; ++d)
    for (int q = 0; q < ansatz.n_qubits; ++q)
      for (int p = q + 1; p < ansatz.n_qubits; ++p)
        if (!contains(ansatz, {d, q, p})) out.push_back({d, q, p});
  return out;
}

SearchResult greedy_search(const Matrix& hamiltonian, int n_qubits, const SearchConfig& config) {
  config.validate();
  const auto dim = std::int64_t{1} << n_qubits;
  if (hamiltonian.rows() != dim || hamiltonian.cols() != dim)
    throw InvalidArgument("hamiltonian dimension does not match " + std::to_string(n_qubits) + " qubits");

  SearchResult out;
  if (config.reference_energy) {
    out.reference_energy = *config.reference_energy;
  } else {
    const auto spectrum = dvr::classical_spectrum(hamiltonian, 1);
    if (spectrum.size() < 1) throw InvalidArgument("reference spectrum unavailable");
    out.reference_energy = spectrum(0);
  }
  const double reference = out.reference_energy;

  auto ansatz = vqe::AnsatzSpec::empty(n_qubits, config.blocks);
  const vqe::ObjectiveConfig objective{hamiltonian, {}};
  auto incumbent = vqe::minimize(ansatz, objective, config.optimizer);
  double energy = incumbent.energy;
  auto params = incumbent.params;

  std::size_t next_threshold = 0;
  auto take_snapshots = [&](int step) {
    const double err = error_cm1(energy, reference);
    while (next_threshold < config.thresholds_cm1.size() && err < config.thresholds_cm1[next_threshold]) {
      out.snapshots.push_back({config.thresholds_cm1[next_threshold], step, ansatz, params, energy, err});
      ++next_threshold;
    }
  };

  out.trace.push_back({0, std::nullopt, energy, error_cm1(energy, reference)});
  take_snapshots(0);

  for (int step = 1; next_threshold < config.thresholds_cm1.size(); ++step) {
    if (ansatz.num_entanglers() >= config.max_entanglers) break;
    const auto candidates = open_candidates(ansatz);
    if (candidates.empty()) break;

    auto sweep = [&](int fresh_restarts) {
      std::vector<CandidateResult> evaluated(candidates.size());
      parallel_for(candidates.size(), config.optimizer.threads, [&](std::size_t i) {
        const auto stream = (static_cast<std::uint64_t>(step) << 20) + (fresh_restarts > 0 ? 1u << 19 : 0u) + i;
        const auto seed = sv::derive_seed(config.optimizer.seed, stream);
        const auto warm = jittered(params, config.jitter, seed);
        auto options = config.optimizer;
        options.threads = 1;
        options.seed = seed;
        evaluated[i] = candidate_evaluation(ansatz, candidates[i], hamiltonian, warm, config.candidate_budget, options,
                                            fresh_restarts);
      });
      return evaluated;
    };
    // Candidates are enumerated in (d, q, p) order, so a strict comparison
    // keeps the lexicographically smallest among equal energies.
    auto pick = [](const std::vector<CandidateResult>& evaluated) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < evaluated.size(); ++i)
        if (evaluated[i].energy < evaluated[best].energy) best = i;
      return best;
    };

    auto evaluated = sweep(0);
    auto best = pick(evaluated);
    if (!(evaluated[best].energy < energy - config.plateau) && config.escape_restarts > 0) {
      // The incumbent can sit in a basin where no single gate helps locally.
      evaluated = sweep(config.escape_restarts);
      best = pick(evaluated);
    }
    if (!(evaluated[best].energy < energy - config.plateau)) break;

    ansatz = with_candidate(ansatz, candidates[best]);
    auto full = config.optimizer;
    full.threads = 1;
    auto refined = vqe::optimize_from(ansatz.circuit(), objective, full, evaluated[best].params);
    if (config.escape_restarts > 0) {
      full.restarts = config.escape_restarts;
      full.seed = sv::derive_seed(config.optimizer.seed, static_cast<std::uint64_t>(step));
      auto fresh = vqe::minimize(ansatz, objective, full);
      if (fresh.energy < refined.energy) refined = std::move(fresh);
    }
    if (refined.energy <= evaluated[best].energy) {
      energy = refined.energy;
      params = refined.params;
    } else {
      energy = evaluated[best].energy;
      params = evaluated[best].params;
    }
    out.trace.push_back({step, candidates[best], energy, error_cm1(energy, reference)});
    take_snapshots(step);
  }

  out.final_ansatz = ansatz;
  out.final_params = params;
  out.final_energy = energy;
  return out;
}

void write_trace_csv(std::ostream& out, const SearchResult& result) {
  out << "step,block,ctrl,tgt,energy_hartree,error_cm1\n";
  char buf[256];
  for (const auto& s : result.trace) {
    const int block = s.gate ? s.gate->block : -1;
    const int ctrl = s.gate ? s.gate->control : -1;
    const int tgt = s.gate ? s.gate->target : -1;
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%.17g,%.17g\n", s.step, block, ctrl, tgt, s.energy, s.error_cm1);
    out << buf;
  }
}

}  // namespace dvrvqe::search
