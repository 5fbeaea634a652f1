#pragma once

// Greedy construction of entangler layouts: starting from RY layers only,
// repeatedly add the CNOT that lowers the VQE energy most.

#include "dvrvqe/common.hpp"
#include "dvrvqe/vqe.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace dvrvqe::search {

struct Candidate {
  int block = 0;
  int control = 0;
  int target = 0;
  friend auto operator<=>(const Candidate&, const Candidate&) = default;
};

struct SearchConfig {
  int blocks = 1;
  /// cm^-1, strictly decreasing.
  std::vector<double> thresholds_cm1{1.0, 0.01};
  int max_entanglers = 1000;
  int candidate_budget = 200;
  double jitter = 0.01;
  /// hartree; a sweep improving less than this ends the search.
  double plateau = 1e-10;
  /// Seeded fresh restarts used when a warm-started sweep stalls, and when
  /// re-optimizing a committed circuit. 0 disables both.
  int escape_restarts = 5;
  vqe::OptimizerConfig optimizer;
  /// Lowest eigenvalue of the same matrix when unset.
  std::optional<double> reference_energy;

  void validate() const;
};

struct SearchStep {
  int step = 0;
  std::optional<Candidate> gate;  // empty for the initial RY-only circuit
  double energy = 0.0;
  double error_cm1 = 0.0;
};

struct Snapshot {
  double threshold_cm1 = 0.0;
  int step = 0;
  vqe::AnsatzSpec ansatz;
  std::vector<double> params;
  double energy = 0.0;
  double error_cm1 = 0.0;
};

struct SearchResult {
  double reference_energy = 0.0;
  std::vector<SearchStep> trace;
  /// One per threshold that was crossed, in threshold order.
  std::vector<Snapshot> snapshots;
  vqe::AnsatzSpec final_ansatz;
  std::vector<double> final_params;
  double final_energy = 0.0;

  const Snapshot* snapshot(double threshold_cm1) const;
};

struct CandidateResult {
  double energy = 0.0;
  std::vector<double> params;
};

/// Adds the candidate to `base` and re-optimizes from the warm parameters for
/// at most `budget` iterations; with fresh_restarts > 0 the best of that and
/// a seeded multi-start run is returned.
CandidateResult candidate_evaluation(const vqe::AnsatzSpec& base, const Candidate& candidate,
                                     const Matrix& hamiltonian, std::span<const double> warm_params, int budget,
                                     const vqe::OptimizerConfig& optimizer, int fresh_restarts = 0);

/// Every CNOT(q, p) with q < p in every block, minus the ones already used.
std::vector<Candidate> open_candidates(const vqe::AnsatzSpec& ansatz);

SearchResult greedy_search(const Matrix& hamiltonian, int n_qubits, const SearchConfig& config);

/// `step,block,ctrl,tgt,energy_hartree,error_cm1`; the initial row has -1 gate fields.
void write_trace_csv(std::ostream& out, const SearchResult& result);

}  // namespace dvrvqe::search
