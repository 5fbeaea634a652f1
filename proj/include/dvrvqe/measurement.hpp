#pragma once

// Measurement plans for truncated DVR Hamiltonians.
//
// A plan is a list of analysis circuits A_b with outcome weights w_b(o). On a
// state psi it estimates
//
//   tau = sum_i D_i |psi_i|^2 + sum_b c_b sum_o w_b(o) |<o|A_b|psi>|^2,
//
// and the weighted projectors sum_o w_b(o) A_b^T |o><o| A_b add up to the
// truncated matrix H^(s,r) exactly. The band k = |i - j| is measured pairwise
// through "+" states (|i> + |i+k>)/sqrt(2); pairs sharing the XOR mask
// i ^ (i+k) share one GHZ-style circuit. Anti-diagonals i + j = m are measured
// with per-qubit Z/X product bases.

#include "dvrvqe/common.hpp"
#include "dvrvqe/dvr.hpp"
#include "dvrvqe/statevector.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

namespace dvrvqe::meas {

/// Band cutoff s and anti-diagonal width r, optionally derived from a target
/// accuracy epsilon expressed in units of the kinetic scale E_T.
struct TruncationSpec {
  double epsilon = 0.0;  // 0 when s, r were given explicitly
  double alpha = 1.0;
  double beta = 1.0;
  int s = 1;
  int r = 0;
  bool streamlined = false;  // keep only the inner anti-diagonal window

  /// s = ceil(eps^(-1/alpha)), r = ceil(eps^(-1/beta)), both clamped to 2^n.
  static TruncationSpec from_epsilon(double epsilon, int n_qubits, double alpha = 1.0, double beta = 1.0);
  static TruncationSpec with_cutoffs(int s, int r, bool streamlined = false);

  /// p = ceil(log2 r), 0 when r <= 1.
  int p() const { return r <= 1 ? 0 : ceil_log2(r); }
  dvr::AntiDiagonalWindow window() const {
    return streamlined ? dvr::AntiDiagonalWindow::InnerOnly : dvr::AntiDiagonalWindow::InnerAndOuter;
  }
};

enum class BasisKind { Band, AntiDiagonal };

struct MeasBasis {
  BasisKind kind = BasisKind::Band;
  /// Band index k, or the X-qubit mask for anti-diagonal bases.
  std::uint64_t label = 0;
  sv::Circuit analysis;
  double coeff = 1.0;
  /// One weight per computational-basis outcome.
  std::vector<double> weights;
};

struct BandPlan {
  std::vector<MeasBasis> bases;
  /// Diagonal left behind by the "+" projectors: number of band pairs touching i.
  std::vector<int> q;
};

struct MeasurementPlan {
  int n_qubits = 0;
  TruncationSpec spec;
  Vector diagonal;
  std::vector<MeasBasis> band_bases;
  std::vector<MeasBasis> antidiag_bases;
  std::map<int, std::vector<int>> q_vectors;

  std::size_t num_bases() const { return 1 + band_bases.size() + antidiag_bases.size(); }
  /// Dense operator sum_b c_b sum_o w_b(o) A_b^T |o><o| A_b plus diag(D).
  Matrix operator_matrix() const;
};

/// Circuit taking |0...0> to (|j> + |p>)/sqrt(2). Bits are given as integers
/// in number encoding (qubit 0 = most significant).
sv::Circuit plus_prep_circuit(std::uint64_t j, std::uint64_t p, int n_qubits);

/// Analysis circuit shared by every pair with XOR mask `mask`: CNOTs fan out
/// from the pivot (most significant mask bit), then H on the pivot. The "+"
/// outcome of pair (x, x ^ mask) is x with the pivot bit cleared.
sv::Circuit mask_analysis_circuit(std::uint64_t mask, int n_qubits);

/// Unit-weight plan for t^{k[n]}: weight 2 on the "+" outcome of each pair.
BandPlan band_plan(int k, int n_qubits);

/// Closed-form bit-counting rule for q^{k[n]}(i).
/// Bits are counted from the least significant (bit 1) upward. Kept for
/// comparison only; band_plan's q is the one the plans use.
int q_vector_bitcount(int k, int n_qubits, std::uint64_t i);

/// Product-basis plan for sum_m g(m) a^m over the retained anti-diagonals.
/// `g` holds one coefficient per anti-diagonal m = i + j in [0, 2^(n+1) - 2].
/// Bases with no non-zero weight are omitted.
std::vector<MeasBasis> antidiag_plan(int r, int n_qubits, bool streamlined, std::span<const double> g);

/// Full plan for the truncation of a Hamiltonian profile.
MeasurementPlan full_plan(const dvr::BandProfile& profile, const TruncationSpec& spec);

/// Exact tau from outcome probabilities.
double evaluate_exact(const MeasurementPlan& plan, const sv::QuantumState& state);

struct SampledEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::vector<std::uint64_t> shots_per_basis;  // diagonal basis first
};

/// Shot-based tau. Basis b (0 = diagonal) samples from stream derive_seed(seed, b).
SampledEstimate evaluate_sampled(const MeasurementPlan& plan, const sv::QuantumState& state,
                                 std::uint64_t shots_per_basis, std::uint64_t seed);

/// ceil(1/sqrt(epsilon)), at least 1.
std::uint64_t default_shots(double epsilon);

struct PlanComplexity {
  std::size_t num_bases = 0;
  std::size_t band_bases = 0;
  std::size_t antidiag_bases = 0;
  int max_circuit_depth = 0;
  double bound_num_bases = 0.0;
  double bound_band = 0.0;      // sum over k of the per-band bound
  double bound_antidiag = 0.0;  // 2^p, or 2^(p-1) + 1 when streamlined
  /// Per-band (n + 1 - log2 k) k check.
  bool bands_within_bound = true;
  bool antidiag_within_bound = true;
  bool total_within_bound = true;
  /// Every analysis circuit's depth <= ceil(log2(2s)) + n.
  bool depth_within_bound = true;
};

PlanComplexity plan_complexity(const MeasurementPlan& plan);

/// Per-band bound (n + 1 - log2 k) k.
double band_basis_bound(int k, int n_qubits);
/// 2^l - k + (n - l) k with l = ceil(log2(k + 1)).
double band_basis_count_bound(int k, int n_qubits);

void write_plan(std::ostream& out, const MeasurementPlan& plan);
MeasurementPlan read_plan(std::istream& in);

}  // namespace dvrvqe::meas
