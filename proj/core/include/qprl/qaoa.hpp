#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qprl/gates.hpp"
#include "qprl/problems.hpp"
#include "qprl/records.hpp"
#include "qprl/rng.hpp"
#include "qprl/statevec.hpp"

namespace qprl {

struct QaoaConfig {
  int bins = 20;   // grid points per axis over [0, 2*pi), left edges
  int shots = 10;  // for the final sampled solution quality

  void validate() const;
};

/// The cost objective rewritten over spins z = 1 - 2b:
///   cost(b) = constant + sum_i linear[i] z_i + sum_{i<j} quad[{i,j}] z_i z_j
/// This is the form the phase-separation circuit implements (the constant
/// becomes global phase and is dropped from circuits).
struct IsingForm {
  int n = 0;
  double constant = 0.0;
  std::vector<double> linear;  // length n
  std::vector<double> quad;    // n(n-1)/2, pairs {i,j} i<j lexicographic
};

/// Index of pair {i, j}, i < j, in the lexicographic packing.
std::size_t pair_index(int i, int j, int n);

IsingForm ising_form(const ProblemInstance& instance);

/// Evaluates the Ising form on an assignment (property-test support:
/// must equal ProblemInstance::cost exactly up to rounding).
double ising_eval(const IsingForm& form, std::span<const std::uint8_t> bits);

/// |gamma, beta> = e^{-i*beta*sum_j X_j} e^{-i*gamma*H_C} |+>^n, computed
/// with the diagonal phase separation (no circuit form).
StateVector build_qaoa_state(const ProblemInstance& instance, double gamma,
                             double beta);

/// The same state as an explicit gate sequence: H on every qubit, a
/// CNOT-RZ-CNOT block per nonzero ZZ coefficient, an RZ per nonzero linear
/// coefficient, then RX(2*beta) on every qubit. Equals build_qaoa_state up
/// to global phase.
std::vector<GateOp> qaoa_program(const ProblemInstance& instance, double gamma,
                                 double beta);

struct QaoaResult {
  double gamma_star = 0.0;
  double beta_star = 0.0;
  int gamma_index = 0;
  int beta_index = 0;
  double exact_expectation = 0.0;  // normalized, at the optimum
  double sampled_quality = 0.0;    // filled by run_qaoa
  std::vector<GateOp> program;
  int uncompiled_len = 0;
};

/// Exhaustive sweep of the bins x bins grid using exact normalized
/// expectations; ties broken toward the smallest (gamma index, beta index).
QaoaResult grid_search(const ProblemInstance& instance, const QaoaConfig& cfg);

/// Mean normalized cost of cfg.shots bitstrings drawn from |gamma, beta> —
/// the same estimator as the agent's sampled reward.
double sampled_quality(const ProblemInstance& instance, double gamma,
                       double beta, const QaoaConfig& cfg, RandomStream& rng);

/// grid_search + program emission + sampled quality in one call.
QaoaResult run_qaoa(const ProblemInstance& instance, const QaoaConfig& cfg,
                    RandomStream& rng);

/// Episode-log row for a QAOA run. The score is the sampled quality (the
/// final-state reward; QAOA has no running max), and win/lose applies the
/// same threshold the agent plays against.
EpisodeRecord qaoa_record(const ProblemInstance& instance,
                          const QaoaResult& result,
                          double win_threshold = 0.8);

}  // namespace qprl
