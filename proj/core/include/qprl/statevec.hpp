#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "qprl/gates.hpp"
#include "qprl/problems.hpp"
#include "qprl/rng.hpp"

namespace qprl {

/// Row-major binary matrix; the shape that measurement samples come in
/// (one row per shot, one column per qubit).
struct BitMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> data;  // rows*cols, row-major

  BitMatrix() = default;
  BitMatrix(int rows, int cols)
      : rows(rows), cols(cols),
        data(static_cast<std::size_t>(rows) * cols, 0) {}

  std::uint8_t& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::uint8_t at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::span<const std::uint8_t> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols,
            static_cast<std::size_t>(cols)};
  }
};

/// Dense statevector over 2^n basis states, mutated in place by gate
/// kernels. Basis convention per basis.hpp: qubit i is bit i of the index.
class StateVector {
 public:
  /// |0...0> on n qubits; n outside [1,16] is a configuration error.
  explicit StateVector(int n);

  /// Adopts an explicit amplitude array (length 2^n); the caller owns
  /// normalization. Used to prepare arbitrary input states for
  /// equivalence checking.
  static StateVector from_amplitudes(int n,
                                     std::vector<std::complex<double>> amps);

  int num_qubits() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const std::complex<double>> amplitudes() const { return amps_; }
  std::complex<double> amp(std::size_t basis) const { return amps_[basis]; }

  /// Applies one gate in place. Norm is preserved (unitary kernels).
  /// Half-angle sine/cosine values within 1e-15 of zero are snapped to
  /// exactly zero so that the special angles behave exactly: RX(pi) is a
  /// bit flip, R(2*pi) is -I, RZ(0) is the identity. The snap perturbs the
  /// unitary by less than 1e-15 per entry, far below the simulator's 1e-10
  /// norm tolerance.
  void apply(const GateOp& gate);

  void apply(std::span<const GateOp> program);

  /// Multiplies each amplitude by exp(-i*gamma*C(b)) where C is the
  /// instance cost at basis state b — the cost-Hamiltonian phase
  /// separation, applied diagonally without any circuit form.
  void apply_phase_zz(const ProblemInstance& instance, double gamma);

  double norm_sq() const;

  /// Born probability of measuring qubit `q` as 1.
  double qubit_marginal(int q) const;

  /// Born probabilities of all basis states.
  std::vector<double> probabilities() const;

 private:
  void check_qubit(int q) const;
  void apply_single(int q, const std::complex<double> u[4]);

  int n_;
  std::vector<std::complex<double>> amps_;
};

/// <a|b>.
std::complex<double> inner_product(const StateVector& a, const StateVector& b);

/// Draws `shots` bitstrings i.i.d. from the Born distribution; row i,
/// column j is the measured value of qubit j on shot i.
BitMatrix sample_bitstrings(const StateVector& state, int shots,
                            RandomStream& rng);

/// sum_b |amps[b]|^2 * C(b).
double exact_expectation(const StateVector& state,
                         const ProblemInstance& instance);

/// (exact_expectation - m) / (M - m); 1.0 for the degenerate M == m case,
/// mirroring normalized_cost.
double normalized_expectation(const StateVector& state,
                              const ProblemInstance& instance);

}  // namespace qprl
