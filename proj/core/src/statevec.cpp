#include "qprl/statevec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qprl/basis.hpp"
#include "qprl/errors.hpp"

namespace qprl {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

// Zeroes half-angle trig residue: cos(pi/2) evaluates to ~6e-17, and
// carrying that through the kernels would leave RX(pi) an inexact bit flip.
double snap(double x) { return std::abs(x) < 1e-15 ? 0.0 : x; }

}  // namespace

StateVector::StateVector(int n) : n_(n) {
  if (n < 1 || n > kMaxVariables) {
    throw config_error("qubit count must be in [1, " +
                       std::to_string(kMaxVariables) + "], got " +
                       std::to_string(n));
  }
  amps_.assign(std::size_t{1} << n, {0.0, 0.0});
  amps_[0] = {1.0, 0.0};
}

StateVector StateVector::from_amplitudes(
    int n, std::vector<std::complex<double>> amps) {
  StateVector state(n);
  if (amps.size() != state.dim()) {
    throw std::invalid_argument("amplitude array must have length 2^n");
  }
  state.amps_ = std::move(amps);
  return state;
}

void StateVector::check_qubit(int q) const {
  if (q < 0 || q >= n_) {
    throw std::invalid_argument("qubit index " + std::to_string(q) +
                                " out of range for " + std::to_string(n_) +
                                " qubits");
  }
}

void StateVector::apply_single(int q, const std::complex<double> u[4]) {
  const std::size_t mask = std::size_t{1} << q;
  const std::size_t dim = amps_.size();
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & mask) continue;
    const std::complex<double> x0 = amps_[base];
    const std::complex<double> x1 = amps_[base | mask];
    amps_[base] = u[0] * x0 + u[1] * x1;
    amps_[base | mask] = u[2] * x0 + u[3] * x1;
  }
}

void StateVector::apply(const GateOp& gate) {
  check_qubit(gate.q0);
  if (is_two_qubit(gate.kind)) {
    check_qubit(gate.q1);
    if (gate.q0 == gate.q1) {
      throw std::invalid_argument("two-qubit gate needs distinct qubits");
    }
  }

  const double c = snap(std::cos(gate.angle * 0.5));
  const double s = snap(std::sin(gate.angle * 0.5));
  const std::size_t dim = amps_.size();

  switch (gate.kind) {
    case GateKind::RX: {
      const std::complex<double> u[4] = {c, -kI * s, -kI * s, c};
      apply_single(gate.q0, u);
      break;
    }
    case GateKind::RY: {
      const std::complex<double> u[4] = {c, -s, s, c};
      apply_single(gate.q0, u);
      break;
    }
    case GateKind::RZ: {
      // Diagonal update: only phases change, so measurement statistics
      // are untouched by construction.
      const std::complex<double> p0{c, -s};  // e^{-i*theta/2}
      const std::complex<double> p1{c, s};   // e^{+i*theta/2}
      const std::size_t mask = std::size_t{1} << gate.q0;
      for (std::size_t b = 0; b < dim; ++b) {
        amps_[b] *= (b & mask) ? p1 : p0;
      }
      break;
    }
    case GateKind::H: {
      const double r = 1.0 / std::numbers::sqrt2;
      const std::complex<double> u[4] = {r, r, r, -r};
      apply_single(gate.q0, u);
      break;
    }
    case GateKind::CNOT: {
      const std::size_t cmask = std::size_t{1} << gate.q0;
      const std::size_t tmask = std::size_t{1} << gate.q1;
      for (std::size_t b = 0; b < dim; ++b) {
        if ((b & cmask) && !(b & tmask)) {
          std::swap(amps_[b], amps_[b | tmask]);
        }
      }
      break;
    }
    case GateKind::CZ: {
      const std::size_t both = (std::size_t{1} << gate.q0) |
                               (std::size_t{1} << gate.q1);
      for (std::size_t b = 0; b < dim; ++b) {
        if ((b & both) == both) amps_[b] = -amps_[b];
      }
      break;
    }
    case GateKind::PhaseZZ: {
      // exp(-i*theta*Z_a Z_b): full angle, eigenvalue +1 on equal bits.
      const double ct = std::cos(gate.angle);
      const double st = std::sin(gate.angle);
      const std::complex<double> same{ct, -st};
      const std::complex<double> diff{ct, st};
      const std::size_t amask = std::size_t{1} << gate.q0;
      const std::size_t bmask = std::size_t{1} << gate.q1;
      for (std::size_t b = 0; b < dim; ++b) {
        const bool equal = static_cast<bool>(b & amask) == static_cast<bool>(b & bmask);
        amps_[b] *= equal ? same : diff;
      }
      break;
    }
  }
}

void StateVector::apply(std::span<const GateOp> program) {
  for (const GateOp& gate : program) apply(gate);
}

void StateVector::apply_phase_zz(const ProblemInstance& instance,
                                 double gamma) {
  if (instance.num_variables() != n_) {
    throw std::invalid_argument("instance size does not match register size");
  }
  const std::vector<double>& costs = instance.cost_table();
  for (std::size_t b = 0; b < amps_.size(); ++b) {
    const double phase = gamma * costs[b];
    amps_[b] *= std::complex<double>{std::cos(phase), -std::sin(phase)};
  }
}

double StateVector::norm_sq() const {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return total;
}

double StateVector::qubit_marginal(int q) const {
  check_qubit(q);
  const std::size_t mask = std::size_t{1} << q;
  double total = 0.0;
  for (std::size_t b = 0; b < amps_.size(); ++b) {
    if (b & mask) total += std::norm(amps_[b]);
  }
  return total;
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> probs(amps_.size());
  for (std::size_t b = 0; b < amps_.size(); ++b) probs[b] = std::norm(amps_[b]);
  return probs;
}

std::complex<double> inner_product(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("statevector dimensions differ");
  }
  std::complex<double> total{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) {
    total += std::conj(a.amp(i)) * b.amp(i);
  }
  return total;
}

BitMatrix sample_bitstrings(const StateVector& state, int shots,
                            RandomStream& rng) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  const int n = state.num_qubits();

  // Inverse-CDF sampling over the 2^n basis states.
  std::vector<double> cdf = state.probabilities();
  std::size_t last_support = 0;
  for (std::size_t b = 0; b < cdf.size(); ++b) {
    if (cdf[b] > 0.0) last_support = b;
    if (b > 0) cdf[b] += cdf[b - 1];
  }

  BitMatrix out(shots, n);
  for (int shot = 0; shot < shots; ++shot) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t basis = (it == cdf.end())
                            ? last_support  // u beyond the rounded total mass
                            : static_cast<std::size_t>(it - cdf.begin());
    bits_from_index(static_cast<std::uint32_t>(basis), n,
                    std::span<std::uint8_t>(
                        out.data.data() + static_cast<std::size_t>(shot) * n,
                        static_cast<std::size_t>(n)));
  }
  return out;
}

double exact_expectation(const StateVector& state,
                         const ProblemInstance& instance) {
  if (instance.num_variables() != state.num_qubits()) {
    throw std::invalid_argument("instance size does not match register size");
  }
  const std::vector<double>& costs = instance.cost_table();
  double total = 0.0;
  for (std::size_t b = 0; b < state.dim(); ++b) {
    total += std::norm(state.amp(b)) * costs[b];
  }
  return total;
}

double normalized_expectation(const StateVector& state,
                              const ProblemInstance& instance) {
  const auto [m, M] = instance.extremes();
  if (M == m) return 1.0;
  return (exact_expectation(state, instance) - m) / (M - m);
}

}  // namespace qprl
