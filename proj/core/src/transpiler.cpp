#include "qprl/transpiler.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "qprl/statevec.hpp"

namespace qprl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAngleTol = 1e-12;  // special-angle recognition

double norm_2pi(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

bool is_zero_mod_2pi(double angle, double tol) {
  const double r = norm_2pi(angle);
  return r <= tol || kTwoPi - r <= tol;
}

// Solves RZ(a) * RXp * RZ(b) * RXp * RZ(c) = U up to global phase for a
// 2x2 unitary U, and appends the template in application order
// [RZ(c), RXp, RZ(b), RXp, RZ(a)]. Uses
//   RXp * RZ(b) * RXp = -i * [[sin(b/2), cos(b/2)], [cos(b/2), -sin(b/2)]]
// so |U00| pins sin(b/2), |U01| pins cos(b/2), and the entry phases pin
// a +- c. Degenerate diagonal/anti-diagonal U leaves one of a -+ c free;
// it is set to zero.
void append_zxz(const std::complex<double> u[4], int qubit,
                std::vector<NativeGate>& out) {
  const double s = std::abs(u[0]);
  const double c = std::abs(u[1]);
  const double b = 2.0 * std::atan2(s, c);

  double sum;   // a + c
  double diff;  // a - c
  if (s < 1e-12) {  // anti-diagonal
    sum = 0.0;
    diff = std::arg(u[2]) - std::arg(u[1]);
  } else if (c < 1e-12) {  // diagonal
    diff = 0.0;
    sum = std::arg(u[3]) - std::arg(u[0]) - kPi;
  } else {
    diff = std::arg(u[2]) - std::arg(u[1]);
    sum = std::arg(u[3]) - std::arg(u[0]) - kPi;
    // sum and diff are each recovered only mod 2*pi, and the two entry
    // pairs must imply the same leftover global phase; when they land on
    // opposite branches (pi apart) the anti-diagonal picks up a spurious
    // sign, which one 2*pi shift of diff repairs.
    const double phase_diag = std::arg(u[0]) + 0.5 * sum;
    const double phase_anti = std::arg(u[1]) + 0.5 * diff;
    if (std::cos(phase_diag - phase_anti) < 0.0) diff += 2.0 * kPi;
  }
  const double a = 0.5 * (sum + diff);
  const double g = 0.5 * (sum - diff);

  out.push_back(NativeGate::rz(qubit, norm_2pi(g)));
  out.push_back(NativeGate::rxp(qubit));
  out.push_back(NativeGate::rz(qubit, norm_2pi(b)));
  out.push_back(NativeGate::rxp(qubit));
  out.push_back(NativeGate::rz(qubit, norm_2pi(a)));
}

void append_h(int qubit, std::vector<NativeGate>& out) {
  // RZ(pi/2) RXp RZ(pi/2) = -i * H.
  out.push_back(NativeGate::rz(qubit, kPi / 2.0));
  out.push_back(NativeGate::rxp(qubit));
  out.push_back(NativeGate::rz(qubit, kPi / 2.0));
}

}  // namespace

std::string_view to_string(NativeKind kind) {
  switch (kind) {
    case NativeKind::RZ: return "RZ";
    case NativeKind::RXp: return "RX(pi/2)";
    case NativeKind::RXm: return "RX(-pi/2)";
    case NativeKind::CZ: return "CZ";
  }
  throw std::invalid_argument("unknown NativeKind");
}

std::vector<NativeGate> decompose_gate(const GateOp& gate) {
  std::vector<NativeGate> out;
  switch (gate.kind) {
    case GateKind::RZ:
      out.push_back(NativeGate::rz(gate.q0, gate.angle));
      break;
    case GateKind::RX: {
      const double r = norm_2pi(gate.angle);
      if (is_zero_mod_2pi(r, kAngleTol)) break;  // identity up to phase
      if (std::abs(r - kPi / 2.0) <= kAngleTol) {
        out.push_back(NativeGate::rxp(gate.q0));
        break;
      }
      if (std::abs(r - 3.0 * kPi / 2.0) <= kAngleTol) {
        // RX(3*pi/2) = -RX(-pi/2): native up to global phase.
        out.push_back(NativeGate::rxm(gate.q0));
        break;
      }
      const double ch = std::cos(gate.angle * 0.5);
      const double sh = std::sin(gate.angle * 0.5);
      const std::complex<double> u[4] = {
          {ch, 0.0}, {0.0, -sh}, {0.0, -sh}, {ch, 0.0}};
      append_zxz(u, gate.q0, out);
      break;
    }
    case GateKind::RY: {
      const double r = norm_2pi(gate.angle);
      if (is_zero_mod_2pi(r, kAngleTol)) break;
      const double ch = std::cos(gate.angle * 0.5);
      const double sh = std::sin(gate.angle * 0.5);
      const std::complex<double> u[4] = {
          {ch, 0.0}, {-sh, 0.0}, {sh, 0.0}, {ch, 0.0}};
      append_zxz(u, gate.q0, out);
      break;
    }
    case GateKind::H:
      append_h(gate.q0, out);
      break;
    case GateKind::CNOT:
      // H(t) CZ(c,t) H(t), with H expanded to native gates.
      append_h(gate.q1, out);
      out.push_back(NativeGate::cz(gate.q0, gate.q1));
      append_h(gate.q1, out);
      break;
    case GateKind::CZ:
      out.push_back(NativeGate::cz(gate.q0, gate.q1));
      break;
    case GateKind::PhaseZZ:
      throw std::invalid_argument("PhaseZZ has no native decomposition");
  }
  return out;
}

NativeProgram transpile(std::span<const GateOp> program) {
  NativeProgram out;
  auto push = [&](const NativeGate& gate, int source) {
    if (gate.kind == NativeKind::RZ) {
      if (!out.gates.empty() && out.gates.back().kind == NativeKind::RZ &&
          out.gates.back().q0 == gate.q0) {
        // Merge into the previous RZ; keep its provenance. A merge that
        // cancels to identity deletes the pair, which can expose an
        // earlier RZ to later merges (stack discipline handles cascades).
        const double merged = norm_2pi(out.gates.back().angle + gate.angle);
        if (is_zero_mod_2pi(merged, 1e-9)) {
          out.gates.pop_back();
          out.provenance.pop_back();
        } else {
          out.gates.back().angle = merged;
        }
        return;
      }
      if (is_zero_mod_2pi(gate.angle, 1e-9)) return;
    }
    out.gates.push_back(gate);
    out.provenance.push_back(source);
  };

  for (std::size_t i = 0; i < program.size(); ++i) {
    for (const NativeGate& gate : decompose_gate(program[i])) {
      push(gate, static_cast<int>(i));
    }
  }
  return out;
}

GateOp to_gate_op(const NativeGate& gate) {
  switch (gate.kind) {
    case NativeKind::RZ: return GateOp::rz(gate.q0, gate.angle);
    case NativeKind::RXp: return GateOp::rx(gate.q0, kPi / 2.0);
    case NativeKind::RXm: return GateOp::rx(gate.q0, -kPi / 2.0);
    case NativeKind::CZ: return GateOp::cz(gate.q0, gate.q1);
  }
  throw std::invalid_argument("unknown NativeKind");
}

std::vector<GateOp> to_gate_ops(const NativeProgram& program) {
  std::vector<GateOp> out;
  out.reserve(program.gates.size());
  for (const NativeGate& gate : program.gates) out.push_back(to_gate_op(gate));
  return out;
}

std::string to_text(const NativeGate& gate) { return to_text(to_gate_op(gate)); }

std::string native_program_to_text(const NativeProgram& program) {
  std::string out;
  for (const NativeGate& gate : program.gates) {
    out += to_text(gate);
    out += '\n';
  }
  return out;
}

namespace {

StateVector run_program(std::span<const GateOp> program, StateVector state) {
  state.apply(program);
  return state;
}

bool equivalent_dense(std::span<const GateOp> a, std::span<const GateOp> b,
                      int n) {
  const std::size_t dim = std::size_t{1} << n;
  // Columns of both unitaries, built by running each basis state through.
  std::vector<std::vector<std::complex<double>>> ua(dim), ub(dim);
  for (std::size_t col = 0; col < dim; ++col) {
    std::vector<std::complex<double>> basis(dim, {0.0, 0.0});
    basis[col] = {1.0, 0.0};
    const StateVector sa = run_program(a, StateVector::from_amplitudes(n, basis));
    const StateVector sb = run_program(b, StateVector::from_amplitudes(n, basis));
    ua[col].assign(sa.amplitudes().begin(), sa.amplitudes().end());
    ub[col].assign(sb.amplitudes().begin(), sb.amplitudes().end());
  }

  // Fix the global phase at A's largest entry, then compare everywhere.
  std::size_t best_col = 0, best_row = 0;
  double best_mag = -1.0;
  for (std::size_t col = 0; col < dim; ++col) {
    for (std::size_t row = 0; row < dim; ++row) {
      const double mag = std::abs(ua[col][row]);
      if (mag > best_mag) {
        best_mag = mag;
        best_col = col;
        best_row = row;
      }
    }
  }
  if (best_mag <= 0.0) return false;
  const std::complex<double> phase =
      ub[best_col][best_row] / ua[best_col][best_row];
  if (std::abs(std::abs(phase) - 1.0) > 1e-9) return false;
  for (std::size_t col = 0; col < dim; ++col) {
    for (std::size_t row = 0; row < dim; ++row) {
      if (std::abs(phase * ua[col][row] - ub[col][row]) > 1e-9) return false;
    }
  }
  return true;
}

bool equivalent_sampled(std::span<const GateOp> a, std::span<const GateOp> b,
                        int n) {
  RandomStream rng(0x717b1e5u);  // fixed: the check must be reproducible
  const std::size_t dim = std::size_t{1} << n;
  for (int trial = 0; trial < 8; ++trial) {
    // Random product state: an independent normalized spinor per qubit.
    std::vector<std::complex<double>> q0(n), q1(n);
    for (int q = 0; q < n; ++q) {
      std::complex<double> u{rng.gaussian(), rng.gaussian()};
      std::complex<double> v{rng.gaussian(), rng.gaussian()};
      const double norm = std::sqrt(std::norm(u) + std::norm(v));
      q0[q] = u / norm;
      q1[q] = v / norm;
    }
    std::vector<std::complex<double>> amps(dim);
    for (std::size_t idx = 0; idx < dim; ++idx) {
      std::complex<double> amp{1.0, 0.0};
      for (int q = 0; q < n; ++q) amp *= (idx >> q) & 1 ? q1[q] : q0[q];
      amps[idx] = amp;
    }
    const StateVector psi_a =
        run_program(a, StateVector::from_amplitudes(n, amps));
    const StateVector psi_b =
        run_program(b, StateVector::from_amplitudes(n, amps));
    if (std::abs(inner_product(psi_a, psi_b)) < 1.0 - 1e-9) return false;
  }
  return true;
}

}  // namespace

bool verify_equivalence(std::span<const GateOp> a, std::span<const GateOp> b,
                        int n) {
  if (n < 1 || n > 16) throw std::invalid_argument("register size out of range");
  return (n <= 4) ? equivalent_dense(a, b, n) : equivalent_sampled(a, b, n);
}

}  // namespace qprl
