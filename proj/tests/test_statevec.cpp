#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qprl/basis.hpp"
#include "qprl/errors.hpp"
#include "qprl/gates.hpp"
#include "qprl/problems.hpp"
#include "qprl/rng.hpp"
#include "qprl/statevec.hpp"

using namespace qprl;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = 3.14159265358979323846;

// --- dense-matrix oracle --------------------------------------------------
// Builds the full 2^n x 2^n unitary of one gate and applies it by plain
// matrix-vector product; deliberately nothing like the in-place pair
// kernels under test.

using Matrix = std::vector<std::vector<cplx>>;

Matrix gate_matrix_2x2(const GateOp& g) {
  const double h = g.angle / 2.0;
  switch (g.kind) {
    case GateKind::RX:
      return {{std::cos(h), cplx(0, -std::sin(h))},
              {cplx(0, -std::sin(h)), std::cos(h)}};
    case GateKind::RY:
      return {{std::cos(h), -std::sin(h)}, {std::sin(h), std::cos(h)}};
    case GateKind::RZ:
      return {{std::exp(cplx(0, -h)), 0.0}, {0.0, std::exp(cplx(0, h))}};
    case GateKind::H: {
      const double r = 1.0 / std::sqrt(2.0);
      return {{r, r}, {r, -r}};
    }
    default: REQUIRE(false);
  }
  return {};
}

Matrix full_matrix(const GateOp& g, int n) {
  const std::size_t dim = std::size_t{1} << n;
  Matrix u(dim, std::vector<cplx>(dim, 0.0));
  switch (g.kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::H: {
      const Matrix m = gate_matrix_2x2(g);
      for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
          // Entry survives only when every other qubit keeps its value.
          if ((r & ~(std::size_t{1} << g.q0)) != (c & ~(std::size_t{1} << g.q0)))
            continue;
          u[r][c] = m[(r >> g.q0) & 1][(c >> g.q0) & 1];
        }
      }
      break;
    }
    case GateKind::CNOT:
      for (std::size_t c = 0; c < dim; ++c) {
        std::size_t r = c;
        if ((c >> g.q0) & 1) r ^= (std::size_t{1} << g.q1);
        u[r][c] = 1.0;
      }
      break;
    case GateKind::CZ:
      for (std::size_t c = 0; c < dim; ++c) {
        u[c][c] = (((c >> g.q0) & 1) && ((c >> g.q1) & 1)) ? -1.0 : 1.0;
      }
      break;
    case GateKind::PhaseZZ:
      for (std::size_t c = 0; c < dim; ++c) {
        const bool same = (((c >> g.q0) & 1) == ((c >> g.q1) & 1));
        u[c][c] = std::exp(cplx(0, same ? -g.angle : g.angle));
      }
      break;
  }
  return u;
}

std::vector<cplx> matvec(const Matrix& u, std::span<const cplx> v) {
  std::vector<cplx> out(v.size(), 0.0);
  for (std::size_t r = 0; r < u.size(); ++r) {
    for (std::size_t c = 0; c < u.size(); ++c) out[r] += u[r][c] * v[c];
  }
  return out;
}

StateVector random_state(int n, RandomStream& rng) {
  std::vector<cplx> amps(std::size_t{1} << n);
  double norm = 0.0;
  for (auto& a : amps) {
    a = cplx(rng.gaussian(), rng.gaussian());
    norm += std::norm(a);
  }
  norm = std::sqrt(norm);
  for (auto& a : amps) a /= norm;
  return StateVector::from_amplitudes(n, std::move(amps));
}

}  // namespace

TEST_SUITE("statevec") {

TEST_CASE("construction starts in the all-zeros state") {
  StateVector s(3);
  CHECK(s.dim() == 8);
  CHECK(s.amp(0) == cplx(1.0, 0.0));
  for (std::size_t b = 1; b < 8; ++b) CHECK(s.amp(b) == cplx(0.0, 0.0));
  CHECK_THROWS_AS(StateVector(0), config_error);
  CHECK_THROWS_AS(StateVector(17), config_error);
  CHECK_THROWS_AS(StateVector::from_amplitudes(2, {1.0}), std::invalid_argument);
}

TEST_CASE("every kernel matches the dense-matrix oracle") {
  RandomStream rng(101);
  const int n = 3;
  std::vector<GateOp> catalog;
  // Angles on both sides of pi to cover every branch of the kernels.
  for (const double a : {0.3, 1.1, kPi / 2, kPi, 2.3, 1.2 * kPi, 5.9, -0.7}) {
    for (int q = 0; q < n; ++q) {
      catalog.push_back(GateOp::rx(q, a));
      catalog.push_back(GateOp::ry(q, a));
      catalog.push_back(GateOp::rz(q, a));
    }
    catalog.push_back(GateOp::phase_zz(0, 2, a));
  }
  for (int q = 0; q < n; ++q) catalog.push_back(GateOp::h(q));
  catalog.push_back(GateOp::cnot(0, 1));
  catalog.push_back(GateOp::cnot(2, 0));
  catalog.push_back(GateOp::cz(1, 2));

  for (const GateOp& g : catalog) {
    CAPTURE(to_text(g));
    StateVector s = random_state(n, rng);
    const std::vector<cplx> before(s.amplitudes().begin(),
                                   s.amplitudes().end());
    s.apply(g);
    const auto expected = matvec(full_matrix(g, n), before);
    for (std::size_t b = 0; b < expected.size(); ++b) {
      REQUIRE(std::abs(s.amp(b) - expected[b]) < 1e-12);
    }
  }
}

TEST_CASE("hand-computed single-qubit amplitudes") {
  const double r = 1.0 / std::sqrt(2.0);

  SUBCASE("H makes the uniform pair") {
    StateVector s(1);
    s.apply(GateOp::h(0));
    CHECK(std::abs(s.amp(0) - cplx(r, 0)) < 1e-15);
    CHECK(std::abs(s.amp(1) - cplx(r, 0)) < 1e-15);
  }

  SUBCASE("H acts on bit 0 of the index (little-endian)") {
    StateVector s(2);
    s.apply(GateOp::h(0));
    CHECK(std::abs(s.amp(0) - cplx(r, 0)) < 1e-15);
    CHECK(std::abs(s.amp(1) - cplx(r, 0)) < 1e-15);  // |01> means qubit0 = 1
    CHECK(s.amp(2) == cplx(0, 0));
    CHECK(s.amp(3) == cplx(0, 0));
  }

  SUBCASE("RX(pi) is an exact bit flip up to -i") {
    StateVector s(1);
    s.apply(GateOp::rx(0, kPi));
    CHECK(s.amp(0) == cplx(0, 0));
    CHECK(s.amp(1) == cplx(0, -1));
  }

  SUBCASE("RX(pi/2) and RY(pi/2) on |0>") {
    StateVector sx(1);
    sx.apply(GateOp::rx(0, kPi / 2));
    CHECK(std::abs(sx.amp(0) - cplx(r, 0)) < 1e-15);
    CHECK(std::abs(sx.amp(1) - cplx(0, -r)) < 1e-15);

    StateVector sy(1);
    sy.apply(GateOp::ry(0, kPi / 2));
    CHECK(std::abs(sy.amp(0) - cplx(r, 0)) < 1e-15);
    CHECK(std::abs(sy.amp(1) - cplx(r, 0)) < 1e-15);
  }

  SUBCASE("RZ dephases the uniform pair") {
    StateVector s(1);
    s.apply(GateOp::h(0));
    s.apply(GateOp::rz(0, kPi / 2));
    CHECK(std::abs(s.amp(0) - r * std::exp(cplx(0, -kPi / 4))) < 1e-15);
    CHECK(std::abs(s.amp(1) - r * std::exp(cplx(0, kPi / 4))) < 1e-15);
  }
}

TEST_CASE("special angles are exact, not approximate") {
  RandomStream rng(7);
  StateVector s = random_state(4, rng);
  const std::vector<cplx> before(s.amplitudes().begin(), s.amplitudes().end());

  SUBCASE("RZ(0) is the identity bitwise") {
    s.apply(GateOp::rz(2, 0.0));
    for (std::size_t b = 0; b < s.dim(); ++b) CHECK(s.amp(b) == before[b]);
  }

  SUBCASE("RX(2*pi) is exactly -I") {
    s.apply(GateOp::rx(1, 2 * kPi));
    for (std::size_t b = 0; b < s.dim(); ++b) CHECK(s.amp(b) == -before[b]);
  }

  SUBCASE("RY(2*pi) is exactly -I") {
    s.apply(GateOp::ry(3, 2 * kPi));
    for (std::size_t b = 0; b < s.dim(); ++b) CHECK(s.amp(b) == -before[b]);
  }

  SUBCASE("RX(pi) and RY(pi) flip the target marginal exactly") {
    // The complement probability, summed the same way the marginal is, so
    // bit-for-bit equality is achievable (1 - marginal is not: the state
    // norm itself carries rounding).
    auto complement = [&](int q) {
      double total = 0.0;
      for (std::size_t b = 0; b < s.dim(); ++b) {
        if (!(b >> q & 1)) total += std::norm(s.amp(b));
      }
      return total;
    };
    for (int q = 0; q < 4; ++q) {
      const double other_side = complement(q);
      s.apply(GateOp::rx(q, kPi));
      CHECK(s.qubit_marginal(q) == other_side);
    }
    for (int q = 0; q < 4; ++q) {
      const double other_side = complement(q);
      s.apply(GateOp::ry(q, kPi));
      CHECK(s.qubit_marginal(q) == other_side);
    }
  }
}

TEST_CASE("CNOT truth table on basis states") {
  // control q0=0, target q1=1: |b0 b1> with index b0 + 2 b1.
  const int expected_01[4] = {0, 3, 2, 1};  // flips target iff bit0 set
  for (std::uint32_t in = 0; in < 4; ++in) {
    std::vector<cplx> amps(4, 0.0);
    amps[in] = 1.0;
    StateVector s = StateVector::from_amplitudes(2, std::move(amps));
    s.apply(GateOp::cnot(0, 1));
    CHECK(s.amp(expected_01[in]) == cplx(1.0, 0.0));
  }
  const int expected_10[4] = {0, 1, 3, 2};  // control qubit 1, target 0
  for (std::uint32_t in = 0; in < 4; ++in) {
    std::vector<cplx> amps(4, 0.0);
    amps[in] = 1.0;
    StateVector s = StateVector::from_amplitudes(2, std::move(amps));
    s.apply(GateOp::cnot(1, 0));
    CHECK(s.amp(expected_10[in]) == cplx(1.0, 0.0));
  }
}

TEST_CASE("CZ flips only the |11> sign") {
  RandomStream rng(13);
  StateVector s = random_state(2, rng);
  const std::vector<cplx> before(s.amplitudes().begin(), s.amplitudes().end());
  s.apply(GateOp::cz(0, 1));
  CHECK(s.amp(0) == before[0]);
  CHECK(s.amp(1) == before[1]);
  CHECK(s.amp(2) == before[2]);
  CHECK(s.amp(3) == -before[3]);
}

TEST_CASE("PhaseZZ equals its CNOT-conjugated circuit exactly") {
  RandomStream rng(19);
  for (const double theta : {0.37, kPi / 3, 2.9, -1.1}) {
    StateVector a = random_state(3, rng);
    StateVector b = StateVector::from_amplitudes(
        3, std::vector<cplx>(a.amplitudes().begin(), a.amplitudes().end()));
    a.apply(GateOp::phase_zz(0, 2, theta));
    b.apply(GateOp::cnot(0, 2));
    b.apply(GateOp::rz(2, 2 * theta));
    b.apply(GateOp::cnot(0, 2));
    for (std::size_t i = 0; i < a.dim(); ++i) {
      CHECK(std::abs(a.amp(i) - b.amp(i)) < 1e-15);
    }
  }
}

TEST_CASE("two-qubit gates need distinct qubits") {
  StateVector s(3);
  CHECK_THROWS_AS(s.apply(GateOp::cnot(1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(s.apply(GateOp::cz(2, 2)), std::invalid_argument);
  CHECK_THROWS_AS(s.apply(GateOp::rx(5, 0.1)), std::invalid_argument);
}

TEST_CASE("random programs preserve the norm") {
  RandomStream rng(29);
  StateVector s(10);
  for (int step = 0; step < 50; ++step) {
    switch (rng.uniform_below(4)) {
      case 0: s.apply(GateOp::rx(static_cast<int>(rng.uniform_below(10)),
                                 rng.uniform(0.0, 2 * kPi))); break;
      case 1: s.apply(GateOp::ry(static_cast<int>(rng.uniform_below(10)),
                                 rng.uniform(0.0, 2 * kPi))); break;
      case 2: s.apply(GateOp::h(static_cast<int>(rng.uniform_below(10)))); break;
      default: {
        const int c = static_cast<int>(rng.uniform_below(10));
        const int t = static_cast<int>(rng.uniform_below(9));
        s.apply(GateOp::cnot(c, t >= c ? t + 1 : t));
        break;
      }
    }
    REQUIRE(std::abs(s.norm_sq() - 1.0) < 1e-10);
  }
}

TEST_CASE("marginals recompute from the probability vector") {
  RandomStream rng(31);
  StateVector s = random_state(4, rng);
  const auto probs = s.probabilities();
  double total = 0.0;
  for (double p : probs) total += p;
  CHECK(std::abs(total - 1.0) < 1e-12);
  for (int q = 0; q < 4; ++q) {
    double expected = 0.0;
    for (std::size_t b = 0; b < probs.size(); ++b) {
      if ((b >> q) & 1) expected += probs[b];
    }
    CHECK(s.qubit_marginal(q) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("phase separation multiplies by the cost phases") {
  RandomStream rng(37);
  const auto inst = ProblemInstance::generate(ProblemKind::Qubo, 4, 555);
  const double gamma = 0.81;
  StateVector s = random_state(4, rng);
  const std::vector<cplx> before(s.amplitudes().begin(), s.amplitudes().end());
  s.apply_phase_zz(inst, gamma);
  for (std::uint32_t b = 0; b < 16; ++b) {
    const cplx expected =
        before[b] * std::exp(cplx(0, -gamma * inst.cost_index(b)));
    CHECK(std::abs(s.amp(b) - expected) < 1e-13);
  }
  StateVector wrong(3);
  CHECK_THROWS_AS(wrong.apply_phase_zz(inst, 1.0), std::invalid_argument);
}

TEST_CASE("expectations equal the direct Born sum") {
  RandomStream rng(41);
  for (ProblemKind kind :
       {ProblemKind::MaxCut, ProblemKind::MaxQp, ProblemKind::Qubo}) {
    const auto inst = ProblemInstance::generate(kind, 5, 2024);
    StateVector s = random_state(5, rng);
    double expected = 0.0;
    for (std::uint32_t b = 0; b < 32; ++b) {
      expected += std::norm(s.amp(b)) * inst.cost_index(b);
    }
    CHECK(exact_expectation(s, inst) ==
          doctest::Approx(expected).epsilon(1e-12));

    const double q = normalized_expectation(s, inst);
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
  }

  // Degenerate zero-cost instance normalizes to 1.
  const ProblemInstance flat(ProblemKind::Qubo, 3,
                             std::vector<double>(9, 0.0), 0);
  StateVector s = random_state(3, rng);
  CHECK(normalized_expectation(s, flat) == 1.0);
}

TEST_CASE("inner products behave like <a|b>") {
  RandomStream rng(43);
  StateVector a = random_state(3, rng);
  StateVector b = random_state(3, rng);
  CHECK(std::abs(inner_product(a, a) - cplx(1, 0)) < 1e-12);
  CHECK(std::abs(inner_product(a, b) - std::conj(inner_product(b, a))) <
        1e-15);
  StateVector zero(2), one(2);
  one.apply(GateOp::rx(0, kPi));
  CHECK(inner_product(zero, one) == cplx(0, 0));
}

TEST_CASE("sampling is deterministic and Born-distributed") {
  StateVector plus(2);
  plus.apply(GateOp::h(0));
  plus.apply(GateOp::h(1));

  RandomStream r1(71), r2(71);
  const BitMatrix a = sample_bitstrings(plus, 64, r1);
  const BitMatrix b = sample_bitstrings(plus, 64, r2);
  CHECK(a.data == b.data);
  CHECK(a.rows == 64);
  CHECK(a.cols == 2);

  RandomStream r3(73);
  const int shots = 10000;
  const BitMatrix big = sample_bitstrings(plus, shots, r3);
  for (int q = 0; q < 2; ++q) {
    int ones = 0;
    for (int r = 0; r < shots; ++r) ones += big.at(r, q);
    // Bernoulli(1/2): 4 sigma = 4 * sqrt(shots)/2 = 200.
    CHECK(std::abs(ones - shots / 2) < 200);
  }

  // A basis state samples to itself; index 1 means qubit 0 is set.
  StateVector basis = StateVector::from_amplitudes(2, {0.0, 1.0, 0.0, 0.0});
  RandomStream r4(79);
  const BitMatrix m = sample_bitstrings(basis, 5, r4);
  for (int r = 0; r < 5; ++r) {
    CHECK(m.at(r, 0) == 1);
    CHECK(m.at(r, 1) == 0);
  }
}

}  // TEST_SUITE
