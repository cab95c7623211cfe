#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "qprl/basis.hpp"
#include "qprl/env.hpp"
#include "qprl/errors.hpp"
#include "qprl/qaoa.hpp"
#include "qprl/rng.hpp"
#include "qprl/statevec.hpp"

using namespace qprl;

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

// Mean normalized cost over all basis states — what a cost-independent
// superposition must score.
double mean_normalized(const ProblemInstance& inst) {
  const std::uint32_t dim = 1u << inst.num_variables();
  double total = 0.0;
  for (std::uint32_t b = 0; b < dim; ++b) {
    total += inst.normalized_cost_index(b);
  }
  return total / dim;
}

std::vector<ProblemInstance> one_per_kind(int n, std::uint64_t seed) {
  return {ProblemInstance::generate(ProblemKind::MaxCut, n, seed),
          ProblemInstance::generate(ProblemKind::MaxQp, n, seed + 1),
          ProblemInstance::generate(ProblemKind::Qubo, n, seed + 2)};
}

}  // namespace

TEST_SUITE("qaoa") {

TEST_CASE("pair_index walks the upper triangle lexicographically") {
  // n=4: {0,1} {0,2} {0,3} {1,2} {1,3} {2,3}
  CHECK(pair_index(0, 1, 4) == 0);
  CHECK(pair_index(0, 2, 4) == 1);
  CHECK(pair_index(0, 3, 4) == 2);
  CHECK(pair_index(1, 2, 4) == 3);
  CHECK(pair_index(1, 3, 4) == 4);
  CHECK(pair_index(2, 3, 4) == 5);
}

TEST_CASE("the ising form reproduces the cost on every assignment") {
  for (const auto& inst : one_per_kind(5, 900)) {
    const IsingForm form = ising_form(inst);
    REQUIRE(form.n == 5);
    REQUIRE(form.linear.size() == 5);
    REQUIRE(form.quad.size() == 10);
    std::array<std::uint8_t, 5> bits{};
    for (std::uint32_t b = 0; b < 32; ++b) {
      bits_from_index(b, 5, bits);
      CHECK(ising_eval(form, bits) ==
            doctest::Approx(inst.cost(bits)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ising spin expansion matches a hand-built independent one") {
  // cost expressed over z = 1-2b by brute regression: evaluate the form's
  // claimed coefficients against direct enumeration of z-products.
  const auto inst = ProblemInstance::generate(ProblemKind::Qubo, 4, 911);
  const IsingForm form = ising_form(inst);
  std::array<std::uint8_t, 4> bits{};
  for (std::uint32_t b = 0; b < 16; ++b) {
    bits_from_index(b, 4, bits);
    double z[4];
    for (int i = 0; i < 4; ++i) z[i] = 1.0 - 2.0 * bits[i];
    double total = form.constant;
    for (int i = 0; i < 4; ++i) total += form.linear[i] * z[i];
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        total += form.quad[pair_index(i, j, 4)] * z[i] * z[j];
      }
    }
    CHECK(total == doctest::Approx(inst.cost(bits)).epsilon(1e-12));
  }
}

TEST_CASE("gamma = 0 keeps the uniform cost average") {
  // |+>^n is an X eigenstate, so the mixer alone cannot change any
  // cost expectation: <C> stays the all-states mean.
  for (const auto& inst : one_per_kind(4, 920)) {
    for (double beta : {0.0, 0.7, 2.2}) {
      const StateVector s = build_qaoa_state(inst, 0.0, beta);
      CHECK(normalized_expectation(s, inst) ==
            doctest::Approx(mean_normalized(inst)).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta = 0 keeps uniform probabilities under any phase") {
  for (const auto& inst : one_per_kind(4, 930)) {
    const StateVector s = build_qaoa_state(inst, 1.3, 0.0);
    const double uniform = 1.0 / 16.0;
    for (std::uint32_t b = 0; b < 16; ++b) {
      CHECK(std::norm(s.amp(b)) == doctest::Approx(uniform).epsilon(1e-13));
    }
    CHECK(normalized_expectation(s, inst) ==
          doctest::Approx(mean_normalized(inst)).epsilon(1e-12));
  }
}

TEST_CASE("the gate program builds the same state as the direct construction") {
  for (const auto& inst : one_per_kind(5, 940)) {
    for (auto [gamma, beta] : {std::pair{0.9, 0.3}, std::pair{4.4, 5.1}}) {
      const StateVector direct = build_qaoa_state(inst, gamma, beta);
      StateVector circuit(5);
      for (const GateOp& gate : qaoa_program(inst, gamma, beta)) {
        circuit.apply(gate);
      }
      const double overlap = std::abs(inner_product(direct, circuit));
      CHECK(overlap >= 1.0 - 1e-12);
    }
  }
}

TEST_CASE("the program uses the documented gate template") {
  const auto inst = ProblemInstance::generate(ProblemKind::MaxCut, 4, 950);
  const auto program = qaoa_program(inst, 0.8, 0.2);
  REQUIRE_FALSE(program.empty());
  // Leads with H on every qubit.
  for (int q = 0; q < 4; ++q) {
    CHECK(program[q].kind == GateKind::H);
    CHECK(program[q].q0 == q);
  }
  // Ends with RX(2*beta) on every qubit.
  for (int q = 0; q < 4; ++q) {
    const GateOp& gate = program[program.size() - 4 + q];
    CHECK(gate.kind == GateKind::RX);
    CHECK(gate.angle == doctest::Approx(0.4).epsilon(1e-15));
  }
  // In between: only CNOT/RZ cost blocks.
  for (std::size_t i = 4; i + 4 < program.size(); ++i) {
    const bool ok = program[i].kind == GateKind::CNOT ||
                    program[i].kind == GateKind::RZ;
    CHECK(ok);
  }
}

TEST_CASE("grid search lands on left-edge bins and beats the whole grid") {
  QaoaConfig cfg;
  cfg.bins = 6;
  const auto inst = ProblemInstance::generate(ProblemKind::MaxCut, 4, 960);
  const QaoaResult result = grid_search(inst, cfg);

  CHECK(result.gamma_index >= 0);
  CHECK(result.gamma_index < 6);
  CHECK(result.beta_index >= 0);
  CHECK(result.beta_index < 6);
  CHECK(result.gamma_star == result.gamma_index * (kTau / 6.0));
  CHECK(result.beta_star == result.beta_index * (kTau / 6.0));
  CHECK(result.exact_expectation >= 0.0);
  CHECK(result.exact_expectation <= 1.0);

  // Independent exhaustive re-scan.
  double best = -1.0;
  int best_g = 0, best_b = 0;
  for (int gi = 0; gi < 6; ++gi) {
    for (int bi = 0; bi < 6; ++bi) {
      const double value = normalized_expectation(
          build_qaoa_state(inst, gi * (kTau / 6.0), bi * (kTau / 6.0)), inst);
      if (value > best) {
        best = value;
        best_g = gi;
        best_b = bi;
      }
    }
  }
  CHECK(result.exact_expectation == doctest::Approx(best).epsilon(1e-13));
  CHECK(result.gamma_index == best_g);
  CHECK(result.beta_index == best_b);
}

TEST_CASE("ties resolve to the smallest grid indices") {
  // All-zero weights: every expectation is the degenerate 1.0.
  const ProblemInstance flat(ProblemKind::MaxCut, 3,
                             std::vector<double>(9, 0.0), 3);
  QaoaConfig cfg;
  cfg.bins = 4;
  const QaoaResult result = grid_search(flat, cfg);
  CHECK(result.gamma_index == 0);
  CHECK(result.beta_index == 0);
  CHECK(result.exact_expectation == 1.0);
}

TEST_CASE("sampled quality shares the agent's reward estimator") {
  const auto inst = ProblemInstance::generate(ProblemKind::Qubo, 5, 970);
  QaoaConfig cfg;
  cfg.shots = 16;
  RandomStream rng(1234), twin(1234);
  const double quality = sampled_quality(inst, 0.9, 0.4, cfg, rng);

  const StateVector s = build_qaoa_state(inst, 0.9, 0.4);
  const BitMatrix B = sample_bitstrings(s, 16, twin);
  CHECK(quality == reward_from_samples(B, inst));
  CHECK(quality >= 0.0);
  CHECK(quality <= 1.0);
}

TEST_CASE("full runs are deterministic in the stream seed") {
  const auto inst = ProblemInstance::generate(ProblemKind::MaxCut, 5, 980);
  QaoaConfig cfg;
  RandomStream r1(55), r2(55), r3(56);
  const QaoaResult a = run_qaoa(inst, cfg, r1);
  const QaoaResult b = run_qaoa(inst, cfg, r2);
  const QaoaResult c = run_qaoa(inst, cfg, r3);
  CHECK(a.gamma_star == b.gamma_star);
  CHECK(a.beta_star == b.beta_star);
  CHECK(a.sampled_quality == b.sampled_quality);
  CHECK(a.uncompiled_len == static_cast<int>(a.program.size()));
  // The grid optimum is sampling-independent; only the quality may move.
  CHECK(a.gamma_star == c.gamma_star);
  CHECK(a.beta_star == c.beta_star);
}

TEST_CASE("qaoa records carry the run summary") {
  const auto inst = ProblemInstance::generate(ProblemKind::MaxQp, 4, 990);
  QaoaConfig cfg;
  RandomStream rng(77);
  const QaoaResult result = run_qaoa(inst, cfg, rng);
  const EpisodeRecord rec = qaoa_record(inst, result, 0.8);

  CHECK(rec.instance_seed == inst.seed());
  CHECK(rec.kind == "maxqp");
  CHECK(rec.agent == "qaoa");
  CHECK(rec.actions.empty());
  CHECK(rec.program_text.size() == result.program.size());
  CHECK(rec.rewards == std::vector<double>{result.sampled_quality});
  CHECK(rec.score == result.sampled_quality);
  CHECK(rec.gamma == result.gamma_star);
  CHECK(rec.beta == result.beta_star);
  const bool outcome_ok =
      rec.outcome == (result.sampled_quality > 0.8 ? "won" : "lost");
  CHECK(outcome_ok);
}

TEST_CASE("config validation") {
  QaoaConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.bins = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg.bins = 20;
  cfg.shots = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("single unit edge reaches the known p=1 optimum on a dense grid") {
  // For one weight-1 MaxCut edge the p=1 expectation is
  // (1 + sin(4*beta) * sin(gamma)) / 2, with the exact optimum 1 at
  // gamma = pi/2, beta = pi/8 — both left-edge points of a 400-bin grid.
  const ProblemInstance edge(ProblemKind::MaxCut, 2, {0.0, 1.0, 1.0, 0.0}, 4);
  for (auto [gamma, beta] : {std::pair{0.3, 1.1}, std::pair{2.0, 0.25},
                             std::pair{5.0, 3.3}}) {
    const double predicted =
        0.5 * (1.0 + std::sin(4.0 * beta) * std::sin(gamma));
    const StateVector s = build_qaoa_state(edge, gamma, beta);
    CHECK(normalized_expectation(s, edge) ==
          doctest::Approx(predicted).epsilon(1e-12));
  }

  QaoaConfig cfg;
  cfg.bins = 400;
  const QaoaResult result = grid_search(edge, cfg);
  CHECK(result.exact_expectation >= 0.999);
  CHECK(result.gamma_index == 100);  // gamma = pi/2
  CHECK(result.beta_index == 25);    // beta = pi/8
}

}  // TEST_SUITE
