#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <vector>

#include <doctest.h>

#include "qprl/env.hpp"
#include "qprl/errors.hpp"
#include "qprl/problems.hpp"
#include "qprl/rng.hpp"
#include "qprl/statevec.hpp"

using namespace qprl;

namespace {

constexpr double kPi = std::numbers::pi;

EnvConfig small_config(int n) {
  EnvConfig cfg;
  cfg.n = n;
  cfg.shots = 5;
  cfg.max_program_len = 10;
  return cfg;
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("action count is 24n plus the unordered pairs") {
  CHECK(num_actions(1) == 24);
  CHECK(num_actions(2) == 49);
  CHECK(num_actions(4) == 102);
  CHECK(num_actions(6) == 159);
  CHECK(num_actions(10) == 285);
  CHECK_THROWS_AS((void)num_actions(0), config_error);
  CHECK_THROWS_AS((void)num_actions(17), config_error);
}

TEST_CASE("rotation actions decode axis-major with eighth-turn angles") {
  const int n = 6;
  for (int axis = 0; axis < 3; ++axis) {
    for (int qubit = 0; qubit < n; ++qubit) {
      for (int k = 0; k < 8; ++k) {
        const int id = axis * 8 * n + qubit * 8 + k;
        const GateOp gate = decode_action(id, n);
        const GateKind want_kind = axis == 0   ? GateKind::RX
                                   : axis == 1 ? GateKind::RY
                                               : GateKind::RZ;
        CHECK(gate.kind == want_kind);
        CHECK(gate.q0 == qubit);
        CHECK(gate.q1 == -1);
        CHECK(gate.angle == k * (kPi / 4.0));
      }
    }
  }
}

TEST_CASE("pair actions decode to every CNOT exactly once, in order") {
  const int n = 6;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  REQUIRE(static_cast<int>(pairs.size()) == n * (n - 1) / 2);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const GateOp gate = decode_action(24 * n + static_cast<int>(p), n);
    CHECK(gate.kind == GateKind::CNOT);
    CHECK(gate.q0 == pairs[p].first);   // control is the smaller index
    CHECK(gate.q1 == pairs[p].second);
  }
}

TEST_CASE("action ids outside the range are rejected") {
  CHECK_THROWS_AS((void)decode_action(-1, 6), std::invalid_argument);
  CHECK_THROWS_AS((void)decode_action(159, 6), std::invalid_argument);
  CHECK_THROWS_AS((void)decode_action(285, 10), std::invalid_argument);
  CHECK_NOTHROW((void)decode_action(284, 10));
}

TEST_CASE("families partition the actions by what the gate does") {
  const int n = 10;
  std::vector<int> counts(kNumActionFamilies, 0);
  for (int id = 0; id < num_actions(n); ++id) {
    const int family = action_family(id, n);
    REQUIRE(family >= 0);
    REQUIRE(family < kNumActionFamilies);
    ++counts[family];

    const GateOp gate = decode_action(id, n);
    if (gate.kind == GateKind::CNOT) {
      CHECK(family == 24);
    } else {
      const int axis = gate.kind == GateKind::RX   ? 0
                       : gate.kind == GateKind::RY ? 1
                                                   : 2;
      const int k = static_cast<int>(std::lround(gate.angle / (kPi / 4.0)));
      CHECK(family == axis * 8 + k);
    }
  }
  for (int f = 0; f < 24; ++f) CHECK(counts[f] == n);
  CHECK(counts[24] == n * (n - 1) / 2);
}

TEST_CASE("family names spell the shared gate") {
  CHECK(action_family_name(0) == "RX(0)");
  CHECK(action_family_name(1) == "RX(pi/4)");
  CHECK(action_family_name(7) == "RX(7*pi/4)");
  CHECK(action_family_name(8) == "RY(0)");
  CHECK(action_family_name(18) == "RZ(pi/2)");
  CHECK(action_family_name(23) == "RZ(7*pi/4)");
  CHECK(action_family_name(24) == "CNOT");
  CHECK_THROWS_AS((void)action_family_name(-1), std::invalid_argument);
  CHECK_THROWS_AS((void)action_family_name(25), std::invalid_argument);
}

TEST_CASE("outcome and reward-mode names") {
  CHECK(to_string(Outcome::Running) == "running");
  CHECK(to_string(Outcome::Won) == "won");
  CHECK(to_string(Outcome::Lost) == "lost");
  CHECK(to_string(RewardMode::Sampled) == "sampled");
  CHECK(to_string(RewardMode::Exact) == "exact");
}

TEST_CASE("config validation") {
  EnvConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto expect_reject = [](auto mutate) {
    EnvConfig bad;
    mutate(bad);
    CHECK_THROWS_AS(bad.validate(), config_error);
  };
  expect_reject([](EnvConfig& c) { c.shots = 0; });
  expect_reject([](EnvConfig& c) { c.max_program_len = 0; });
  expect_reject([](EnvConfig& c) { c.win_threshold = 0.0; });
  expect_reject([](EnvConfig& c) { c.win_threshold = 1.0; });
  expect_reject([](EnvConfig& c) { c.n = 0; });
  expect_reject([](EnvConfig& c) { c.n = 17; });
}

TEST_CASE("sampled reward is the mean normalized cost of the rows") {
  // Single unit edge: cut values 0,1,1,0 with extremes (0,1).
  const ProblemInstance edge(ProblemKind::MaxCut, 2,
                             {0.0, 1.0, 1.0, 0.0}, 7);
  BitMatrix B(3, 2);
  B.at(0, 0) = 0; B.at(0, 1) = 0;  // cost 0
  B.at(1, 0) = 1; B.at(1, 1) = 0;  // cost 1
  B.at(2, 0) = 1; B.at(2, 1) = 1;  // cost 0
  CHECK(reward_from_samples(B, edge) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  BitMatrix wrong(2, 3);
  CHECK_THROWS_AS((void)reward_from_samples(wrong, edge),
                  std::invalid_argument);
  BitMatrix empty(0, 2);
  CHECK_THROWS_AS((void)reward_from_samples(empty, edge),
                  std::invalid_argument);
}

TEST_CASE("episode score is the running maximum") {
  const std::vector<double> rewards{0.2, 0.9, 0.4};
  CHECK(episode_score(rewards) == 0.9);
  const std::vector<double> single{0.3};
  CHECK(episode_score(single) == 0.3);
  CHECK_THROWS_AS((void)episode_score({}), std::invalid_argument);
}

TEST_CASE("observation counts histogram the rows as basis indices") {
  BitMatrix B(4, 2);
  B.at(0, 0) = 1;                  // index 1
  B.at(1, 0) = 1; B.at(1, 1) = 1;  // index 3
  B.at(2, 0) = 1;                  // index 1
  const auto counts = observation_counts(B);  // last row stays 00
  CHECK(counts == std::vector<int>{1, 2, 0, 1});
}

TEST_CASE("reset observes the all-zero register") {
  Env env(small_config(4));
  RandomStream rng(11);
  const auto obs = env.reset(ProblemInstance::generate(ProblemKind::MaxCut, 4, 5), rng);
  CHECK(obs.B.rows == 5);
  CHECK(obs.B.cols == 4);
  for (std::uint8_t bit : obs.B.data) CHECK(bit == 0);
  CHECK(obs.wtilde == env.instance().upper_triangle());
  CHECK_FALSE(env.done());
  CHECK(env.program().empty());
  CHECK_THROWS_AS((void)env.score(), std::invalid_argument);
}

TEST_CASE("stepping before reset is a logic error") {
  Env env(small_config(4));
  RandomStream rng(1);
  CHECK_THROWS_AS((void)env.step(0, rng), std::logic_error);
  CHECK_THROWS_AS((void)env.instance(), std::logic_error);
}

TEST_CASE("instance size must match the register") {
  Env env(small_config(4));
  RandomStream rng(1);
  CHECK_THROWS_AS(
      (void)env.reset(ProblemInstance::generate(ProblemKind::Qubo, 6, 1), rng),
      config_error);
}

TEST_CASE("sampled step reward matches the returned observation") {
  EnvConfig cfg = small_config(4);
  Env env(cfg);
  RandomStream rng(21), action_rng(22);
  (void)env.reset(ProblemInstance::generate(ProblemKind::MaxQp, 4, 33), rng);
  while (!env.done()) {
    const int action =
        static_cast<int>(action_rng.uniform_below(num_actions(4)));
    const auto res = env.step(action, rng);
    CHECK(res.reward == reward_from_samples(res.obs.B, env.instance()));
    CHECK(res.reward >= 0.0);
    CHECK(res.reward <= 1.0);
    CHECK(res.done == (res.outcome != Outcome::Running));
  }
}

TEST_CASE("exact mode rewards the normalized expectation of the state") {
  EnvConfig cfg = small_config(4);
  cfg.reward_mode = RewardMode::Exact;
  Env env(cfg);
  RandomStream rng(31), action_rng(32);
  (void)env.reset(ProblemInstance::generate(ProblemKind::Qubo, 4, 44), rng);
  while (!env.done()) {
    const int action =
        static_cast<int>(action_rng.uniform_below(num_actions(4)));
    const auto res = env.step(action, rng);
    // Independent recomputation: Born-rule sum over the 16 basis states.
    double want = 0.0;
    for (std::uint32_t b = 0; b < 16; ++b) {
      want += std::norm(env.state().amp(b)) *
              env.instance().normalized_cost_index(b);
    }
    CHECK(res.reward == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("winning requires strictly exceeding the threshold") {
  // QUBO diag (1, 3): costs {0,1,3,4}, so |01> scores 3/4 exactly, and
  // RX(pi) on qubit 1 reaches it deterministically (exact mode).
  const ProblemInstance inst(ProblemKind::Qubo, 2, {1.0, 0.0, 0.0, 3.0}, 9);
  const int rx_pi_q1 = 1 * 8 + 4;  // axis X, qubit 1, k=4 -> angle pi

  EnvConfig cfg;
  cfg.n = 2;
  cfg.shots = 1;
  cfg.max_program_len = 1;
  cfg.reward_mode = RewardMode::Exact;

  SUBCASE("reward equal to the threshold does not win") {
    cfg.win_threshold = 0.75;
    Env env(cfg);
    RandomStream rng(3);
    (void)env.reset(inst, rng);
    const auto res = env.step(rx_pi_q1, rng);
    CHECK(res.reward == 0.75);
    CHECK(res.outcome == Outcome::Lost);  // length cap reached instead
  }
  SUBCASE("any excess wins immediately") {
    cfg.win_threshold = 0.749;
    Env env(cfg);
    RandomStream rng(3);
    (void)env.reset(inst, rng);
    const auto res = env.step(rx_pi_q1, rng);
    CHECK(res.reward == 0.75);
    CHECK(res.outcome == Outcome::Won);
    CHECK(env.done());
  }
}

TEST_CASE("episodes cap at the program length limit") {
  EnvConfig cfg = small_config(3);
  cfg.win_threshold = 0.999;  // effectively unreachable for this instance
  cfg.max_program_len = 7;
  Env env(cfg);
  RandomStream rng(41);
  (void)env.reset(ProblemInstance::generate(ProblemKind::MaxQp, 3, 55), rng);
  int steps = 0;
  while (!env.done()) {
    (void)env.step(0, rng);  // RX(0): the identity, so no reward drift
    ++steps;
    REQUIRE(steps <= 7);
  }
  CHECK(steps == 7);
  CHECK(env.outcome() == Outcome::Lost);
  CHECK(env.program().size() == 7);
  CHECK(env.step_rewards().size() == 7);
  CHECK(env.actions() == std::vector<int>(7, 0));
  CHECK_THROWS_AS((void)env.step(0, rng), std::logic_error);
}

TEST_CASE("episode bookkeeping is stream-deterministic") {
  EnvConfig cfg = small_config(5);
  auto run = [&](std::uint64_t seed) {
    Env env(cfg);
    RandomStream rng(seed);
    RandomStream actions(derive_seed(seed, 1));
    (void)env.reset(ProblemInstance::generate(ProblemKind::MaxCut, 5, 77), rng);
    while (!env.done()) {
      (void)env.step(static_cast<int>(actions.uniform_below(num_actions(5))),
                     rng);
    }
    return std::make_tuple(env.actions(), env.step_rewards(),
                           std::string(to_string(env.outcome())));
  };
  CHECK(run(500) == run(500));
  CHECK(run(500) != run(501));
}

TEST_CASE("random episodes keep rewards in range and the win rule tight") {
  EnvConfig cfg = small_config(4);
  cfg.max_program_len = 12;
  Env env(cfg);
  RandomStream rng(61), action_rng(62);
  for (int ep = 0; ep < 200; ++ep) {
    (void)env.reset(
        ProblemInstance::generate(ProblemKind::MaxCut, 4, derive_seed(90, ep)),
        rng);
    while (!env.done()) {
      (void)env.step(static_cast<int>(action_rng.uniform_below(num_actions(4))),
                     rng);
    }
    const auto& rewards = env.step_rewards();
    REQUIRE_FALSE(rewards.empty());
    REQUIRE(rewards.size() <= 12);
    for (double r : rewards) {
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
    // Every pre-final reward must have been at or below the threshold, or
    // the episode would have ended there.
    for (std::size_t i = 0; i + 1 < rewards.size(); ++i) {
      CHECK(rewards[i] <= cfg.win_threshold);
    }
    if (env.outcome() == Outcome::Won) {
      CHECK(rewards.back() > cfg.win_threshold);
    } else {
      CHECK(rewards.back() <= cfg.win_threshold);
      CHECK(rewards.size() == 12);
    }
    CHECK(env.score() == *std::max_element(rewards.begin(), rewards.end()));
  }
}

TEST_CASE("the register stays normalized through long random programs") {
  EnvConfig cfg = small_config(6);
  cfg.max_program_len = 25;
  cfg.win_threshold = 0.999;
  Env env(cfg);
  RandomStream rng(71), action_rng(72);
  (void)env.reset(ProblemInstance::generate(ProblemKind::Qubo, 6, 88), rng);
  while (!env.done()) {
    (void)env.step(static_cast<int>(action_rng.uniform_below(num_actions(6))),
                   rng);
  }
  double norm = 0.0;
  for (std::uint32_t b = 0; b < env.state().dim(); ++b) {
    norm += std::norm(env.state().amp(b));
  }
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
