// Microbenchmarks for the hot paths: statevector kernels, policy-network
// forward/backward, the PPO loss, environment stepping, the QAOA grid
// search, and transpilation. Build Release and run ./benchmarks/qprl_bench.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <complex>
#include <numbers>
#include <vector>

#include "qprl/env.hpp"
#include "qprl/policy_net.hpp"
#include "qprl/ppo.hpp"
#include "qprl/problems.hpp"
#include "qprl/qaoa.hpp"
#include "qprl/rng.hpp"
#include "qprl/statevec.hpp"
#include "qprl/transpiler.hpp"

namespace {

using namespace qprl;

constexpr double kPi = std::numbers::pi;

StateVector random_state(int n, std::uint64_t seed) {
  RandomStream rng(seed);
  const std::size_t dim = std::size_t{1} << n;
  std::vector<std::complex<double>> amps(dim);
  double norm_sq = 0.0;
  for (auto& amp : amps) {
    amp = {rng.gaussian(), rng.gaussian()};
    norm_sq += std::norm(amp);
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (auto& amp : amps) amp *= inv;
  return StateVector::from_amplitudes(n, std::move(amps));
}

void bm_apply_rotation(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  StateVector sv = random_state(n, 1);
  int qubit = 0;
  for (auto _ : state) {
    sv.apply(GateOp::rx(qubit, kPi / 4.0));
    qubit = (qubit + 1) % n;
    benchmark::DoNotOptimize(sv.amp(0));
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(bm_apply_rotation)->Arg(4)->Arg(10)->Arg(14)->Arg(16);

void bm_apply_cnot(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  StateVector sv = random_state(n, 2);
  int qubit = 0;
  for (auto _ : state) {
    sv.apply(GateOp::cnot(qubit, (qubit + 1) % n));
    qubit = (qubit + 1) % n;
    benchmark::DoNotOptimize(sv.amp(0));
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(bm_apply_cnot)->Arg(10)->Arg(16);

void bm_apply_phase_zz(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ProblemInstance inst = ProblemInstance::generate(ProblemKind::MaxCut, n, 3);
  StateVector sv = random_state(n, 3);
  for (auto _ : state) {
    sv.apply_phase_zz(inst, 0.7);
    benchmark::DoNotOptimize(sv.amp(0));
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(bm_apply_phase_zz)->Arg(10)->Arg(16);

void bm_sample_bitstrings(benchmark::State& state) {
  const int shots = static_cast<int>(state.range(0));
  const StateVector sv = random_state(10, 4);
  RandomStream rng(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_bitstrings(sv, shots, rng));
  }
}
BENCHMARK(bm_sample_bitstrings)->Arg(10)->Arg(1000);

void bm_exact_expectation(benchmark::State& state) {
  const ProblemInstance inst = ProblemInstance::generate(ProblemKind::Qubo, 10, 5);
  const StateVector sv = random_state(10, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_expectation(sv, inst));
  }
}
BENCHMARK(bm_exact_expectation);

// Production network shape at n = 10: 10x10 samples + 55 upper-triangle
// weights in, 285 actions out.
constexpr int kBenchInput = 155;
constexpr int kBenchActions = 285;

void bm_policy_forward(benchmark::State& state) {
  RandomStream rng(6);
  const PolicyNet net =
      PolicyNet::initialized(kBenchInput, kDefaultHidden, kBenchActions, rng);
  std::vector<double> obs(kBenchInput);
  for (double& x : obs) x = rng.uniform();
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(obs));
  }
}
BENCHMARK(bm_policy_forward);

void bm_policy_backward(benchmark::State& state) {
  RandomStream rng(7);
  PolicyNet net =
      PolicyNet::initialized(kBenchInput, kDefaultHidden, kBenchActions, rng);
  std::vector<double> obs(kBenchInput);
  for (double& x : obs) x = rng.uniform();
  std::vector<double> dlogits(kBenchActions);
  for (double& g : dlogits) g = rng.gaussian() / kBenchActions;
  std::vector<double> grad(net.num_params());
  for (auto _ : state) {
    const auto f = net.forward(obs);
    std::fill(grad.begin(), grad.end(), 0.0);
    net.backward(f, dlogits, 0.25, grad);
    benchmark::DoNotOptimize(grad[0]);
  }
}
BENCHMARK(bm_policy_backward);

void bm_ppo_loss(benchmark::State& state) {
  RandomStream rng(8);
  PolicyNet net =
      PolicyNet::initialized(kBenchInput, kDefaultHidden, kBenchActions, rng);
  const int k = 64;
  std::vector<double> obs(k * kBenchInput);
  for (double& x : obs) x = rng.uniform();
  std::vector<int> actions(k);
  std::vector<double> old_logprobs(k), advantages(k), returns(k);
  for (int i = 0; i < k; ++i) {
    actions[i] = static_cast<int>(rng.uniform_below(kBenchActions));
    const auto f = net.forward(
        std::span<const double>(obs).subspan(i * kBenchInput, kBenchInput));
    old_logprobs[i] = action_logprob_entropy(f.logits, actions[i]).first +
                      0.05 * rng.gaussian();
    advantages[i] = rng.gaussian();
    returns[i] = rng.gaussian();
  }
  MiniBatch batch;
  batch.observations = obs;
  batch.obs_len = kBenchInput;
  batch.actions = actions;
  batch.old_logprobs = old_logprobs;
  batch.advantages = advantages;
  batch.returns = returns;
  const PPOConfig cfg;
  std::vector<double> grad(net.num_params());
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    benchmark::DoNotOptimize(ppo_loss(net, batch, cfg, grad));
  }
  state.SetItemsProcessed(state.iterations() * k);
}
BENCHMARK(bm_ppo_loss);

void bm_env_episode(benchmark::State& state) {
  const EnvConfig cfg;
  Env env(cfg);
  RandomStream rng(9);
  const ProblemInstance inst =
      ProblemInstance::generate(ProblemKind::MaxCut, cfg.n, 9);
  std::int64_t steps = 0;
  for (auto _ : state) {
    env.reset(inst, rng);
    while (!env.done()) {
      env.step(static_cast<int>(rng.uniform_below(num_actions(cfg.n))), rng);
      ++steps;
    }
    benchmark::DoNotOptimize(env.score());
  }
  state.SetItemsProcessed(steps);
}
BENCHMARK(bm_env_episode);

void bm_qaoa_state(benchmark::State& state) {
  const ProblemInstance inst =
      ProblemInstance::generate(ProblemKind::MaxQp, 10, 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_qaoa_state(inst, 1.1, 0.4));
  }
}
BENCHMARK(bm_qaoa_state);

void bm_qaoa_grid_search(benchmark::State& state) {
  const ProblemInstance inst =
      ProblemInstance::generate(ProblemKind::MaxCut, 10, 11);
  const QaoaConfig cfg;  // 20 x 20
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid_search(inst, cfg));
  }
}
BENCHMARK(bm_qaoa_grid_search)->Unit(benchmark::kMillisecond);

void bm_transpile_program(benchmark::State& state) {
  RandomStream rng(12);
  std::vector<GateOp> program;
  for (int g = 0; g < 25; ++g) {
    program.push_back(
        decode_action(static_cast<int>(rng.uniform_below(num_actions(10))), 10));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(transpile(program));
  }
}
BENCHMARK(bm_transpile_program);

void bm_verify_equivalence(benchmark::State& state) {
  RandomStream rng(13);
  std::vector<GateOp> program;
  for (int g = 0; g < 25; ++g) {
    program.push_back(
        decode_action(static_cast<int>(rng.uniform_below(num_actions(10))), 10));
  }
  const std::vector<GateOp> native = to_gate_ops(transpile(program));
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_equivalence(program, native, 10));
  }
}
BENCHMARK(bm_verify_equivalence);

}  // namespace

BENCHMARK_MAIN();
