#include "qprl/env.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "qprl/basis.hpp"
#include "qprl/errors.hpp"

namespace qprl {

int num_actions(int n) {
  if (n < 1 || n > kMaxVariables) {
    throw config_error("qubit count must be in [1, " +
                       std::to_string(kMaxVariables) + "], got " +
                       std::to_string(n));
  }
  return 24 * n + n * (n - 1) / 2;
}

GateOp decode_action(int id, int n) {
  const int total = num_actions(n);
  if (id < 0 || id >= total) {
    throw std::invalid_argument("action id " + std::to_string(id) +
                                " out of range [0, " + std::to_string(total) +
                                ")");
  }
  const int singles = 24 * n;
  if (id < singles) {
    const int axis = id / (8 * n);
    const int rem = id % (8 * n);
    const int qubit = rem / 8;
    const int k = rem % 8;
    const double angle = k * (std::numbers::pi / 4.0);
    switch (axis) {
      case 0: return GateOp::rx(qubit, angle);
      case 1: return GateOp::ry(qubit, angle);
      default: return GateOp::rz(qubit, angle);
    }
  }
  int p = id - singles;
  for (int i = 0; i < n; ++i) {
    const int partners = n - 1 - i;
    if (p < partners) return GateOp::cnot(i, i + 1 + p);
    p -= partners;
  }
  throw std::logic_error("pair enumeration out of sync with num_actions");
}

int action_family(int id, int n) {
  const int total = num_actions(n);
  if (id < 0 || id >= total) {
    throw std::invalid_argument("action id out of range");
  }
  const int singles = 24 * n;
  if (id >= singles) return 24;
  const int axis = id / (8 * n);
  const int k = id % 8;
  return axis * 8 + k;
}

std::string action_family_name(int family) {
  if (family < 0 || family >= kNumActionFamilies) {
    throw std::invalid_argument("family index out of range");
  }
  if (family == 24) return "CNOT";
  static constexpr std::string_view axes[3] = {"RX", "RY", "RZ"};
  const int axis = family / 8;
  const int k = family % 8;
  return std::string(axes[axis]) + "(" +
         angle_text(k * (std::numbers::pi / 4.0)) + ")";
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Running: return "running";
    case Outcome::Won: return "won";
    case Outcome::Lost: return "lost";
  }
  throw std::invalid_argument("unknown Outcome");
}

std::string_view to_string(RewardMode mode) {
  switch (mode) {
    case RewardMode::Sampled: return "sampled";
    case RewardMode::Exact: return "exact";
  }
  throw std::invalid_argument("unknown RewardMode");
}

void EnvConfig::validate() const {
  if (shots < 1) throw config_error("shots must be >= 1");
  if (max_program_len < 1) throw config_error("max_program_len must be >= 1");
  if (!(win_threshold > 0.0 && win_threshold < 1.0)) {
    throw config_error("win_threshold must lie in (0, 1)");
  }
  if (n < 1 || n > kMaxVariables) {
    throw config_error("qubit count must be in [1, " +
                       std::to_string(kMaxVariables) + "]");
  }
}

double reward_from_samples(const BitMatrix& B,
                           const ProblemInstance& instance) {
  if (B.cols != instance.num_variables()) {
    throw std::invalid_argument("sample width does not match instance size");
  }
  if (B.rows < 1) throw std::invalid_argument("no sample rows");
  double total = 0.0;
  for (int r = 0; r < B.rows; ++r) {
    total += instance.normalized_cost(B.row(r));
  }
  return total / B.rows;
}

double episode_score(std::span<const double> rewards) {
  if (rewards.empty()) throw std::invalid_argument("empty reward trace");
  return *std::max_element(rewards.begin(), rewards.end());
}

std::vector<int> observation_counts(const BitMatrix& B) {
  std::vector<int> counts(std::size_t{1} << B.cols, 0);
  for (int r = 0; r < B.rows; ++r) {
    ++counts[index_from_bits(B.row(r))];
  }
  return counts;
}

Env::Env(EnvConfig cfg) : cfg_(cfg), state_(cfg.n) { cfg_.validate(); }

const ProblemInstance& Env::instance() const {
  if (!instance_) throw std::logic_error("environment was never reset");
  return *instance_;
}

Observation Env::observe(RandomStream& rng) {
  return Observation{sample_bitstrings(state_, cfg_.shots, rng), wtilde_};
}

Observation Env::reset(ProblemInstance instance, RandomStream& rng) {
  if (instance.num_variables() != cfg_.n) {
    throw config_error("instance has " +
                       std::to_string(instance.num_variables()) +
                       " variables but the environment expects " +
                       std::to_string(cfg_.n));
  }
  instance_ = std::move(instance);
  state_ = StateVector(cfg_.n);
  program_.clear();
  actions_.clear();
  step_rewards_.clear();
  wtilde_ = instance_->upper_triangle();
  outcome_ = Outcome::Running;
  started_ = true;
  return observe(rng);
}

Env::StepResult Env::step(int action, RandomStream& rng) {
  if (!started_) throw std::logic_error("step before reset");
  if (done()) throw std::logic_error("episode already finished");

  const GateOp gate = decode_action(action, cfg_.n);
  program_.push_back(gate);
  actions_.push_back(action);
  state_.apply(gate);

  Observation obs = observe(rng);
  const double reward = (cfg_.reward_mode == RewardMode::Sampled)
                            ? reward_from_samples(obs.B, *instance_)
                            : normalized_expectation(state_, *instance_);
  step_rewards_.push_back(reward);

  if (reward > cfg_.win_threshold) {
    outcome_ = Outcome::Won;
  } else if (static_cast<int>(program_.size()) >= cfg_.max_program_len) {
    outcome_ = Outcome::Lost;
  }
  return StepResult{std::move(obs), reward, done(), outcome_};
}

}  // namespace qprl
