#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qprl/gates.hpp"
#include "qprl/problems.hpp"
#include "qprl/rng.hpp"
#include "qprl/statevec.hpp"

namespace qprl {

// --- discrete action space ------------------------------------------------
//
// For an n-qubit register the policy picks from 24n + n(n-1)/2 actions:
//   ids [0, 24n): single-qubit rotations, axis-major layout
//       axis  = id / (8n)          0 = X, 1 = Y, 2 = Z
//       qubit = (id mod 8n) / 8
//       k     = id mod 8           angle = 2*pi*k/8
//   ids [24n, ...): CNOT on the unordered pairs {i, j}, i < j, in
//       lexicographic order, control = i, target = j.
// n = 10 gives the full 240 + 45 = 285 actions.

int num_actions(int n);
GateOp decode_action(int id, int n);

// Actions grouped by what they do, ignoring which qubit: 24 rotation
// families (axis x angle) plus CNOT = 25. Family order: RX(0), RX(pi/4),
// ..., RX(7*pi/4), RY(0), ..., RZ(7*pi/4), CNOT.
inline constexpr int kNumActionFamilies = 25;
int action_family(int id, int n);
std::string action_family_name(int family);

// --- episode mechanics ----------------------------------------------------

enum class RewardMode { Sampled, Exact };
enum class Outcome { Running, Won, Lost };

std::string_view to_string(Outcome outcome);
std::string_view to_string(RewardMode mode);

struct EnvConfig {
  int shots = 10;
  int max_program_len = 25;
  double win_threshold = 0.8;
  int n = 10;
  RewardMode reward_mode = RewardMode::Sampled;

  void validate() const;  // throws config_error on bad values
};

/// What the agent sees after every step: the fresh measurement matrix and
/// the instance's upper-triangle weight vector (length n(n+1)/2).
struct Observation {
  BitMatrix B;
  std::vector<double> wtilde;
};

/// Mean over rows of the instance-normalized cost; always in [0, 1].
double reward_from_samples(const BitMatrix& B, const ProblemInstance& instance);

/// Episode score: the best per-step reward seen. Rejects empty traces.
double episode_score(std::span<const double> rewards);

/// Histogram of row bit-patterns as basis indices; entries sum to the row
/// count.
std::vector<int> observation_counts(const BitMatrix& B);

/// One episode: the agent grows a program gate by gate on a fresh register,
/// is rewarded with the sampled (or exact) normalized cost after each gate,
/// and the episode ends as WON the moment the reward exceeds the win
/// threshold, or as LOST when the program reaches its length cap first.
class Env {
 public:
  explicit Env(EnvConfig cfg);

  const EnvConfig& config() const { return cfg_; }

  /// Starts an episode on the given instance. The returned observation has
  /// an all-zero B (measuring |0...0>).
  Observation reset(ProblemInstance instance, RandomStream& rng);

  struct StepResult {
    Observation obs;
    double reward;
    bool done;
    Outcome outcome;
  };

  /// Appends the decoded gate, resamples the observation, scores it.
  /// Stepping a finished episode is a logic error.
  StepResult step(int action, RandomStream& rng);

  bool done() const { return outcome_ != Outcome::Running; }
  Outcome outcome() const { return outcome_; }
  const ProblemInstance& instance() const;
  const StateVector& state() const { return state_; }
  const std::vector<GateOp>& program() const { return program_; }
  const std::vector<int>& actions() const { return actions_; }
  const std::vector<double>& step_rewards() const { return step_rewards_; }

  /// episode_score over the rewards so far.
  double score() const { return episode_score(step_rewards_); }

 private:
  Observation observe(RandomStream& rng);

  EnvConfig cfg_;
  std::optional<ProblemInstance> instance_;
  StateVector state_;
  std::vector<GateOp> program_;
  std::vector<int> actions_;
  std::vector<double> step_rewards_;
  std::vector<double> wtilde_;
  Outcome outcome_ = Outcome::Running;
  bool started_ = false;
};

}  // namespace qprl
