#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qprl/env.hpp"
#include "qprl/policy_net.hpp"
#include "qprl/problems.hpp"
#include "qprl/records.hpp"
#include "qprl/rng.hpp"

namespace qprl {

enum class LrSchedule { LinearToZero, Constant };

struct PPOConfig {
  int n_steps = 512;            // rollout horizon per environment
  double gae_lambda = 0.95;
  // A short effective horizon is deliberate. Every step pays a reward in
  // [0, 1] and a win ends the episode, so with discount near 1 the return
  // is maximized by riding mediocre states to the length cap instead of
  // finishing; trained policies then score worse than untrained ones.
  // 0.3 keeps the improvement signal aimed at the next few actions and
  // trains reliably across seeds.
  double discount = 0.3;
  double clip = 0.2;
  double adam_epsilon = 1e-5;
  double lr_initial = 1e-3;
  LrSchedule lr_schedule = LrSchedule::LinearToZero;
  int epochs_per_update = 4;
  int minibatch_size = 64;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  long long total_steps = 0;    // environment steps across all envs
  int n_envs = 8;
  int hidden = kDefaultHidden;
  EnvConfig env;

  void validate() const;
};

/// On-policy trajectory store: n_steps transitions per environment,
/// time-major (index = step * n_envs + env).
struct RolloutBuffer {
  int n_steps = 0;
  int n_envs = 0;
  int obs_len = 0;

  std::vector<double> observations;  // (n_steps*n_envs) x obs_len, flat
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> logprobs;
  std::vector<std::uint8_t> dones;   // episode ended on this transition
  std::vector<double> bootstrap;     // V(s_T) per env, for truncation

  std::vector<double> advantages;    // filled by compute_gae_buffer
  std::vector<double> returns;

  std::size_t size() const { return static_cast<std::size_t>(n_steps) * n_envs; }
  std::span<const double> obs_row(std::size_t i) const {
    return {observations.data() + i * obs_len, static_cast<std::size_t>(obs_len)};
  }
};

/// Generalized advantage estimation over one trajectory:
///   delta_t = r_t + discount * V_{t+1} * (1 - done_t) - V_t
///   A_t     = delta_t + discount * lambda * (1 - done_t) * A_{t+1}
/// with V_T = bootstrap; returns_t = A_t + V_t.
void compute_gae(std::span<const double> rewards,
                 std::span<const double> values,
                 std::span<const std::uint8_t> dones, double bootstrap,
                 double discount, double lambda,
                 std::span<double> advantages, std::span<double> returns);

/// Runs compute_gae per environment across the strided buffer arrays.
void compute_gae_buffer(RolloutBuffer& buffer, double discount, double lambda);

/// One minibatch, as views into buffer storage gathered by index.
struct MiniBatch {
  std::span<const double> observations;  // k x obs_len, flat
  int obs_len = 0;
  std::span<const int> actions;
  std::span<const double> old_logprobs;
  std::span<const double> advantages;    // already normalized by the caller
  std::span<const double> returns;
};

struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;     // unweighted mean squared error
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double total = 0.0;          // policy + value_coef*mse - entropy_coef*H
};

/// Mean PPO loss over the minibatch and (optionally) its gradient.
///   L = -min(rho*A, clip(rho, 1-eps, 1+eps)*A)
///       + value_coef * (V - R)^2 - entropy_coef * H
/// with rho = exp(logpi_new - logpi_old). Pass an empty grad span to skip
/// the backward pass. Non-finite losses raise a numeric error.
LossStats ppo_loss(const PolicyNet& net, const MiniBatch& batch,
                   const PPOConfig& cfg, std::span<double> grad);

/// Learning rate at `steps_done` consumed environment steps.
double lr_at(const PPOConfig& cfg, long long steps_done);

/// One epochs_per_update x minibatch pass over the buffer, updating the
/// network through `adam`. Advantages are normalized per minibatch.
LossStats ppo_update(const RolloutBuffer& buffer, PolicyNet& net, Adam& adam,
                     const PPOConfig& cfg, double lr, RandomStream& rng);

// --- training loop --------------------------------------------------------

struct CurveRow {
  long long steps = 0;          // env steps consumed so far
  double mean_ep_reward = 0.0;  // mean episode score in this window
  double mean_ep_len = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

void write_curve_csv(const std::filesystem::path& path,
                     std::span<const CurveRow> rows);

struct TrainHooks {
  // Called after each update round with the freshly appended curve row.
  std::function<void(const CurveRow&)> on_curve_row;
  // Periodic checkpointing; 0 disables.
  long long checkpoint_every_steps = 0;
  std::function<void(const PolicyNet&, long long steps)> save_snapshot;
  // Validation cadence, in update rounds (only used when a validation set
  // is supplied).
  int val_every_updates = 8;
};

struct TrainResult {
  PolicyNet net;                // final parameters
  PolicyNet best_net;           // best mean validation score (== net when
                                // no validation set was given)
  double best_val_score = 0.0;
  long long best_val_steps = 0;
  std::vector<CurveRow> curve;
  long long episodes_finished = 0;
};

/// Full PPO training run: cycles through the (reshuffled) training set,
/// alternating rollout collection and clipped-surrogate updates until
/// cfg.total_steps environment steps are consumed.
TrainResult train(std::span<const ProblemInstance> train_set,
                  std::span<const ProblemInstance> val_set,
                  const PPOConfig& cfg, std::uint64_t seed,
                  const TrainHooks& hooks = {});

// --- evaluation -----------------------------------------------------------

/// Runs one sampled-action episode per instance and returns its record.
/// Pass nullptr for `net` to evaluate the untrained baseline (uniform
/// policy). Instance i uses the rng stream derive_seed(seed, i), so agents
/// evaluated with the same seed see paired conditions.
std::vector<EpisodeRecord> evaluate_policy(
    const PolicyNet* net, std::span<const ProblemInstance> dataset,
    const EnvConfig& env_cfg, std::uint64_t seed, std::string agent_label,
    int workers = 1);

/// Mean episode score of a record batch.
double mean_score(std::span<const EpisodeRecord> records);

}  // namespace qprl
