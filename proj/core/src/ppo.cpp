#include "qprl/ppo.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>

#include "qprl/errors.hpp"
#include "qprl/parallel.hpp"

namespace qprl {

void PPOConfig::validate() const {
  if (n_steps < 1) throw config_error("n_steps must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0)) {
    throw config_error("discount must lie in (0, 1]");
  }
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw config_error("gae_lambda must lie in [0, 1]");
  }
  if (!(clip > 0.0)) throw config_error("clip must be > 0");
  if (!(adam_epsilon > 0.0)) throw config_error("adam_epsilon must be > 0");
  if (!(lr_initial > 0.0)) throw config_error("lr_initial must be > 0");
  if (epochs_per_update < 1) throw config_error("epochs_per_update must be >= 1");
  if (minibatch_size < 1) throw config_error("minibatch_size must be >= 1");
  if (!(value_coef >= 0.0)) throw config_error("value_coef must be >= 0");
  if (!(entropy_coef >= 0.0)) throw config_error("entropy_coef must be >= 0");
  if (total_steps < 1) throw config_error("total_steps must be >= 1");
  if (n_envs < 1) throw config_error("n_envs must be >= 1");
  if (hidden < 1) throw config_error("hidden must be >= 1");
  env.validate();
}

void compute_gae(std::span<const double> rewards,
                 std::span<const double> values,
                 std::span<const std::uint8_t> dones, double bootstrap,
                 double discount, double lambda,
                 std::span<double> advantages, std::span<double> returns) {
  const std::size_t T = rewards.size();
  if (values.size() != T || dones.size() != T || advantages.size() != T ||
      returns.size() != T) {
    throw std::invalid_argument("trajectory arrays must share one length");
  }
  double acc = 0.0;
  for (std::size_t t = T; t-- > 0;) {
    const double nonterminal = dones[t] ? 0.0 : 1.0;
    const double next_value = (t + 1 == T) ? bootstrap : values[t + 1];
    const double delta =
        rewards[t] + discount * next_value * nonterminal - values[t];
    acc = delta + discount * lambda * nonterminal * acc;
    advantages[t] = acc;
    returns[t] = acc + values[t];
  }
}

void compute_gae_buffer(RolloutBuffer& buffer, double discount,
                        double lambda) {
  const std::size_t N = buffer.size();
  buffer.advantages.resize(N);
  buffer.returns.resize(N);

  const std::size_t T = static_cast<std::size_t>(buffer.n_steps);
  std::vector<double> rewards(T), values(T), adv(T), ret(T);
  std::vector<std::uint8_t> dones(T);
  for (int e = 0; e < buffer.n_envs; ++e) {
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t i = t * buffer.n_envs + e;
      rewards[t] = buffer.rewards[i];
      values[t] = buffer.values[i];
      dones[t] = buffer.dones[i];
    }
    compute_gae(rewards, values, dones, buffer.bootstrap[e], discount, lambda,
                adv, ret);
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t i = t * buffer.n_envs + e;
      buffer.advantages[i] = adv[t];
      buffer.returns[i] = ret[t];
    }
  }
}

LossStats ppo_loss(const PolicyNet& net, const MiniBatch& batch,
                   const PPOConfig& cfg, std::span<double> grad) {
  const std::size_t k = batch.actions.size();
  if (k == 0) throw std::invalid_argument("empty minibatch");
  if (batch.obs_len != net.input_size() ||
      batch.observations.size() != k * static_cast<std::size_t>(batch.obs_len) ||
      batch.old_logprobs.size() != k || batch.advantages.size() != k ||
      batch.returns.size() != k) {
    throw std::invalid_argument("minibatch arrays have mismatched shapes");
  }
  const bool with_grad = !grad.empty();
  if (with_grad && grad.size() != net.num_params()) {
    throw std::invalid_argument("gradient buffer has wrong size");
  }

  LossStats stats;
  const double inv_k = 1.0 / static_cast<double>(k);
  const int A = net.num_actions();
  std::vector<double> dlogits(A);

  for (std::size_t i = 0; i < k; ++i) {
    const auto f = net.forward(batch.observations.subspan(
        i * static_cast<std::size_t>(batch.obs_len),
        static_cast<std::size_t>(batch.obs_len)));
    const int a = batch.actions[i];
    if (a < 0 || a >= A) throw std::invalid_argument("action out of range");

    const double lse = log_sum_exp(f.logits);
    const double new_logp = f.logits[a] - lse;
    double weighted = 0.0;  // sum_j p_j * logit_j, for the entropy
    for (int j = 0; j < A; ++j) weighted += std::exp(f.logits[j] - lse) * f.logits[j];
    const double entropy = lse - weighted;

    const double adv = batch.advantages[i];
    const double log_rho = new_logp - batch.old_logprobs[i];
    const double rho = std::exp(log_rho);
    const double surr1 = rho * adv;
    const double surr2 = std::clamp(rho, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv;
    const double pg = -std::min(surr1, surr2);
    assert(std::min(surr1, surr2) <= surr1);  // clipped never beats unclipped

    const double verr = f.value - batch.returns[i];
    const double mse = verr * verr;
    const double sample_total =
        pg + cfg.value_coef * mse - cfg.entropy_coef * entropy;
    if (!std::isfinite(sample_total)) {
      throw numeric_error("non-finite PPO loss");
    }

    stats.policy_loss += pg;
    stats.value_loss += mse;
    stats.entropy += entropy;
    stats.clip_fraction += (std::abs(rho - 1.0) > cfg.clip) ? 1.0 : 0.0;
    stats.approx_kl += (rho - 1.0) - log_rho;

    if (with_grad) {
      // d(pg)/d(new_logp): active only on the unclipped branch.
      const double dlogp = (surr1 <= surr2) ? -rho * adv : 0.0;
      for (int j = 0; j < A; ++j) {
        const double p_j = std::exp(f.logits[j] - lse);
        const double log_p_j = f.logits[j] - lse;
        // policy term through log softmax, entropy term through -c_e * H.
        dlogits[j] = (-dlogp * p_j +
                      cfg.entropy_coef * p_j * (log_p_j + entropy)) * inv_k;
      }
      dlogits[a] += dlogp * inv_k;
      const double dvalue = cfg.value_coef * 2.0 * verr * inv_k;
      net.backward(f, dlogits, dvalue, grad);
    }
  }

  stats.policy_loss *= inv_k;
  stats.value_loss *= inv_k;
  stats.entropy *= inv_k;
  stats.clip_fraction *= inv_k;
  stats.approx_kl *= inv_k;
  stats.total = stats.policy_loss + cfg.value_coef * stats.value_loss -
                cfg.entropy_coef * stats.entropy;
  return stats;
}

double lr_at(const PPOConfig& cfg, long long steps_done) {
  if (cfg.lr_schedule == LrSchedule::Constant) return cfg.lr_initial;
  const double frac = 1.0 - static_cast<double>(steps_done) /
                                static_cast<double>(cfg.total_steps);
  return cfg.lr_initial * std::max(0.0, frac);
}

LossStats ppo_update(const RolloutBuffer& buffer, PolicyNet& net, Adam& adam,
                     const PPOConfig& cfg, double lr, RandomStream& rng) {
  const std::size_t N = buffer.size();
  if (buffer.advantages.size() != N || buffer.returns.size() != N) {
    throw std::logic_error("advantages not computed before update");
  }
  const int obs_len = buffer.obs_len;

  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<double> grad(net.num_params());
  std::vector<double> mb_obs;
  std::vector<int> mb_actions;
  std::vector<double> mb_oldlogp, mb_adv, mb_ret;

  LossStats agg;
  double weight = 0.0;

  for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < N;
         start += static_cast<std::size_t>(cfg.minibatch_size)) {
      const std::size_t count =
          std::min<std::size_t>(cfg.minibatch_size, N - start);

      mb_obs.assign(count * obs_len, 0.0);
      mb_actions.assign(count, 0);
      mb_oldlogp.assign(count, 0.0);
      mb_adv.assign(count, 0.0);
      mb_ret.assign(count, 0.0);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t src = order[start + i];
        std::memcpy(mb_obs.data() + i * obs_len,
                    buffer.observations.data() + src * obs_len,
                    sizeof(double) * obs_len);
        mb_actions[i] = buffer.actions[src];
        mb_oldlogp[i] = buffer.logprobs[src];
        mb_adv[i] = buffer.advantages[src];
        mb_ret[i] = buffer.returns[src];
      }

      // Per-minibatch advantage normalization.
      double mean = 0.0;
      for (double a : mb_adv) mean += a;
      mean /= static_cast<double>(count);
      double var = 0.0;
      for (double a : mb_adv) var += (a - mean) * (a - mean);
      var /= static_cast<double>(count);
      const double denom = std::sqrt(var) + 1e-8;
      for (double& a : mb_adv) a = (a - mean) / denom;

      const MiniBatch mb{mb_obs, obs_len, mb_actions, mb_oldlogp, mb_adv,
                         mb_ret};
      std::fill(grad.begin(), grad.end(), 0.0);
      const LossStats stats = ppo_loss(net, mb, cfg, grad);
      adam.step(net.params(), grad, lr);

      const double w = static_cast<double>(count);
      agg.policy_loss += stats.policy_loss * w;
      agg.value_loss += stats.value_loss * w;
      agg.entropy += stats.entropy * w;
      agg.clip_fraction += stats.clip_fraction * w;
      agg.approx_kl += stats.approx_kl * w;
      agg.total += stats.total * w;
      weight += w;
    }
  }

  agg.policy_loss /= weight;
  agg.value_loss /= weight;
  agg.entropy /= weight;
  agg.clip_fraction /= weight;
  agg.approx_kl /= weight;
  agg.total /= weight;
  return agg;
}

namespace {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_curve_csv(const std::filesystem::path& path,
                     std::span<const CurveRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << "steps,mean_ep_reward,mean_ep_len,entropy,clip_fraction,approx_kl\n";
  for (const CurveRow& row : rows) {
    out << row.steps << ',' << format_double(row.mean_ep_reward) << ','
        << format_double(row.mean_ep_len) << ',' << format_double(row.entropy)
        << ',' << format_double(row.clip_fraction) << ','
        << format_double(row.approx_kl) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

TrainResult train(std::span<const ProblemInstance> train_set,
                  std::span<const ProblemInstance> val_set,
                  const PPOConfig& cfg, std::uint64_t seed,
                  const TrainHooks& hooks) {
  cfg.validate();
  if (train_set.empty()) throw config_error("empty training set");
  for (const ProblemInstance& inst : train_set) {
    if (inst.num_variables() != cfg.env.n) {
      throw config_error("training instance size does not match environment");
    }
  }

  const int n = cfg.env.n;
  const int A = num_actions(n);
  const int obs_len = cfg.env.shots * n + n * (n + 1) / 2;

  RandomStream init_rng(derive_seed(seed, 0));
  PolicyNet net = PolicyNet::initialized(obs_len, cfg.hidden, A, init_rng);
  Adam adam(net.num_params(), 0.9, 0.999, cfg.adam_epsilon);
  RandomStream data_rng(derive_seed(seed, 1));
  RandomStream shuffle_rng(derive_seed(seed, 2));
  const std::uint64_t val_seed = derive_seed(seed, 3);

  // Dataset cycler: a reshuffled pass whenever the previous one runs out.
  std::vector<std::size_t> data_order(train_set.size());
  std::iota(data_order.begin(), data_order.end(), std::size_t{0});
  std::size_t data_pos = data_order.size();
  auto next_instance = [&]() -> const ProblemInstance& {
    if (data_pos == data_order.size()) {
      data_rng.shuffle(data_order);
      data_pos = 0;
    }
    return train_set[data_order[data_pos++]];
  };

  std::vector<Env> envs;
  std::vector<RandomStream> env_rngs;
  std::vector<std::vector<double>> cur_obs(cfg.n_envs);
  envs.reserve(cfg.n_envs);
  env_rngs.reserve(cfg.n_envs);
  for (int e = 0; e < cfg.n_envs; ++e) {
    envs.emplace_back(cfg.env);
    env_rngs.emplace_back(derive_seed(seed, 16 + static_cast<std::uint64_t>(e)));
    cur_obs[e] = flatten_observation(envs[e].reset(next_instance(), env_rngs[e]));
  }

  RolloutBuffer buffer;
  buffer.n_steps = cfg.n_steps;
  buffer.n_envs = cfg.n_envs;
  buffer.obs_len = obs_len;
  const std::size_t N = buffer.size();
  buffer.observations.resize(N * obs_len);
  buffer.actions.resize(N);
  buffer.rewards.resize(N);
  buffer.values.resize(N);
  buffer.logprobs.resize(N);
  buffer.dones.resize(N);
  buffer.bootstrap.resize(cfg.n_envs);

  std::optional<PolicyNet> best;
  double best_score = -std::numeric_limits<double>::infinity();
  long long best_steps = 0;

  long long steps_done = 0;
  long long episodes = 0;
  int updates = 0;
  std::vector<CurveRow> curve;

  while (steps_done < cfg.total_steps) {
    double window_score = 0.0;
    double window_len = 0.0;
    long long window_eps = 0;

    for (int t = 0; t < cfg.n_steps; ++t) {
      for (int e = 0; e < cfg.n_envs; ++e) {
        const std::size_t idx = static_cast<std::size_t>(t) * cfg.n_envs + e;
        const auto f = net.forward(cur_obs[e]);
        const SampledAction sa = sample_action(f.logits, env_rngs[e]);

        std::memcpy(buffer.observations.data() + idx * obs_len,
                    cur_obs[e].data(), sizeof(double) * obs_len);
        buffer.actions[idx] = sa.action;
        buffer.values[idx] = f.value;
        buffer.logprobs[idx] = sa.logprob;

        const Env::StepResult res = envs[e].step(sa.action, env_rngs[e]);
        buffer.rewards[idx] = res.reward;
        buffer.dones[idx] = res.done ? 1 : 0;

        if (res.done) {
          ++episodes;
          ++window_eps;
          window_score += envs[e].score();
          window_len += static_cast<double>(envs[e].program().size());
          cur_obs[e] =
              flatten_observation(envs[e].reset(next_instance(), env_rngs[e]));
        } else {
          cur_obs[e] = flatten_observation(res.obs);
        }
      }
    }
    for (int e = 0; e < cfg.n_envs; ++e) {
      buffer.bootstrap[e] = net.forward(cur_obs[e]).value;
    }
    compute_gae_buffer(buffer, cfg.discount, cfg.gae_lambda);

    const double lr = lr_at(cfg, steps_done);
    steps_done += static_cast<long long>(N);
    const LossStats stats = ppo_update(buffer, net, adam, cfg, lr, shuffle_rng);
    ++updates;

    CurveRow row;
    row.steps = steps_done;
    row.mean_ep_reward = window_eps ? window_score / window_eps : 0.0;
    row.mean_ep_len = window_eps ? window_len / window_eps : 0.0;
    row.entropy = stats.entropy;
    row.clip_fraction = stats.clip_fraction;
    row.approx_kl = stats.approx_kl;
    curve.push_back(row);
    if (hooks.on_curve_row) hooks.on_curve_row(row);

    if (hooks.save_snapshot && hooks.checkpoint_every_steps > 0) {
      const long long before = steps_done - static_cast<long long>(N);
      if (steps_done / hooks.checkpoint_every_steps >
          before / hooks.checkpoint_every_steps) {
        hooks.save_snapshot(net, steps_done);
      }
    }

    if (!val_set.empty() &&
        (updates % std::max(1, hooks.val_every_updates) == 0 ||
         steps_done >= cfg.total_steps)) {
      const auto records =
          evaluate_policy(&net, val_set, cfg.env, val_seed, "trained");
      const double score = mean_score(records);
      if (score > best_score) {
        best_score = score;
        best = net;
        best_steps = steps_done;
      }
    }
  }

  PolicyNet best_net = best ? std::move(*best) : net;
  TrainResult result{std::move(net),
                     std::move(best_net),
                     best ? best_score : 0.0,
                     best ? best_steps : steps_done,
                     std::move(curve),
                     episodes};
  return result;
}

std::vector<EpisodeRecord> evaluate_policy(
    const PolicyNet* net, std::span<const ProblemInstance> dataset,
    const EnvConfig& env_cfg, std::uint64_t seed, std::string agent_label,
    int workers) {
  env_cfg.validate();
  const int A = num_actions(env_cfg.n);
  const std::vector<double> uniform_logits(A, 0.0);

  std::vector<EpisodeRecord> records(dataset.size());
  parallel_for(dataset.size(), workers, [&](std::size_t i) {
    // Instance index alone pins the stream, so the records are identical
    // for any worker count.
    RandomStream rng(derive_seed(seed, i));
    Env env(env_cfg);
    Observation obs = env.reset(dataset[i], rng);
    while (!env.done()) {
      int action;
      if (net) {
        const auto f = net->forward(flatten_observation(obs));
        action = sample_action(f.logits, rng).action;
      } else {
        action = sample_action(uniform_logits, rng).action;
      }
      auto res = env.step(action, rng);
      obs = std::move(res.obs);
    }

    EpisodeRecord& rec = records[i];
    rec.instance_seed = dataset[i].seed();
    rec.kind = std::string(to_string(dataset[i].kind()));
    rec.actions = env.actions();
    rec.program_text.reserve(env.program().size());
    for (const GateOp& gate : env.program()) {
      rec.program_text.push_back(to_text(gate));
    }
    rec.rewards = env.step_rewards();
    rec.outcome = std::string(to_string(env.outcome()));
    rec.score = env.score();
    rec.agent = agent_label;
  });
  return records;
}

double mean_score(std::span<const EpisodeRecord> records) {
  if (records.empty()) throw std::invalid_argument("no records");
  double total = 0.0;
  for (const EpisodeRecord& rec : records) total += rec.score;
  return total / static_cast<double>(records.size());
}

}  // namespace qprl
