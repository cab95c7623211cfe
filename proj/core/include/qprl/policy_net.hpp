#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "qprl/env.hpp"
#include "qprl/rng.hpp"

namespace qprl {

/// Concatenates an observation into the policy input:
/// row-major B (0/1 as reals) followed by the weight vector.
/// Defaults (10 shots, 10 qubits) give length 100 + 55 = 155.
std::vector<double> flatten_observation(const Observation& obs);

inline constexpr int kDefaultHidden = 32;

/// Shared actor-critic MLP: two tanh hidden layers, a linear logits head
/// and a linear scalar value head. Parameters live in one flat vector
/// (layout below) so the optimizer and checkpoints treat the network as a
/// plain array of doubles.
///
/// Flat layout, in declaration order:
///   w1 [hidden x input, row-major] b1 [hidden]
///   w2 [hidden x hidden]           b2 [hidden]
///   wa [actions x hidden]          ba [actions]
///   wc [hidden]                    bc [1]
class PolicyNet {
 public:
  /// All-zero parameters (useful for tests; logits and value are all 0).
  PolicyNet(int input, int hidden, int actions);

  /// Orthogonally initialized parameters: gain sqrt(2) on the hidden
  /// layers, 0.01 on the actor head (keeps the fresh policy near uniform),
  /// 1.0 on the critic head; zero biases.
  static PolicyNet initialized(int input, int hidden, int actions,
                               RandomStream& rng);

  int input_size() const { return input_; }
  int hidden_size() const { return hidden_; }
  int num_actions() const { return actions_; }

  static std::size_t param_count(int input, int hidden, int actions);
  std::size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  /// Forward pass outputs plus the activations backward() needs.
  struct Forward {
    std::vector<double> logits;
    double value = 0.0;
    std::vector<double> x;   // input copy
    std::vector<double> h1;  // first hidden, post-tanh
    std::vector<double> h2;  // second hidden, post-tanh
  };

  Forward forward(std::span<const double> x) const;

  /// Accumulates d(loss)/d(params) into `grad` (same layout as params),
  /// given upstream gradients w.r.t. the logits and the value.
  void backward(const Forward& f, std::span<const double> dlogits,
                double dvalue, std::span<double> grad) const;

 private:
  int input_;
  int hidden_;
  int actions_;
  std::vector<double> params_;

  // Offsets into the flat vector.
  std::size_t w1_, b1_, w2_, b2_, wa_, ba_, wc_, bc_;
};

// --- categorical head -----------------------------------------------------

double log_sum_exp(std::span<const double> logits);
std::vector<double> softmax(std::span<const double> logits);

struct SampledAction {
  int action;
  double logprob;
  double entropy;  // of the whole distribution, in nats
};

/// Draws from softmax(logits). Non-finite logits are a numeric error.
SampledAction sample_action(std::span<const double> logits, RandomStream& rng);

/// log softmax(logits)[action] and the distribution entropy, without
/// sampling (used when re-evaluating stored actions).
std::pair<double, double> action_logprob_entropy(std::span<const double> logits,
                                                 int action);

// --- optimizer ------------------------------------------------------------

/// Adam with bias correction; epsilon sits outside the square root
/// (added to |g|-scale denominators).
class Adam {
 public:
  explicit Adam(std::size_t n, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-5);

  void step(std::span<double> params, std::span<const double> grads,
            double lr);

  long long steps_taken() const { return t_; }

 private:
  double beta1_, beta2_, epsilon_;
  long long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// --- checkpoints ----------------------------------------------------------
//
// One file: a single JSON header line
//   {"version":1,"arch":[input,hidden,hidden],"actions":A}
// a newline, then the flat parameter vector as little-endian 64-bit floats
// in declaration order.

void save_checkpoint(const std::filesystem::path& path, const PolicyNet& net);
PolicyNet load_checkpoint(const std::filesystem::path& path);

}  // namespace qprl
