#include "qprl/policy_net.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "qprl/errors.hpp"

namespace qprl {

static_assert(std::endian::native == std::endian::little,
              "checkpoint byte layout assumes a little-endian host");

std::vector<double> flatten_observation(const Observation& obs) {
  std::vector<double> x;
  x.reserve(obs.B.data.size() + obs.wtilde.size());
  for (std::uint8_t bit : obs.B.data) x.push_back(static_cast<double>(bit));
  x.insert(x.end(), obs.wtilde.begin(), obs.wtilde.end());
  return x;
}

std::size_t PolicyNet::param_count(int input, int hidden, int actions) {
  return static_cast<std::size_t>(hidden) * input + hidden +    // layer 1
         static_cast<std::size_t>(hidden) * hidden + hidden +   // layer 2
         static_cast<std::size_t>(actions) * hidden + actions + // actor head
         static_cast<std::size_t>(hidden) + 1;                  // critic head
}

PolicyNet::PolicyNet(int input, int hidden, int actions)
    : input_(input), hidden_(hidden), actions_(actions) {
  if (input < 1 || hidden < 1 || actions < 1) {
    throw config_error("network sizes must be positive");
  }
  params_.assign(param_count(input, hidden, actions), 0.0);
  w1_ = 0;
  b1_ = w1_ + static_cast<std::size_t>(hidden) * input;
  w2_ = b1_ + hidden;
  b2_ = w2_ + static_cast<std::size_t>(hidden) * hidden;
  wa_ = b2_ + hidden;
  ba_ = wa_ + static_cast<std::size_t>(actions) * hidden;
  wc_ = ba_ + actions;
  bc_ = wc_ + hidden;
}

namespace {

// Orthogonal-style init: fill with unit gaussians, then Gram-Schmidt the
// rows (or the columns when the matrix is tall) and scale by `gain`.
void init_orthogonal(std::span<double> w, int rows, int cols, double gain,
                     RandomStream& rng) {
  for (double& value : w) value = rng.gaussian();

  const bool by_rows = rows <= cols;
  const int vecs = by_rows ? rows : cols;
  const int len = by_rows ? cols : rows;
  auto at = [&](int v, int i) -> double& {
    // vector v, component i: row v (row-major) or column v.
    return by_rows ? w[static_cast<std::size_t>(v) * cols + i]
                   : w[static_cast<std::size_t>(i) * cols + v];
  };

  for (int v = 0; v < vecs; ++v) {
    // Earlier vectors are unit-norm at this point, so the projection
    // coefficient is the plain dot product.
    for (int prev = 0; prev < v; ++prev) {
      double dot = 0.0;
      for (int i = 0; i < len; ++i) dot += at(v, i) * at(prev, i);
      for (int i = 0; i < len; ++i) at(v, i) -= dot * at(prev, i);
    }
    double norm_sq = 0.0;
    for (int i = 0; i < len; ++i) norm_sq += at(v, i) * at(v, i);
    if (norm_sq < 1e-24) {
      throw numeric_error("degenerate draw during orthogonal init");
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (int i = 0; i < len; ++i) at(v, i) *= inv;
  }
  for (double& value : w) value *= gain;
}

}  // namespace

PolicyNet PolicyNet::initialized(int input, int hidden, int actions,
                                 RandomStream& rng) {
  PolicyNet net(input, hidden, actions);
  const double root2 = std::sqrt(2.0);
  std::span<double> p = net.params_;
  init_orthogonal(p.subspan(net.w1_, static_cast<std::size_t>(hidden) * input),
                  hidden, input, root2, rng);
  init_orthogonal(p.subspan(net.w2_, static_cast<std::size_t>(hidden) * hidden),
                  hidden, hidden, root2, rng);
  init_orthogonal(p.subspan(net.wa_, static_cast<std::size_t>(actions) * hidden),
                  actions, hidden, 0.01, rng);
  init_orthogonal(p.subspan(net.wc_, static_cast<std::size_t>(hidden)),
                  1, hidden, 1.0, rng);
  // Biases stay zero.
  return net;
}

PolicyNet::Forward PolicyNet::forward(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(input_)) {
    throw std::invalid_argument("input has length " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(input_));
  }
  Forward f;
  f.x.assign(x.begin(), x.end());
  f.h1.resize(hidden_);
  f.h2.resize(hidden_);
  f.logits.resize(actions_);

  const double* p = params_.data();
  for (int i = 0; i < hidden_; ++i) {
    double z = p[b1_ + i];
    const double* row = p + w1_ + static_cast<std::size_t>(i) * input_;
    for (int j = 0; j < input_; ++j) z += row[j] * x[j];
    f.h1[i] = std::tanh(z);
  }
  for (int i = 0; i < hidden_; ++i) {
    double z = p[b2_ + i];
    const double* row = p + w2_ + static_cast<std::size_t>(i) * hidden_;
    for (int j = 0; j < hidden_; ++j) z += row[j] * f.h1[j];
    f.h2[i] = std::tanh(z);
  }
  for (int a = 0; a < actions_; ++a) {
    double z = p[ba_ + a];
    const double* row = p + wa_ + static_cast<std::size_t>(a) * hidden_;
    for (int j = 0; j < hidden_; ++j) z += row[j] * f.h2[j];
    f.logits[a] = z;
  }
  {
    double z = p[bc_];
    for (int j = 0; j < hidden_; ++j) z += p[wc_ + j] * f.h2[j];
    f.value = z;
  }
  return f;
}

void PolicyNet::backward(const Forward& f, std::span<const double> dlogits,
                         double dvalue, std::span<double> grad) const {
  if (dlogits.size() != static_cast<std::size_t>(actions_) ||
      grad.size() != params_.size()) {
    throw std::invalid_argument("gradient buffers have wrong shape");
  }
  const double* p = params_.data();
  double* g = grad.data();

  // Heads.
  std::vector<double> dh2(hidden_, 0.0);
  for (int a = 0; a < actions_; ++a) {
    const double d = dlogits[a];
    if (d == 0.0) continue;
    const double* row = p + wa_ + static_cast<std::size_t>(a) * hidden_;
    double* grow = g + wa_ + static_cast<std::size_t>(a) * hidden_;
    for (int j = 0; j < hidden_; ++j) {
      grow[j] += d * f.h2[j];
      dh2[j] += d * row[j];
    }
    g[ba_ + a] += d;
  }
  if (dvalue != 0.0) {
    for (int j = 0; j < hidden_; ++j) {
      g[wc_ + j] += dvalue * f.h2[j];
      dh2[j] += dvalue * p[wc_ + j];
    }
    g[bc_] += dvalue;
  }

  // Second hidden layer.
  std::vector<double> dh1(hidden_, 0.0);
  for (int i = 0; i < hidden_; ++i) {
    const double dz = dh2[i] * (1.0 - f.h2[i] * f.h2[i]);
    if (dz == 0.0) continue;
    const double* row = p + w2_ + static_cast<std::size_t>(i) * hidden_;
    double* grow = g + w2_ + static_cast<std::size_t>(i) * hidden_;
    for (int j = 0; j < hidden_; ++j) {
      grow[j] += dz * f.h1[j];
      dh1[j] += dz * row[j];
    }
    g[b2_ + i] += dz;
  }

  // First hidden layer.
  for (int i = 0; i < hidden_; ++i) {
    const double dz = dh1[i] * (1.0 - f.h1[i] * f.h1[i]);
    if (dz == 0.0) continue;
    double* grow = g + w1_ + static_cast<std::size_t>(i) * input_;
    for (int j = 0; j < input_; ++j) grow[j] += dz * f.x[j];
    g[b1_ + i] += dz;
  }
}

double log_sum_exp(std::span<const double> logits) {
  double max = logits[0];
  for (double l : logits) max = std::max(max, l);
  double total = 0.0;
  for (double l : logits) total += std::exp(l - max);
  return max + std::log(total);
}

std::vector<double> softmax(std::span<const double> logits) {
  const double lse = log_sum_exp(logits);
  std::vector<double> probs(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - lse);
  }
  return probs;
}

namespace {

void check_finite(std::span<const double> logits) {
  for (double l : logits) {
    if (!std::isfinite(l)) throw numeric_error("non-finite logit");
  }
}

double entropy_of(std::span<const double> logits, double lse) {
  // H = -sum p*log p = lse - sum p*l.
  double weighted = 0.0;
  for (double l : logits) weighted += std::exp(l - lse) * l;
  return lse - weighted;
}

}  // namespace

SampledAction sample_action(std::span<const double> logits,
                            RandomStream& rng) {
  if (logits.empty()) throw std::invalid_argument("no logits");
  check_finite(logits);
  const double lse = log_sum_exp(logits);

  const double u = rng.uniform();
  double cum = 0.0;
  int action = static_cast<int>(logits.size()) - 1;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    cum += std::exp(logits[i] - lse);
    if (u < cum) {
      action = static_cast<int>(i);
      break;
    }
  }
  return SampledAction{action, logits[action] - lse, entropy_of(logits, lse)};
}

std::pair<double, double> action_logprob_entropy(
    std::span<const double> logits, int action) {
  if (action < 0 || action >= static_cast<int>(logits.size())) {
    throw std::invalid_argument("action out of range");
  }
  check_finite(logits);
  const double lse = log_sum_exp(logits);
  return {logits[action] - lse, entropy_of(logits, lse)};
}

Adam::Adam(std::size_t n, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads,
                double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("optimizer state does not match parameters");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double gi = grads[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gi;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gi * gi;
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + epsilon_);
  }
}

void save_checkpoint(const std::filesystem::path& path, const PolicyNet& net) {
  nlohmann::ordered_json header;
  header["version"] = 1;
  header["arch"] = {net.input_size(), net.hidden_size(), net.hidden_size()};
  header["actions"] = net.num_actions();

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  out << header.dump() << '\n';
  const auto p = net.params();
  out.write(reinterpret_cast<const char*>(p.data()),
            static_cast<std::streamsize>(p.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

PolicyNet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw std::runtime_error("truncated checkpoint: " + path.string());
  }
  const auto header = nlohmann::json::parse(header_line);
  if (header.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported checkpoint version");
  }
  const auto arch = header.at("arch").get<std::vector<int>>();
  if (arch.size() != 3 || arch[1] != arch[2]) {
    throw std::runtime_error("unsupported architecture in checkpoint");
  }
  PolicyNet net(arch[0], arch[1], header.at("actions").get<int>());
  auto p = net.params();
  in.read(reinterpret_cast<char*>(p.data()),
          static_cast<std::streamsize>(p.size() * sizeof(double)));
  if (in.gcount() !=
      static_cast<std::streamsize>(p.size() * sizeof(double))) {
    throw std::runtime_error("truncated checkpoint: " + path.string());
  }
  return net;
}

}  // namespace qprl
