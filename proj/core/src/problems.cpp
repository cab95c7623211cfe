#include "qprl/problems.hpp"

#include <cmath>
#include <cstddef>
#include <fstream>
#include <mutex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qprl/basis.hpp"
#include "qprl/errors.hpp"

namespace qprl {

namespace {

std::size_t upper_offset(int i, int j, int n) {
  // Row-major upper triangle with diagonal: row i starts after
  // n + (n-1) + ... + (n-i+1) = i*n - i*(i-1)/2 entries.
  return static_cast<std::size_t>(i) * n - static_cast<std::size_t>(i) * (i - 1) / 2 +
         (j - i);
}

}  // namespace

struct ProblemInstance::Cache {
  mutable std::mutex mutex;
  std::optional<std::pair<double, double>> extremes;
  std::optional<std::vector<double>> cost_table;
};

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::MaxCut: return "maxcut";
    case ProblemKind::MaxQp: return "maxqp";
    case ProblemKind::Qubo: return "qubo";
  }
  throw std::invalid_argument("unknown ProblemKind");
}

ProblemKind problem_kind_from_string(std::string_view name) {
  if (name == "maxcut") return ProblemKind::MaxCut;
  if (name == "maxqp") return ProblemKind::MaxQp;
  if (name == "qubo") return ProblemKind::Qubo;
  throw config_error("unknown problem kind: " + std::string(name));
}

ProblemInstance::ProblemInstance(ProblemKind kind, int n,
                                 std::vector<double> weights,
                                 std::uint64_t seed)
    : kind_(kind),
      n_(n),
      w_(std::move(weights)),
      seed_(seed),
      cache_(std::make_shared<Cache>()) {
  validate();
}

void ProblemInstance::validate() const {
  if (n_ < 1 || n_ > kMaxVariables) {
    throw config_error("instance size must be in [1, " +
                       std::to_string(kMaxVariables) + "], got " +
                       std::to_string(n_));
  }
  if (w_.size() != static_cast<std::size_t>(n_) * n_) {
    throw std::invalid_argument("weight matrix has wrong size");
  }
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      const double wij = weight(i, j);
      if (!std::isfinite(wij)) {
        throw std::invalid_argument("weight matrix has non-finite entry");
      }
      if (wij != weight(j, i)) {
        throw std::invalid_argument("weight matrix is not symmetric");
      }
    }
    const double wii = weight(i, i);
    if (kind_ != ProblemKind::Qubo && wii != 0.0) {
      throw std::invalid_argument("diagonal must be zero for this kind");
    }
    if (kind_ == ProblemKind::MaxCut) {
      for (int j = 0; j < n_; ++j) {
        if (weight(i, j) < 0.0) {
          throw std::invalid_argument("cut weights must be nonnegative");
        }
      }
    }
  }
}

ProblemInstance ProblemInstance::generate(ProblemKind kind, int n,
                                          std::uint64_t seed) {
  if (n < 1 || n > kMaxVariables) {
    throw config_error("instance size must be in [1, " +
                       std::to_string(kMaxVariables) + "], got " +
                       std::to_string(n));
  }
  RandomStream rng(seed);
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  auto at = [&](int i, int j) -> double& {
    return w[static_cast<std::size_t>(i) * n + j];
  };
  switch (kind) {
    case ProblemKind::MaxCut:
      // Erdos-Renyi with edge probability 1/2; present edges get a
      // Uniform(0,1) weight. One inclusion draw per pair, then (only if
      // included) one weight draw, scanning pairs in row-major order.
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const bool edge = rng.uniform() < 0.5;
          const double wij = edge ? rng.uniform() : 0.0;
          at(i, j) = wij;
          at(j, i) = wij;
        }
      }
      break;
    case ProblemKind::MaxQp:
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const double wij = rng.uniform(-1.0, 1.0);
          at(i, j) = wij;
          at(j, i) = wij;
        }
      }
      break;
    case ProblemKind::Qubo:
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          const double wij = rng.uniform(-1.0, 1.0);
          at(i, j) = wij;
          at(j, i) = wij;
        }
      }
      break;
  }
  return ProblemInstance(kind, n, std::move(w), seed);
}

ProblemInstance ProblemInstance::generate(ProblemKind kind, int n,
                                          RandomStream& rng) {
  return generate(kind, n, rng.next_u64());
}

ProblemInstance ProblemInstance::from_upper(ProblemKind kind, int n,
                                            std::span<const double> upper,
                                            std::uint64_t seed,
                                            std::optional<double> m,
                                            std::optional<double> M) {
  const std::size_t expected = static_cast<std::size_t>(n) * (n + 1) / 2;
  if (upper.size() != expected) {
    throw std::invalid_argument("upper triangle has wrong length");
  }
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double wij = upper[upper_offset(i, j, n)];
      w[static_cast<std::size_t>(i) * n + j] = wij;
      w[static_cast<std::size_t>(j) * n + i] = wij;
    }
  }
  ProblemInstance instance(kind, n, std::move(w), seed);
  if (m.has_value() != M.has_value()) {
    throw std::invalid_argument("extremes must be supplied together");
  }
  if (m.has_value()) {
    std::scoped_lock lock(instance.cache_->mutex);
    instance.cache_->extremes = std::make_pair(*m, *M);
  }
  return instance;
}

double ProblemInstance::cost(std::span<const std::uint8_t> bits) const {
  if (bits.size() != static_cast<std::size_t>(n_)) {
    throw std::invalid_argument("assignment has wrong length");
  }
  double total = 0.0;
  switch (kind_) {
    case ProblemKind::MaxCut:
      for (int i = 0; i < n_; ++i) {
        const double zi = 1.0 - 2.0 * bits[i];
        for (int j = 0; j < n_; ++j) {
          const double zj = 1.0 - 2.0 * bits[j];
          total += weight(i, j) * (1.0 - zi * zj) / 2.0;
        }
      }
      total /= 2.0;
      break;
    case ProblemKind::MaxQp:
      for (int i = 0; i < n_; ++i) {
        const double zi = 1.0 - 2.0 * bits[i];
        for (int j = 0; j < n_; ++j) {
          const double zj = 1.0 - 2.0 * bits[j];
          total += weight(i, j) * zi * zj;
        }
      }
      break;
    case ProblemKind::Qubo:
      for (int i = 0; i < n_; ++i) {
        if (!bits[i]) continue;
        for (int j = 0; j < n_; ++j) {
          if (bits[j]) total += weight(i, j);
        }
      }
      break;
  }
  return total;
}

double ProblemInstance::cost_index(std::uint32_t basis) const {
  std::uint8_t bits[kMaxVariables];
  bits_from_index(basis, n_, std::span<std::uint8_t>(bits, n_));
  return cost(std::span<const std::uint8_t>(bits, n_));
}

const std::vector<double>& ProblemInstance::cost_table() const {
  std::scoped_lock lock(cache_->mutex);
  if (!cache_->cost_table) {
    const std::uint32_t states = std::uint32_t{1} << n_;
    std::vector<double> table(states);
    for (std::uint32_t b = 0; b < states; ++b) table[b] = cost_index(b);
    cache_->cost_table = std::move(table);
  }
  return *cache_->cost_table;
}

std::pair<double, double> ProblemInstance::extremes() const {
  {
    std::scoped_lock lock(cache_->mutex);
    if (cache_->extremes) return *cache_->extremes;
  }
  const std::vector<double>& table = cost_table();
  double lo = table[0];
  double hi = table[0];
  for (double c : table) {
    if (c < lo) lo = c;
    if (c > hi) hi = c;
  }
  std::scoped_lock lock(cache_->mutex);
  cache_->extremes = std::make_pair(lo, hi);
  return *cache_->extremes;
}

bool ProblemInstance::has_cached_extremes() const {
  std::scoped_lock lock(cache_->mutex);
  return cache_->extremes.has_value();
}

double ProblemInstance::normalized_cost(
    std::span<const std::uint8_t> bits) const {
  const auto [m, M] = extremes();
  if (M == m) return 1.0;
  return (cost(bits) - m) / (M - m);
}

double ProblemInstance::normalized_cost_index(std::uint32_t basis) const {
  const auto [m, M] = extremes();
  if (M == m) return 1.0;
  return (cost_index(basis) - m) / (M - m);
}

std::vector<double> ProblemInstance::upper_triangle() const {
  std::vector<double> upper(static_cast<std::size_t>(n_) * (n_ + 1) / 2);
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      upper[upper_offset(i, j, n_)] = weight(i, j);
    }
  }
  return upper;
}

WTilde encode_wtilde(const ProblemInstance& instance) {
  if (instance.num_variables() != kObservationVariables) {
    throw config_error("observation encoding is fixed to " +
                       std::to_string(kObservationVariables) +
                       " variables, got " +
                       std::to_string(instance.num_variables()));
  }
  return WTilde{instance.upper_triangle()};
}

ProblemInstance decode_wtilde(ProblemKind kind, const WTilde& wtilde,
                              std::uint64_t seed) {
  if (wtilde.values.size() != kWTildeLength) {
    throw std::invalid_argument("encoded instance has wrong length");
  }
  return ProblemInstance::from_upper(kind, kObservationVariables,
                                     wtilde.values, seed);
}

std::string instance_to_json_line(const ProblemInstance& instance) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(instance.kind());
  j["n"] = instance.num_variables();
  j["upper"] = instance.upper_triangle();
  j["seed"] = instance.seed();
  if (instance.has_cached_extremes()) {
    const auto [m, M] = instance.extremes();
    j["m"] = m;
    j["M"] = M;
  } else {
    j["m"] = nullptr;
    j["M"] = nullptr;
  }
  return j.dump();
}

ProblemInstance instance_from_json_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  const ProblemKind kind =
      problem_kind_from_string(j.at("kind").get<std::string>());
  const int n = j.at("n").get<int>();
  const auto upper = j.at("upper").get<std::vector<double>>();
  const auto seed = j.at("seed").get<std::uint64_t>();
  std::optional<double> m;
  std::optional<double> M;
  if (j.contains("m") && !j.at("m").is_null()) m = j.at("m").get<double>();
  if (j.contains("M") && !j.at("M").is_null()) M = j.at("M").get<double>();
  return ProblemInstance::from_upper(kind, n, upper, seed, m, M);
}

void write_instances_jsonl(const std::filesystem::path& path,
                           std::span<const ProblemInstance> instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  for (const ProblemInstance& instance : instances) {
    out << instance_to_json_line(instance) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<ProblemInstance> read_instances_jsonl(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<ProblemInstance> instances;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    instances.push_back(instance_from_json_line(line));
  }
  return instances;
}

}  // namespace qprl
