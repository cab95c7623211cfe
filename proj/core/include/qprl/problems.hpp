#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qprl/rng.hpp"

namespace qprl {

inline constexpr int kMaxVariables = 16;

enum class ProblemKind { MaxCut, MaxQp, Qubo };

std::string_view to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(std::string_view name);

/// A random combinatorial optimization instance: a symmetric weight matrix
/// plus the problem family that fixes how bitstrings are scored. Instances
/// are immutable after construction; the brute-force cost extremes and the
/// per-basis-state cost table are cached lazily behind a shared guard, so
/// copies share caches and concurrent readers are safe.
class ProblemInstance {
 public:
  /// Builds an instance from an explicit symmetric weight matrix
  /// (row-major, n*n). Enforces the per-kind structure: MaxCut needs a zero
  /// diagonal and nonnegative weights, MaxQp a zero diagonal.
  ProblemInstance(ProblemKind kind, int n, std::vector<double> weights,
                  std::uint64_t seed);

  /// Draws a fresh instance from the kind's distribution:
  ///   MaxCut: each pair {i,j} carries an edge with probability 1/2,
  ///           edge weights Uniform(0,1), absent edges weight 0.
  ///   MaxQp:  w_ij ~ Uniform(-1,1) for i<j, zero diagonal, symmetrized.
  ///   Qubo:   w_ij ~ Uniform(-1,1) for i<=j, symmetrized.
  /// The seed fully determines the matrix.
  static ProblemInstance generate(ProblemKind kind, int n, std::uint64_t seed);

  /// Same, drawing the instance seed from the supplied stream.
  static ProblemInstance generate(ProblemKind kind, int n, RandomStream& rng);

  /// Reconstructs an instance from its upper-triangle encoding (row-major,
  /// diagonal included, length n(n+1)/2). Optional cached extremes are
  /// adopted without re-enumeration.
  static ProblemInstance from_upper(ProblemKind kind, int n,
                                    std::span<const double> upper,
                                    std::uint64_t seed,
                                    std::optional<double> m = std::nullopt,
                                    std::optional<double> M = std::nullopt);

  ProblemKind kind() const { return kind_; }
  int num_variables() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  double weight(int i, int j) const { return w_[static_cast<std::size_t>(i) * n_ + j]; }
  const std::vector<double>& weights() const { return w_; }

  /// Cost of one assignment, via the full double-sum formulas:
  ///   MaxCut: (1/2) sum_{i,j} w_ij (1 - z_i z_j)/2,  z = 1 - 2b
  ///   MaxQp:  sum_{i,j} w_ij z_i z_j
  ///   Qubo:   sum_{i,j} w_ij b_i b_j
  double cost(std::span<const std::uint8_t> bits) const;

  /// Cost of the assignment encoded as a basis index (bit i = variable i).
  double cost_index(std::uint32_t basis) const;

  /// (m, M): minimum and maximum cost over all 2^n assignments, by
  /// enumeration. Cached after the first call.
  std::pair<double, double> extremes() const;

  bool has_cached_extremes() const;

  /// (cost(b) - m) / (M - m), in [0,1]. The degenerate M == m instance
  /// (zero matrix) scores 1.0: every assignment is optimal.
  double normalized_cost(std::span<const std::uint8_t> bits) const;
  double normalized_cost_index(std::uint32_t basis) const;

  /// Cost of every basis state, indexed by basis index. Cached.
  const std::vector<double>& cost_table() const;

  /// Upper-triangle encoding including the diagonal, row-major:
  /// (w_00, w_01, ..., w_0{n-1}, w_11, ..., w_{n-1}{n-1}).
  std::vector<double> upper_triangle() const;

 private:
  void validate() const;

  ProblemKind kind_;
  int n_;
  std::vector<double> w_;  // n x n, row-major, symmetric
  std::uint64_t seed_;

  struct Cache;
  std::shared_ptr<Cache> cache_;
};

/// The fixed-length observation encoding of a 10-variable instance: the 55
/// upper-triangle entries, with diagonal slots exactly zero for kinds that
/// carry no diagonal. One layout for all three kinds so a single policy
/// input shape serves shuffled mixed datasets.
struct WTilde {
  std::vector<double> values;  // length n(n+1)/2 = 55
};

inline constexpr int kObservationVariables = 10;
inline constexpr int kWTildeLength = 55;

/// Encodes a 10-variable instance; other sizes are rejected since the
/// 55-slot layout is fixed by the experiment configuration.
WTilde encode_wtilde(const ProblemInstance& instance);

/// Inverse of encode_wtilde.
ProblemInstance decode_wtilde(ProblemKind kind, const WTilde& wtilde,
                              std::uint64_t seed);

// --- instance files -------------------------------------------------------
//
// JSON Lines, one instance per line, stable field order:
//   {"kind": "maxcut"|"maxqp"|"qubo", "n": 10, "upper": [...],
//    "seed": <uint64>, "m": <real>|null, "M": <real>|null}
// Nulls mean "extremes not yet computed".

std::string instance_to_json_line(const ProblemInstance& instance);
ProblemInstance instance_from_json_line(const std::string& line);

void write_instances_jsonl(const std::filesystem::path& path,
                           std::span<const ProblemInstance> instances);
std::vector<ProblemInstance> read_instances_jsonl(
    const std::filesystem::path& path);

}  // namespace qprl
