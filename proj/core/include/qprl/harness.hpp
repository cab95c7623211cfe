#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qprl/env.hpp"
#include "qprl/policy_net.hpp"
#include "qprl/problems.hpp"
#include "qprl/qaoa.hpp"
#include "qprl/records.hpp"

namespace qprl {

/// Dataset recipe: per-kind training counts, total validation/test counts
/// split as evenly as possible across kinds (earlier kinds absorb the
/// remainder). Splits draw from disjoint seed-index subranges of the root
/// seed, so no (kind, seed) pair can appear twice.
struct DatasetSpec {
  std::vector<ProblemKind> kinds;
  int n = 10;
  long long train_per_kind = 0;
  long long val_total = 0;
  long long test_total = 0;
  std::uint64_t root_seed = 0;

  void validate() const;
};

struct Dataset {
  std::vector<ProblemInstance> train;
  std::vector<ProblemInstance> val;
  std::vector<ProblemInstance> test;
};

/// Generates all three splits: instances drawn per kind, cost extremes
/// precomputed, each split interleave-shuffled with its own derived
/// stream. Same spec, same bytes.
Dataset gen_dataset(const DatasetSpec& spec);

/// Writes train.jsonl / val.jsonl / test.jsonl plus a dataset.json echo of
/// the recipe and the realized split sizes.
void write_dataset(const DatasetSpec& spec, const Dataset& dataset,
                   const std::filesystem::path& dir);

// --- batch evaluation -----------------------------------------------------

struct EvalAgent {
  enum class Kind { Trained, Untrained, Qaoa };
  Kind kind;
  std::string label;               // stamped into each record's "agent"
  const PolicyNet* net = nullptr;  // Trained only

  static EvalAgent trained(const PolicyNet* net, std::string label = "trained") {
    return {Kind::Trained, std::move(label), net};
  }
  static EvalAgent untrained(std::string label = "untrained") {
    return {Kind::Untrained, std::move(label), nullptr};
  }
  static EvalAgent qaoa(std::string label = "qaoa") {
    return {Kind::Qaoa, std::move(label), nullptr};
  }
};

struct EvalConfig {
  EnvConfig env;
  QaoaConfig qaoa;
  int workers = 1;  // instances evaluate independently; results are
                    // identical for any worker count
};

/// One episode (or QAOA run) per instance per agent. Every agent sees the
/// identical instance sequence; per-(agent, instance) rng streams are
/// derived from `seed`, so reruns are bit-identical. Records come back
/// agent-major in instance order.
std::vector<EpisodeRecord> run_eval(std::span<const EvalAgent> agents,
                                    std::span<const ProblemInstance> instances,
                                    const EvalConfig& cfg, std::uint64_t seed);

// --- aggregation ----------------------------------------------------------

/// Instructions-to-reach-score: the 1-based index of the best reward for
/// agent episodes, the uncompiled program length for QAOA records.
int instructions_metric(const EpisodeRecord& record);

inline constexpr int kScoreHistBins = 50;

struct AgentKindStats {
  std::string agent;
  std::string kind;
  long long count = 0;
  long long wins = 0;
  double mean_score = 0.0;
  double stddev_score = 0.0;  // population
  double mean_instructions = 0.0;
  std::vector<long long> score_hist;   // 50 bins over [0, 1]
  std::vector<long long> length_hist;  // indexed by instruction count
};

struct AgentFrequencies {
  std::string agent;
  long long total_actions = 0;
  std::vector<long long> counts;       // per action id
  std::vector<double> frequencies;     // counts / total
  std::vector<long long> family_counts;       // 25 gate families
  std::vector<double> family_frequencies;
};

struct EvalSummary {
  int n = 0;            // register size the action ids refer to
  int num_actions = 0;
  std::vector<EpisodeRecord> records;      // raw, in emission order
  std::vector<AgentKindStats> stats;       // agent-major, first-appearance order
  std::vector<AgentFrequencies> frequencies;
};

/// Aggregates raw records; every statistic is a pure function of them.
EvalSummary summarize(std::vector<EpisodeRecord> records, int n);

/// Writes the plot-ready report bundle into `dir`:
///   scores.csv       agent,kind,score          (one row per episode)
///   lengths.csv      agent,kind,instructions
///   frequencies.csv  agent,action_id,count,frequency
///   families.csv     agent,family,count,frequency
///   summary.csv      per agent x kind aggregate row
///   manifest.json    emitted files with their data row counts
void emit_report(const EvalSummary& summary,
                 const std::filesystem::path& dir);

}  // namespace qprl
