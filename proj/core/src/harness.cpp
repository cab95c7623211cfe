#include "qprl/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "qprl/errors.hpp"
#include "qprl/parallel.hpp"
#include "qprl/ppo.hpp"
#include "qprl/rng.hpp"

namespace qprl {

namespace {

// Seed-index layout: disjoint subranges per split, a wide stride per kind
// inside each split, one final range for the shuffle streams.
constexpr std::uint64_t kKindStride = 1ull << 30;
constexpr std::uint64_t kTrainBase = 0;
constexpr std::uint64_t kValBase = 1ull << 40;
constexpr std::uint64_t kTestBase = 1ull << 41;
constexpr std::uint64_t kShuffleBase = 1ull << 42;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace

void DatasetSpec::validate() const {
  if (kinds.empty()) throw config_error("dataset needs at least one kind");
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    for (std::size_t j = i + 1; j < kinds.size(); ++j) {
      if (kinds[i] == kinds[j]) throw config_error("duplicate problem kind");
    }
  }
  if (n < 1 || n > kMaxVariables) {
    throw config_error("instance size out of range");
  }
  if (train_per_kind < 0 || val_total < 0 || test_total < 0) {
    throw config_error("split counts must be nonnegative");
  }
  if (train_per_kind == 0 && val_total == 0 && test_total == 0) {
    throw config_error("dataset is empty");
  }
}

namespace {

std::vector<ProblemInstance> build_split(const DatasetSpec& spec,
                                         std::uint64_t base,
                                         std::span<const long long> per_kind,
                                         std::uint64_t shuffle_index) {
  std::vector<ProblemInstance> split;
  for (std::size_t k = 0; k < spec.kinds.size(); ++k) {
    for (long long i = 0; i < per_kind[k]; ++i) {
      const std::uint64_t seed = derive_seed(
          spec.root_seed, base + k * kKindStride + static_cast<std::uint64_t>(i));
      ProblemInstance instance =
          ProblemInstance::generate(spec.kinds[k], spec.n, seed);
      instance.extremes();  // precompute so files carry m and M
      split.push_back(std::move(instance));
    }
  }
  RandomStream shuffle_rng(derive_seed(spec.root_seed, shuffle_index));
  shuffle_rng.shuffle(split);
  return split;
}

std::vector<long long> even_shares(long long total, std::size_t kinds) {
  std::vector<long long> shares(kinds, total / static_cast<long long>(kinds));
  const long long rem = total % static_cast<long long>(kinds);
  for (long long i = 0; i < rem; ++i) shares[static_cast<std::size_t>(i)] += 1;
  return shares;
}

}  // namespace

Dataset gen_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset dataset;
  const std::vector<long long> train_shares(spec.kinds.size(),
                                            spec.train_per_kind);
  dataset.train = build_split(spec, kTrainBase, train_shares, kShuffleBase + 0);
  dataset.val = build_split(spec, kValBase,
                            even_shares(spec.val_total, spec.kinds.size()),
                            kShuffleBase + 1);
  dataset.test = build_split(spec, kTestBase,
                             even_shares(spec.test_total, spec.kinds.size()),
                             kShuffleBase + 2);
  return dataset;
}

void write_dataset(const DatasetSpec& spec, const Dataset& dataset,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_instances_jsonl(dir / "train.jsonl", dataset.train);
  write_instances_jsonl(dir / "val.jsonl", dataset.val);
  write_instances_jsonl(dir / "test.jsonl", dataset.test);

  nlohmann::ordered_json j;
  j["kinds"] = nlohmann::json::array();
  for (ProblemKind kind : spec.kinds) j["kinds"].push_back(to_string(kind));
  j["n"] = spec.n;
  j["train_per_kind"] = spec.train_per_kind;
  j["val_total"] = spec.val_total;
  j["test_total"] = spec.test_total;
  j["root_seed"] = spec.root_seed;
  j["counts"]["train"] = dataset.train.size();
  j["counts"]["val"] = dataset.val.size();
  j["counts"]["test"] = dataset.test.size();

  std::ofstream out(dir / "dataset.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset.json");
  out << j.dump(2) << '\n';
}

std::vector<EpisodeRecord> run_eval(std::span<const EvalAgent> agents,
                                    std::span<const ProblemInstance> instances,
                                    const EvalConfig& cfg, std::uint64_t seed) {
  cfg.env.validate();
  cfg.qaoa.validate();
  std::vector<EpisodeRecord> records;
  records.reserve(agents.size() * instances.size());

  for (std::size_t ai = 0; ai < agents.size(); ++ai) {
    const EvalAgent& agent = agents[ai];
    const std::uint64_t agent_seed = derive_seed(seed, ai);
    switch (agent.kind) {
      case EvalAgent::Kind::Trained: {
        if (agent.net == nullptr) {
          throw std::invalid_argument("trained agent needs parameters");
        }
        auto batch = evaluate_policy(agent.net, instances, cfg.env, agent_seed,
                                     agent.label, cfg.workers);
        std::move(batch.begin(), batch.end(), std::back_inserter(records));
        break;
      }
      case EvalAgent::Kind::Untrained: {
        auto batch = evaluate_policy(nullptr, instances, cfg.env, agent_seed,
                                     agent.label, cfg.workers);
        std::move(batch.begin(), batch.end(), std::back_inserter(records));
        break;
      }
      case EvalAgent::Kind::Qaoa: {
        std::vector<EpisodeRecord> batch(instances.size());
        parallel_for(instances.size(), cfg.workers, [&](std::size_t i) {
          RandomStream rng(derive_seed(agent_seed, i));
          const QaoaResult result = run_qaoa(instances[i], cfg.qaoa, rng);
          batch[i] = qaoa_record(instances[i], result, cfg.env.win_threshold);
          batch[i].agent = agent.label;
        });
        std::move(batch.begin(), batch.end(), std::back_inserter(records));
        break;
      }
    }
  }
  return records;
}

int instructions_metric(const EpisodeRecord& record) {
  if (record.agent == "qaoa") {
    return static_cast<int>(record.program_text.size());
  }
  if (record.rewards.empty()) {
    throw std::invalid_argument("episode record has no rewards");
  }
  const auto it =
      std::max_element(record.rewards.begin(), record.rewards.end());
  return static_cast<int>(it - record.rewards.begin()) + 1;
}

EvalSummary summarize(std::vector<EpisodeRecord> records, int n) {
  EvalSummary summary;
  summary.n = n;
  summary.num_actions = num_actions(n);
  summary.records = std::move(records);

  auto stat_index = [&](const std::string& agent,
                        const std::string& kind) -> AgentKindStats& {
    for (AgentKindStats& s : summary.stats) {
      if (s.agent == agent && s.kind == kind) return s;
    }
    AgentKindStats s;
    s.agent = agent;
    s.kind = kind;
    s.score_hist.assign(kScoreHistBins, 0);
    summary.stats.push_back(std::move(s));
    return summary.stats.back();
  };
  auto freq_index = [&](const std::string& agent) -> AgentFrequencies& {
    for (AgentFrequencies& f : summary.frequencies) {
      if (f.agent == agent) return f;
    }
    AgentFrequencies f;
    f.agent = agent;
    f.counts.assign(summary.num_actions, 0);
    summary.frequencies.push_back(std::move(f));
    return summary.frequencies.back();
  };

  for (const EpisodeRecord& rec : summary.records) {
    AgentKindStats& s = stat_index(rec.agent, rec.kind);
    s.count += 1;
    if (rec.outcome == "won") s.wins += 1;
    s.mean_score += rec.score;  // running sums; finalized below
    const int bin = std::min(kScoreHistBins - 1,
                             static_cast<int>(std::floor(
                                 rec.score * kScoreHistBins)));
    s.score_hist[std::max(0, bin)] += 1;
    const int instructions = instructions_metric(rec);
    s.mean_instructions += instructions;
    if (static_cast<int>(s.length_hist.size()) <= instructions) {
      s.length_hist.resize(instructions + 1, 0);
    }
    s.length_hist[instructions] += 1;

    AgentFrequencies& f = freq_index(rec.agent);
    for (int action : rec.actions) {
      if (action < 0 || action >= summary.num_actions) {
        throw std::invalid_argument("action id exceeds the action space");
      }
      f.counts[action] += 1;
      f.total_actions += 1;
    }
  }

  for (AgentKindStats& s : summary.stats) {
    const double mean = s.mean_score / static_cast<double>(s.count);
    double var = 0.0;
    for (const EpisodeRecord& rec : summary.records) {
      if (rec.agent == s.agent && rec.kind == s.kind) {
        var += (rec.score - mean) * (rec.score - mean);
      }
    }
    s.mean_score = mean;
    s.stddev_score = std::sqrt(var / static_cast<double>(s.count));
    s.mean_instructions /= static_cast<double>(s.count);
  }

  for (AgentFrequencies& f : summary.frequencies) {
    f.frequencies.assign(summary.num_actions, 0.0);
    f.family_counts.assign(kNumActionFamilies, 0);
    for (int id = 0; id < summary.num_actions; ++id) {
      if (f.total_actions > 0) {
        f.frequencies[id] = static_cast<double>(f.counts[id]) /
                            static_cast<double>(f.total_actions);
      }
      f.family_counts[action_family(id, n)] += f.counts[id];
    }
    f.family_frequencies.assign(kNumActionFamilies, 0.0);
    if (f.total_actions > 0) {
      for (int fam = 0; fam < kNumActionFamilies; ++fam) {
        f.family_frequencies[fam] = static_cast<double>(f.family_counts[fam]) /
                                    static_cast<double>(f.total_actions);
      }
    }
  }
  return summary;
}

void emit_report(const EvalSummary& summary,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;

  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot open " + (dir / name).string() +
                               " for writing");
    }
    return out;
  };
  auto finish = [&](const char* name, std::ofstream& out, long long rows) {
    if (!out) throw std::runtime_error(std::string("write failed: ") + name);
    manifest["files"][name] = rows;
  };

  {
    auto out = open("scores.csv");
    out << "agent,kind,score\n";
    for (const EpisodeRecord& rec : summary.records) {
      out << rec.agent << ',' << rec.kind << ',' << format_double(rec.score)
          << '\n';
    }
    finish("scores.csv", out, static_cast<long long>(summary.records.size()));
  }
  {
    auto out = open("lengths.csv");
    out << "agent,kind,instructions\n";
    for (const EpisodeRecord& rec : summary.records) {
      out << rec.agent << ',' << rec.kind << ',' << instructions_metric(rec)
          << '\n';
    }
    finish("lengths.csv", out, static_cast<long long>(summary.records.size()));
  }
  {
    auto out = open("frequencies.csv");
    out << "agent,action_id,count,frequency\n";
    long long rows = 0;
    for (const AgentFrequencies& f : summary.frequencies) {
      for (int id = 0; id < summary.num_actions; ++id) {
        out << f.agent << ',' << id << ',' << f.counts[id] << ','
            << format_double(f.frequencies[id]) << '\n';
        ++rows;
      }
    }
    finish("frequencies.csv", out, rows);
  }
  {
    auto out = open("families.csv");
    out << "agent,family,count,frequency\n";
    long long rows = 0;
    for (const AgentFrequencies& f : summary.frequencies) {
      for (int fam = 0; fam < kNumActionFamilies; ++fam) {
        out << f.agent << ',' << action_family_name(fam) << ','
            << f.family_counts[fam] << ','
            << format_double(f.family_frequencies[fam]) << '\n';
        ++rows;
      }
    }
    finish("families.csv", out, rows);
  }
  {
    auto out = open("summary.csv");
    out << "agent,kind,count,wins,mean_score,stddev_score,mean_instructions\n";
    for (const AgentKindStats& s : summary.stats) {
      out << s.agent << ',' << s.kind << ',' << s.count << ',' << s.wins << ','
          << format_double(s.mean_score) << ','
          << format_double(s.stddev_score) << ','
          << format_double(s.mean_instructions) << '\n';
    }
    finish("summary.csv", out, static_cast<long long>(summary.stats.size()));
  }

  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest.json");
  out << manifest.dump(2) << '\n';
}

}  // namespace qprl
