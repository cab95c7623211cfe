#include "qprl/records.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qprl {

std::string record_to_json_line(const EpisodeRecord& record) {
  nlohmann::ordered_json j;
  j["instance_seed"] = record.instance_seed;
  j["kind"] = record.kind;
  j["actions"] = record.actions;
  j["program_text"] = record.program_text;
  j["rewards"] = record.rewards;
  j["outcome"] = record.outcome;
  j["score"] = record.score;
  if (!record.agent.empty()) j["agent"] = record.agent;
  if (record.gamma) j["gamma"] = *record.gamma;
  if (record.beta) j["beta"] = *record.beta;
  return j.dump();
}

EpisodeRecord record_from_json_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  EpisodeRecord record;
  record.instance_seed = j.at("instance_seed").get<std::uint64_t>();
  record.kind = j.at("kind").get<std::string>();
  record.actions = j.at("actions").get<std::vector<int>>();
  record.program_text = j.at("program_text").get<std::vector<std::string>>();
  record.rewards = j.at("rewards").get<std::vector<double>>();
  record.outcome = j.at("outcome").get<std::string>();
  record.score = j.at("score").get<double>();
  if (j.contains("agent")) record.agent = j.at("agent").get<std::string>();
  if (j.contains("gamma")) record.gamma = j.at("gamma").get<double>();
  if (j.contains("beta")) record.beta = j.at("beta").get<double>();
  return record;
}

void write_records_jsonl(const std::filesystem::path& path,
                         std::span<const EpisodeRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  for (const EpisodeRecord& record : records) {
    out << record_to_json_line(record) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<EpisodeRecord> read_records_jsonl(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<EpisodeRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(record_from_json_line(line));
  }
  return records;
}

}  // namespace qprl
