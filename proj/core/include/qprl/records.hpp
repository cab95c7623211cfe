#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qprl {

/// One evaluated episode (or one QAOA run), as stored in episode-log
/// files: JSON Lines, one record per line, stable field order
///   {"instance_seed": u64, "kind": "maxcut", "actions": [ids],
///    "program_text": ["RX(pi) 8", ...], "rewards": [...],
///    "outcome": "won"|"lost", "score": real}
/// plus "agent" when the record came from an evaluation run, and
/// "gamma"/"beta" for QAOA records.
struct EpisodeRecord {
  std::uint64_t instance_seed = 0;
  std::string kind;
  std::vector<int> actions;
  std::vector<std::string> program_text;
  std::vector<double> rewards;
  std::string outcome;  // "won" | "lost"
  double score = 0.0;
  std::string agent;  // "" (plain episode log), "trained", "untrained", "qaoa"
  std::optional<double> gamma;
  std::optional<double> beta;
};

std::string record_to_json_line(const EpisodeRecord& record);
EpisodeRecord record_from_json_line(const std::string& line);

void write_records_jsonl(const std::filesystem::path& path,
                         std::span<const EpisodeRecord> records);
std::vector<EpisodeRecord> read_records_jsonl(
    const std::filesystem::path& path);

}  // namespace qprl
