// qprl: dataset generation, PPO training, evaluation, QAOA baseline,
// transpilation and report emission behind one binary. Every subcommand is
// fully determined by its flags and seed, and prints a one-line JSON echo
// of the resolved configuration plus headline results to stdout.
//
// Exit codes: 0 success, 1 usage/configuration error, 2 runtime failure.

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qprl/errors.hpp"
#include "qprl/gates.hpp"
#include "qprl/harness.hpp"
#include "qprl/policy_net.hpp"
#include "qprl/ppo.hpp"
#include "qprl/problems.hpp"
#include "qprl/qaoa.hpp"
#include "qprl/records.hpp"
#include "qprl/rng.hpp"
#include "qprl/transpiler.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace qprl;

namespace {

/// --seed flag, else the QPRL_SEED environment variable, else 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("QPRL_SEED")) {
    std::uint64_t value = 0;
    const char* end = env + std::strlen(env);
    const auto res = std::from_chars(env, end, value);
    if (res.ec != std::errc() || res.ptr != end) {
      throw config_error("QPRL_SEED is not an unsigned integer");
    }
    return value;
  }
  return 0;
}

std::vector<ProblemKind> parse_kinds(const std::string& csv) {
  std::vector<ProblemKind> kinds;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string token =
        comma == std::string::npos ? csv.substr(start)
                                   : csv.substr(start, comma - start);
    if (!token.empty()) kinds.push_back(problem_kind_from_string(token));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (kinds.empty()) throw config_error("--kinds names no problem kind");
  return kinds;
}

/// Accepts either an instance file or a dataset directory (then test.jsonl
/// inside it). Returns the resolved path so the config echo is exact.
fs::path resolve_instances_path(const std::string& data) {
  fs::path path = data;
  if (fs::is_directory(path)) path /= "test.jsonl";
  return path;
}

int dataset_n(std::span<const ProblemInstance> instances) {
  if (instances.empty()) throw config_error("instance file is empty");
  const int n = instances.front().num_variables();
  for (const ProblemInstance& inst : instances) {
    if (inst.num_variables() != n) {
      throw config_error("instance file mixes register sizes");
    }
  }
  return n;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

/// Register size a program acts on: one past the highest qubit index.
int program_width(std::span<const GateOp> program) {
  int width = 1;
  for (const GateOp& gate : program) {
    width = std::max(width, gate.q0 + 1);
    width = std::max(width, gate.q1 + 1);
  }
  return width;
}

// --- train config file ----------------------------------------------------

struct TrainSettings {
  PPOConfig ppo;
  long long checkpoint_every_steps = 0;
  int val_every_updates = 8;
};

long long parse_ll(const std::string& value, const std::string& key) {
  long long out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw config_error("config key " + key + " needs an integer, got '" +
                       value + "'");
  }
  return out;
}

int parse_int(const std::string& value, const std::string& key) {
  return static_cast<int>(parse_ll(value, key));
}

double parse_double(const std::string& value, const std::string& key) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw config_error("config key " + key + " needs a number, got '" + value +
                       "'");
  }
  return out;
}

void apply_config_entry(TrainSettings& s, const std::string& key,
                        const std::string& value) {
  PPOConfig& p = s.ppo;
  if (key == "n_steps") p.n_steps = parse_int(value, key);
  else if (key == "gae_lambda") p.gae_lambda = parse_double(value, key);
  else if (key == "discount") p.discount = parse_double(value, key);
  else if (key == "clip") p.clip = parse_double(value, key);
  else if (key == "adam_epsilon") p.adam_epsilon = parse_double(value, key);
  else if (key == "lr_initial") p.lr_initial = parse_double(value, key);
  else if (key == "lr_schedule") {
    if (value == "linear") p.lr_schedule = LrSchedule::LinearToZero;
    else if (value == "constant") p.lr_schedule = LrSchedule::Constant;
    else throw config_error("lr_schedule must be linear or constant");
  } else if (key == "epochs_per_update") p.epochs_per_update = parse_int(value, key);
  else if (key == "minibatch_size") p.minibatch_size = parse_int(value, key);
  else if (key == "value_coef") p.value_coef = parse_double(value, key);
  else if (key == "entropy_coef") p.entropy_coef = parse_double(value, key);
  else if (key == "n_envs") p.n_envs = parse_int(value, key);
  else if (key == "hidden") p.hidden = parse_int(value, key);
  else if (key == "shots") p.env.shots = parse_int(value, key);
  else if (key == "max_program_len") p.env.max_program_len = parse_int(value, key);
  else if (key == "win_threshold") p.env.win_threshold = parse_double(value, key);
  else if (key == "reward_mode") {
    if (value == "sampled") p.env.reward_mode = RewardMode::Sampled;
    else if (value == "exact") p.env.reward_mode = RewardMode::Exact;
    else throw config_error("reward_mode must be sampled or exact");
  } else if (key == "checkpoint_every_steps") {
    s.checkpoint_every_steps = parse_ll(value, key);
  } else if (key == "val_every_updates") {
    s.val_every_updates = parse_int(value, key);
  } else {
    throw config_error("unknown config key: " + key);
  }
}

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

void read_train_config(TrainSettings& s, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw config_error("config line " + std::to_string(lineno) +
                         " is not key=value: " + text);
    }
    apply_config_entry(s, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
}

ordered_json settings_json(const TrainSettings& s) {
  ordered_json j;
  j["n_steps"] = s.ppo.n_steps;
  j["epochs_per_update"] = s.ppo.epochs_per_update;
  j["minibatch_size"] = s.ppo.minibatch_size;
  j["n_envs"] = s.ppo.n_envs;
  j["hidden"] = s.ppo.hidden;
  j["lr_initial"] = s.ppo.lr_initial;
  j["lr_schedule"] =
      s.ppo.lr_schedule == LrSchedule::LinearToZero ? "linear" : "constant";
  j["discount"] = s.ppo.discount;
  j["gae_lambda"] = s.ppo.gae_lambda;
  j["clip"] = s.ppo.clip;
  j["value_coef"] = s.ppo.value_coef;
  j["entropy_coef"] = s.ppo.entropy_coef;
  j["adam_epsilon"] = s.ppo.adam_epsilon;
  j["shots"] = s.ppo.env.shots;
  j["max_program_len"] = s.ppo.env.max_program_len;
  j["win_threshold"] = s.ppo.env.win_threshold;
  j["reward_mode"] = std::string(to_string(s.ppo.env.reward_mode));
  j["checkpoint_every_steps"] = s.checkpoint_every_steps;
  j["val_every_updates"] = s.val_every_updates;
  return j;
}

void count_outcomes(std::span<const EpisodeRecord> records, long long& wins,
                    double& mean) {
  wins = 0;
  double total = 0.0;
  for (const EpisodeRecord& rec : records) {
    if (rec.outcome == "won") ++wins;
    total += rec.score;
  }
  mean = records.empty() ? 0.0 : total / static_cast<double>(records.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "synthesizing quantum programs with PPO for combinatorial "
      "optimization: datasets, training, evaluation, QAOA baseline, "
      "native-gate transpilation, reports"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand(
      "gen-data", "generate train/val/test instance splits");
  std::string gen_kinds = "maxcut,maxqp,qubo";
  int gen_n = 10;
  long long gen_train_n = 2000, gen_val_n = 300, gen_test_n = 300;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_out;
  gen->add_option("--kinds", gen_kinds,
                  "comma-separated problem kinds: maxcut, maxqp, qubo")
      ->capture_default_str();
  gen->add_option("--n", gen_n, "variables / qubits per instance")
      ->capture_default_str();
  gen->add_option("--train-n", gen_train_n, "training instances per kind")
      ->capture_default_str();
  gen->add_option("--val-n", gen_val_n,
                  "validation instances in total, split across kinds")
      ->capture_default_str();
  gen->add_option("--test-n", gen_test_n,
                  "test instances in total, split across kinds")
      ->capture_default_str();
  gen->add_option("--seed", gen_seed, "root seed (default: QPRL_SEED, then 0)");
  gen->add_option("--out", gen_out, "output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "run PPO training");
  std::string train_data, train_config, train_out;
  std::optional<long long> train_steps;
  std::optional<std::uint64_t> train_seed;
  train_cmd
      ->add_option("--data", train_data,
                   "dataset directory holding train.jsonl and val.jsonl")
      ->required();
  train_cmd->add_option(
      "--config", train_config,
      "key=value file overriding the defaults: n_steps=512 "
      "epochs_per_update=4 minibatch_size=64 n_envs=8 hidden=32 "
      "lr_initial=0.001 lr_schedule=linear discount=0.3 gae_lambda=0.95 "
      "clip=0.2 value_coef=0.5 entropy_coef=0.01 adam_epsilon=1e-05 shots=10 "
      "max_program_len=25 win_threshold=0.8 reward_mode=sampled "
      "checkpoint_every_steps=0 val_every_updates=8");
  train_cmd->add_option("--steps", train_steps,
                        "total environment steps (default 200000)");
  train_cmd->add_option("--seed", train_seed,
                        "root seed (default: QPRL_SEED, then 0)");
  train_cmd
      ->add_option("--out", train_out,
                   "output directory for curve.csv and checkpoints")
      ->required();

  // eval
  auto* eval_cmd =
      app.add_subcommand("eval", "roll a policy over an instance file");
  std::string eval_checkpoint, eval_data, eval_out;
  bool eval_untrained = false;
  int eval_shots = 10, eval_workers = 1;
  std::optional<std::uint64_t> eval_seed;
  eval_cmd->add_option("--checkpoint", eval_checkpoint,
                       "policy checkpoint to evaluate");
  eval_cmd->add_flag("--untrained", eval_untrained,
                     "evaluate the uniform-random baseline instead");
  eval_cmd
      ->add_option("--data", eval_data,
                   "instance file, or dataset directory (uses test.jsonl)")
      ->required();
  eval_cmd->add_option("--shots", eval_shots, "measurement rows per observation")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval_seed,
                       "root seed (default: QPRL_SEED, then 0)");
  eval_cmd
      ->add_option("--workers", eval_workers,
                   "worker threads; records are identical for any value")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "episode records JSONL")->required();

  // qaoa
  auto* qaoa_cmd = app.add_subcommand(
      "qaoa", "depth-1 QAOA grid-search baseline over an instance file");
  std::string qaoa_data, qaoa_out;
  int qaoa_bins = 20, qaoa_shots = 10, qaoa_workers = 1;
  std::optional<std::uint64_t> qaoa_seed;
  qaoa_cmd
      ->add_option("--data", qaoa_data,
                   "instance file, or dataset directory (uses test.jsonl)")
      ->required();
  qaoa_cmd->add_option("--bins", qaoa_bins, "grid resolution per angle")
      ->capture_default_str();
  qaoa_cmd->add_option("--shots", qaoa_shots, "samples for the reported quality")
      ->capture_default_str();
  qaoa_cmd->add_option("--seed", qaoa_seed,
                       "root seed (default: QPRL_SEED, then 0)");
  qaoa_cmd
      ->add_option("--workers", qaoa_workers,
                   "worker threads; records are identical for any value")
      ->capture_default_str();
  qaoa_cmd->add_option("--out", qaoa_out, "episode records JSONL")->required();

  // transpile
  auto* transpile_cmd = app.add_subcommand(
      "transpile", "rewrite programs into the native set CZ, RZ, RX(+-pi/2)");
  std::string transpile_program, transpile_episodes, transpile_out;
  transpile_cmd->add_option("--program", transpile_program,
                            "gate program text file");
  transpile_cmd->add_option("--episodes", transpile_episodes,
                            "episode records JSONL; transpiles every program");
  transpile_cmd->add_option("--out", transpile_out, "output file")->required();

  // report
  auto* report_cmd = app.add_subcommand(
      "report", "aggregate episode records into plot-ready CSV tables");
  std::vector<std::string> report_records;
  int report_n = 10;
  std::string report_out;
  report_cmd
      ->add_option("--records", report_records,
                   "episode record JSONL files (repeatable)")
      ->required()
      ->expected(-1);
  report_cmd
      ->add_option("--n", report_n, "register size the action ids refer to")
      ->capture_default_str();
  report_cmd->add_option("--out", report_out, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ordered_json summary;

    if (gen->parsed()) {
      DatasetSpec spec;
      spec.kinds = parse_kinds(gen_kinds);
      spec.n = gen_n;
      spec.train_per_kind = gen_train_n;
      spec.val_total = gen_val_n;
      spec.test_total = gen_test_n;
      spec.root_seed = resolve_seed(gen_seed);
      const Dataset dataset = gen_dataset(spec);
      write_dataset(spec, dataset, gen_out);

      summary["command"] = "gen-data";
      summary["kinds"] = ordered_json::array();
      for (ProblemKind kind : spec.kinds) {
        summary["kinds"].push_back(std::string(to_string(kind)));
      }
      summary["n"] = spec.n;
      summary["train_per_kind"] = spec.train_per_kind;
      summary["val_total"] = spec.val_total;
      summary["test_total"] = spec.test_total;
      summary["seed"] = spec.root_seed;
      summary["out"] = gen_out;
      summary["counts"]["train"] = dataset.train.size();
      summary["counts"]["val"] = dataset.val.size();
      summary["counts"]["test"] = dataset.test.size();

    } else if (train_cmd->parsed()) {
      TrainSettings settings;
      if (!train_config.empty()) read_train_config(settings, train_config);
      settings.ppo.total_steps = train_steps.value_or(200000);
      const std::uint64_t seed = resolve_seed(train_seed);

      const fs::path data_dir = train_data;
      const auto train_set = read_instances_jsonl(data_dir / "train.jsonl");
      std::vector<ProblemInstance> val_set;
      if (fs::exists(data_dir / "val.jsonl")) {
        val_set = read_instances_jsonl(data_dir / "val.jsonl");
      }
      settings.ppo.env.n = dataset_n(train_set);

      const fs::path out_dir = train_out;
      fs::create_directories(out_dir);
      TrainHooks hooks;
      hooks.checkpoint_every_steps = settings.checkpoint_every_steps;
      hooks.val_every_updates = settings.val_every_updates;
      if (settings.checkpoint_every_steps > 0) {
        hooks.save_snapshot = [&](const PolicyNet& net, long long steps) {
          save_checkpoint(
              out_dir / ("snapshot_" + std::to_string(steps) + ".bin"), net);
        };
      }

      const TrainResult result =
          train(train_set, val_set, settings.ppo, seed, hooks);
      write_curve_csv(out_dir / "curve.csv", result.curve);
      save_checkpoint(out_dir / "checkpoint.bin", result.best_net);
      save_checkpoint(out_dir / "final.bin", result.net);

      summary["command"] = "train";
      summary["data"] = train_data;
      summary["out"] = train_out;
      summary["seed"] = seed;
      summary["steps"] = settings.ppo.total_steps;
      summary["n"] = settings.ppo.env.n;
      summary["config"] = settings_json(settings);
      summary["train_instances"] = train_set.size();
      summary["val_instances"] = val_set.size();
      summary["updates"] = result.curve.size();
      summary["episodes_finished"] = result.episodes_finished;
      summary["validated"] = !val_set.empty();
      summary["best_val_score"] = result.best_val_score;
      summary["best_val_steps"] = result.best_val_steps;

    } else if (eval_cmd->parsed()) {
      if (eval_checkpoint.empty() && !eval_untrained) {
        throw config_error("pass --checkpoint FILE or --untrained");
      }
      if (!eval_checkpoint.empty() && eval_untrained) {
        throw config_error("--checkpoint and --untrained are mutually exclusive");
      }
      const fs::path data_path = resolve_instances_path(eval_data);
      const auto instances = read_instances_jsonl(data_path);

      EnvConfig env;
      env.shots = eval_shots;
      env.n = dataset_n(instances);

      std::optional<PolicyNet> net;
      std::string label = "untrained";
      if (!eval_checkpoint.empty()) {
        net = load_checkpoint(eval_checkpoint);
        label = "trained";
        if (net->num_actions() != num_actions(env.n)) {
          throw config_error("checkpoint has " +
                             std::to_string(net->num_actions()) +
                             " actions but the data needs " +
                             std::to_string(num_actions(env.n)));
        }
        const int obs_len = env.shots * env.n + env.n * (env.n + 1) / 2;
        if (net->input_size() != obs_len) {
          throw config_error("checkpoint expects " +
                             std::to_string(net->input_size()) +
                             " inputs but --shots " +
                             std::to_string(env.shots) + " gives " +
                             std::to_string(obs_len));
        }
      }

      EvalConfig cfg;
      cfg.env = env;
      cfg.workers = eval_workers;
      const std::uint64_t seed = resolve_seed(eval_seed);
      std::vector<EvalAgent> agents;
      agents.push_back(net ? EvalAgent::trained(&*net, label)
                           : EvalAgent::untrained(label));
      const auto records = run_eval(agents, instances, cfg, seed);
      write_records_jsonl(eval_out, records);

      long long wins = 0;
      double mean = 0.0;
      count_outcomes(records, wins, mean);
      summary["command"] = "eval";
      summary["agent"] = label;
      if (!eval_checkpoint.empty()) summary["checkpoint"] = eval_checkpoint;
      summary["data"] = data_path.string();
      summary["shots"] = eval_shots;
      summary["seed"] = seed;
      summary["workers"] = eval_workers;
      summary["out"] = eval_out;
      summary["episodes"] = records.size();
      summary["wins"] = wins;
      summary["mean_score"] = mean;

    } else if (qaoa_cmd->parsed()) {
      const fs::path data_path = resolve_instances_path(qaoa_data);
      const auto instances = read_instances_jsonl(data_path);

      EvalConfig cfg;
      cfg.env.n = dataset_n(instances);
      cfg.qaoa.bins = qaoa_bins;
      cfg.qaoa.shots = qaoa_shots;
      cfg.workers = qaoa_workers;
      const std::uint64_t seed = resolve_seed(qaoa_seed);
      const std::vector<EvalAgent> agents = {EvalAgent::qaoa()};
      const auto records = run_eval(agents, instances, cfg, seed);
      write_records_jsonl(qaoa_out, records);

      long long wins = 0;
      double mean = 0.0;
      count_outcomes(records, wins, mean);
      summary["command"] = "qaoa";
      summary["data"] = data_path.string();
      summary["bins"] = qaoa_bins;
      summary["shots"] = qaoa_shots;
      summary["seed"] = seed;
      summary["workers"] = qaoa_workers;
      summary["out"] = qaoa_out;
      summary["episodes"] = records.size();
      summary["wins"] = wins;
      summary["mean_score"] = mean;

    } else if (transpile_cmd->parsed()) {
      if (transpile_program.empty() == transpile_episodes.empty()) {
        throw config_error("pass exactly one of --program or --episodes");
      }
      summary["command"] = "transpile";

      if (!transpile_program.empty()) {
        const auto ops = program_from_text(read_text_file(transpile_program));
        const NativeProgram native = transpile(ops);
        if (!verify_equivalence(ops, to_gate_ops(native),
                                program_width(ops))) {
          throw numeric_error("native program is not equivalent to its input");
        }
        std::ofstream out(transpile_out, std::ios::binary);
        if (!out) {
          throw std::runtime_error("cannot write " + transpile_out);
        }
        out << native_program_to_text(native);

        summary["program"] = transpile_program;
        summary["out"] = transpile_out;
        summary["input_gates"] = ops.size();
        summary["native_gates"] = native.gates.size();
        summary["verified"] = true;
      } else {
        const auto records = read_records_jsonl(transpile_episodes);
        std::ofstream out(transpile_out, std::ios::binary);
        if (!out) {
          throw std::runtime_error("cannot write " + transpile_out);
        }
        long long input_gates = 0, native_gates = 0;
        for (const EpisodeRecord& rec : records) {
          std::string text;
          for (const std::string& line : rec.program_text) {
            text += line;
            text += '\n';
          }
          const auto ops = program_from_text(text);
          const NativeProgram native = transpile(ops);
          if (!verify_equivalence(ops, to_gate_ops(native),
                                  program_width(ops))) {
            throw numeric_error(
                "native program is not equivalent to its input");
          }
          input_gates += static_cast<long long>(ops.size());
          native_gates += static_cast<long long>(native.gates.size());

          ordered_json row;
          row["instance_seed"] = rec.instance_seed;
          row["kind"] = rec.kind;
          if (!rec.agent.empty()) row["agent"] = rec.agent;
          row["input_gates"] = ops.size();
          row["native_gates"] = native.gates.size();
          row["native_text"] = ordered_json::array();
          for (const NativeGate& gate : native.gates) {
            row["native_text"].push_back(to_text(gate));
          }
          out << row.dump() << '\n';
        }
        summary["episodes"] = transpile_episodes;
        summary["out"] = transpile_out;
        summary["programs"] = records.size();
        summary["input_gates"] = input_gates;
        summary["native_gates"] = native_gates;
        summary["verified"] = true;
      }

    } else if (report_cmd->parsed()) {
      std::vector<EpisodeRecord> all;
      for (const std::string& path : report_records) {
        auto batch = read_records_jsonl(path);
        std::move(batch.begin(), batch.end(), std::back_inserter(all));
      }
      const EvalSummary aggregated = summarize(std::move(all), report_n);
      emit_report(aggregated, report_out);

      summary["command"] = "report";
      summary["records"] = report_records;
      summary["n"] = report_n;
      summary["out"] = report_out;
      summary["rows"] = aggregated.records.size();
      summary["groups"] = aggregated.stats.size();
    }

    std::cout << summary.dump() << '\n';
    return 0;
  } catch (const config_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
