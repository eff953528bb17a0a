#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "oralab/agent.hpp"
#include "oralab/env.hpp"

namespace oralab {

// Raised for malformed or out-of-range configuration input (CLI exit code 1);
// any other exception is a runtime failure (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnvDescriptor {
  std::string type = "chain";  // "chain" | "knapsack" | "gridnav"
  // chain
  int chain_length = 5;
  double chain_reward = 1.0;
  // knapsack (generated unless explicit weights/values/capacity given)
  int num_items = 20;
  double capacity_ratio = 0.4;
  int max_weight = 10;
  double max_value = 20.0;
  std::vector<int> weights;
  std::vector<double> values;
  int capacity = 0;
  // gridnav
  int width = 10;
  int height = 10;
  int obstacle_count = 6;
  double step_penalty = 1.0;
  double collision_penalty = 5.0;
  double goal_bonus = 100.0;
  int max_steps = 200;
  // shared
  std::uint64_t instance_seed = 1;
  bool per_seed_instance = false;  // offset instance_seed by the run seed
  void validate() const;
};

std::unique_ptr<EnvInterface> make_env(const EnvDescriptor& desc,
                                       std::uint64_t run_seed);

struct RunConfig {
  int schema_version = 1;
  EnvDescriptor env;
  AgentConfig agent;
  int episodes = 10;
  int eval_episodes = 100;
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir;
  int log_cadence = 1;
  bool timing = false;  // real wall-clock ms breaks byte-reproducibility
  int jobs = 1;         // 0 = one worker per seed
  void validate() const;
};

// Parses and validates a JSON run configuration. Unknown keys, missing
// required fields, and out-of-range values raise ConfigError naming the
// offending field. An empty object yields the all-defaults chain smoke run.
// Agent defaults depend on env.type (see README).
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);  // same, from a string

struct EpisodeLog {
  int episode = 0;
  double reward = 0.0;
  double alpha_mean = 1.0;
  double ltv = 0.0;
  bool success = false;
  int collisions = 0;
  double ms = 0.0;
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<EpisodeLog> train;
  std::vector<EpisodeLog> eval;
  bool failed = false;
  std::string error;
};

// Trains `episodes` episodes per seed, then runs a frozen greedy evaluation
// phase (epsilon = 0, no learning, no adaptation, agent state untouched).
// Seeds are independent; with jobs != 1 they run concurrently with results
// identical to sequential execution. A module error aborts only its seed.
std::vector<SeedRun> run_experiment(const RunConfig& cfg);

// Writes per-seed train/eval CSVs
// (episodes_<label>_<seed>.csv / eval_<label>_<seed>.csv, header
// episode,reward,alpha_mean,ltv,success,collisions,ms) and summary.json into
// out_dir. Returns the created file paths.
std::vector<std::string> write_logs(const RunConfig& cfg,
                                    const std::vector<SeedRun>& results,
                                    const std::string& out_dir);

// Convenience: run_experiment + write_logs. Returns the written paths.
std::vector<std::string> run_and_write(const RunConfig& cfg,
                                       const std::string& out_dir);

// CSV cell formatting for doubles: round-trip exact (%.17g).
std::string format_double(double v);

}  // namespace oralab
