#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace oralab {

struct StepResult {
  int next_state = 0;
  double reward = 0.0;
  bool done = false;
};

// Tabular episodic environment. Deterministic given (instance, action
// sequence). Calling step() on a finished episode throws std::logic_error.
class EnvInterface {
 public:
  virtual ~EnvInterface() = default;
  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;
  virtual int reset() = 0;
  virtual StepResult step(int action) = 0;
  // Upper bound on steps per episode; used to size adaptation horizons.
  virtual long long episode_length_hint() const = 0;
  // Episode diagnostics; environments without the concept report 0.
  virtual bool episode_success() const { return false; }
  virtual int episode_collisions() const { return 0; }
};

// --- Chain -----------------------------------------------------------------

// Deterministic left-to-right chain of `length` cells with a single action;
// reward `reward` arrives on the final transition, all others pay 0. The
// optimal discounted return from the start is reward * gamma^(length - 1).
class ChainEnv : public EnvInterface {
 public:
  ChainEnv(int length, double reward);
  int num_states() const override { return length_; }
  int num_actions() const override { return 1; }
  int reset() override;
  StepResult step(int action) override;
  long long episode_length_hint() const override { return length_; }

 private:
  int length_;
  double reward_;
  int pos_ = 0;
  bool done_ = true;
};

// --- Knapsack ---------------------------------------------------------------

struct KnapsackInstance {
  std::vector<int> weights;    // >= 1 each
  std::vector<double> values;  // > 0 each
  int capacity = 0;            // >= 0 (0 fits nothing)
  void validate() const;
  int num_items() const { return static_cast<int>(weights.size()); }
};

// Random instance: integer weights uniform in [1, max_weight], values uniform
// in [1, max_value], capacity = round(capacity_ratio * total weight), >= 1.
KnapsackInstance random_knapsack_instance(int num_items, double capacity_ratio,
                                          int max_weight, double max_value,
                                          std::uint64_t seed);

// Exact 0/1 knapsack optimum (classic O(items * capacity) table).
double dp_knapsack(const KnapsackInstance& inst);

// Items are presented one at a time; actions {0: reject, 1: accept}. Accept
// pays the item value as reward when it fits and reduces capacity; accepting
// an item that does not fit ends the episode with no reward. The episode also
// ends after the last item. State encodes (item index, remaining capacity).
class KnapsackEnv : public EnvInterface {
 public:
  explicit KnapsackEnv(KnapsackInstance inst);
  int num_states() const override;
  int num_actions() const override { return 2; }
  int reset() override;
  StepResult step(int action) override;
  long long episode_length_hint() const override { return inst_.num_items(); }
  const KnapsackInstance& instance() const { return inst_; }
  int remaining_capacity() const { return remaining_; }

 private:
  int state_id(int item, int remaining) const;
  KnapsackInstance inst_;
  int item_ = 0;
  int remaining_ = 0;
  bool done_ = true;
};

// --- Grid navigation ---------------------------------------------------------

struct GridNavInstance {
  int width = 10;
  int height = 10;
  int start = 0;
  int goal = 0;
  std::vector<std::uint8_t> obstacles;  // width * height cell flags
  double step_penalty = 1.0;
  double collision_penalty = 5.0;
  double goal_bonus = 100.0;
  int max_steps = 200;
  void validate() const;
  int cells() const { return width * height; }
};

// Scatters `obstacle_count` obstacles uniformly (start/goal excluded),
// regenerating until start and goal are 4-connected. Start is the top-left
// cell, goal the bottom-right.
GridNavInstance make_gridnav_instance(int width, int height, int obstacle_count,
                                      double step_penalty,
                                      double collision_penalty,
                                      double goal_bonus, int max_steps,
                                      std::uint64_t seed);

// 4-connected shortest path length from start to goal, or -1 if disconnected.
int bfs_shortest_path(const GridNavInstance& inst);

// 4-connected grid world. Actions {0: up, 1: right, 2: down, 3: left}.
// Moving into an obstacle or off the grid is a collision: the position is
// unchanged and the collision penalty is charged on top of the per-step
// penalty. Reaching the goal pays the bonus and ends the episode; episodes
// truncate unsuccessfully after max_steps.
class GridNavEnv : public EnvInterface {
 public:
  explicit GridNavEnv(GridNavInstance inst);
  int num_states() const override { return inst_.cells(); }
  int num_actions() const override { return 4; }
  int reset() override;
  StepResult step(int action) override;
  long long episode_length_hint() const override { return inst_.max_steps; }
  bool episode_success() const override { return success_; }
  int episode_collisions() const override { return collisions_; }
  const GridNavInstance& instance() const { return inst_; }

 private:
  GridNavInstance inst_;
  int pos_ = 0;
  int steps_ = 0;
  int collisions_ = 0;
  bool success_ = false;
  bool done_ = true;
};

}  // namespace oralab
