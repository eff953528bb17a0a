#include "oralab/env.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <stdexcept>

namespace oralab {

// --- Chain -------------------------------------------------------------------

ChainEnv::ChainEnv(int length, double reward) : length_(length), reward_(reward) {
  if (length < 1) throw std::invalid_argument("chain length must be >= 1");
}

int ChainEnv::reset() {
  pos_ = 0;
  done_ = false;
  return pos_;
}

StepResult ChainEnv::step(int action) {
  if (done_) throw std::logic_error("step() after episode end");
  if (action != 0) throw std::out_of_range("chain env has a single action");
  if (pos_ + 1 >= length_) {
    done_ = true;
    return {pos_, reward_, true};
  }
  ++pos_;
  return {pos_, 0.0, false};
}

// --- Knapsack ------------------------------------------------------------------

void KnapsackInstance::validate() const {
  if (weights.empty() || weights.size() != values.size()) {
    throw std::invalid_argument("knapsack needs matching nonempty weights/values");
  }
  for (int w : weights) {
    if (w < 1) throw std::invalid_argument("knapsack weights must be >= 1");
  }
  for (double v : values) {
    if (!(v > 0.0)) throw std::invalid_argument("knapsack values must be > 0");
  }
  if (capacity < 0) throw std::invalid_argument("knapsack capacity must be >= 0");
}

KnapsackInstance random_knapsack_instance(int num_items, double capacity_ratio,
                                          int max_weight, double max_value,
                                          std::uint64_t seed) {
  if (num_items < 1) throw std::invalid_argument("need at least one item");
  if (!(capacity_ratio > 0.0) || capacity_ratio > 1.0) {
    throw std::invalid_argument("capacity ratio must lie in (0, 1]");
  }
  if (max_weight < 1 || !(max_value > 0.0)) {
    throw std::invalid_argument("bad weight/value bounds");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> w(1, max_weight);
  std::uniform_real_distribution<double> v(1.0, max_value);
  KnapsackInstance inst;
  inst.weights.resize(num_items);
  inst.values.resize(num_items);
  long long total = 0;
  for (int i = 0; i < num_items; ++i) {
    inst.weights[i] = w(rng);
    inst.values[i] = v(rng);
    total += inst.weights[i];
  }
  inst.capacity = std::max(1, static_cast<int>(std::llround(capacity_ratio * total)));
  inst.validate();
  return inst;
}

double dp_knapsack(const KnapsackInstance& inst) {
  inst.validate();
  std::vector<double> best(inst.capacity + 1, 0.0);
  for (int i = 0; i < inst.num_items(); ++i) {
    for (int c = inst.capacity; c >= inst.weights[i]; --c) {
      best[c] = std::max(best[c], best[c - inst.weights[i]] + inst.values[i]);
    }
  }
  return best[inst.capacity];
}

KnapsackEnv::KnapsackEnv(KnapsackInstance inst) : inst_(std::move(inst)) {
  inst_.validate();
}

int KnapsackEnv::num_states() const {
  return (inst_.num_items() + 1) * (inst_.capacity + 1);
}

int KnapsackEnv::state_id(int item, int remaining) const {
  return item * (inst_.capacity + 1) + remaining;
}

int KnapsackEnv::reset() {
  item_ = 0;
  remaining_ = inst_.capacity;
  done_ = false;
  return state_id(item_, remaining_);
}

StepResult KnapsackEnv::step(int action) {
  if (done_) throw std::logic_error("step() after episode end");
  if (action != 0 && action != 1) {
    throw std::out_of_range("knapsack actions are {0: reject, 1: accept}");
  }
  double reward = 0.0;
  if (action == 1) {
    if (inst_.weights[item_] > remaining_) {
      done_ = true;  // capacity overflow ends the episode
      return {state_id(item_, remaining_), 0.0, true};
    }
    reward = inst_.values[item_];
    remaining_ -= inst_.weights[item_];
  }
  ++item_;
  if (item_ >= inst_.num_items()) done_ = true;
  return {state_id(item_, remaining_), reward, done_};
}

// --- Grid navigation -----------------------------------------------------------

void GridNavInstance::validate() const {
  if (width < 2 || height < 2) {
    throw std::invalid_argument("grid must be at least 2x2");
  }
  if (static_cast<int>(obstacles.size()) != cells()) {
    throw std::invalid_argument("obstacle mask size must equal width * height");
  }
  if (start < 0 || start >= cells() || goal < 0 || goal >= cells() ||
      start == goal) {
    throw std::invalid_argument("bad start/goal cells");
  }
  if (obstacles[start] || obstacles[goal]) {
    throw std::invalid_argument("start/goal cells must be free");
  }
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (step_penalty < 0.0 || collision_penalty < 0.0 || goal_bonus < 0.0) {
    throw std::invalid_argument("penalties and bonus must be nonnegative");
  }
}

int bfs_shortest_path(const GridNavInstance& inst) {
  std::vector<int> dist(inst.cells(), -1);
  std::queue<int> frontier;
  dist[inst.start] = 0;
  frontier.push(inst.start);
  while (!frontier.empty()) {
    const int cell = frontier.front();
    frontier.pop();
    if (cell == inst.goal) return dist[cell];
    const int x = cell % inst.width;
    const int y = cell / inst.width;
    const int dx[4] = {0, 1, 0, -1};
    const int dy[4] = {-1, 0, 1, 0};
    for (int d = 0; d < 4; ++d) {
      const int nx = x + dx[d];
      const int ny = y + dy[d];
      if (nx < 0 || nx >= inst.width || ny < 0 || ny >= inst.height) continue;
      const int nc = ny * inst.width + nx;
      if (inst.obstacles[nc] || dist[nc] >= 0) continue;
      dist[nc] = dist[cell] + 1;
      frontier.push(nc);
    }
  }
  return dist[inst.goal];
}

GridNavInstance make_gridnav_instance(int width, int height, int obstacle_count,
                                      double step_penalty,
                                      double collision_penalty,
                                      double goal_bonus, int max_steps,
                                      std::uint64_t seed) {
  if (obstacle_count < 0 || obstacle_count > width * height - 2) {
    throw std::invalid_argument("obstacle count leaves no room for start/goal");
  }
  GridNavInstance inst;
  inst.width = width;
  inst.height = height;
  inst.start = 0;
  inst.goal = width * height - 1;
  inst.step_penalty = step_penalty;
  inst.collision_penalty = collision_penalty;
  inst.goal_bonus = goal_bonus;
  inst.max_steps = max_steps;
  std::mt19937_64 rng(seed);
  std::vector<int> free_cells;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    inst.obstacles.assign(inst.cells(), 0);
    free_cells.clear();
    for (int c = 0; c < inst.cells(); ++c) {
      if (c != inst.start && c != inst.goal) free_cells.push_back(c);
    }
    for (int i = 0; i < obstacle_count; ++i) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(free_cells.size()) - 1);
      const int j = pick(rng);
      inst.obstacles[free_cells[j]] = 1;
      free_cells.erase(free_cells.begin() + j);
    }
    if (bfs_shortest_path(inst) >= 0) {
      inst.validate();
      return inst;
    }
  }
  throw std::runtime_error("could not generate a connected grid instance");
}

GridNavEnv::GridNavEnv(GridNavInstance inst) : inst_(std::move(inst)) {
  inst_.validate();
}

int GridNavEnv::reset() {
  pos_ = inst_.start;
  steps_ = 0;
  collisions_ = 0;
  success_ = false;
  done_ = false;
  return pos_;
}

StepResult GridNavEnv::step(int action) {
  if (done_) throw std::logic_error("step() after episode end");
  if (action < 0 || action > 3) throw std::out_of_range("grid actions are 0..3");
  const int dx[4] = {0, 1, 0, -1};
  const int dy[4] = {-1, 0, 1, 0};
  const int x = pos_ % inst_.width;
  const int y = pos_ / inst_.width;
  const int nx = x + dx[action];
  const int ny = y + dy[action];
  double reward = -inst_.step_penalty;
  if (nx < 0 || nx >= inst_.width || ny < 0 || ny >= inst_.height ||
      inst_.obstacles[ny * inst_.width + nx]) {
    ++collisions_;
    reward -= inst_.collision_penalty;
  } else {
    pos_ = ny * inst_.width + nx;
  }
  ++steps_;
  if (pos_ == inst_.goal) {
    reward += inst_.goal_bonus;
    success_ = true;
    done_ = true;
  } else if (steps_ >= inst_.max_steps) {
    done_ = true;
  }
  return {pos_, reward, done_};
}

}  // namespace oralab
