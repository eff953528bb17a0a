#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oralab/distrl.hpp"
#include "oralab/env.hpp"
#include "oralab/online.hpp"
#include "oralab/risk.hpp"

namespace oralab {

// How the risk level evolves during training.
//   kFtpl      — per-pair follow-the-perturbed-leader over the candidate grid
//   kRecursive — per-pair satisficing recursion (storage-light FTPL variant)
//   kFixed     — constant-alpha distortion of the return distribution
//   kScheduled — piecewise-linear alpha(episode) distortion schedule
//   kArt       — per-step forecaster over distortion arms, RTV-difference feedback
//   kTop       — per-episode forecaster over distortion arms, return-difference feedback
//   kComposite — epistemic selection with alpha frozen at 1 (risk-neutral)
enum class AdaptationMode {
  kFtpl,
  kRecursive,
  kFixed,
  kScheduled,
  kArt,
  kTop,
  kComposite,
};

AdaptationMode parse_adaptation(const std::string& name);
std::string adaptation_name(AdaptationMode mode);

// Piecewise-linear interpolation through (episode, alpha) waypoints, clamped
// at both ends. Waypoint episodes must be strictly increasing.
double scheduled_alpha(int episode,
                       const std::vector<std::pair<int, double>>& waypoints);

struct AgentConfig {
  AdaptationMode adaptation = AdaptationMode::kFtpl;
  std::string label;            // defaults to the adaptation name
  double gamma = 0.99;
  double epsilon_greedy = 0.1;
  int num_heads = 10;           // ensemble size K
  int num_quantiles = 8;        // atoms per distribution N
  int distortion_samples = 0;   // M; 0 = exact enumeration over the fractions
  double kappa = 1.0;
  double lr = 0.1;
  double alpha_min = 0.1;
  double alpha_max = 1.0;
  double eta_ftpl = 0.0;        // 0 = 1/sqrt(horizon)
  double grid_epsilon = 0.0;    // 0 = max(0.01, 0.9/sqrt(horizon)), <=512 points
  double fixed_alpha = 1.0;
  std::vector<std::pair<int, double>> waypoints;  // scheduled mode
  std::vector<double> arms;     // forecaster arms; empty = mode default
  double eta_ewaf = 0.5;
  double p_mask = 0.5;
  double init_lo = 0.0;
  double init_hi = 1.0;
  int replay_capacity = 0;      // 0 = on-policy single-transition updates
  int replay_batch = 32;
  // Test hook: pins the online selector's output (adaptation losses and
  // perturbations are skipped). Only meaningful for epistemic modes.
  std::optional<double> force_alpha;

  // Fills mode-dependent defaults (label, arms, composite alpha pin).
  AgentConfig normalized() const;
  void validate() const;  // throws std::invalid_argument naming the field
};

struct StepOutcome {
  int state = 0;
  int action = 0;
  int next_state = 0;
  double reward = 0.0;
  double alpha = 1.0;  // risk level in effect when the action was chosen
  bool done = false;
  bool operator==(const StepOutcome&) const = default;
};

// Tabular risk-adaptive distributional learner. Epistemic modes (ftpl,
// recursive, composite) follow the online-risk-adaptation loop: actions
// minimize the right-tail CVaR of the per-pair epistemic loss snapshot
// (negated per-head Q values), the ensemble trains under the identity
// distortion, and the visited pair's snapshot, losses, and risk level are
// refreshed after every transition. Distortion modes (fixed, scheduled, art,
// top) act greedily on the distorted return distribution beta(q) = alpha*q.
class Agent {
 public:
  Agent(const AgentConfig& config, int num_states, int num_actions,
        long long horizon_hint, std::uint64_t seed);

  void begin_episode(int episode_index);
  // Observes state, picks an action (epsilon-greedy during training), steps
  // the environment, updates the model and the risk level of the visited pair.
  StepOutcome act(EnvInterface& env, int state, std::mt19937_64& rng);
  void end_episode(double episode_return, std::mt19937_64& rng);

  // Training-path action selection (may lazily initialize snapshots).
  int select_action(int state, std::mt19937_64& rng);
  // Evaluation-path action selection: greedy, const, never mutates the agent.
  int greedy_action(int state, std::optional<int> last_action) const;
  // Risk level the evaluation path would use in `state` after `last_action`.
  double eval_alpha(int state, std::optional<int> last_action) const;

  double alpha_at(int s, int a) const;
  double last_snapshot_ltv() const;  // 0 when no snapshot was stored yet
  const EnsembleModel& model() const { return model_; }
  const EpistemicStore& store() const { return store_; }
  EpistemicStore& mutable_store() { return store_; }
  const RiskGrid& grid() const { return grid_; }
  const LossTracker& tracker(int s, int a) const;
  const EwafBelief& belief() const { return belief_; }
  const AgentConfig& config() const { return cfg_; }
  double ftpl_eta() const { return eta_; }
  bool epistemic() const;

  // FNV-1a hash over every mutable piece of agent state; used to prove that
  // evaluation leaves the agent untouched.
  std::uint64_t state_hash() const;

 private:
  int pair_index(int s, int a) const { return s * num_actions_ + a; }
  double mode_alpha() const;           // distortion level for baseline modes
  Distortion behavior_distortion() const;
  double alpha_bar(int state, std::optional<int> last_action) const;
  EmpiricalDistribution snapshot_from_model(int s, int a, std::mt19937_64& rng);
  EmpiricalDistribution snapshot_exact(int s, int a) const;
  double epistemic_value(int s, int a, double alpha) const;  // const eval path
  void learn(const Transition& tr, std::mt19937_64& rng);
  void adapt(const Transition& tr, std::mt19937_64& rng);

  AgentConfig cfg_;
  int num_states_ = 0;
  int num_actions_ = 0;
  RiskMeasureSpec risk_;
  RiskGrid grid_;
  double eta_ = 1.0;
  EnsembleModel model_;
  EpistemicStore store_;
  std::vector<double> alpha_;         // per pair; epistemic modes only
  std::vector<LossTracker> trackers_; // per pair; ftpl mode only
  std::optional<ReplayBuffer> replay_;
  EwafBelief belief_;                 // art/top modes
  std::optional<int> last_action_;
  std::optional<std::pair<int, int>> last_visited_;
  std::optional<double> prev_rtv_;    // art feedback memory
  std::optional<double> prev_return_; // top feedback memory
  int current_arm_ = 0;
  int episode_ = 0;
};

}  // namespace oralab
