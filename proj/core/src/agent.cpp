#include "oralab/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace oralab {

AdaptationMode parse_adaptation(const std::string& name) {
  if (name == "ftpl") return AdaptationMode::kFtpl;
  if (name == "recursive") return AdaptationMode::kRecursive;
  if (name == "fixed") return AdaptationMode::kFixed;
  if (name == "scheduled") return AdaptationMode::kScheduled;
  if (name == "art") return AdaptationMode::kArt;
  if (name == "top") return AdaptationMode::kTop;
  if (name == "composite") return AdaptationMode::kComposite;
  throw std::invalid_argument("unknown adaptation mode: " + name);
}

std::string adaptation_name(AdaptationMode mode) {
  switch (mode) {
    case AdaptationMode::kFtpl: return "ftpl";
    case AdaptationMode::kRecursive: return "recursive";
    case AdaptationMode::kFixed: return "fixed";
    case AdaptationMode::kScheduled: return "scheduled";
    case AdaptationMode::kArt: return "art";
    case AdaptationMode::kTop: return "top";
    case AdaptationMode::kComposite: return "composite";
  }
  throw std::logic_error("unreachable adaptation mode");
}

double scheduled_alpha(int episode,
                       const std::vector<std::pair<int, double>>& waypoints) {
  if (waypoints.empty()) {
    throw std::invalid_argument("schedule needs at least one waypoint");
  }
  if (episode <= waypoints.front().first) return waypoints.front().second;
  if (episode >= waypoints.back().first) return waypoints.back().second;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const auto [e1, a1] = waypoints[i];
    if (episode > e1) continue;
    const auto [e0, a0] = waypoints[i - 1];
    const double t = static_cast<double>(episode - e0) / (e1 - e0);
    return a0 + (a1 - a0) * t;
  }
  return waypoints.back().second;
}

AgentConfig AgentConfig::normalized() const {
  AgentConfig c = *this;
  if (c.label.empty()) c.label = adaptation_name(c.adaptation);
  if (c.adaptation == AdaptationMode::kComposite) c.alpha_max = 1.0;
  if (c.arms.empty()) {
    if (c.adaptation == AdaptationMode::kArt) c.arms = {0.1, 1.0};
    if (c.adaptation == AdaptationMode::kTop) c.arms = {0.1, 0.25, 0.5, 0.75, 1.0};
  }
  c.validate();
  return c;
}

void AgentConfig::validate() const {
  const auto fail = [](const std::string& msg) {
    throw std::invalid_argument("agent config: " + msg);
  };
  if (gamma < 0.0 || gamma > 1.0) fail("gamma must lie in [0, 1]");
  if (epsilon_greedy < 0.0 || epsilon_greedy > 1.0) {
    fail("epsilon_greedy must lie in [0, 1]");
  }
  if (num_heads < 1) fail("num_heads must be >= 1");
  if (num_quantiles < 1) fail("num_quantiles must be >= 1");
  if (distortion_samples < 0) fail("distortion_samples must be >= 0");
  if (!(kappa > 0.0)) fail("kappa must be > 0");
  if (lr < 0.0) fail("lr must be >= 0");
  if (!(alpha_min > 0.0) || alpha_min > alpha_max || alpha_max > 1.0) {
    fail("need 0 < alpha_min <= alpha_max <= 1");
  }
  if (eta_ftpl < 0.0) fail("eta_ftpl must be >= 0 (0 = auto)");
  if (grid_epsilon < 0.0) fail("grid_epsilon must be >= 0 (0 = auto)");
  if (!(fixed_alpha > 0.0) || fixed_alpha > 1.0) {
    fail("fixed_alpha must lie in (0, 1]");
  }
  if (adaptation == AdaptationMode::kScheduled) {
    if (waypoints.empty()) fail("scheduled mode needs waypoints");
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
      if (!(waypoints[i].second > 0.0) || waypoints[i].second > 1.0) {
        fail("waypoint alphas must lie in (0, 1]");
      }
      if (i > 0 && waypoints[i].first <= waypoints[i - 1].first) {
        fail("waypoint episodes must be strictly increasing");
      }
    }
  }
  if (adaptation == AdaptationMode::kArt || adaptation == AdaptationMode::kTop) {
    if (arms.empty()) fail("forecaster modes need at least one arm");
    for (double a : arms) {
      if (!(a > 0.0) || a > 1.0) fail("arm alphas must lie in (0, 1]");
    }
    if (!(eta_ewaf > 0.0)) fail("eta_ewaf must be > 0");
  }
  if (p_mask < 0.0 || p_mask > 1.0) fail("p_mask must lie in [0, 1]");
  if (init_lo > init_hi) fail("init_lo must be <= init_hi");
  if (replay_capacity < 0) fail("replay_capacity must be >= 0");
  if (replay_capacity > 0 && replay_batch < 1) fail("replay_batch must be >= 1");
  if (force_alpha && (!(*force_alpha > 0.0) || *force_alpha > 1.0)) {
    fail("force_alpha must lie in (0, 1]");
  }
}

bool Agent::epistemic() const {
  return cfg_.adaptation == AdaptationMode::kFtpl ||
         cfg_.adaptation == AdaptationMode::kRecursive ||
         cfg_.adaptation == AdaptationMode::kComposite;
}

Agent::Agent(const AgentConfig& config, int num_states, int num_actions,
             long long horizon_hint, std::uint64_t seed)
    : cfg_(config.normalized()),
      num_states_(num_states),
      num_actions_(num_actions),
      risk_(RiskMeasureSpec::cvar(cfg_.alpha_min, cfg_.alpha_max)),
      grid_(build_grid(cfg_.alpha_min, cfg_.alpha_max,
                       cfg_.grid_epsilon > 0.0
                           ? cfg_.grid_epsilon
                           : default_grid_epsilon(cfg_.alpha_min, cfg_.alpha_max,
                                                  horizon_hint))),
      eta_(cfg_.eta_ftpl > 0.0 ? cfg_.eta_ftpl : default_ftpl_eta(horizon_hint)),
      model_([&] {
        std::mt19937_64 init_rng(seed);
        return EnsembleModel::make(cfg_.num_heads, num_states, num_actions,
                                   cfg_.num_quantiles, cfg_.p_mask, cfg_.init_lo,
                                   cfg_.init_hi, init_rng);
      }()),
      store_(num_states, num_actions),
      belief_(EwafBelief::uniform(
          cfg_.arms.empty() ? std::vector<double>{1.0} : cfg_.arms,
          cfg_.eta_ewaf > 0.0 ? cfg_.eta_ewaf : 1.0)) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("agent needs at least one state and action");
  }
  const double init_alpha =
      cfg_.adaptation == AdaptationMode::kComposite ? 1.0 : cfg_.alpha_max;
  alpha_.assign(static_cast<std::size_t>(num_states) * num_actions, init_alpha);
  if (cfg_.adaptation == AdaptationMode::kFtpl) {
    trackers_.assign(static_cast<std::size_t>(num_states) * num_actions,
                     LossTracker(grid_.size()));
  }
  if (cfg_.replay_capacity > 0) replay_.emplace(cfg_.replay_capacity);
  if (cfg_.adaptation == AdaptationMode::kArt ||
      cfg_.adaptation == AdaptationMode::kTop) {
    std::mt19937_64 arm_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    current_arm_ = belief_.sample(arm_rng);
  }
}

double Agent::mode_alpha() const {
  switch (cfg_.adaptation) {
    case AdaptationMode::kFixed: return cfg_.fixed_alpha;
    case AdaptationMode::kScheduled: return scheduled_alpha(episode_, cfg_.waypoints);
    case AdaptationMode::kArt:
    case AdaptationMode::kTop: return belief_.arms[current_arm_];
    default: return 1.0;
  }
}

Distortion Agent::behavior_distortion() const {
  if (epistemic()) return identity_distortion();
  return cvar_distortion(mode_alpha());
}

double Agent::alpha_bar(int state, std::optional<int> last_action) const {
  return alpha_[pair_index(state, last_action.value_or(0))];
}

EmpiricalDistribution Agent::snapshot_from_model(int s, int a,
                                                 std::mt19937_64& rng) {
  std::vector<double> q =
      cfg_.distortion_samples > 0
          ? ensemble_q(model_, s, a, identity_distortion(),
                       cfg_.distortion_samples, rng)
          : ensemble_q(model_, s, a, identity_distortion());
  for (double& v : q) v = -v;  // loss convention
  return epistemic_dist(q);
}

EmpiricalDistribution Agent::snapshot_exact(int s, int a) const {
  std::vector<double> q = ensemble_q(model_, s, a, identity_distortion());
  for (double& v : q) v = -v;
  return epistemic_dist(q);
}

double Agent::epistemic_value(int s, int a, double alpha) const {
  if (const EmpiricalDistribution* snap = store_.peek(s, a)) {
    return risk_value(risk_, *snap, alpha);
  }
  return risk_value(risk_, snapshot_exact(s, a), alpha);
}

int Agent::select_action(int state, std::mt19937_64& rng) {
  if (cfg_.epsilon_greedy > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < cfg_.epsilon_greedy) {
      std::uniform_int_distribution<int> any(0, num_actions_ - 1);
      return any(rng);
    }
  }
  if (epistemic()) {
    const double abar = alpha_bar(state, last_action_);
    int best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions_; ++a) {
      const EmpiricalDistribution& x = store_.get_or_init(
          state, a, [&] { return snapshot_from_model(state, a, rng); });
      const double v = risk_value(risk_, x, abar);
      if (v < best_v) {  // strict: ties keep the lowest action index
        best_v = v;
        best = a;
      }
    }
    return best;
  }
  const Distortion beta = behavior_distortion();
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < num_actions_; ++a) {
    double v = 0.0;
    for (const auto& head : model_.heads) {
      v += cfg_.distortion_samples > 0
               ? distorted_q(head, state, a, beta, cfg_.distortion_samples, rng)
               : distorted_q(head, state, a, beta);
    }
    v /= static_cast<double>(model_.heads.size());
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

int Agent::greedy_action(int state, std::optional<int> last_action) const {
  if (epistemic()) {
    const double abar = alpha_bar(state, last_action);
    int best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions_; ++a) {
      const double v = epistemic_value(state, a, abar);
      if (v < best_v) {
        best_v = v;
        best = a;
      }
    }
    return best;
  }
  const Distortion beta = behavior_distortion();
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < num_actions_; ++a) {
    double v = 0.0;
    for (const auto& head : model_.heads) v += distorted_q(head, state, a, beta);
    v /= static_cast<double>(model_.heads.size());
    if (v > best_v) {
      best_v = v;
      best = a;
    }
  }
  return best;
}

double Agent::eval_alpha(int state, std::optional<int> last_action) const {
  if (epistemic()) return alpha_bar(state, last_action);
  return mode_alpha();
}

void Agent::learn(const Transition& tr, std::mt19937_64& rng) {
  const Distortion beta = behavior_distortion();
  if (replay_) {
    replay_->push(tr);
    if (replay_->size() >= cfg_.replay_batch) {
      for (int b = 0; b < cfg_.replay_batch; ++b) {
        ensemble_update(model_, replay_->sample(rng), cfg_.gamma, cfg_.lr, beta,
                        cfg_.kappa, rng);
      }
    } else {
      ensemble_update(model_, tr, cfg_.gamma, cfg_.lr, beta, cfg_.kappa, rng);
    }
  } else {
    ensemble_update(model_, tr, cfg_.gamma, cfg_.lr, beta, cfg_.kappa, rng);
  }
}

void Agent::adapt(const Transition& tr, std::mt19937_64& rng) {
  switch (cfg_.adaptation) {
    case AdaptationMode::kComposite:
      // Snapshot refresh still runs; only the risk-level selection is skipped
      // (alpha stays frozen at 1).
      last_visited_ = {tr.state, tr.action};
      store_.update(tr.state, tr.action,
                    snapshot_from_model(tr.state, tr.action, rng));
      return;
    case AdaptationMode::kFtpl:
    case AdaptationMode::kRecursive: {
      const int pair = pair_index(tr.state, tr.action);
      last_visited_ = {tr.state, tr.action};
      EmpiricalDistribution x_next = snapshot_from_model(tr.state, tr.action, rng);
      if (cfg_.force_alpha) {
        // Selector stub: keep the snapshot flow, pin the decision, draw no
        // perturbation and track no losses.
        store_.update(tr.state, tr.action, std::move(x_next));
        alpha_[pair] = *cfg_.force_alpha;
        return;
      }
      const EmpiricalDistribution& x_prev = store_.get_or_init(
          tr.state, tr.action, [&] { return x_next; });
      if (cfg_.adaptation == AdaptationMode::kFtpl) {
        accumulate(trackers_[pair], risk_, x_prev, x_next, grid_);
        alpha_[pair] = ftpl_select(trackers_[pair], grid_, eta_, rng);
      } else {
        alpha_[pair] = recursive_select(risk_, x_prev, x_next, alpha_[pair], grid_);
      }
      store_.update(tr.state, tr.action, std::move(x_next));
      return;
    }
    case AdaptationMode::kArt: {
      // Feedback: change in right-truncated variance of the greedy return
      // distribution at the state just acted in.
      const Distortion beta = behavior_distortion();
      int a_g = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < num_actions_; ++a) {
        const double v = distorted_q(model_.heads[0], tr.state, a, beta);
        if (v > best) {
          best = v;
          a_g = a;
        }
      }
      const auto atoms = model_.heads[0].atoms(tr.state, a_g);
      const double r =
          rtv(make_empirical(std::vector<double>(atoms.begin(), atoms.end())));
      const double g = prev_rtv_ ? r - *prev_rtv_ : 0.0;
      ewaf_update(belief_, current_arm_, g, cfg_.eta_ewaf);
      prev_rtv_ = r;
      current_arm_ = belief_.sample(rng);
      return;
    }
    default:
      return;  // fixed / scheduled / top adapt elsewhere or not at all
  }
}

void Agent::begin_episode(int episode_index) {
  episode_ = episode_index;
  last_action_.reset();
}

StepOutcome Agent::act(EnvInterface& env, int state, std::mt19937_64& rng) {
  const double alpha_used =
      epistemic() ? alpha_bar(state, last_action_) : mode_alpha();
  const int action = select_action(state, rng);
  const StepResult sr = env.step(action);
  const Transition tr{state, action, sr.reward, sr.next_state, sr.done};
  learn(tr, rng);
  adapt(tr, rng);
  last_action_ = action;
  return {state, action, sr.next_state, sr.reward, alpha_used, sr.done};
}

void Agent::end_episode(double episode_return, std::mt19937_64& rng) {
  if (cfg_.adaptation != AdaptationMode::kTop) return;
  const double g = prev_return_ ? episode_return - *prev_return_ : 0.0;
  ewaf_update(belief_, current_arm_, g, cfg_.eta_ewaf);
  prev_return_ = episode_return;
  current_arm_ = belief_.sample(rng);
}

double Agent::alpha_at(int s, int a) const { return alpha_[pair_index(s, a)]; }

const LossTracker& Agent::tracker(int s, int a) const {
  if (cfg_.adaptation != AdaptationMode::kFtpl) {
    throw std::logic_error("trackers exist only in ftpl mode");
  }
  return trackers_[pair_index(s, a)];
}

double Agent::last_snapshot_ltv() const {
  if (!last_visited_) return 0.0;
  const EmpiricalDistribution* snap =
      store_.peek(last_visited_->first, last_visited_->second);
  return snap ? ltv(*snap) : 0.0;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  }
  void real(double v) { bytes(&v, sizeof(v)); }
  void integer(long long v) { bytes(&v, sizeof(v)); }
};

}  // namespace

std::uint64_t Agent::state_hash() const {
  Fnv1a f;
  for (const auto& head : model_.heads) {
    for (int s = 0; s < num_states_; ++s) {
      for (int a = 0; a < num_actions_; ++a) {
        for (double v : head.atoms(s, a)) f.real(v);
      }
    }
  }
  for (double v : alpha_) f.real(v);
  for (const auto& t : trackers_) {
    f.integer(t.steps_seen);
    for (double v : t.cumulative) f.real(v);
  }
  for (int s = 0; s < num_states_; ++s) {
    for (int a = 0; a < num_actions_; ++a) {
      const EmpiricalDistribution* snap = store_.peek(s, a);
      f.integer(snap ? 1 : 0);
      if (snap) {
        for (double v : snap->atoms()) f.real(v);
      }
    }
  }
  for (double v : belief_.weights) f.real(v);
  f.integer(last_action_ ? *last_action_ + 1 : 0);
  f.integer(last_visited_ ? pair_index(last_visited_->first, last_visited_->second) + 1 : 0);
  f.real(prev_rtv_.value_or(-1.0));
  f.real(prev_return_.value_or(-1.0));
  f.integer(current_arm_);
  f.integer(episode_);
  return f.h;
}

}  // namespace oralab
