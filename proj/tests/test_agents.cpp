#include "doctest.h"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "oralab/agent.hpp"
#include "oralab/env.hpp"

using oralab::AdaptationMode;
using oralab::Agent;
using oralab::AgentConfig;
using oralab::ChainEnv;
using oralab::EnvInterface;
using oralab::StepOutcome;
using oralab::StepResult;
using oralab::adaptation_name;
using oralab::cvar_distortion;
using oralab::distorted_q;
using oralab::make_empirical;
using oralab::parse_adaptation;
using oralab::rtv;
using oralab::scheduled_alpha;

namespace {

// One-state bandit with per-action rewards and single-step episodes.
class BanditEnv : public EnvInterface {
 public:
  explicit BanditEnv(std::vector<double> rewards) : rewards_(std::move(rewards)) {}
  int num_states() const override { return 1; }
  int num_actions() const override { return static_cast<int>(rewards_.size()); }
  int reset() override {
    done_ = false;
    return 0;
  }
  StepResult step(int action) override {
    if (done_) throw std::logic_error("step() after episode end");
    done_ = true;
    return {0, rewards_[static_cast<std::size_t>(action)], true};
  }
  long long episode_length_hint() const override { return 1; }

 private:
  std::vector<double> rewards_;
  bool done_ = true;
};

AgentConfig epistemic_config() {
  AgentConfig cfg;
  cfg.adaptation = AdaptationMode::kFtpl;
  cfg.epsilon_greedy = 0.0;
  cfg.num_heads = 4;
  cfg.num_quantiles = 4;
  cfg.lr = 0.5;
  cfg.gamma = 0.9;
  cfg.init_lo = 0.0;
  cfg.init_hi = 0.0;
  return cfg;
}

double run_training(Agent& agent, EnvInterface& env, int episodes,
                    std::mt19937_64& rng) {
  double last_return = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    agent.begin_episode(ep);
    int state = env.reset();
    bool done = false;
    double total = 0.0;
    while (!done) {
      const StepOutcome out = agent.act(env, state, rng);
      total += out.reward;
      state = out.next_state;
      done = out.done;
    }
    agent.end_episode(total, rng);
    last_return = total;
  }
  return last_return;
}

}  // namespace

TEST_SUITE("agents") {

TEST_CASE("adaptation names round-trip") {
  for (const char* name :
       {"ftpl", "recursive", "fixed", "scheduled", "art", "top", "composite"}) {
    CHECK(adaptation_name(parse_adaptation(name)) == name);
  }
  CHECK_THROWS_AS(parse_adaptation("bogus"), std::invalid_argument);
}

TEST_CASE("scheduled_alpha interpolates and clamps") {
  const std::vector<std::pair<int, double>> wp{{0, 0.1}, {100, 0.9}, {200, 0.1}};
  CHECK(scheduled_alpha(0, wp) == 0.1);
  CHECK(scheduled_alpha(50, wp) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(scheduled_alpha(100, wp) == 0.9);
  CHECK(scheduled_alpha(150, wp) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(scheduled_alpha(300, wp) == 0.1);
  CHECK(scheduled_alpha(-5, wp) == 0.1);
  CHECK_THROWS_AS(scheduled_alpha(0, {}), std::invalid_argument);
}

TEST_CASE("config normalization fills defaults and validates") {
  AgentConfig cfg;
  cfg.adaptation = AdaptationMode::kArt;
  const AgentConfig norm = cfg.normalized();
  CHECK(norm.label == "art");
  CHECK(norm.arms == std::vector<double>{0.1, 1.0});

  AgentConfig top;
  top.adaptation = AdaptationMode::kTop;
  CHECK(top.normalized().arms.size() == 5);

  AgentConfig comp;
  comp.adaptation = AdaptationMode::kComposite;
  comp.alpha_max = 0.7;
  CHECK(comp.normalized().alpha_max == 1.0);  // pinned to risk-neutral

  AgentConfig bad;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = AgentConfig{};
  bad.num_heads = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = AgentConfig{};
  bad.alpha_min = 0.9;
  bad.alpha_max = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = AgentConfig{};
  bad.fixed_alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = AgentConfig{};
  bad.adaptation = AdaptationMode::kScheduled;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // needs waypoints
  bad.waypoints = {{0, 0.5}, {0, 0.6}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // not increasing
  bad = AgentConfig{};
  bad.force_alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("epistemic selection prefers the action with higher head values") {
  // Two actions, deterministic rewards 1 vs 0: after training, the snapshot
  // of action 0 dominates and stays selected.
  BanditEnv env({1.0, 0.0});
  Agent agent(epistemic_config(), env.num_states(), env.num_actions(), 1, 7);
  std::mt19937_64 rng(7);
  run_training(agent, env, 60, rng);
  CHECK(agent.greedy_action(0, std::nullopt) == 0);

  // Mirror image: the better arm is action 1. Ties break toward action 0, so
  // some exploration is needed before action 1's value is ever learned.
  BanditEnv flipped({0.0, 1.0});
  AgentConfig exploring = epistemic_config();
  exploring.epsilon_greedy = 0.3;
  Agent mirrored(exploring, flipped.num_states(), flipped.num_actions(), 1, 7);
  std::mt19937_64 rng2(7);
  run_training(mirrored, flipped, 60, rng2);
  CHECK(mirrored.greedy_action(0, std::nullopt) == 1);
}

TEST_CASE("identical snapshots tie toward the lowest action index") {
  AgentConfig cfg = epistemic_config();
  cfg.lr = 0.0;  // snapshots never move, so all actions stay tied
  BanditEnv env({1.0, 1.0});
  Agent agent(cfg, 1, 2, 1, 3);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    CHECK(agent.select_action(0, rng) == 0);
  }
}

TEST_CASE("full exploration is uniform over actions") {
  AgentConfig cfg = epistemic_config();
  cfg.epsilon_greedy = 1.0;
  Agent agent(cfg, 1, 4, 1, 11);
  std::mt19937_64 rng(2024);
  std::array<int, 4> counts{};
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    ++counts[static_cast<std::size_t>(agent.select_action(0, rng))];
  }
  double chi2 = 0.0;
  for (int c : counts) {
    const double expected = draws / 4.0;
    chi2 += (c - expected) * (c - expected) / expected;
  }
  CHECK(chi2 < 11.345);  // chi-square 1% critical value, 3 dof
}

TEST_CASE("only visited pairs accumulate losses or move their risk level") {
  BanditEnv env({1.0, 0.0});
  Agent agent(epistemic_config(), 1, 2, 1, 13);
  std::mt19937_64 rng(13);
  run_training(agent, env, 50, rng);

  CHECK(agent.tracker(0, 0).steps_seen == 50);
  CHECK(agent.tracker(0, 1).steps_seen == 0);
  CHECK(agent.alpha_at(0, 1) == 1.0);  // untouched pairs keep alpha_max
  CHECK(agent.store().initialized(0, 0));
}

TEST_CASE("a frozen model yields zero adaptation loss") {
  AgentConfig cfg = epistemic_config();
  cfg.lr = 0.0;
  BanditEnv env({1.0, 0.0});
  Agent agent(cfg, 1, 2, 1, 17);
  std::mt19937_64 rng(17);
  run_training(agent, env, 30, rng);
  const auto& tr = agent.tracker(0, 0);
  CHECK(tr.steps_seen == 30);
  for (double c : tr.cumulative) CHECK(c == 0.0);
}

TEST_CASE("evaluation paths never mutate the agent") {
  BanditEnv env({1.0, 0.0});
  Agent agent(epistemic_config(), 1, 2, 1, 19);
  std::mt19937_64 rng(19);
  run_training(agent, env, 20, rng);

  const std::uint64_t before = agent.state_hash();
  for (int t = 0; t < 5; ++t) {
    (void)agent.greedy_action(0, std::nullopt);
    (void)agent.greedy_action(0, 1);
    (void)agent.eval_alpha(0, std::nullopt);
    (void)agent.eval_alpha(0, 0);
  }
  CHECK(agent.state_hash() == before);

  // Greedy play is deterministic: two evaluation passes agree action by action.
  ChainEnv chain(5, 1.0);
  Agent walker(epistemic_config(), chain.num_states(), chain.num_actions(), 5,
               23);
  for (int pass = 0; pass < 2; ++pass) {
    int state = chain.reset();
    std::optional<int> last;
    bool done = false;
    std::vector<int> actions;
    while (!done) {
      const int a = walker.greedy_action(state, last);
      const StepResult sr = chain.step(a);
      actions.push_back(a);
      last = a;
      state = sr.next_state;
      done = sr.done;
    }
    CHECK(actions == std::vector<int>{0, 0, 0, 0, 0});
  }
}

TEST_CASE("training seeds reproduce trajectories and hashes exactly") {
  auto run_once = [](std::uint64_t seed) {
    BanditEnv env({1.0, 0.5});
    AgentConfig cfg = epistemic_config();
    cfg.epsilon_greedy = 0.2;
    Agent agent(cfg, 1, 2, 1, seed);
    std::mt19937_64 rng(seed);
    std::vector<StepOutcome> outs;
    for (int ep = 0; ep < 40; ++ep) {
      agent.begin_episode(ep);
      int state = env.reset();
      bool done = false;
      while (!done) {
        const StepOutcome o = agent.act(env, state, rng);
        outs.push_back(o);
        state = o.next_state;
        done = o.done;
      }
      agent.end_episode(outs.back().reward, rng);
    }
    return std::pair{outs, agent.state_hash()};
  };
  const auto a = run_once(5);
  const auto b = run_once(5);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  const auto c = run_once(6);
  CHECK(a.second != c.second);
}

TEST_CASE("fixed-alpha baselines act greedily on the distorted return") {
  AgentConfig cfg;
  cfg.adaptation = AdaptationMode::kFixed;
  cfg.fixed_alpha = 1.0;
  cfg.epsilon_greedy = 0.3;
  cfg.num_heads = 3;
  cfg.num_quantiles = 4;
  cfg.lr = 0.5;
  cfg.init_lo = 0.0;
  cfg.init_hi = 0.0;
  BanditEnv env({0.0, 1.0});
  Agent agent(cfg, 1, 2, 1, 29);
  std::mt19937_64 rng(29);
  run_training(agent, env, 80, rng);
  CHECK(agent.greedy_action(0, std::nullopt) == 1);
  CHECK(agent.eval_alpha(0, std::nullopt) == 1.0);
  CHECK(agent.epistemic() == false);
}

TEST_CASE("scheduled baselines follow the waypoint alpha per episode") {
  AgentConfig cfg;
  cfg.adaptation = AdaptationMode::kScheduled;
  cfg.waypoints = {{0, 0.1}, {100, 0.9}, {200, 0.1}};
  Agent agent(cfg, 1, 2, 100, 31);
  agent.begin_episode(50);
  CHECK(agent.eval_alpha(0, std::nullopt) == doctest::Approx(0.5));
  agent.begin_episode(0);
  CHECK(agent.eval_alpha(0, std::nullopt) == 0.1);
  agent.begin_episode(300);
  CHECK(agent.eval_alpha(0, std::nullopt) == 0.1);
}

TEST_CASE("per-step forecaster feedback follows the rtv differences") {
  AgentConfig cfg;
  cfg.adaptation = AdaptationMode::kArt;
  cfg.arms = {0.5};  // single arm: p = 1, so w += eta * g exactly
  cfg.eta_ewaf = 0.5;
  cfg.epsilon_greedy = 0.2;
  cfg.num_heads = 3;
  cfg.num_quantiles = 4;
  cfg.lr = 0.3;
  cfg.init_lo = 0.0;
  cfg.init_hi = 1.0;
  BanditEnv env({1.0, 0.0});
  Agent agent(cfg, 1, 2, 1, 37);
  std::mt19937_64 rng(37);

  double expected_w = 0.0;
  std::optional<double> prev_rtv;
  for (int ep = 0; ep < 25; ++ep) {
    agent.begin_episode(ep);
    int state = env.reset();
    agent.act(env, state, rng);
    agent.end_episode(0.0, rng);

    // Mirror the feedback: rtv of head 0's greedy return distribution at the
    // acted state, differenced against the previous step.
    const auto& head = agent.model().heads[0];
    int a_g = 0;
    double best = -1e300;
    for (int a = 0; a < 2; ++a) {
      const double v = distorted_q(head, 0, a, cvar_distortion(0.5));
      if (v > best) {
        best = v;
        a_g = a;
      }
    }
    const auto span = head.atoms(0, a_g);
    const double r =
        rtv(make_empirical(std::vector<double>(span.begin(), span.end())));
    const double g = prev_rtv ? r - *prev_rtv : 0.0;
    expected_w += 0.5 * g;
    prev_rtv = r;
    CHECK(agent.belief().weights[0] == expected_w);
  }
}

TEST_CASE("per-episode forecaster feedback follows the return differences") {
  AgentConfig cfg;
  cfg.adaptation = AdaptationMode::kTop;
  cfg.arms = {0.5};
  cfg.eta_ewaf = 0.5;
  cfg.epsilon_greedy = 0.5;
  cfg.num_heads = 2;
  cfg.num_quantiles = 2;
  cfg.lr = 0.2;
  BanditEnv env({1.0, 0.0});
  Agent agent(cfg, 1, 2, 1, 41);
  std::mt19937_64 rng(41);

  double expected_w = 0.0;
  std::optional<double> prev_return;
  for (int ep = 0; ep < 30; ++ep) {
    agent.begin_episode(ep);
    int state = env.reset();
    const StepOutcome out = agent.act(env, state, rng);
    agent.end_episode(out.reward, rng);
    const double g = prev_return ? out.reward - *prev_return : 0.0;
    expected_w += 0.5 * g;
    prev_return = out.reward;
    CHECK(agent.belief().weights[0] == expected_w);
  }
}

TEST_CASE("equal returns leave the per-episode forecaster uniform") {
  AgentConfig cfg;
  cfg.adaptation = AdaptationMode::kTop;
  cfg.epsilon_greedy = 0.0;
  cfg.num_heads = 2;
  cfg.num_quantiles = 2;
  cfg.lr = 0.1;
  ChainEnv env(3, 1.0);
  Agent agent(cfg, env.num_states(), env.num_actions(),
              env.episode_length_hint(), 43);
  std::mt19937_64 rng(43);
  run_training(agent, env, 10, rng);
  const auto probs = agent.belief().probabilities();
  REQUIRE(probs.size() == 5);
  for (double p : probs) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("risk-neutral epistemic selection matches the stubbed selector") {
  // Same seed, same environment: an agent with the online selector replaced
  // by the constant 1 must reproduce the risk-neutral ensemble agent's trace.
  auto make_cfg = [](bool stubbed) {
    AgentConfig cfg;
    cfg.adaptation =
        stubbed ? AdaptationMode::kFtpl : AdaptationMode::kComposite;
    if (stubbed) cfg.force_alpha = 1.0;
    cfg.epsilon_greedy = 0.1;
    cfg.num_heads = 5;
    cfg.num_quantiles = 4;
    cfg.lr = 0.2;
    cfg.gamma = 0.9;
    return cfg;
  };
  auto trace = [&](const AgentConfig& cfg) {
    ChainEnv env(5, 1.0);
    Agent agent(cfg, env.num_states(), env.num_actions(),
                env.episode_length_hint(), 77);
    std::mt19937_64 rng(77);
    std::vector<StepOutcome> outs;
    for (int ep = 0; ep < 4; ++ep) {
      agent.begin_episode(ep);
      int state = env.reset();
      bool done = false;
      while (!done) {
        const StepOutcome o = agent.act(env, state, rng);
        outs.push_back(o);
        state = o.next_state;
        done = o.done;
      }
      agent.end_episode(1.0, rng);
    }
    return outs;
  };
  const auto composite = trace(make_cfg(false));
  const auto stub = trace(make_cfg(true));
  REQUIRE(composite.size() == 20);
  CHECK(composite == stub);
  for (const auto& o : composite) CHECK(o.alpha == 1.0);
}

TEST_CASE("state hash tracks learning progress") {
  BanditEnv env({1.0, 0.0});
  Agent agent(epistemic_config(), 1, 2, 1, 47);
  std::mt19937_64 rng(47);
  const std::uint64_t before = agent.state_hash();
  run_training(agent, env, 3, rng);
  CHECK(agent.state_hash() != before);
}

TEST_CASE("replay buffering still learns the bandit") {
  AgentConfig cfg = epistemic_config();
  cfg.replay_capacity = 64;
  cfg.replay_batch = 8;
  cfg.epsilon_greedy = 0.2;
  BanditEnv env({1.0, 0.0});
  Agent agent(cfg, 1, 2, 1, 53);
  std::mt19937_64 rng(53);
  run_training(agent, env, 100, rng);
  CHECK(agent.greedy_action(0, std::nullopt) == 0);
}

}  // TEST_SUITE
