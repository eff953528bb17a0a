#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "oralab/online.hpp"

using oralab::EwafBelief;
using oralab::LossTracker;
using oralab::RiskGrid;
using oralab::RiskMeasureSpec;
using oralab::accumulate;
using oralab::build_grid;
using oralab::cvar_right;
using oralab::default_ftpl_eta;
using oralab::default_grid_epsilon;
using oralab::ewaf_update;
using oralab::ftpl_select;
using oralab::ftpl_select_at;
using oralab::loss_profile;
using oralab::loss_signal;
using oralab::make_empirical;
using oralab::recursive_loss;
using oralab::recursive_select;
using oralab::regret;
using oralab::satisficing_lp_oracle;
using oralab::satisficing_search;

namespace {

std::vector<double> random_values(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_SUITE("online") {

TEST_CASE("build_grid covers the interval with bounded gaps") {
  const RiskGrid g = build_grid(0.1, 1.0, 0.1);
  REQUIRE(g.size() == 10);
  CHECK(g.points.front() == 0.1);
  CHECK(g.points.back() == 1.0);
  for (int i = 0; i + 1 < g.size(); ++i) {
    CHECK(g[i + 1] - g[i] <= 0.1 + 1e-12);
    CHECK(g[i] < g[i + 1]);
  }

  const RiskGrid degenerate = build_grid(0.5, 0.5, 0.25);
  REQUIRE(degenerate.size() == 1);
  CHECK(degenerate[0] == 0.5);

  CHECK_THROWS_AS(build_grid(0.0, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0.5, 0.4, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(0.1, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("default horizon discretization") {
  // 0.9 / sqrt(8100) = 0.01, the floor value.
  CHECK(default_grid_epsilon(0.1, 1.0, 8100) == doctest::Approx(0.01));
  CHECK(build_grid(0.1, 1.0, default_grid_epsilon(0.1, 1.0, 8100)).size() == 91);
  // Short horizons get a coarse grid.
  CHECK(default_grid_epsilon(0.1, 1.0, 4) == doctest::Approx(0.45));
  // The grid size stays bounded regardless of the horizon.
  for (long long t : {1LL, 100LL, 100000LL, 4000000000LL}) {
    const double eps = default_grid_epsilon(0.1, 1.0, t);
    CHECK(build_grid(0.1, 1.0, eps).size() <= 512);
  }
  CHECK(default_ftpl_eta(10000) == doctest::Approx(0.01));
  CHECK(default_ftpl_eta(0) == 1.0);  // degenerate horizons clamp to one step
}

TEST_CASE("nearest_index rounds to the closest point, ties upward") {
  const RiskGrid g = build_grid(0.1, 1.0, 0.1);
  CHECK(g.nearest_index(0.1) == 0);
  CHECK(g.nearest_index(1.0) == 9);
  CHECK(g.nearest_index(0.149) == 0);
  CHECK(g.nearest_index(0.151) == 1);
  CHECK(g.nearest_index(2.0) == 9);
  CHECK(g.nearest_index(-1.0) == 0);
  // Exactly representable midpoint: the tie goes to the larger point.
  const RiskGrid exact = build_grid(0.25, 0.75, 0.25);
  REQUIRE(exact.points == std::vector<double>{0.25, 0.5, 0.75});
  CHECK(exact.nearest_index(0.375) == 1);
  CHECK(exact.nearest_index(0.625) == 2);
}

TEST_CASE("loss tracker accumulates profiles") {
  LossTracker tr(3);
  CHECK(tr.steps_seen == 0);
  tr.add({1.0, 2.0, 3.0});
  tr.add({0.5, 0.5, 0.5});
  CHECK(tr.cumulative == std::vector<double>{1.5, 2.5, 3.5});
  CHECK(tr.steps_seen == 2);
  CHECK_THROWS_AS(tr.add({1.0}), std::invalid_argument);
}

TEST_CASE("loss_signal examples") {
  const auto spec = RiskMeasureSpec::cvar(0.1, 1.0);
  const auto a = make_empirical({1.0, 2.0, 3.0, 4.0});
  CHECK(loss_signal(spec, a, a, 0.3) == 0.0);
  CHECK(loss_signal(spec, make_empirical({0.0}), make_empirical({1.0}), 0.5) ==
        1.0);
  const auto b = make_empirical({2.0, 2.0, 4.0, 4.0});
  // cvar_0.5: a -> 3.5, b -> 4.0.
  CHECK(loss_signal(spec, a, b, 0.5) == 0.5);

  const RiskGrid g = build_grid(0.1, 1.0, 0.3);
  const auto prof = loss_profile(spec, a, b, g);
  REQUIRE(static_cast<int>(prof.size()) == g.size());
  for (int i = 0; i < g.size(); ++i) {
    CHECK(prof[i] == loss_signal(spec, a, b, g[i]));
  }

  LossTracker tr(g.size());
  accumulate(tr, spec, a, b, g);
  CHECK(tr.cumulative == prof);
}

TEST_CASE("ftpl_select_at minimizes the perturbed cumulative loss") {
  const RiskGrid g = build_grid(0.1, 1.0, 0.1);
  LossTracker tr(g.size());

  // No losses yet: any positive perturbation favors the largest alpha.
  CHECK(ftpl_select_at(tr, g, 0.7) == 1.0);
  // Zero perturbation with all-zero losses ties everywhere; ties go up.
  CHECK(ftpl_select_at(tr, g, 0.0) == 1.0);

  // Cumulative loss l(alpha) = alpha with a small perturbation: the linear
  // term dominates and the smallest alpha wins.
  std::vector<double> linear(g.points.begin(), g.points.end());
  tr.add(linear);
  CHECK(ftpl_select_at(tr, g, 0.5) == 0.1);

  // A large perturbation flips the preference to the largest alpha.
  CHECK(ftpl_select_at(tr, g, 2.0) == 1.0);

  const RiskGrid single = build_grid(0.4, 0.4, 0.1);
  LossTracker one(single.size());
  CHECK(ftpl_select_at(one, single, 0.123) == 0.4);
}

TEST_CASE("ftpl_select is deterministic under a seeded generator") {
  const RiskGrid g = build_grid(0.1, 1.0, 0.05);
  LossTracker tr(g.size());
  std::mt19937_64 rng_a(99), rng_b(99);
  for (int t = 0; t < 50; ++t) {
    const double a = ftpl_select(tr, g, 0.3, rng_a);
    const double b = ftpl_select(tr, g, 0.3, rng_b);
    CHECK(a == b);
    CHECK(std::find(g.points.begin(), g.points.end(), a) != g.points.end());
  }
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(ftpl_select(tr, g, 0.0, rng), std::invalid_argument);
}

TEST_CASE("recursive loss collapses to the one-step signal on the diagonal") {
  const auto spec = RiskMeasureSpec::cvar(0.1, 1.0);
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> ua(0.1, 1.0);
  for (int t = 0; t < 100; ++t) {
    const auto x0 = make_empirical(random_values(rng, 1 + t % 7));
    const auto x1 = make_empirical(random_values(rng, 1 + (t + 3) % 7));
    const double alpha = ua(rng);
    CHECK(recursive_loss(spec, x0, x1, alpha, alpha) ==
          loss_signal(spec, x0, x1, alpha));
  }
}

TEST_CASE("recursive_select is self-consistent on an unchanged snapshot") {
  const auto spec = RiskMeasureSpec::cvar(0.1, 1.0);
  const RiskGrid g = build_grid(0.1, 1.0, 0.1);
  const auto x = make_empirical({1.0, 2.0, 3.0, 4.0});
  CHECK(recursive_select(spec, x, x, 0.5, g) == 0.5);
  CHECK(recursive_select(spec, x, x, 1.0, g) == 1.0);
}

TEST_CASE("recursive_select on the cvar family hits the satisficing level") {
  const auto spec = RiskMeasureSpec::cvar(0.1, 1.0);
  const RiskGrid g = build_grid(0.1, 1.0, 0.1);
  // Target tau = cvar of a degenerate next snapshot at 1; x_prev = {2,3}.
  const auto x_prev = make_empirical({2.0, 3.0});
  const auto x_next = make_empirical({1.0});
  CHECK(recursive_select(spec, x_prev, x_next, 0.5, g) == 1.0);
}

TEST_CASE("recursive_select on the quantile family scans the grid") {
  const auto spec = RiskMeasureSpec::quantile(0.1, 1.0);
  const RiskGrid g = build_grid(0.1, 1.0, 0.1);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> ua(0.1, 1.0);
  for (int t = 0; t < 50; ++t) {
    const auto x0 = make_empirical(random_values(rng, 1 + t % 6));
    const auto x1 = make_empirical(random_values(rng, 1 + (t + 2) % 6));
    const double alpha_prev = g[static_cast<int>(rng() % g.size())];
    const double got = recursive_select(spec, x0, x1, alpha_prev, g);
    // Independent exhaustive scan with the same tie rule (ties go up).
    double best = g[0];
    double best_loss = recursive_loss(spec, x0, x1, g[0], alpha_prev);
    for (int i = 1; i < g.size(); ++i) {
      const double li = recursive_loss(spec, x0, x1, g[i], alpha_prev);
      if (li <= best_loss) {
        best_loss = li;
        best = g[i];
      }
    }
    CHECK(got == best);
    (void)ua;
  }
}

TEST_CASE("satisficing_search closed-form examples") {
  {
    const std::vector<double> q{2.0, 3.0};
    CHECK(satisficing_search(q, 1.0, 0.1) == 1.0);
  }
  {
    const std::vector<double> q{0.0, 0.0};
    CHECK(satisficing_search(q, 1.0, 0.1) == 0.1);  // clamped from 0
  }
  {
    const std::vector<double> q{0.0, 1.5};
    CHECK(satisficing_search(q, 1.0, 0.1) == doctest::Approx(0.75).epsilon(1e-12));
  }
  CHECK_THROWS_AS(satisficing_search(std::vector<double>{}, 0.0, 0.1),
                  std::invalid_argument);
}

TEST_CASE("satisficing_lp_oracle examples") {
  {
    const std::vector<double> q{2.0, 3.0};
    const auto sol = satisficing_lp_oracle(q, 1.0);
    CHECK(sol.b_star == 0.0);
    CHECK(sol.value == 1.0);
  }
  {
    const std::vector<double> q{0.0, 1.5};
    const auto sol = satisficing_lp_oracle(q, 1.0);
    CHECK(sol.b_star == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.value == doctest::Approx(0.75).epsilon(1e-12));
  }
  {
    const std::vector<double> q{0.0, 0.0};
    const auto sol = satisficing_lp_oracle(q, 1.0);
    CHECK(sol.value == 0.0);
  }
}

TEST_CASE("satisficing_search agrees with the oracle on random instances") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int t = 0; t < 200; ++t) {
    const int k = 1 + static_cast<int>(rng() % 16);
    std::vector<double> q(static_cast<std::size_t>(k));
    for (double& x : q) x = u(rng);
    const double tau = u(rng);
    const double expected =
        std::clamp(satisficing_lp_oracle(q, tau).value, 0.1, 1.0);
    CHECK(satisficing_search(q, tau, 0.1) ==
          doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("ewaf belief updates and probabilities") {
  auto belief = EwafBelief::uniform({0.1, 0.5, 1.0}, 0.5);
  REQUIRE(belief.weights == std::vector<double>{0.0, 0.0, 0.0});
  const auto p0 = belief.probabilities();
  for (double p : p0) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // Zero feedback leaves the belief untouched.
  ewaf_update(belief, 1, 0.0, 0.5);
  CHECK(belief.weights == std::vector<double>{0.0, 0.0, 0.0});

  // Positive feedback on arm 1 raises its weight by eta * g / p.
  ewaf_update(belief, 1, 1.0, 0.5);
  CHECK(belief.weights[1] == doctest::Approx(0.5 * 1.0 / (1.0 / 3.0)));
  const auto p1 = belief.probabilities();
  CHECK(p1[1] > p1[0]);
  CHECK(p1[0] == p1[2]);
  CHECK(p1[0] + p1[1] + p1[2] == doctest::Approx(1.0).epsilon(1e-12));

  // Repeated positive feedback keeps raising the chosen arm's probability.
  double prev = p1[1];
  for (int t = 0; t < 5; ++t) {
    ewaf_update(belief, 1, 1.0, 0.5);
    const double cur = belief.probabilities()[1];
    CHECK(cur > prev);
    prev = cur;
  }

  CHECK_THROWS_AS(EwafBelief::uniform({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(EwafBelief::uniform({0.5}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ewaf_update(belief, 7, 1.0, 0.5), std::out_of_range);
}

TEST_CASE("ewaf sampling follows the probabilities") {
  auto belief = EwafBelief::uniform({0.1, 1.0}, 0.5);
  belief.weights = {0.0, 50.0};  // arm 1 has essentially all the mass
  std::mt19937_64 rng(47);
  for (int t = 0; t < 100; ++t) CHECK(belief.sample(rng) == 1);

  // Two identically seeded generators sample identically.
  auto fair = EwafBelief::uniform({0.1, 1.0}, 0.5);
  std::mt19937_64 a(7), b(7);
  for (int t = 0; t < 50; ++t) CHECK(fair.sample(a) == fair.sample(b));
}

TEST_CASE("regret definition and properties") {
  const RiskGrid g = build_grid(0.1, 1.0, 0.3);  // 4 points
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // Playing the hindsight-best arm every step gives zero regret.
  std::vector<std::vector<double>> table(20,
                                         std::vector<double>(g.size(), 0.0));
  std::vector<double> totals(static_cast<std::size_t>(g.size()), 0.0);
  for (auto& row : table) {
    for (int j = 0; j < g.size(); ++j) {
      row[static_cast<std::size_t>(j)] = u(rng);
      totals[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j)];
    }
  }
  const int best =
      static_cast<int>(std::min_element(totals.begin(), totals.end()) -
                       totals.begin());
  const std::vector<double> best_play(table.size(), g[best]);
  CHECK(regret(table, best_play, g) == 0.0);

  // Any play sequence has nonnegative regret that matches a direct recompute.
  std::vector<double> chosen;
  double realized = 0.0;
  for (std::size_t t = 0; t < table.size(); ++t) {
    const int j = static_cast<int>(rng() % g.size());
    chosen.push_back(g[j]);
    realized += table[t][static_cast<std::size_t>(j)];
  }
  const double expected = realized - totals[static_cast<std::size_t>(best)];
  const double got = regret(table, chosen, g);
  CHECK(got >= 0.0);
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));

  // Length and width mismatches are rejected.
  CHECK_THROWS_AS(regret(table, std::vector<double>{0.1}, g),
                  std::invalid_argument);
  std::vector<std::vector<double>> ragged = table;
  ragged[3].pop_back();
  CHECK_THROWS_AS(regret(ragged, chosen, g), std::invalid_argument);
}

}  // TEST_SUITE
