#include "doctest.h"

#include <random>
#include <stdexcept>
#include <vector>

#include "oralab/empirical.hpp"
#include "oralab/risk.hpp"

using oralab::EmpiricalDistribution;
using oralab::RiskFamily;
using oralab::RiskMeasureSpec;
using oralab::cvar_right;
using oralab::distorted_value;
using oralab::make_empirical;
using oralab::risk_value;
using oralab::var_right;

namespace {

std::vector<double> random_values(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = u(rng);
  return v;
}

RiskMeasureSpec identity_table() {
  return RiskMeasureSpec::tabulated({{0.0, 0.0}, {1.0, 1.0}}, 0.1, 1.0);
}

}  // namespace

TEST_SUITE("risk") {

TEST_CASE("spec validation") {
  CHECK_NOTHROW(RiskMeasureSpec::cvar(0.1, 1.0).validate());
  CHECK_NOTHROW(RiskMeasureSpec::quantile(0.2, 0.8).validate());
  CHECK_NOTHROW(identity_table().validate());

  CHECK_THROWS_AS(RiskMeasureSpec::cvar(0.0, 1.0).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(RiskMeasureSpec::cvar(0.5, 0.1).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(RiskMeasureSpec::cvar(0.5, 1.5).validate(),
                  std::invalid_argument);
  // Table must start at (0,0), end at (1,1), and be nondecreasing.
  CHECK_THROWS_AS(
      RiskMeasureSpec::tabulated({{0.1, 0.0}, {1.0, 1.0}}, 0.1, 1.0).validate(),
      std::invalid_argument);
  CHECK_THROWS_AS(
      RiskMeasureSpec::tabulated({{0.0, 0.0}, {1.0, 0.9}}, 0.1, 1.0).validate(),
      std::invalid_argument);
  CHECK_THROWS_AS(
      RiskMeasureSpec::tabulated({{0.0, 0.0}, {0.5, 0.8}, {1.0, 0.6}}, 0.1, 1.0)
          .validate(),
      std::invalid_argument);
  // Parametric families must not carry a table; tabulated ones must.
  RiskMeasureSpec stray = RiskMeasureSpec::cvar(0.1, 1.0);
  stray.table = {{0.0, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(stray.validate(), std::invalid_argument);
  RiskMeasureSpec bare;
  bare.family = RiskFamily::kTabulatedDistortion;
  CHECK_THROWS_AS(bare.validate(), std::invalid_argument);
}

TEST_CASE("identity distortion is the mean") {
  const auto d = make_empirical({1.0, 2.0, 3.0, 4.0});
  CHECK(distorted_value(d, identity_table(), 0.5) == 2.5);
}

TEST_CASE("distortion with the cvar kink matches cvar_right") {
  const auto spec = RiskMeasureSpec::cvar(0.1, 1.0);
  const auto d = make_empirical({1.0, 2.0, 3.0, 4.0});
  CHECK(distorted_value(d, spec, 0.5) == doctest::Approx(3.5).epsilon(1e-15));

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ua(0.1, 1.0);
  for (int t = 0; t < 200; ++t) {
    const auto dist = make_empirical(random_values(rng, 1 + t % 16));
    const double alpha = ua(rng);
    const double lhs = distorted_value(dist, spec, alpha);
    const double rhs = cvar_right(dist, alpha);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
  }
}

TEST_CASE("degenerate distribution is a fixed point of every distortion") {
  const auto d = make_empirical({7.0, 7.0, 7.0});
  CHECK(distorted_value(d, RiskMeasureSpec::cvar(0.1, 1.0), 0.37) ==
        doctest::Approx(7.0).epsilon(1e-15));
  CHECK(distorted_value(d, RiskMeasureSpec::quantile(0.1, 1.0), 0.37) ==
        doctest::Approx(7.0).epsilon(1e-15));
  CHECK(distorted_value(d, identity_table(), 0.5) ==
        doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("quantile family reproduces var_right exactly") {
  std::mt19937_64 rng(29);
  const auto spec = RiskMeasureSpec::quantile(0.05, 1.0);
  std::uniform_real_distribution<double> ua(0.05, 1.0);
  for (int t = 0; t < 300; ++t) {
    const auto dist = make_empirical(random_values(rng, 1 + t % 9));
    const double alpha = ua(rng);
    CHECK(distorted_value(dist, spec, alpha) == var_right(dist, alpha));
  }
}

TEST_CASE("alpha bounds are enforced") {
  const auto spec = RiskMeasureSpec::cvar(0.2, 0.8);
  const auto d = make_empirical({1.0, 2.0});
  CHECK_THROWS_AS(distorted_value(d, spec, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(distorted_value(d, spec, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(risk_value(spec, d, 0.1), std::invalid_argument);
  CHECK_NOTHROW(distorted_value(d, spec, 0.2));
  CHECK_NOTHROW(distorted_value(d, spec, 0.8));
}

TEST_CASE("risk_value dispatches to the closed forms") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ua(0.1, 1.0);
  const auto cvar_spec = RiskMeasureSpec::cvar(0.1, 1.0);
  const auto q_spec = RiskMeasureSpec::quantile(0.1, 1.0);
  const auto tab = identity_table();
  for (int t = 0; t < 100; ++t) {
    const auto d = make_empirical(random_values(rng, 1 + t % 12));
    const double alpha = ua(rng);
    CHECK(risk_value(cvar_spec, d, alpha) == cvar_right(d, alpha));
    CHECK(risk_value(q_spec, d, alpha) == var_right(d, alpha));
    CHECK(risk_value(tab, d, alpha) == distorted_value(d, tab, alpha));
  }
}

TEST_CASE("piecewise-linear tables bend the weighting") {
  // g concentrates 80% of the weight on the top half of the mass.
  const auto spec = RiskMeasureSpec::tabulated(
      {{0.0, 0.0}, {0.5, 0.8}, {1.0, 1.0}}, 0.1, 1.0);
  const auto d = make_empirical({0.0, 10.0});
  // Descending atoms: 10 gets g(1/2)-g(0)=0.8, 0 gets g(1)-g(1/2)=0.2.
  CHECK(distorted_value(d, spec, 0.5) == doctest::Approx(8.0).epsilon(1e-15));
}

}  // TEST_SUITE
