#include "oralab/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oralab {

RiskMeasureSpec RiskMeasureSpec::cvar(double alpha_min, double alpha_max) {
  RiskMeasureSpec s{RiskFamily::kCvarRight, alpha_min, alpha_max, {}};
  s.validate();
  return s;
}

RiskMeasureSpec RiskMeasureSpec::quantile(double alpha_min, double alpha_max) {
  RiskMeasureSpec s{RiskFamily::kQuantileRight, alpha_min, alpha_max, {}};
  s.validate();
  return s;
}

RiskMeasureSpec RiskMeasureSpec::tabulated(
    std::vector<std::pair<double, double>> table, double alpha_min,
    double alpha_max) {
  RiskMeasureSpec s{RiskFamily::kTabulatedDistortion, alpha_min, alpha_max,
                    std::move(table)};
  s.validate();
  return s;
}

void RiskMeasureSpec::validate() const {
  if (!(alpha_min > 0.0) || alpha_min > alpha_max || alpha_max > 1.0) {
    throw std::invalid_argument(
        "risk spec requires 0 < alpha_min <= alpha_max <= 1");
  }
  if (family == RiskFamily::kTabulatedDistortion) {
    if (table.size() < 2 || table.front().first != 0.0 ||
        table.front().second != 0.0 || table.back().first != 1.0 ||
        table.back().second != 1.0) {
      throw std::invalid_argument(
          "distortion table must run from (0,0) to (1,1)");
    }
    for (std::size_t i = 1; i < table.size(); ++i) {
      if (table[i].first < table[i - 1].first ||
          table[i].second < table[i - 1].second) {
        throw std::invalid_argument("distortion table must be nondecreasing");
      }
    }
  } else if (!table.empty()) {
    throw std::invalid_argument("only tabulated families carry a table");
  }
}

static void check_alpha_in(const RiskMeasureSpec& spec, double alpha) {
  if (alpha < spec.alpha_min || alpha > spec.alpha_max) {
    throw std::invalid_argument("alpha outside [alpha_min, alpha_max]");
  }
}

static double interp_table(const std::vector<std::pair<double, double>>& table,
                           double u) {
  if (u <= table.front().first) return table.front().second;
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (u <= table[i].first) {
      const auto [u0, g0] = table[i - 1];
      const auto [u1, g1] = table[i];
      if (u1 == u0) return g1;
      return g0 + (g1 - g0) * (u - u0) / (u1 - u0);
    }
  }
  return table.back().second;
}

// 1-based index of the left-continuous p-quantile among k sorted atoms:
// the smallest i with i/k >= p (i = 1 when p <= 0). Index comparisons are
// done in double precision so every caller picks the same atom.
static int left_quantile_index(int k, double p) {
  if (p <= 0.0) return 1;
  for (int i = 1; i <= k; ++i) {
    if (static_cast<double>(i) / k >= p) return i;
  }
  return k;
}

double distorted_value(const EmpiricalDistribution& dist,
                       const RiskMeasureSpec& spec, double alpha) {
  check_alpha_in(spec, alpha);
  const auto& x = dist.atoms();
  const int k = dist.count();
  double acc = 0.0;
  switch (spec.family) {
    case RiskFamily::kCvarRight: {
      double g_prev = 0.0;
      for (int i = 1; i <= k; ++i) {
        const double g = std::min(static_cast<double>(i) / k / alpha, 1.0);
        acc += (g - g_prev) * x[k - i];  // i-th largest atom
        g_prev = g;
      }
      return acc;
    }
    case RiskFamily::kQuantileRight: {
      // Step distortion whose jump lies in the cell of the left-continuous
      // (1-alpha)-quantile: all weight on that atom.
      const int li = left_quantile_index(k, 1.0 - alpha);   // ascending, 1-based
      const double u_star = static_cast<double>(k + 1 - li) / k;
      double g_prev = 0.0;
      for (int i = 1; i <= k; ++i) {
        const double g = (static_cast<double>(i) / k >= u_star) ? 1.0 : 0.0;
        acc += (g - g_prev) * x[k - i];
        g_prev = g;
      }
      return acc;
    }
    case RiskFamily::kTabulatedDistortion: {
      double g_prev = 0.0;
      for (int i = 1; i <= k; ++i) {
        const double g = interp_table(spec.table, static_cast<double>(i) / k);
        acc += (g - g_prev) * x[k - i];
        g_prev = g;
      }
      return acc;
    }
  }
  throw std::logic_error("unreachable risk family");
}

double risk_value(const RiskMeasureSpec& spec, const EmpiricalDistribution& dist,
                  double alpha) {
  check_alpha_in(spec, alpha);
  switch (spec.family) {
    case RiskFamily::kCvarRight:
      return cvar_right(dist, alpha);
    case RiskFamily::kQuantileRight:
      return var_right(dist, alpha);
    case RiskFamily::kTabulatedDistortion:
      return distorted_value(dist, spec, alpha);
  }
  throw std::logic_error("unreachable risk family");
}

}  // namespace oralab
