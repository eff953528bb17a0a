#pragma once

#include <utility>
#include <vector>

#include "oralab/empirical.hpp"

namespace oralab {

enum class RiskFamily { kCvarRight, kQuantileRight, kTabulatedDistortion };

// Describes a one-parameter family of distortion risk measures together with
// the admissible risk-level interval [alpha_min, alpha_max] (0 < alpha_min <=
// alpha_max <= 1). Tabulated families carry a distortion function g as control
// points (u, g(u)) with g(0)=0, g(1)=1, u and g nondecreasing; g is evaluated
// by linear interpolation.
struct RiskMeasureSpec {
  RiskFamily family = RiskFamily::kCvarRight;
  double alpha_min = 0.1;
  double alpha_max = 1.0;
  std::vector<std::pair<double, double>> table;

  static RiskMeasureSpec cvar(double alpha_min, double alpha_max);
  static RiskMeasureSpec quantile(double alpha_min, double alpha_max);
  static RiskMeasureSpec tabulated(std::vector<std::pair<double, double>> table,
                                   double alpha_min, double alpha_max);
  void validate() const;  // throws std::invalid_argument
};

// Distortion expectation over the K equally weighted atoms sorted descending,
//   sum_i [g(i/K) - g((i-1)/K)] * x_(i),
// where g depends on the family:
//   kCvarRight:           g_alpha(u) = min{u / alpha, 1}
//   kQuantileRight:       unit step placed in the grid cell of the
//                         left-continuous (1-alpha)-quantile (matches var_right)
//   kTabulatedDistortion: interpolated table (alpha ignored by g)
// alpha must lie in [alpha_min, alpha_max].
double distorted_value(const EmpiricalDistribution& dist,
                       const RiskMeasureSpec& spec, double alpha);

// Direct evaluation of the measure named by spec.family at level alpha:
// cvar_right / var_right closed forms for the parametric families, the
// distortion sum for tabulated ones. Agrees with distorted_value on the
// parametric families; used as the cheap evaluation path rho_alpha(X).
double risk_value(const RiskMeasureSpec& spec, const EmpiricalDistribution& dist,
                  double alpha);

}  // namespace oralab
