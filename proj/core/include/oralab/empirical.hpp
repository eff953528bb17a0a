#pragma once

#include <vector>

namespace oralab {

// Finite real-valued distribution with K equally weighted atoms, kept sorted
// ascending. Duplicates are retained (multiplicity = probability mass).
class EmpiricalDistribution {
 public:
  static EmpiricalDistribution from_values(std::vector<double> values);

  const std::vector<double>& atoms() const { return atoms_; }
  int count() const { return static_cast<int>(atoms_.size()); }
  double min() const { return atoms_.front(); }
  double max() const { return atoms_.back(); }
  double mean() const;

 private:
  explicit EmpiricalDistribution(std::vector<double> sorted_atoms);
  std::vector<double> atoms_;
};

// Builds a distribution from an unsorted, non-empty list of finite values.
// Throws std::invalid_argument on an empty list or non-finite entries.
EmpiricalDistribution make_empirical(std::vector<double> values);

// Right-tail conditional value at risk at level alpha in (0, 1]:
// the mean of the upper alpha-fraction of probability mass, with the boundary
// atom weighted fractionally. cvar_right(X, 1) is the mean.
double cvar_right(const EmpiricalDistribution& dist, double alpha);

// Right-tail value at risk: the left-continuous inverse CDF at 1 - alpha,
// F^-1(p) = inf{x : F(x) >= p} with F^-1(0) = smallest atom. alpha in (0, 1].
double var_right(const EmpiricalDistribution& dist, double alpha);

// Right-truncated variance: dispersion of the lower half of the quantile
// function about the lower median,
//   rtv(X) = (2/K) * sum_{i=1..K/2} (x_i - x_{K/2})^2
// for sorted atoms x_1 <= ... <= x_K. Odd atom counts duplicate the median
// atom first. Nonnegative; zero iff the lower half is constant.
double rtv(const EmpiricalDistribution& dist);

// Left-truncated variance: the mirror image of rtv over the upper half,
//   ltv(X) = (2/K) * sum_{i=K/2+1..K} (x_i - x_{K/2+1})^2,
// so that ltv(X) == rtv(-X) identically.
double ltv(const EmpiricalDistribution& dist);

}  // namespace oralab
