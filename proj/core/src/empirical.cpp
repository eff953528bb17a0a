#include "oralab/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oralab {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> sorted_atoms)
    : atoms_(std::move(sorted_atoms)) {}

EmpiricalDistribution EmpiricalDistribution::from_values(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("empirical distribution needs at least one atom");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("empirical distribution atoms must be finite");
    }
  }
  std::sort(values.begin(), values.end());
  return EmpiricalDistribution(std::move(values));
}

double EmpiricalDistribution::mean() const {
  return std::accumulate(atoms_.begin(), atoms_.end(), 0.0) / count();
}

EmpiricalDistribution make_empirical(std::vector<double> values) {
  return EmpiricalDistribution::from_values(std::move(values));
}

static void check_alpha(double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw std::invalid_argument("risk level alpha must lie in (0, 1]");
  }
}

double cvar_right(const EmpiricalDistribution& dist, double alpha) {
  check_alpha(alpha);
  const auto& x = dist.atoms();
  const int k = dist.count();
  // Tail mass measured in atom units; atom i (ascending) overlaps the top
  // interval (k-1-i, k-i], so its weight is the clipped overlap with [0, mass].
  const double mass = alpha * k;
  // A tail inside the top atom averages to that atom; computing (mass * x) /
  // mass instead would wobble by an ulp and break exact monotonicity in alpha.
  if (mass <= 1.0) return x.back();
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    const double overlap = mass - static_cast<double>(k - 1 - i);
    if (overlap <= 0.0) continue;
    acc += std::min(overlap, 1.0) * x[i];
  }
  return acc / mass;
}

double var_right(const EmpiricalDistribution& dist, double alpha) {
  check_alpha(alpha);
  const auto& x = dist.atoms();
  const int k = dist.count();
  const double p = 1.0 - alpha;
  if (p <= 0.0) return x.front();
  for (int i = 1; i <= k; ++i) {
    if (static_cast<double>(i) / k >= p) return x[i - 1];
  }
  return x.back();
}

// Duplicates the median atom of odd-sized atom lists so the half-sums below
// are well defined.
static std::vector<double> atoms_even(const EmpiricalDistribution& dist) {
  std::vector<double> x = dist.atoms();
  if (x.size() % 2 != 0) {
    const std::size_t mid = x.size() / 2;
    x.insert(x.begin() + mid, x[mid]);
  }
  return x;
}

double rtv(const EmpiricalDistribution& dist) {
  const std::vector<double> x = atoms_even(dist);
  const int k = static_cast<int>(x.size());
  const int m = k / 2;
  const double ref = x[m - 1];
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    const double d = x[i] - ref;
    acc += d * d;
  }
  return 2.0 * acc / k;
}

double ltv(const EmpiricalDistribution& dist) {
  const std::vector<double> x = atoms_even(dist);
  const int k = static_cast<int>(x.size());
  const int m = k / 2;
  const double ref = x[m];
  double acc = 0.0;
  for (int i = k - 1; i >= m; --i) {
    const double d = x[i] - ref;
    acc += d * d;
  }
  return 2.0 * acc / k;
}

}  // namespace oralab
