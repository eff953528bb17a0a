#include "oralab/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oralab {

int RiskGrid::nearest_index(double alpha) const {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) {
    const double d = std::abs(points[i] - alpha);
    if (d <= best_dist) {  // <= so ties favor the larger point
      best_dist = d;
      best = i;
    }
  }
  return best;
}

RiskGrid build_grid(double alpha_min, double alpha_max, double epsilon) {
  if (!(alpha_min > 0.0) || alpha_min > alpha_max || alpha_max > 1.0) {
    throw std::invalid_argument("grid requires 0 < alpha_min <= alpha_max <= 1");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("grid epsilon must be positive");
  }
  RiskGrid grid;
  grid.epsilon = epsilon;
  const double span = alpha_max - alpha_min;
  if (span == 0.0) {
    grid.points = {alpha_min};
    return grid;
  }
  // Small slack keeps exact divisions (e.g. 0.9 / 0.01) from rounding up.
  const int segments = std::max(1, static_cast<int>(std::ceil(span / epsilon - 1e-9)));
  grid.points.resize(segments + 1);
  for (int i = 0; i <= segments; ++i) {
    grid.points[i] = alpha_min + span * i / segments;
  }
  grid.points.front() = alpha_min;
  grid.points.back() = alpha_max;
  return grid;
}

double default_grid_epsilon(double alpha_min, double alpha_max, long long horizon) {
  const double t = static_cast<double>(std::max<long long>(horizon, 1));
  double eps = std::max(0.01, 0.9 / std::sqrt(t));
  const double span = alpha_max - alpha_min;
  if (span > 0.0) eps = std::max(eps, span / 511.0);  // cap at 512 points
  return eps;
}

double default_ftpl_eta(long long horizon) {
  return 1.0 / std::sqrt(static_cast<double>(std::max<long long>(horizon, 1)));
}

void LossTracker::add(const std::vector<double>& losses) {
  if (losses.size() != cumulative.size()) {
    throw std::invalid_argument("loss vector does not match tracker size");
  }
  for (std::size_t i = 0; i < losses.size(); ++i) cumulative[i] += losses[i];
  ++steps_seen;
}

double loss_signal(const RiskMeasureSpec& spec, const EmpiricalDistribution& x_prev,
                   const EmpiricalDistribution& x_next, double alpha) {
  return std::abs(risk_value(spec, x_prev, alpha) - risk_value(spec, x_next, alpha));
}

std::vector<double> loss_profile(const RiskMeasureSpec& spec,
                                 const EmpiricalDistribution& x_prev,
                                 const EmpiricalDistribution& x_next,
                                 const RiskGrid& grid) {
  std::vector<double> out(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    out[i] = loss_signal(spec, x_prev, x_next, grid[i]);
  }
  return out;
}

void accumulate(LossTracker& tracker, const RiskMeasureSpec& spec,
                const EmpiricalDistribution& x_prev,
                const EmpiricalDistribution& x_next, const RiskGrid& grid) {
  tracker.add(loss_profile(spec, x_prev, x_next, grid));
}

double ftpl_select_at(const LossTracker& tracker, const RiskGrid& grid,
                      double sigma) {
  if (tracker.cumulative.size() != static_cast<std::size_t>(grid.size())) {
    throw std::invalid_argument("tracker does not match grid size");
  }
  int best = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.size(); ++i) {
    const double obj = tracker.cumulative[i] - sigma * grid[i];
    if (obj <= best_obj) {  // <= so ties favor the largest alpha
      best_obj = obj;
      best = i;
    }
  }
  return grid[best];
}

double ftpl_select(const LossTracker& tracker, const RiskGrid& grid, double eta,
                   std::mt19937_64& rng) {
  if (!(eta > 0.0)) throw std::invalid_argument("ftpl eta must be positive");
  std::exponential_distribution<double> exp_dist(eta);
  return ftpl_select_at(tracker, grid, exp_dist(rng));
}

double recursive_loss(const RiskMeasureSpec& spec,
                      const EmpiricalDistribution& x_prev,
                      const EmpiricalDistribution& x_next, double alpha,
                      double alpha_prev) {
  return std::abs(risk_value(spec, x_prev, alpha) -
                  risk_value(spec, x_next, alpha_prev));
}

double recursive_select(const RiskMeasureSpec& spec,
                        const EmpiricalDistribution& x_prev,
                        const EmpiricalDistribution& x_next, double alpha_prev,
                        const RiskGrid& grid) {
  if (spec.family == RiskFamily::kCvarRight) {
    const double tau = cvar_right(x_next, alpha_prev);
    const double a = satisficing_search(x_prev.atoms(), tau, spec.alpha_min);
    return std::min(a, spec.alpha_max);
  }
  int best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.size(); ++i) {
    const double l = recursive_loss(spec, x_prev, x_next, grid[i], alpha_prev);
    if (l <= best_loss) {  // <= so ties favor the largest alpha
      best_loss = l;
      best = i;
    }
  }
  return grid[best];
}

namespace {

double clamp_alpha(double value, double alpha_min) {
  return std::min(std::max(value, alpha_min), 1.0);
}

}  // namespace

double satisficing_search(std::span<const double> q_atoms, double tau,
                          double alpha_min) {
  if (q_atoms.empty()) {
    throw std::invalid_argument("satisficing search needs at least one atom");
  }
  const int k = static_cast<int>(q_atoms.size());
  double slope_sum = 0.0;       // sum of all slopes q_k - tau
  double pos_slope = 0.0;       // slopes of terms active for every b >= 0
  int pos_count = 0;
  std::vector<double> breakpoints;  // b where a negative-slope term hits zero
  std::vector<double> neg_slopes;   // matching slopes, paired by index
  breakpoints.reserve(q_atoms.size());
  neg_slopes.reserve(q_atoms.size());
  for (double q : q_atoms) {
    const double s = q - tau;
    slope_sum += s;
    if (s < 0.0) {
      breakpoints.push_back(1.0 / (tau - q));
      neg_slopes.push_back(s);
    } else {
      pos_slope += s;
      ++pos_count;
    }
  }
  if (slope_sum >= 0.0) return clamp_alpha(1.0, alpha_min);  // minimum at b=0

  // Sort breakpoints ascending, carrying slopes along.
  std::vector<int> order(breakpoints.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return breakpoints[a] < breakpoints[b];
  });

  // Suffix sums over still-active negative-slope terms: at b = breakpoint j,
  // terms 0..j (sorted) have reached zero, terms j+1.. are still positive.
  const int nb = static_cast<int>(order.size());
  std::vector<double> suffix_slope(nb + 1, 0.0);
  for (int j = nb - 1; j >= 0; --j) {
    suffix_slope[j] = suffix_slope[j + 1] + neg_slopes[order[j]];
  }

  double best = 1.0;  // f(0)
  for (int j = 0; j < nb; ++j) {
    const double b = breakpoints[order[j]];
    const double active_count = pos_count + (nb - 1 - j);
    const double value =
        (b * (pos_slope + suffix_slope[j + 1]) + active_count) / k;
    best = std::min(best, value);
    // Convexity: once the slope past this breakpoint is nonnegative the
    // objective can only grow.
    if (pos_slope + suffix_slope[j + 1] >= 0.0) break;
  }
  return clamp_alpha(best, alpha_min);
}

SatisficingSolution satisficing_lp_oracle(std::span<const double> q_atoms,
                                          double tau) {
  if (q_atoms.empty()) {
    throw std::invalid_argument("satisficing oracle needs at least one atom");
  }
  const auto objective = [&](double b) {
    double acc = 0.0;
    for (double q : q_atoms) acc += std::max(b * (q - tau) + 1.0, 0.0);
    return acc / static_cast<double>(q_atoms.size());
  };
  std::vector<double> candidates{0.0};
  for (double q : q_atoms) {
    if (q < tau) candidates.push_back(1.0 / (tau - q));
  }
  std::sort(candidates.begin(), candidates.end());
  SatisficingSolution best{0.0, objective(0.0)};
  for (double b : candidates) {
    const double v = objective(b);
    if (v < best.value) best = {b, v};
  }
  return best;
}

EwafBelief EwafBelief::uniform(std::vector<double> arms, double eta) {
  if (arms.empty()) throw std::invalid_argument("belief needs at least one arm");
  if (!(eta > 0.0)) throw std::invalid_argument("belief eta must be positive");
  EwafBelief b;
  b.weights.assign(arms.size(), 0.0);
  b.arms = std::move(arms);
  b.eta = eta;
  return b;
}

std::vector<double> EwafBelief::probabilities() const {
  const double w_max = *std::max_element(weights.begin(), weights.end());
  std::vector<double> p(weights.size());
  double z = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    p[i] = std::exp(weights[i] - w_max);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

int EwafBelief::sample(std::mt19937_64& rng) const {
  const std::vector<double> p = probabilities();
  std::discrete_distribution<int> dist(p.begin(), p.end());
  return dist(rng);
}

void ewaf_update(EwafBelief& belief, int chosen, double feedback, double eta) {
  if (chosen < 0 || chosen >= static_cast<int>(belief.weights.size())) {
    throw std::out_of_range("chosen arm out of range");
  }
  const double p = belief.probabilities()[chosen];
  belief.weights[chosen] += eta * feedback / p;
}

double regret(const std::vector<std::vector<double>>& loss_table,
              const std::vector<double>& chosen, const RiskGrid& grid) {
  if (loss_table.size() != chosen.size()) {
    throw std::invalid_argument("loss table and chosen sequence lengths differ");
  }
  const int g = grid.size();
  std::vector<double> totals(g, 0.0);
  double realized = 0.0;
  for (std::size_t t = 0; t < loss_table.size(); ++t) {
    if (static_cast<int>(loss_table[t].size()) != g) {
      throw std::invalid_argument("loss table row does not match grid size");
    }
    for (int j = 0; j < g; ++j) totals[j] += loss_table[t][j];
    realized += loss_table[t][grid.nearest_index(chosen[t])];
  }
  const double best = *std::min_element(totals.begin(), totals.end());
  return realized - best;
}

}  // namespace oralab
