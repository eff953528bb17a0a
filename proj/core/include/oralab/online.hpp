#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "oralab/risk.hpp"

namespace oralab {

// Uniform candidate grid over the risk-level interval, endpoints included.
// Consecutive gaps never exceed `epsilon`, so every admissible alpha lies
// within epsilon of a grid point (Hausdorff bound).
struct RiskGrid {
  std::vector<double> points;  // ascending, points.front()==alpha_min
  double epsilon = 0.0;        // guaranteed gap bound used to build the grid

  int size() const { return static_cast<int>(points.size()); }
  double operator[](int i) const { return points[i]; }
  // Index of the grid point closest to alpha (ties toward the larger point).
  int nearest_index(double alpha) const;
};

RiskGrid build_grid(double alpha_min, double alpha_max, double epsilon);

// Default discretization for a horizon of T decision periods:
// epsilon = max(0.01, 0.9 / sqrt(T)), widened if needed so the grid never
// exceeds 512 points.
double default_grid_epsilon(double alpha_min, double alpha_max, long long horizon);

// Default perturbation rate for a horizon of T decision periods: 1 / sqrt(T).
double default_ftpl_eta(long long horizon);

// Per-candidate cumulative adaptation losses for one tracked (state, action)
// pair, aligned with a RiskGrid.
struct LossTracker {
  std::vector<double> cumulative;
  long long steps_seen = 0;

  LossTracker() = default;
  explicit LossTracker(int grid_size) : cumulative(grid_size, 0.0) {}
  void add(const std::vector<double>& losses);
};

// Adaptation feedback at level alpha between consecutive epistemic snapshots:
//   l(alpha) = | rho_alpha(x_prev) - rho_alpha(x_next) |.
double loss_signal(const RiskMeasureSpec& spec, const EmpiricalDistribution& x_prev,
                   const EmpiricalDistribution& x_next, double alpha);

// loss_signal evaluated at every grid point.
std::vector<double> loss_profile(const RiskMeasureSpec& spec,
                                 const EmpiricalDistribution& x_prev,
                                 const EmpiricalDistribution& x_next,
                                 const RiskGrid& grid);

// Adds the loss profile of (x_prev, x_next) into the tracker.
void accumulate(LossTracker& tracker, const RiskMeasureSpec& spec,
                const EmpiricalDistribution& x_prev,
                const EmpiricalDistribution& x_next, const RiskGrid& grid);

// Follow-the-perturbed-leader with a fixed perturbation:
//   argmin_alpha { cumulative(alpha) - sigma * alpha },
// ties broken toward the largest alpha.
double ftpl_select_at(const LossTracker& tracker, const RiskGrid& grid,
                      double sigma);

// Draws sigma ~ Exp(rate eta) (density eta * exp(-eta * sigma), mean 1/eta)
// and delegates to ftpl_select_at.
double ftpl_select(const LossTracker& tracker, const RiskGrid& grid, double eta,
                   std::mt19937_64& rng);

// Recursive one-step loss l'(alpha, alpha_prev) =
//   | rho_alpha(x_prev) - rho_{alpha_prev}(x_next) |.
// Equals loss_signal when alpha_prev == alpha.
double recursive_loss(const RiskMeasureSpec& spec,
                      const EmpiricalDistribution& x_prev,
                      const EmpiricalDistribution& x_next, double alpha,
                      double alpha_prev);

// Minimizes the recursive loss in alpha. For the CVaR family this delegates
// to satisficing_search with target tau = cvar_right(x_next, alpha_prev);
// other families fall back to an exact grid argmin with largest-alpha
// tie-breaking. Result clamped to [alpha_min, alpha_max].
double recursive_select(const RiskMeasureSpec& spec,
                        const EmpiricalDistribution& x_prev,
                        const EmpiricalDistribution& x_next, double alpha_prev,
                        const RiskGrid& grid);

// Exact minimizer of the convex piecewise-linear satisficing objective
//   f(b) = (1/K) * sum_k (b * (q_k - tau) + 1)_+  over b >= 0,
// returned as clamp(min value, alpha_min, 1). O(K log K): breakpoint sort at
// b_k = 1/(tau - q_k) for q_k < tau plus a suffix-sum scan. When
// sum_k (q_k - tau) >= 0 the minimum sits at b = 0 with value 1.
double satisficing_search(std::span<const double> q_atoms, double tau,
                          double alpha_min);

struct SatisficingSolution {
  double b_star = 0.0;  // smallest minimizer among {0} and the breakpoints
  double value = 1.0;   // minimum objective value
};

// Reference solver: evaluates the objective directly (O(K) per candidate) at
// b = 0 and at every breakpoint, returning the exact minimum. Slow but
// independent of the scan above; used to certify satisficing_search.
SatisficingSolution satisficing_lp_oracle(std::span<const double> q_atoms,
                                          double tau);

// Exponentially weighted average forecaster over a finite arm set.
// Sampling probabilities are the softmax of the weights.
struct EwafBelief {
  std::vector<double> weights;
  std::vector<double> arms;  // arm descriptors (risk levels)
  double eta = 0.5;

  static EwafBelief uniform(std::vector<double> arms, double eta);
  std::vector<double> probabilities() const;
  int sample(std::mt19937_64& rng) const;
};

// Importance-weighted update of the chosen arm only:
//   w[chosen] += eta * feedback / p(chosen).
void ewaf_update(EwafBelief& belief, int chosen, double feedback, double eta);

// Realized-minus-hindsight-best cumulative loss:
//   R_T = sum_t loss_table[t][chosen_t] - min_j sum_t loss_table[t][j].
// loss_table rows align with grid points; chosen entries must be grid points.
// Throws std::invalid_argument on length mismatches.
double regret(const std::vector<std::vector<double>>& loss_table,
              const std::vector<double>& chosen, const RiskGrid& grid);

}  // namespace oralab
