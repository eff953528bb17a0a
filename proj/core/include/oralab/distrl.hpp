#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "oralab/empirical.hpp"

namespace oralab {

// Fixed quantile fractions q_i = (2i - 1) / (2N), i = 1..N (midpoint rule).
std::vector<double> quantile_fractions(int n);

struct HuberEval {
  double loss = 0.0;
  double grad = 0.0;  // d loss / d delta
};

// Quantile Huber loss h_q^kappa(delta) = |q - 1{delta < 0}| * L_kappa(delta) / kappa
// with L_kappa(delta) = delta^2 / 2 for |delta| <= kappa, else
// kappa * (|delta| - kappa / 2). Returns the loss and its analytic gradient
// in delta (zero at delta = 0).
HuberEval huber_quantile_loss(double delta, double q, double kappa);

// Quantile-sampling distortion beta: [0,1] -> [0,1].
using Distortion = std::function<double(double)>;

inline Distortion identity_distortion() {
  return [](double q) { return q; };
}
// Left-tail CVaR distortion on the return distribution: beta(q) = alpha * q.
inline Distortion cvar_distortion(double alpha) {
  return [alpha](double q) { return alpha * q; };
}

// Per-(state, action) table of N return-distribution atoms at the fixed
// quantile fractions. One table is one ensemble head.
class QuantileTable {
 public:
  QuantileTable(int num_states, int num_actions, int num_quantiles);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int num_quantiles() const { return num_quantiles_; }
  const std::vector<double>& fractions() const { return fractions_; }

  std::span<double> atoms(int s, int a);
  std::span<const double> atoms(int s, int a) const;

  // Independent uniform[lo, hi] initialization of every atom.
  void fill_uniform(double lo, double hi, std::mt19937_64& rng);

 private:
  int num_states_, num_actions_, num_quantiles_;
  std::vector<double> fractions_;
  std::vector<double> values_;
};

// Distorted expectation Q_beta(s, a) by exact enumeration over the fixed
// fractions: (1/N) * sum_i atom_at(beta(q_i)), where atom_at resolves
// beta(q) to the nearest fixed fraction, index round(beta(q) * N - 0.5)
// clamped to [0, N-1].
double distorted_q(const QuantileTable& table, int s, int a,
                   const Distortion& beta);

// Monte-Carlo variant averaging m draws q ~ U[0, 1].
double distorted_q(const QuantileTable& table, int s, int a,
                   const Distortion& beta, int m, std::mt19937_64& rng);

struct Transition {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
  bool done = false;
};

// One pairwise quantile-regression step on the visited pair:
// targets r + gamma * Z(s', a*) (or r alone when done), a* greedy under the
// exact distorted expectation from the same table; each atom moves along the
// analytic gradient of the mean quantile Huber loss, scaled by lr.
void td_update(QuantileTable& table, const Transition& tr, double gamma,
               double lr, const Distortion& beta, double kappa);

// Bootstrapped ensemble of K independently initialized heads.
struct EnsembleModel {
  std::vector<QuantileTable> heads;
  double p_mask = 0.5;  // per-head update probability per transition

  static EnsembleModel make(int num_heads, int num_states, int num_actions,
                            int num_quantiles, double p_mask, double init_lo,
                            double init_hi, std::mt19937_64& rng);
  static EnsembleModel from_seeds(const std::vector<std::uint64_t>& seeds,
                                  int num_states, int num_actions,
                                  int num_quantiles, double p_mask,
                                  double init_lo, double init_hi);
};

// Applies td_update to each head independently with probability p_mask
// (one Bernoulli draw per head per call).
void ensemble_update(EnsembleModel& model, const Transition& tr, double gamma,
                     double lr, const Distortion& beta, double kappa,
                     std::mt19937_64& rng);

// Per-head distorted expectations [Q^1(s,a), ..., Q^K(s,a)], exact mode.
std::vector<double> ensemble_q(const EnsembleModel& model, int s, int a,
                               const Distortion& beta);
// Monte-Carlo mode (m draws per head).
std::vector<double> ensemble_q(const EnsembleModel& model, int s, int a,
                               const Distortion& beta, int m,
                               std::mt19937_64& rng);

// Uniform mixture of point masses at the per-head values.
EmpiricalDistribution epistemic_dist(const std::vector<double>& q_values);

// Frozen per-(state, action) epistemic snapshots. A pair that has never been
// written is lazily initialized from the provided factory at first query and
// then frozen until the next explicit update (asynchronous refresh: updates
// touch exactly one pair).
class EpistemicStore {
 public:
  EpistemicStore(int num_states, int num_actions);

  bool initialized(int s, int a) const;
  const EmpiricalDistribution* peek(int s, int a) const;  // nullptr if absent
  const EmpiricalDistribution& get_or_init(
      int s, int a, const std::function<EmpiricalDistribution()>& make);
  void update(int s, int a, EmpiricalDistribution snapshot);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

 private:
  int index(int s, int a) const;
  int num_states_, num_actions_;
  std::vector<std::optional<EmpiricalDistribution>> snapshots_;
};

// Fixed-capacity uniform-replay ring buffer.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);
  void push(const Transition& tr);
  int size() const { return static_cast<int>(items_.size()); }
  const Transition& sample(std::mt19937_64& rng) const;

 private:
  int capacity_;
  int next_ = 0;
  std::vector<Transition> items_;
};

}  // namespace oralab
