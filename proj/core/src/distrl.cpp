#include "oralab/distrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oralab {

std::vector<double> quantile_fractions(int n) {
  if (n < 1) throw std::invalid_argument("need at least one quantile fraction");
  std::vector<double> q(n);
  for (int i = 1; i <= n; ++i) q[i - 1] = (2.0 * i - 1.0) / (2.0 * n);
  return q;
}

HuberEval huber_quantile_loss(double delta, double q, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(q > 0.0) || q >= 1.0) throw std::invalid_argument("q must lie in (0, 1)");
  const double weight = std::abs(q - (delta < 0.0 ? 1.0 : 0.0));
  const double ad = std::abs(delta);
  HuberEval out;
  if (ad <= kappa) {
    out.loss = weight * (delta * delta / 2.0) / kappa;
    out.grad = weight * delta / kappa;
  } else {
    out.loss = weight * (ad - kappa / 2.0);
    out.grad = weight * (delta > 0.0 ? 1.0 : -1.0);
  }
  return out;
}

QuantileTable::QuantileTable(int num_states, int num_actions, int num_quantiles)
    : num_states_(num_states),
      num_actions_(num_actions),
      num_quantiles_(num_quantiles),
      fractions_(quantile_fractions(num_quantiles)),
      values_(static_cast<std::size_t>(num_states) * num_actions * num_quantiles,
              0.0) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("table needs at least one state and action");
  }
}

std::span<double> QuantileTable::atoms(int s, int a) {
  const std::size_t base =
      (static_cast<std::size_t>(s) * num_actions_ + a) * num_quantiles_;
  return {values_.data() + base, static_cast<std::size_t>(num_quantiles_)};
}

std::span<const double> QuantileTable::atoms(int s, int a) const {
  const std::size_t base =
      (static_cast<std::size_t>(s) * num_actions_ + a) * num_quantiles_;
  return {values_.data() + base, static_cast<std::size_t>(num_quantiles_)};
}

void QuantileTable::fill_uniform(double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : values_) v = u(rng);
}

// Nearest fixed fraction to the distorted level: round(b * n - 0.5) clamped.
static int fraction_index(double b, int n) {
  const int i = static_cast<int>(std::llround(b * n - 0.5));
  return std::clamp(i, 0, n - 1);
}

double distorted_q(const QuantileTable& table, int s, int a,
                   const Distortion& beta) {
  const auto z = table.atoms(s, a);
  const auto& fr = table.fractions();
  const int n = table.num_quantiles();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += z[fraction_index(beta(fr[i]), n)];
  return acc / n;
}

double distorted_q(const QuantileTable& table, int s, int a,
                   const Distortion& beta, int m, std::mt19937_64& rng) {
  if (m < 1) throw std::invalid_argument("sample count must be positive");
  const auto z = table.atoms(s, a);
  const int n = table.num_quantiles();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double acc = 0.0;
  for (int j = 0; j < m; ++j) acc += z[fraction_index(beta(u(rng)), n)];
  return acc / m;
}

void td_update(QuantileTable& table, const Transition& tr, double gamma,
               double lr, const Distortion& beta, double kappa) {
  const int n = table.num_quantiles();
  std::vector<double> target(n);
  if (tr.done) {
    target.assign(n, tr.reward);
  } else {
    int a_star = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < table.num_actions(); ++a) {
      const double v = distorted_q(table, tr.next_state, a, beta);
      if (v > best) {
        best = v;
        a_star = a;
      }
    }
    const auto next = table.atoms(tr.next_state, a_star);
    for (int j = 0; j < n; ++j) target[j] = tr.reward + gamma * next[j];
  }
  const auto z = table.atoms(tr.state, tr.action);
  const auto& fr = table.fractions();
  for (int i = 0; i < n; ++i) {
    double grad = 0.0;
    for (int j = 0; j < n; ++j) {
      grad += huber_quantile_loss(target[j] - z[i], fr[i], kappa).grad;
    }
    z[i] += lr * grad / n;
  }
}

EnsembleModel EnsembleModel::make(int num_heads, int num_states, int num_actions,
                                  int num_quantiles, double p_mask,
                                  double init_lo, double init_hi,
                                  std::mt19937_64& rng) {
  std::vector<std::uint64_t> seeds(num_heads);
  for (auto& s : seeds) s = rng();
  return from_seeds(seeds, num_states, num_actions, num_quantiles, p_mask,
                    init_lo, init_hi);
}

EnsembleModel EnsembleModel::from_seeds(const std::vector<std::uint64_t>& seeds,
                                        int num_states, int num_actions,
                                        int num_quantiles, double p_mask,
                                        double init_lo, double init_hi) {
  if (seeds.empty()) throw std::invalid_argument("ensemble needs >= 1 head");
  if (p_mask < 0.0 || p_mask > 1.0) {
    throw std::invalid_argument("p_mask must lie in [0, 1]");
  }
  EnsembleModel model;
  model.p_mask = p_mask;
  model.heads.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    QuantileTable head(num_states, num_actions, num_quantiles);
    std::mt19937_64 head_rng(seed);
    head.fill_uniform(init_lo, init_hi, head_rng);
    model.heads.push_back(std::move(head));
  }
  return model;
}

void ensemble_update(EnsembleModel& model, const Transition& tr, double gamma,
                     double lr, const Distortion& beta, double kappa,
                     std::mt19937_64& rng) {
  std::bernoulli_distribution mask(model.p_mask);
  for (auto& head : model.heads) {
    if (mask(rng)) td_update(head, tr, gamma, lr, beta, kappa);
  }
}

std::vector<double> ensemble_q(const EnsembleModel& model, int s, int a,
                               const Distortion& beta) {
  std::vector<double> q(model.heads.size());
  for (std::size_t k = 0; k < model.heads.size(); ++k) {
    q[k] = distorted_q(model.heads[k], s, a, beta);
  }
  return q;
}

std::vector<double> ensemble_q(const EnsembleModel& model, int s, int a,
                               const Distortion& beta, int m,
                               std::mt19937_64& rng) {
  std::vector<double> q(model.heads.size());
  for (std::size_t k = 0; k < model.heads.size(); ++k) {
    q[k] = distorted_q(model.heads[k], s, a, beta, m, rng);
  }
  return q;
}

EmpiricalDistribution epistemic_dist(const std::vector<double>& q_values) {
  return make_empirical(q_values);
}

EpistemicStore::EpistemicStore(int num_states, int num_actions)
    : num_states_(num_states),
      num_actions_(num_actions),
      snapshots_(static_cast<std::size_t>(num_states) * num_actions) {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("store needs at least one state and action");
  }
}

int EpistemicStore::index(int s, int a) const {
  if (s < 0 || s >= num_states_ || a < 0 || a >= num_actions_) {
    throw std::out_of_range("state-action pair out of range");
  }
  return s * num_actions_ + a;
}

bool EpistemicStore::initialized(int s, int a) const {
  return snapshots_[index(s, a)].has_value();
}

const EmpiricalDistribution* EpistemicStore::peek(int s, int a) const {
  const auto& slot = snapshots_[index(s, a)];
  return slot ? &*slot : nullptr;
}

const EmpiricalDistribution& EpistemicStore::get_or_init(
    int s, int a, const std::function<EmpiricalDistribution()>& make) {
  auto& slot = snapshots_[index(s, a)];
  if (!slot) slot = make();
  return *slot;
}

void EpistemicStore::update(int s, int a, EmpiricalDistribution snapshot) {
  snapshots_[index(s, a)] = std::move(snapshot);
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("replay capacity must be >= 1");
  items_.reserve(capacity);
}

void ReplayBuffer::push(const Transition& tr) {
  if (size() < capacity_) {
    items_.push_back(tr);
  } else {
    items_[next_] = tr;
    next_ = (next_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::sample(std::mt19937_64& rng) const {
  if (items_.empty()) throw std::logic_error("cannot sample an empty buffer");
  std::uniform_int_distribution<int> pick(0, size() - 1);
  return items_[pick(rng)];
}

}  // namespace oralab
