#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "conex/random.hpp"
#include "conex/tabular_mdp.hpp"

namespace conex::testing {

inline std::vector<double> random_simplex(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  double total = 0.0;
  for (auto& x : v) total += (x = rng.exponential());
  for (auto& x : v) x /= total;
  return v;
}

/// Random stochastic policy; roughly one row in four is a point mass.
inline StochasticPolicy random_policy(const Shape& shape, Rng& rng) {
  std::vector<double> probs;
  probs.reserve(shape.horizon * shape.states * shape.actions);
  for (std::size_t i = 0; i < shape.horizon * shape.states; ++i) {
    if (rng.below(4) == 0) {
      const std::size_t pick = rng.below(shape.actions);
      for (std::size_t a = 0; a < shape.actions; ++a) probs.push_back(a == pick ? 1.0 : 0.0);
    } else {
      const auto row = random_simplex(shape.actions, rng);
      probs.insert(probs.end(), row.begin(), row.end());
    }
  }
  return StochasticPolicy(shape, std::move(probs));
}

inline Shape random_small_shape(Rng& rng, std::size_t max_s = 3, std::size_t max_a = 2,
                                std::size_t max_h = 3) {
  return {1 + rng.below(max_s), 1 + rng.below(max_a), 1 + rng.below(max_h)};
}

/// Policy equal to `base` except at step `h`, where rows are redrawn.
inline StochasticPolicy differ_at_step(const StochasticPolicy& base, std::size_t h, Rng& rng) {
  const Shape& sh = base.shape();
  std::vector<double> probs = base.probs();
  for (std::size_t s = 0; s < sh.states; ++s) {
    const auto row = random_simplex(sh.actions, rng);
    for (std::size_t a = 0; a < sh.actions; ++a) probs[(h * sh.states + s) * sh.actions + a] = row[a];
  }
  return StochasticPolicy(sh, std::move(probs));
}

namespace detail {

inline void enumerate(const TabularMdp& mdp, const StochasticPolicy& pi, std::size_t h,
                      std::size_t s, double prob, double reward, double& total) {
  const Shape& sh = mdp.shape();
  if (h == sh.horizon) {
    total += prob * reward;
    return;
  }
  for (std::size_t a = 0; a < sh.actions; ++a) {
    const double pa = pi(h, s, a);
    if (pa == 0.0) continue;
    const auto row = mdp.transition_row(h, s, a);
    for (std::size_t sp = 0; sp < sh.states; ++sp) {
      if (row[sp] == 0.0) continue;
      enumerate(mdp, pi, h + 1, sp, prob * pa * row[sp], reward + mdp.reward(h, s, a), total);
    }
  }
}

}  // namespace detail

/// Expected return by summing over every (a_1, s_2, ..., a_H, s_{H+1}) path.
inline double brute_force_value(const TabularMdp& mdp, const StochasticPolicy& pi) {
  double total = 0.0;
  detail::enumerate(mdp, pi, 0, mdp.start_state(), 1.0, 0.0, total);
  return total;
}

inline double two_pass_variance(std::span<const double> p, std::span<const double> v) {
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mean += p[i] * v[i];
  double var = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) var += p[i] * (v[i] - mean) * (v[i] - mean);
  return var;
}

/// MDP with every transition a point mass on `next[h][s][a]` and the given rewards.
inline TabularMdp deterministic_mdp(const Shape& sh, const std::vector<std::size_t>& next,
                                    std::vector<double> rewards, std::size_t start = 0) {
  std::vector<double> p(sh.horizon * sh.state_actions() * sh.states, 0.0);
  for (std::size_t i = 0; i < sh.horizon * sh.state_actions(); ++i) p[i * sh.states + next[i]] = 1.0;
  return TabularMdp(sh, std::move(p), RewardTable(sh, std::move(rewards)), start);
}

}  // namespace conex::testing
