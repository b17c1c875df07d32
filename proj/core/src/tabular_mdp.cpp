#include "conex/tabular_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace conex {

namespace {

void check_same_shape(const Shape& expected, const Shape& actual, const char* what) {
  if (!(expected == actual)) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

}  // namespace

void validate_shape(const Shape& shape) {
  if (shape.states == 0 || shape.actions == 0 || shape.horizon == 0) {
    throw std::invalid_argument("shape: states, actions and horizon must be positive");
  }
}

bool is_probability_vector(std::span<const double> row) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= kProbabilityTolerance;
}

RewardTable::RewardTable(Shape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
  validate_shape(shape_);
  if (values_.size() != shape_.horizon * shape_.state_actions()) {
    throw std::invalid_argument("rewards: expected H*S*A entries");
  }
  for (double r : values_) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("rewards: entries must lie in [0,1]");
  }
}

TabularMdp::TabularMdp(Shape shape, std::vector<double> transitions, RewardTable rewards,
                       std::size_t start_state)
    : shape_(shape),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      start_state_(start_state) {
  validate_shape(shape_);
  check_same_shape(shape_, rewards_.shape(), "mdp rewards");
  if (transitions_.size() != shape_.horizon * shape_.state_actions() * shape_.states) {
    throw std::invalid_argument("transitions: expected H*S*A*S entries");
  }
  if (start_state_ >= shape_.states) throw std::invalid_argument("start state out of range");
  for (std::size_t h = 0; h < shape_.horizon; ++h)
    for (std::size_t s = 0; s < shape_.states; ++s)
      for (std::size_t a = 0; a < shape_.actions; ++a)
        if (!is_probability_vector(transition_row(h, s, a)))
          throw std::invalid_argument("transitions: row (" + std::to_string(h) + "," +
                                      std::to_string(s) + "," + std::to_string(a) +
                                      ") is not a probability vector");
}

StochasticPolicy::StochasticPolicy(Shape shape, std::vector<double> probs)
    : shape_(shape), probs_(std::move(probs)) {
  validate_shape(shape_);
  if (probs_.size() != shape_.horizon * shape_.state_actions()) {
    throw std::invalid_argument("policy: expected H*S*A entries");
  }
  for (std::size_t h = 0; h < shape_.horizon; ++h)
    for (std::size_t s = 0; s < shape_.states; ++s)
      if (!is_probability_vector(row(h, s)))
        throw std::invalid_argument("policy: row (" + std::to_string(h) + "," +
                                    std::to_string(s) + ") is not a probability vector");
}

StochasticPolicy StochasticPolicy::uniform(const Shape& shape) {
  validate_shape(shape);
  return {shape, std::vector<double>(shape.horizon * shape.state_actions(),
                                     1.0 / static_cast<double>(shape.actions))};
}

StochasticPolicy StochasticPolicy::deterministic(const Shape& shape,
                                                 std::span<const std::size_t> actions) {
  validate_shape(shape);
  if (actions.size() != shape.horizon * shape.states) {
    throw std::invalid_argument("deterministic policy: expected H*S actions");
  }
  std::vector<double> probs(shape.horizon * shape.state_actions(), 0.0);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] >= shape.actions) throw std::invalid_argument("action index out of range");
    probs[i * shape.actions + actions[i]] = 1.0;
  }
  return {shape, std::move(probs)};
}

ValueTable::ValueTable(const Shape& shape)
    : shape_(shape),
      v_((shape.horizon + 1) * shape.states, 0.0),
      q_(shape.horizon * shape.state_actions(), 0.0) {}

bool is_valid_trajectory(const Trajectory& traj, const Shape& shape, std::size_t start_state) {
  if (traj.steps.size() != shape.horizon) return false;
  std::size_t expected = start_state;
  for (const auto& step : traj.steps) {
    if (step.state != expected) return false;
    if (step.action >= shape.actions || step.next_state >= shape.states) return false;
    expected = step.next_state;
  }
  return true;
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

TabularMdp generate_random_mdp(const Shape& shape, std::uint64_t seed) {
  validate_shape(shape);
  Rng rng(seed);
  const std::size_t rows = shape.horizon * shape.state_actions();
  std::vector<double> rewards(rows);
  for (double& r : rewards) r = rng.uniform();

  std::vector<double> transitions(rows * shape.states);
  for (std::size_t row = 0; row < rows; ++row) {
    double* p = transitions.data() + row * shape.states;
    double total = 0.0;
    for (std::size_t i = 0; i < shape.states; ++i) {
      p[i] = rng.exponential();
      total += p[i];
    }
    // A zero draw for every coordinate has probability 2^-53S; fall back to uniform.
    if (total <= 0.0) {
      std::fill(p, p + shape.states, 1.0 / static_cast<double>(shape.states));
      continue;
    }
    for (std::size_t i = 0; i < shape.states; ++i) p[i] /= total;
  }
  return {shape, std::move(transitions), RewardTable(shape, std::move(rewards)), 0};
}

OptimalSolution solve_optimal(const TabularMdp& mdp) {
  const Shape& sh = mdp.shape();
  ValueTable values(sh);
  std::vector<std::size_t> greedy(sh.horizon * sh.states, 0);
  for (std::size_t h = sh.horizon; h-- > 0;) {
    const auto next = values.v_row(h + 1);
    for (std::size_t s = 0; s < sh.states; ++s) {
      for (std::size_t a = 0; a < sh.actions; ++a)
        values.q(h, s, a) = mdp.reward(h, s, a) + dot(mdp.transition_row(h, s, a), next);
      const std::size_t best = argmax_lowest(values.q_row(h, s));
      greedy[h * sh.states + s] = best;
      values.v(h, s) = values.q(h, s, best);
    }
  }
  return {std::move(values), StochasticPolicy::deterministic(sh, greedy)};
}

ValueTable evaluate_policy_exact(const TabularMdp& mdp, const StochasticPolicy& policy) {
  const Shape& sh = mdp.shape();
  check_same_shape(sh, policy.shape(), "evaluate_policy_exact");
  ValueTable values(sh);
  for (std::size_t h = sh.horizon; h-- > 0;) {
    const auto next = values.v_row(h + 1);
    for (std::size_t s = 0; s < sh.states; ++s) {
      for (std::size_t a = 0; a < sh.actions; ++a)
        values.q(h, s, a) = mdp.reward(h, s, a) + dot(mdp.transition_row(h, s, a), next);
      values.v(h, s) = dot(policy.row(h, s), values.q_row(h, s));
    }
  }
  return values;
}

double policy_value(const TabularMdp& mdp, const StochasticPolicy& policy) {
  return evaluate_policy_exact(mdp, policy).v(0, mdp.start_state());
}

OccupancyTable occupancy_measure(const TabularMdp& mdp, const StochasticPolicy& policy) {
  const Shape& sh = mdp.shape();
  check_same_shape(sh, policy.shape(), "occupancy_measure");
  OccupancyTable d(sh);
  std::vector<double> state_dist(sh.states, 0.0);
  state_dist[mdp.start_state()] = 1.0;
  for (std::size_t h = 0; h < sh.horizon; ++h) {
    std::vector<double> next(sh.states, 0.0);
    for (std::size_t s = 0; s < sh.states; ++s) {
      if (state_dist[s] == 0.0) continue;
      for (std::size_t a = 0; a < sh.actions; ++a) {
        const double mass = state_dist[s] * policy(h, s, a);
        d(h, s, a) = mass;
        if (mass == 0.0) continue;
        const auto row = mdp.transition_row(h, s, a);
        for (std::size_t sp = 0; sp < sh.states; ++sp) next[sp] += mass * row[sp];
      }
    }
    state_dist = std::move(next);
  }
  return d;
}

double occupancy_return(const OccupancyTable& occupancy, const RewardTable& rewards) {
  check_same_shape(occupancy.shape(), rewards.shape(), "occupancy_return");
  return std::inner_product(occupancy.values().begin(), occupancy.values().end(),
                            rewards.values().begin(), 0.0);
}

StochasticPolicy step_mix(const StochasticPolicy& pi1, const StochasticPolicy& pi2, double rho) {
  check_same_shape(pi1.shape(), pi2.shape(), "step_mix");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("step_mix: rho must lie in [0,1]");
  if (rho == 1.0) return pi1;
  if (rho == 0.0) return pi2;
  std::vector<double> probs(pi1.probs().size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    probs[i] = rho * pi1.probs()[i] + (1.0 - rho) * pi2.probs()[i];
  return {pi1.shape(), std::move(probs)};
}

Trajectory rollout(const TabularMdp& mdp, const StochasticPolicy& policy, Rng& rng,
                   std::size_t episode) {
  const Shape& sh = mdp.shape();
  check_same_shape(sh, policy.shape(), "rollout");
  Trajectory traj;
  traj.episode = episode;
  traj.steps.reserve(sh.horizon);
  std::size_t s = mdp.start_state();
  for (std::size_t h = 0; h < sh.horizon; ++h) {
    const std::size_t a = rng.categorical(policy.row(h, s));
    const std::size_t next = rng.categorical(mdp.transition_row(h, s, a));
    traj.steps.push_back({s, a, next});
    s = next;
  }
  return traj;
}

StochasticPolicy boltzmann_baseline(const TabularMdp& mdp, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("boltzmann_baseline: eta must be finite and nonnegative");
  }
  const Shape& sh = mdp.shape();
  const auto optimal = solve_optimal(mdp);
  std::vector<double> probs(sh.horizon * sh.state_actions());
  for (std::size_t h = 0; h < sh.horizon; ++h) {
    for (std::size_t s = 0; s < sh.states; ++s) {
      const auto q = optimal.values.q_row(h, s);
      const double q_max = *std::max_element(q.begin(), q.end());
      double* out = probs.data() + (h * sh.states + s) * sh.actions;
      double total = 0.0;
      for (std::size_t a = 0; a < sh.actions; ++a) {
        out[a] = std::exp(eta * (q[a] - q_max));
        total += out[a];
      }
      for (std::size_t a = 0; a < sh.actions; ++a) out[a] /= total;
    }
  }
  return {sh, std::move(probs)};
}

}  // namespace conex
