#pragma once

// Finite-horizon tabular MDPs with known rewards, Markov stochastic policies,
// exact evaluation, occupancy measures and trajectory sampling.
//
// Steps are 0-based throughout the library: h = 0 .. H-1 indexes decision
// steps and value tables carry an extra terminal row at h = H that is zero.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "conex/random.hpp"

namespace conex {

/// Tolerance used when validating that a row is a probability vector.
inline constexpr double kProbabilityTolerance = 1e-12;

struct Shape {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::size_t horizon = 0;

  bool operator==(const Shape&) const = default;

  std::size_t state_actions() const { return states * actions; }
};

/// Throws std::invalid_argument unless every dimension is positive.
void validate_shape(const Shape& shape);

/// True if `row` is nonnegative and sums to one within kProbabilityTolerance.
bool is_probability_vector(std::span<const double> row);

/// Known deterministic rewards r_h(s,a) in [0,1].
class RewardTable {
 public:
  RewardTable() = default;
  RewardTable(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  double operator()(std::size_t h, std::size_t s, std::size_t a) const {
    return values_[(h * shape_.states + s) * shape_.actions + a];
  }
  std::span<const double> row(std::size_t h, std::size_t s) const {
    return {values_.data() + (h * shape_.states + s) * shape_.actions, shape_.actions};
  }
  const std::vector<double>& values() const { return values_; }

 private:
  Shape shape_;
  std::vector<double> values_;
};

/// Ground-truth environment. Immutable after construction.
class TabularMdp {
 public:
  /// `transitions` is row-major [h][s][a][s'].
  TabularMdp(Shape shape, std::vector<double> transitions, RewardTable rewards,
             std::size_t start_state);

  const Shape& shape() const { return shape_; }
  std::size_t start_state() const { return start_state_; }
  const RewardTable& rewards() const { return rewards_; }
  double reward(std::size_t h, std::size_t s, std::size_t a) const { return rewards_(h, s, a); }

  std::span<const double> transition_row(std::size_t h, std::size_t s, std::size_t a) const {
    return {transitions_.data() + ((h * shape_.states + s) * shape_.actions + a) * shape_.states,
            shape_.states};
  }
  const std::vector<double>& transitions() const { return transitions_; }

 private:
  Shape shape_;
  std::vector<double> transitions_;
  RewardTable rewards_;
  std::size_t start_state_ = 0;
};

/// Time-indexed action distributions pi_h(a|s).
class StochasticPolicy {
 public:
  StochasticPolicy() = default;
  /// `probs` is row-major [h][s][a]; every (h,s) row must be a distribution.
  StochasticPolicy(Shape shape, std::vector<double> probs);

  static StochasticPolicy uniform(const Shape& shape);
  /// Point masses; `actions[h * S + s]` is the action taken at (h, s).
  static StochasticPolicy deterministic(const Shape& shape, std::span<const std::size_t> actions);

  const Shape& shape() const { return shape_; }
  double operator()(std::size_t h, std::size_t s, std::size_t a) const {
    return probs_[(h * shape_.states + s) * shape_.actions + a];
  }
  std::span<const double> row(std::size_t h, std::size_t s) const {
    return {probs_.data() + (h * shape_.states + s) * shape_.actions, shape_.actions};
  }
  const std::vector<double>& probs() const { return probs_; }

  bool operator==(const StochasticPolicy&) const = default;

 private:
  Shape shape_;
  std::vector<double> probs_;
};

/// V over steps 0..H (row H is terminal) and Q over steps 0..H-1.
class ValueTable {
 public:
  explicit ValueTable(const Shape& shape);

  const Shape& shape() const { return shape_; }
  double v(std::size_t h, std::size_t s) const { return v_[h * shape_.states + s]; }
  double& v(std::size_t h, std::size_t s) { return v_[h * shape_.states + s]; }
  double q(std::size_t h, std::size_t s, std::size_t a) const {
    return q_[(h * shape_.states + s) * shape_.actions + a];
  }
  double& q(std::size_t h, std::size_t s, std::size_t a) {
    return q_[(h * shape_.states + s) * shape_.actions + a];
  }
  std::span<const double> v_row(std::size_t h) const {
    return {v_.data() + h * shape_.states, shape_.states};
  }
  std::span<const double> q_row(std::size_t h, std::size_t s) const {
    return {q_.data() + (h * shape_.states + s) * shape_.actions, shape_.actions};
  }

 private:
  Shape shape_;
  std::vector<double> v_;
  std::vector<double> q_;
};

/// d_h(s,a): probability of occupying (s,a) at step h.
class OccupancyTable {
 public:
  explicit OccupancyTable(const Shape& shape)
      : shape_(shape), d_(shape.horizon * shape.states * shape.actions, 0.0) {}

  const Shape& shape() const { return shape_; }
  double operator()(std::size_t h, std::size_t s, std::size_t a) const {
    return d_[(h * shape_.states + s) * shape_.actions + a];
  }
  double& operator()(std::size_t h, std::size_t s, std::size_t a) {
    return d_[(h * shape_.states + s) * shape_.actions + a];
  }
  const std::vector<double>& values() const { return d_; }

 private:
  Shape shape_;
  std::vector<double> d_;
};

struct Transition {
  std::size_t state = 0;
  std::size_t action = 0;
  std::size_t next_state = 0;

  bool operator==(const Transition&) const = default;
};

struct Trajectory {
  std::vector<Transition> steps;
  std::size_t episode = 0;

  bool operator==(const Trajectory&) const = default;
};

/// True if `traj` has H chained steps starting at `start_state`.
bool is_valid_trajectory(const Trajectory& traj, const Shape& shape, std::size_t start_state);

struct OptimalSolution {
  ValueTable values;
  StochasticPolicy policy;
};

/// Random instance: rewards uniform on [0,1], each transition row uniform on
/// the simplex (normalized unit exponentials). Start state 0.
TabularMdp generate_random_mdp(const Shape& shape, std::uint64_t seed);

/// Backward induction. The returned policy is greedy with lowest-index ties.
OptimalSolution solve_optimal(const TabularMdp& mdp);

/// Exact V^pi and Q^pi under the true kernel.
ValueTable evaluate_policy_exact(const TabularMdp& mdp, const StochasticPolicy& policy);

/// V_1^pi(s_1).
double policy_value(const TabularMdp& mdp, const StochasticPolicy& policy);

/// Forward occupancy recursion from the start state.
OccupancyTable occupancy_measure(const TabularMdp& mdp, const StochasticPolicy& policy);

/// sum_{h,s,a} d_h(s,a) r_h(s,a).
double occupancy_return(const OccupancyTable& occupancy, const RewardTable& rewards);

/// Per-(h,s) convex combination rho * pi1 + (1 - rho) * pi2.
StochasticPolicy step_mix(const StochasticPolicy& pi1, const StochasticPolicy& pi2, double rho);

/// Samples one episode. Consumes 2H draws from `rng`.
Trajectory rollout(const TabularMdp& mdp, const StochasticPolicy& policy, Rng& rng,
                   std::size_t episode = 0);

/// Softmax over Q* with inverse temperature `eta`.
StochasticPolicy boltzmann_baseline(const TabularMdp& mdp, double eta);

/// Lowest index among the maxima of `values`.
std::size_t argmax_lowest(std::span<const double> values);

}  // namespace conex
