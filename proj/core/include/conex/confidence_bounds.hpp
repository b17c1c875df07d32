#pragma once

// Bernstein-style upper and lower confidence bounds on Q and V computed from
// an empirical model. One backward recursion serves both the greedy
// (optimistic) policy and the evaluation of a fixed policy:
//
//   Q_up(s,a) = min(H, r + 3 sqrt(Var * beta* / n) + 14 H^2 beta / n
//                      + (1/H) P_hat (V_up - V_lo) + P_hat V_up)
//   Q_lo(s,a) = max(0, r - 3 sqrt(Var * beta* / n) - 22 H^2 beta / n
//                      - (2/H) P_hat (V_up - V_lo) + P_hat V_lo)
//
// where Var is the variance of V_up at the next step under P_hat. Tuples
// with n = 0 are pinned to Q_up = H and Q_lo = 0.

#include <span>
#include <vector>

#include "conex/model_estimation.hpp"
#include "conex/tabular_mdp.hpp"

namespace conex {

class BoundsTable {
 public:
  explicit BoundsTable(const Shape& shape);

  const Shape& shape() const { return shape_; }

  double q_up(std::size_t h, std::size_t s, std::size_t a) const { return q_up_[qi(h, s, a)]; }
  double q_lo(std::size_t h, std::size_t s, std::size_t a) const { return q_lo_[qi(h, s, a)]; }
  double v_up(std::size_t h, std::size_t s) const { return v_up_[h * shape_.states + s]; }
  double v_lo(std::size_t h, std::size_t s) const { return v_lo_[h * shape_.states + s]; }

  std::span<const double> q_up_row(std::size_t h, std::size_t s) const {
    return {q_up_.data() + qi(h, s, 0), shape_.actions};
  }
  std::span<const double> q_lo_row(std::size_t h, std::size_t s) const {
    return {q_lo_.data() + qi(h, s, 0), shape_.actions};
  }
  std::span<const double> v_up_row(std::size_t h) const {
    return {v_up_.data() + h * shape_.states, shape_.states};
  }
  std::span<const double> v_lo_row(std::size_t h) const {
    return {v_lo_.data() + h * shape_.states, shape_.states};
  }

  bool operator==(const BoundsTable&) const = default;

 private:
  friend class BoundsBuilder;

  std::size_t qi(std::size_t h, std::size_t s, std::size_t a) const {
    return (h * shape_.states + s) * shape_.actions + a;
  }

  Shape shape_;
  std::vector<double> q_up_;
  std::vector<double> q_lo_;
  std::vector<double> v_up_;
  std::vector<double> v_lo_;
};

struct OptimisticBounds {
  BoundsTable bounds;
  /// Greedy on Q_up, lowest action index on ties.
  StochasticPolicy policy;
};

/// Bounds with V rows taken at the greedy action of Q_up.
OptimisticBounds compute_optimistic_bounds(const EmpiricalModel& model, const RewardTable& rewards,
                                           const BonusParams& params);

/// Bounds with V rows weighted by a fixed policy.
BoundsTable policy_eva(const EmpiricalModel& model, const RewardTable& rewards,
                       const StochasticPolicy& policy, const BonusParams& params);

}  // namespace conex
