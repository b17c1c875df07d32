#include "conex/confidence_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conex {

BoundsTable::BoundsTable(const Shape& shape)
    : shape_(shape),
      q_up_(shape.horizon * shape.state_actions(), 0.0),
      q_lo_(shape.horizon * shape.state_actions(), 0.0),
      v_up_((shape.horizon + 1) * shape.states, 0.0),
      v_lo_((shape.horizon + 1) * shape.states, 0.0) {}

class BoundsBuilder {
 public:
  BoundsBuilder(const EmpiricalModel& model, const RewardTable& rewards, const BonusParams& params)
      : model_(model), rewards_(rewards), params_(params), table_(model.shape()) {
    params_.validate();
    if (!(model.shape() == rewards.shape()) || !(model.shape() == params.shape)) {
      throw std::invalid_argument("confidence bounds: dimension mismatch");
    }
  }

  /// Fills Q rows of step h from the V rows of step h+1.
  void fill_q(std::size_t h) {
    const Shape& sh = table_.shape_;
    const double horizon = static_cast<double>(sh.horizon);
    const auto v_up_next = table_.v_up_row(h + 1);
    const auto v_lo_next = table_.v_lo_row(h + 1);
    for (std::size_t s = 0; s < sh.states; ++s) {
      for (std::size_t a = 0; a < sh.actions; ++a) {
        const std::size_t idx = table_.qi(h, s, a);
        const std::uint64_t n = model_.visits(h, s, a);
        if (n == 0) {
          table_.q_up_[idx] = horizon;
          table_.q_lo_[idx] = 0.0;
          continue;
        }
        const auto p = model_.transition_row(h, s, a);
        double p_up = 0.0;
        double p_lo = 0.0;
        for (std::size_t sp = 0; sp < sh.states; ++sp) {
          p_up += p[sp] * v_up_next[sp];
          p_lo += p[sp] * v_lo_next[sp];
        }
        const double spread = p_up - p_lo;
        const double count = static_cast<double>(n);
        const double variance = empirical_variance(model_, h, s, a, v_up_next);
        const double bernstein = 3.0 * std::sqrt(variance * beta_star(n, params_) / count);
        const double lower_order = horizon * horizon * beta(n, params_) / count;
        const double r = rewards_(h, s, a);

        table_.q_up_[idx] =
            std::min(horizon, r + bernstein + 14.0 * lower_order + spread / horizon + p_up);
        table_.q_lo_[idx] =
            std::max(0.0, r - bernstein - 22.0 * lower_order - 2.0 * spread / horizon + p_lo);
      }
    }
  }

  std::size_t greedy_v(std::size_t h, std::size_t s) {
    const std::size_t best = argmax_lowest(table_.q_up_row(h, s));
    table_.v_up_[h * table_.shape_.states + s] = table_.q_up(h, s, best);
    table_.v_lo_[h * table_.shape_.states + s] = table_.q_lo(h, s, best);
    return best;
  }

  void weighted_v(std::size_t h, std::size_t s, std::span<const double> weights) {
    const auto up = table_.q_up_row(h, s);
    const auto lo = table_.q_lo_row(h, s);
    double v_up = 0.0;
    double v_lo = 0.0;
    for (std::size_t a = 0; a < weights.size(); ++a) {
      v_up += weights[a] * up[a];
      v_lo += weights[a] * lo[a];
    }
    // keep rounding inside the hull of the row
    table_.v_up_[h * table_.shape_.states + s] = std::clamp(v_up, *std::min_element(up.begin(), up.end()),
                                                            *std::max_element(up.begin(), up.end()));
    table_.v_lo_[h * table_.shape_.states + s] = std::clamp(v_lo, *std::min_element(lo.begin(), lo.end()),
                                                            *std::max_element(lo.begin(), lo.end()));
  }

  BoundsTable release() { return std::move(table_); }

 private:
  const EmpiricalModel& model_;
  const RewardTable& rewards_;
  BonusParams params_;
  BoundsTable table_;
};

OptimisticBounds compute_optimistic_bounds(const EmpiricalModel& model, const RewardTable& rewards,
                                           const BonusParams& params) {
  BoundsBuilder builder(model, rewards, params);
  const Shape& sh = model.shape();
  std::vector<std::size_t> greedy(sh.horizon * sh.states, 0);
  for (std::size_t h = sh.horizon; h-- > 0;) {
    builder.fill_q(h);
    for (std::size_t s = 0; s < sh.states; ++s) greedy[h * sh.states + s] = builder.greedy_v(h, s);
  }
  return {builder.release(), StochasticPolicy::deterministic(sh, greedy)};
}

BoundsTable policy_eva(const EmpiricalModel& model, const RewardTable& rewards,
                       const StochasticPolicy& policy, const BonusParams& params) {
  if (!(policy.shape() == model.shape())) throw std::invalid_argument("policy_eva: dimension mismatch");
  BoundsBuilder builder(model, rewards, params);
  const Shape& sh = model.shape();
  for (std::size_t h = sh.horizon; h-- > 0;) {
    builder.fill_q(h);
    for (std::size_t s = 0; s < sh.states; ++s) builder.weighted_v(h, s, policy.row(h, s));
  }
  return builder.release();
}

}  // namespace conex
