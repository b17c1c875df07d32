#include "conex/model_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace conex {

CountTable::CountTable(const Shape& shape)
    : shape_(shape),
      visits_(shape.horizon * shape.state_actions(), 0),
      next_(shape.horizon * shape.state_actions() * shape.states, 0) {
  validate_shape(shape);
}

void CountTable::add(const Trajectory& traj) {
  if (traj.steps.size() != shape_.horizon) {
    throw std::invalid_argument("update_counts: trajectory length differs from horizon");
  }
  for (std::size_t h = 0; h < shape_.horizon; ++h) {
    const auto& step = traj.steps[h];
    if (step.state >= shape_.states || step.action >= shape_.actions ||
        step.next_state >= shape_.states) {
      throw std::invalid_argument("update_counts: index out of range");
    }
    const std::size_t idx = (h * shape_.states + step.state) * shape_.actions + step.action;
    ++visits_[idx];
    ++next_[idx * shape_.states + step.next_state];
  }
  ++episodes_;
}

void CountTable::set_counts(std::size_t h, std::size_t s, std::size_t a,
                            std::span<const std::uint64_t> next_counts) {
  if (next_counts.size() != shape_.states) throw std::invalid_argument("set_counts: expected S counts");
  const std::size_t idx = (h * shape_.states + s) * shape_.actions + a;
  std::copy(next_counts.begin(), next_counts.end(), next_.begin() + idx * shape_.states);
  visits_[idx] = std::accumulate(next_counts.begin(), next_counts.end(), std::uint64_t{0});
}

CountTable update_counts(CountTable counts, const Trajectory& traj) {
  counts.add(traj);
  return counts;
}

EmpiricalModel::EmpiricalModel(CountTable counts)
    : counts_(std::move(counts)),
      p_hat_(counts_.shape().horizon * counts_.shape().state_actions() * counts_.shape().states) {
  const Shape& sh = counts_.shape();
  const double uniform = 1.0 / static_cast<double>(sh.states);
  for (std::size_t h = 0; h < sh.horizon; ++h) {
    for (std::size_t s = 0; s < sh.states; ++s) {
      for (std::size_t a = 0; a < sh.actions; ++a) {
        double* row = p_hat_.data() + ((h * sh.states + s) * sh.actions + a) * sh.states;
        const std::uint64_t n = counts_.visits(h, s, a);
        const auto next = counts_.next_counts(h, s, a);
        for (std::size_t sp = 0; sp < sh.states; ++sp) {
          row[sp] = n == 0 ? uniform : static_cast<double>(next[sp]) / static_cast<double>(n);
        }
      }
    }
  }
}

EmpiricalModel estimate_transitions(const CountTable& counts) { return EmpiricalModel(counts); }

void BonusParams::validate() const {
  validate_shape(shape);
  if (!(delta_prime > 0.0 && delta_prime < 1.0)) {
    throw std::invalid_argument("bonus: delta' must lie in (0,1)");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("bonus: scale must be positive");
}

namespace {

double log_sah_over_delta(const BonusParams& p) {
  const double sah = static_cast<double>(p.shape.states * p.shape.actions * p.shape.horizon);
  return std::log(sah / p.delta_prime);
}

double log_8e(std::uint64_t n) {
  return std::log(8.0 * std::numbers::e * (static_cast<double>(n) + 1.0));
}

}  // namespace

double beta(std::uint64_t n, const BonusParams& params) {
  params.validate();
  return params.scale *
         (log_sah_over_delta(params) + static_cast<double>(params.shape.states) * log_8e(n));
}

double beta_star(std::uint64_t n, const BonusParams& params) {
  params.validate();
  return params.scale * (log_sah_over_delta(params) + log_8e(n));
}

double beta_cnt(const BonusParams& params) {
  params.validate();
  return params.scale * log_sah_over_delta(params);
}

double empirical_variance(const EmpiricalModel& model, std::size_t h, std::size_t s, std::size_t a,
                          std::span<const double> v_next) {
  const auto p = model.transition_row(h, s, a);
  if (v_next.size() != p.size()) throw std::invalid_argument("empirical_variance: length mismatch");
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    mean += p[i] * v_next[i];
    second += p[i] * v_next[i] * v_next[i];
  }
  return std::max(0.0, second - mean * mean);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: length mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, kl);
}

GoodEventReport good_event_diagnostics(const TabularMdp& mdp, const EmpiricalModel& model,
                                       const BonusParams& params) {
  const Shape& sh = mdp.shape();
  if (!(sh == model.shape())) throw std::invalid_argument("good_event_diagnostics: dimension mismatch");
  GoodEventReport report;
  for (std::size_t h = 0; h < sh.horizon; ++h) {
    for (std::size_t s = 0; s < sh.states; ++s) {
      for (std::size_t a = 0; a < sh.actions; ++a) {
        const std::uint64_t n = model.visits(h, s, a);
        if (n == 0) {
          ++report.skipped_unvisited;
          continue;
        }
        ++report.checked;
        const double kl = kl_divergence(model.transition_row(h, s, a), mdp.transition_row(h, s, a));
        if (static_cast<double>(n) * kl > beta(n, params)) ++report.violations;
      }
    }
  }
  return report;
}

}  // namespace conex
