#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "conex/tabular_mdp.hpp"

namespace conex {

/// Visit counts n_h(s,a) and n_h(s,a,s') accumulated from trajectories.
class CountTable {
 public:
  CountTable() = default;
  explicit CountTable(const Shape& shape);

  const Shape& shape() const { return shape_; }

  /// Adds the H transitions of one episode.
  void add(const Trajectory& traj);

  std::uint64_t visits(std::size_t h, std::size_t s, std::size_t a) const {
    return visits_[(h * shape_.states + s) * shape_.actions + a];
  }
  std::span<const std::uint64_t> next_counts(std::size_t h, std::size_t s, std::size_t a) const {
    return {next_.data() + ((h * shape_.states + s) * shape_.actions + a) * shape_.states,
            shape_.states};
  }
  std::uint64_t episodes() const { return episodes_; }

  /// Overwrites the counts of one (h,s,a); meant for synthetic tables in tests
  /// and tools. `episodes()` is left untouched.
  void set_counts(std::size_t h, std::size_t s, std::size_t a,
                  std::span<const std::uint64_t> next_counts);

 private:
  Shape shape_;
  std::vector<std::uint64_t> visits_;
  std::vector<std::uint64_t> next_;
  std::uint64_t episodes_ = 0;
};

/// Value-returning form of CountTable::add.
CountTable update_counts(CountTable counts, const Trajectory& traj);

/// Frequency estimate of the transition kernel. Rows with no data are uniform.
class EmpiricalModel {
 public:
  explicit EmpiricalModel(CountTable counts);

  const Shape& shape() const { return counts_.shape(); }
  const CountTable& counts() const { return counts_; }
  std::uint64_t visits(std::size_t h, std::size_t s, std::size_t a) const {
    return counts_.visits(h, s, a);
  }
  std::span<const double> transition_row(std::size_t h, std::size_t s, std::size_t a) const {
    const Shape& sh = counts_.shape();
    return {p_hat_.data() + ((h * sh.states + s) * sh.actions + a) * sh.states, sh.states};
  }

 private:
  CountTable counts_;
  std::vector<double> p_hat_;
};

EmpiricalModel estimate_transitions(const CountTable& counts);

/// Parameters of the logarithmic confidence terms. `scale` multiplies every
/// term; 1 reproduces the theoretical constants, smaller values are an
/// empirical tuning knob with no guarantee attached.
struct BonusParams {
  Shape shape;
  double delta_prime = 0.1;
  double scale = 1.0;

  /// Throws std::invalid_argument on delta' outside (0,1) or scale <= 0.
  void validate() const;
};

/// log(SAH/delta') + S log(8e(n+1)), times scale.
double beta(std::uint64_t n, const BonusParams& params);
/// log(SAH/delta') + log(8e(n+1)), times scale.
double beta_star(std::uint64_t n, const BonusParams& params);
/// log(SAH/delta'), times scale.
double beta_cnt(const BonusParams& params);

/// Var_{P_hat(.|s,a)}(V), clamped at zero.
double empirical_variance(const EmpiricalModel& model, std::size_t h, std::size_t s, std::size_t a,
                          std::span<const double> v_next);

/// KL(p || q) with 0 log 0 = 0. Infinite if p puts mass where q has none.
double kl_divergence(std::span<const double> p, std::span<const double> q);

struct GoodEventReport {
  std::size_t checked = 0;
  std::size_t skipped_unvisited = 0;
  std::size_t violations = 0;

  double violation_fraction() const {
    return checked == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(checked);
  }
  bool holds() const { return violations == 0; }
};

/// Simulation-only check of n * KL(P_hat || P) <= beta(n) on every visited
/// (h,s,a). Purely observational.
GoodEventReport good_event_diagnostics(const TabularMdp& mdp, const EmpiricalModel& model,
                                       const BonusParams& params);

}  // namespace conex
