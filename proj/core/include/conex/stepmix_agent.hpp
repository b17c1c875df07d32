#pragma once

#include <optional>
#include <span>
#include <vector>

#include "conex/confidence_bounds.hpp"
#include "conex/episode_record.hpp"
#include "conex/random.hpp"
#include "conex/tabular_mdp.hpp"

namespace conex {

struct AgentConfig {
  /// Per-episode threshold on V_1.
  double gamma = 0.0;
  double delta = 0.1;
  /// Multiplier on every confidence term; 1 keeps the theoretical constants.
  double bonus_scale = 1.0;
  StochasticPolicy baseline;

  void validate() const;
};

struct PolicySelection {
  SelectionKind kind = SelectionKind::Baseline;
  std::optional<std::size_t> h_k;
  std::optional<double> rho;
  StochasticPolicy executed;
  double lcb_value = 0.0;
  /// LCBs of the candidates h_k - 1 and h_k (Mixture only).
  std::optional<double> lcb_previous;
  std::optional<double> lcb_selected;
};

/// delta' used by StepMix and the optimistic learner: delta / (3 (H + 1)).
double stepmix_delta_prime(double delta, std::size_t horizon);

/// Candidate h0 (0..H) follows the baseline on steps [0, h0) and the
/// optimistic policy afterwards.
std::vector<StochasticPolicy> build_candidates(const StochasticPolicy& optimistic,
                                               const StochasticPolicy& baseline);

/// Picks the smallest h0 with LCB >= gamma and mixes candidates h0-1 and h0 so
/// that the combined LCB equals gamma. Throws std::logic_error if the LCB
/// ordering the mixture relies on is violated.
PolicySelection select_policy(std::span<const double> candidate_lcbs,
                              std::span<const StochasticPolicy> candidates, double gamma);

/// Runs StepMix for `episodes` episodes. The exact value of every executed
/// policy is computed on `mdp`; the agent itself only sees rewards and samples.
RunResult run_stepmix(const TabularMdp& mdp, const AgentConfig& cfg, std::size_t episodes,
                      Rng& rollout_rng, const ModelObserver& observer = {});

/// Unconstrained optimistic learner: executes the greedy policy of Q_up every
/// episode. `cfg.gamma` only drives the violation column.
RunResult run_optimistic(const TabularMdp& mdp, const AgentConfig& cfg, std::size_t episodes,
                         Rng& rollout_rng, const ModelObserver& observer = {});

}  // namespace conex
