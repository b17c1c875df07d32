#pragma once

#include <optional>

#include "conex/confidence_bounds.hpp"
#include "conex/episode_record.hpp"
#include "conex/random.hpp"
#include "conex/stepmix_agent.hpp"

namespace conex {

enum class Branch { Optimistic, Baseline };

struct EpisodicSelection {
  SelectionKind kind = SelectionKind::Baseline;
  /// Probability of the optimistic branch (EpisodicMixture only).
  std::optional<double> rho;
  /// Branch drawn for this episode. Equals the kind for non-mixture selections.
  Branch realized_branch = Branch::Baseline;
  /// rho * opt_lcb + (1 - rho) * base_lcb for mixtures, else the chosen LCB.
  double lcb_value = 0.0;
};

/// delta' used by EpsMix: delta / 4.
double epsmix_delta_prime(double delta);

/// Bounds of the baseline policy; the same recursion as policy_eva.
BoundsTable evaluate_baseline_bounds(const EmpiricalModel& model, const RewardTable& rewards,
                                     const StochasticPolicy& baseline, const BonusParams& params);

/// Optimistic if its LCB clears gamma, baseline if neither does, otherwise an
/// episodic mixture whose LCB combination equals gamma. Draws exactly one
/// uniform from `rng` in the mixture case and none otherwise.
EpisodicSelection select_episodic(double opt_lcb, double base_lcb, double gamma, Rng& rng);

/// Runs EpsMix. `mixture_rng` feeds only the episodic coin flips.
RunResult run_epsmix(const TabularMdp& mdp, const AgentConfig& cfg, std::size_t episodes,
                     Rng& rollout_rng, Rng& mixture_rng, const ModelObserver& observer = {});

}  // namespace conex
