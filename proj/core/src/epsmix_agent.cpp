#include "conex/epsmix_agent.hpp"

#include <cmath>
#include <stdexcept>

#include "agent_common.hpp"

namespace conex {

double epsmix_delta_prime(double delta) { return delta / 4.0; }

BoundsTable evaluate_baseline_bounds(const EmpiricalModel& model, const RewardTable& rewards,
                                     const StochasticPolicy& baseline, const BonusParams& params) {
  return policy_eva(model, rewards, baseline, params);
}

EpisodicSelection select_episodic(double opt_lcb, double base_lcb, double gamma, Rng& rng) {
  if (!std::isfinite(opt_lcb) || !std::isfinite(base_lcb) || !std::isfinite(gamma)) {
    throw std::invalid_argument("select_episodic: non-finite input");
  }
  EpisodicSelection selection;
  if (opt_lcb >= gamma) {
    selection.kind = SelectionKind::Optimistic;
    selection.realized_branch = Branch::Optimistic;
    selection.lcb_value = opt_lcb;
    return selection;
  }
  if (base_lcb < gamma) {
    selection.kind = SelectionKind::Baseline;
    selection.realized_branch = Branch::Baseline;
    selection.lcb_value = base_lcb;
    return selection;
  }
  const double denominator = base_lcb - opt_lcb;
  if (!(denominator > 0.0)) throw std::logic_error("select_episodic: LCBs do not straddle gamma");
  const double rho = (base_lcb - gamma) / denominator;
  selection.kind = SelectionKind::EpisodicMixture;
  selection.rho = rho;
  selection.realized_branch = rng.uniform() < rho ? Branch::Optimistic : Branch::Baseline;
  selection.lcb_value = rho * opt_lcb + (1.0 - rho) * base_lcb;
  return selection;
}

RunResult run_epsmix(const TabularMdp& mdp, const AgentConfig& cfg, std::size_t episodes,
                     Rng& rollout_rng, Rng& mixture_rng, const ModelObserver& observer) {
  detail::RunLedger ledger(mdp, cfg, Algorithm::EpsMix);
  const Shape& sh = mdp.shape();
  const BonusParams params{sh, epsmix_delta_prime(cfg.delta), cfg.bonus_scale};
  const std::size_t s1 = mdp.start_state();
  const double baseline_value = policy_value(mdp, cfg.baseline);
  CountTable counts(sh);

  for (std::size_t k = 1; k <= episodes; ++k) {
    const EmpiricalModel model = estimate_transitions(counts);
    if (observer) observer(k, model);

    const auto optimistic = compute_optimistic_bounds(model, mdp.rewards(), params);
    const double opt_lcb = optimistic.bounds.v_lo(0, s1);
    const double base_lcb =
        evaluate_baseline_bounds(model, mdp.rewards(), cfg.baseline, params).v_lo(0, s1);
    const EpisodicSelection selection = select_episodic(opt_lcb, base_lcb, cfg.gamma, mixture_rng);

    const StochasticPolicy& executed =
        selection.realized_branch == Branch::Optimistic ? optimistic.policy : cfg.baseline;
    counts.add(rollout(mdp, executed, rollout_rng, k));

    EpisodeRecord record;
    record.kind = selection.kind;
    record.rho = selection.rho;
    record.lcb = selection.lcb_value;
    if (selection.kind == SelectionKind::EpisodicMixture) {
      const double optimistic_value = policy_value(mdp, optimistic.policy);
      const double rho = *selection.rho;
      record.value =
          selection.realized_branch == Branch::Optimistic ? optimistic_value : baseline_value;
      record.mixture_value = rho * optimistic_value + (1.0 - rho) * baseline_value;
      record.lcb_first = opt_lcb;
      record.lcb_second = base_lcb;
    } else {
      record.value = selection.kind == SelectionKind::Optimistic
                         ? policy_value(mdp, optimistic.policy)
                         : baseline_value;
    }
    ledger.push(std::move(record));
  }
  return ledger.release();
}

}  // namespace conex
