#include "conex/stepmix_agent.hpp"

#include <cmath>
#include <stdexcept>

#include "agent_common.hpp"

namespace conex {

namespace {

// Below this gap the two straddling LCBs are treated as equal and the safe
// candidate is executed unmixed.
constexpr double kDegenerateDenominator = 1e-12;

BonusParams stepmix_params(const Shape& shape, const AgentConfig& cfg) {
  return {shape, stepmix_delta_prime(cfg.delta, shape.horizon), cfg.bonus_scale};
}

}  // namespace

void AgentConfig::validate() const {
  if (!std::isfinite(gamma)) throw std::invalid_argument("agent: gamma must be finite");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("agent: delta must lie in (0,1)");
  if (!(bonus_scale > 0.0) || !std::isfinite(bonus_scale)) {
    throw std::invalid_argument("agent: bonus scale must be positive");
  }
  validate_shape(baseline.shape());
}

double stepmix_delta_prime(double delta, std::size_t horizon) {
  return delta / (3.0 * (static_cast<double>(horizon) + 1.0));
}

std::vector<StochasticPolicy> build_candidates(const StochasticPolicy& optimistic,
                                               const StochasticPolicy& baseline) {
  const Shape& sh = optimistic.shape();
  if (!(sh == baseline.shape())) throw std::invalid_argument("build_candidates: dimension mismatch");
  const std::size_t step_block = sh.state_actions();
  std::vector<StochasticPolicy> candidates;
  candidates.reserve(sh.horizon + 1);
  for (std::size_t h0 = 0; h0 <= sh.horizon; ++h0) {
    std::vector<double> probs(optimistic.probs());
    std::copy_n(baseline.probs().begin(), h0 * step_block, probs.begin());
    candidates.emplace_back(sh, std::move(probs));
  }
  return candidates;
}

PolicySelection select_policy(std::span<const double> candidate_lcbs,
                              std::span<const StochasticPolicy> candidates, double gamma) {
  if (candidate_lcbs.size() != candidates.size() || candidates.empty()) {
    throw std::invalid_argument("select_policy: expected one LCB per candidate");
  }
  const std::size_t horizon = candidates.size() - 1;
  PolicySelection selection;

  std::size_t h_k = 0;
  while (h_k <= horizon && !(candidate_lcbs[h_k] >= gamma)) ++h_k;

  if (h_k > horizon) {
    selection.kind = SelectionKind::Baseline;
    selection.executed = candidates[horizon];
    selection.lcb_value = candidate_lcbs[horizon];
    return selection;
  }
  if (h_k == 0) {
    selection.kind = SelectionKind::Optimistic;
    selection.h_k = 0;
    selection.executed = candidates[0];
    selection.lcb_value = candidate_lcbs[0];
    return selection;
  }

  const double previous = candidate_lcbs[h_k - 1];
  const double selected = candidate_lcbs[h_k];
  const double denominator = selected - previous;
  if (!(denominator > 0.0)) {
    throw std::logic_error("select_policy: candidate LCBs do not straddle gamma");
  }
  const double rho = denominator < kDegenerateDenominator ? 0.0 : (selected - gamma) / denominator;

  selection.kind = SelectionKind::Mixture;
  selection.h_k = h_k;
  selection.rho = rho;
  selection.executed = step_mix(candidates[h_k - 1], candidates[h_k], rho);
  selection.lcb_value = rho * previous + (1.0 - rho) * selected;
  selection.lcb_previous = previous;
  selection.lcb_selected = selected;
  return selection;
}

RunResult run_stepmix(const TabularMdp& mdp, const AgentConfig& cfg, std::size_t episodes,
                      Rng& rollout_rng, const ModelObserver& observer) {
  detail::RunLedger ledger(mdp, cfg, Algorithm::StepMix);
  const Shape& sh = mdp.shape();
  const BonusParams params = stepmix_params(sh, cfg);
  CountTable counts(sh);
  std::vector<double> lcbs(sh.horizon + 1);

  for (std::size_t k = 1; k <= episodes; ++k) {
    const EmpiricalModel model = estimate_transitions(counts);
    if (observer) observer(k, model);

    const auto optimistic = compute_optimistic_bounds(model, mdp.rewards(), params);
    const auto candidates = build_candidates(optimistic.policy, cfg.baseline);
    for (std::size_t h0 = 0; h0 <= sh.horizon; ++h0) {
      lcbs[h0] = policy_eva(model, mdp.rewards(), candidates[h0], params).v_lo(0, mdp.start_state());
    }
    PolicySelection selection = select_policy(lcbs, candidates, cfg.gamma);

    counts.add(rollout(mdp, selection.executed, rollout_rng, k));

    EpisodeRecord record;
    record.kind = selection.kind;
    record.rho = selection.rho;
    record.h_k = selection.h_k;
    record.value = policy_value(mdp, selection.executed);
    record.lcb = selection.lcb_value;
    record.lcb_first = selection.lcb_previous;
    record.lcb_second = selection.lcb_selected;
    ledger.push(std::move(record));
  }
  return ledger.release();
}

RunResult run_optimistic(const TabularMdp& mdp, const AgentConfig& cfg, std::size_t episodes,
                         Rng& rollout_rng, const ModelObserver& observer) {
  detail::RunLedger ledger(mdp, cfg, Algorithm::OptimisticOnly);
  const Shape& sh = mdp.shape();
  const BonusParams params = stepmix_params(sh, cfg);
  CountTable counts(sh);

  for (std::size_t k = 1; k <= episodes; ++k) {
    const EmpiricalModel model = estimate_transitions(counts);
    if (observer) observer(k, model);
    const auto optimistic = compute_optimistic_bounds(model, mdp.rewards(), params);
    counts.add(rollout(mdp, optimistic.policy, rollout_rng, k));

    EpisodeRecord record;
    record.kind = SelectionKind::Optimistic;
    record.h_k = 0;
    record.value = policy_value(mdp, optimistic.policy);
    record.lcb = optimistic.bounds.v_lo(0, mdp.start_state());
    ledger.push(std::move(record));
  }
  return ledger.release();
}

}  // namespace conex
