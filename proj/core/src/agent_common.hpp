#pragma once

// Bookkeeping shared by the online learners.

#include <string>

#include "conex/episode_record.hpp"
#include "conex/stepmix_agent.hpp"
#include "conex/text_io.hpp"

namespace conex::detail {

class RunLedger {
 public:
  RunLedger(const TabularMdp& mdp, const AgentConfig& cfg, Algorithm algorithm)
      : algorithm_(algorithm), gamma_(cfg.gamma) {
    cfg.validate();
    if (!(cfg.baseline.shape() == mdp.shape())) {
      throw std::invalid_argument("agent: baseline policy shape differs from the environment");
    }
    result_.optimal_value = solve_optimal(mdp).values.v(0, mdp.start_state());
    result_.baseline_value = policy_value(mdp, cfg.baseline);
    if (result_.baseline_value < cfg.gamma) {
      result_.warnings.push_back("baseline value " + format_real(result_.baseline_value) +
                                 " is below gamma " + format_real(cfg.gamma) +
                                 "; the conservative guarantee does not apply");
    }
  }

  /// Completes `record` (episode number, regret, violation) and stores it.
  void push(EpisodeRecord record) {
    record.algorithm = algorithm_;
    record.episode = result_.records.size() + 1;
    cumulative_regret_ += result_.optimal_value - record.value;
    record.cum_regret = cumulative_regret_;
    record.violation = record.governing_value() < gamma_;
    result_.records.push_back(std::move(record));
  }

  RunResult release() { return std::move(result_); }

 private:
  Algorithm algorithm_;
  double gamma_;
  double cumulative_regret_ = 0.0;
  RunResult result_;
};

}  // namespace conex::detail
