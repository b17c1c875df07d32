#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conex/model_estimation.hpp"

namespace conex {

enum class Algorithm { StepMix, EpsMix, OptimisticOnly };

enum class SelectionKind { Baseline, Optimistic, Mixture, EpisodicMixture };

std::string_view to_string(Algorithm algorithm);
std::string_view to_string(SelectionKind kind);
/// Throw std::invalid_argument on unknown names.
Algorithm parse_algorithm(std::string_view name);
SelectionKind parse_selection_kind(std::string_view name);

/// One row of the per-episode audit log. Episodes are numbered from 1.
struct EpisodeRecord {
  std::size_t trial = 0;
  std::size_t episode = 0;
  Algorithm algorithm = Algorithm::StepMix;
  SelectionKind kind = SelectionKind::Baseline;
  std::optional<double> rho;
  std::optional<std::size_t> h_k;
  /// Exact V_1 of the policy actually executed.
  double value = 0.0;
  /// Exact expectation of an episodic mixture (EpsMix only).
  std::optional<double> mixture_value;
  bool violation = false;
  double cum_regret = 0.0;

  // In-memory diagnostics; not part of the CSV schema.
  /// LCB of the selected policy (the convex combination for mixtures).
  double lcb = 0.0;
  /// The two straddling LCBs of a mixture: weight rho goes to `lcb_first`.
  std::optional<double> lcb_first;
  std::optional<double> lcb_second;

  /// Value the violation flag is judged on.
  double governing_value() const { return mixture_value.value_or(value); }
};

struct RunResult {
  std::vector<EpisodeRecord> records;
  std::vector<std::string> warnings;
  double optimal_value = 0.0;
  double baseline_value = 0.0;
};

/// Called once per episode with the model the agent planned with.
using ModelObserver = std::function<void(std::size_t episode, const EmpiricalModel& model)>;

}  // namespace conex
