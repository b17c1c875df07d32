#pragma once

// Pessimistic offline value iteration. The dataset is split into H buckets;
// step h of the transition estimate uses bucket h only, and the backward
// induction subtracts b_h(s,a) = c * sqrt(H^2 * iota / max(n_h(s,a), 1)) with
// iota = log(HSA / delta) before clamping at zero.
//
// Dataset text format (integers only, one step per line):
//
//   conex-dataset 1
//   states S
//   actions A
//   horizon H
//   start_state s1
//   trajectories n
//   episode <i> bucket <b>
//   <state>\t<action>\t<next_state>      (H lines)
//   ...

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "conex/episode_record.hpp"
#include "conex/model_estimation.hpp"
#include "conex/random.hpp"
#include "conex/stepmix_agent.hpp"
#include "conex/tabular_mdp.hpp"

namespace conex {

struct OfflineDataset {
  Shape shape;
  std::size_t start_state = 0;
  std::vector<Trajectory> trajectories;
  /// Bucket (0..H-1) of each trajectory.
  std::vector<std::size_t> buckets;

  std::size_t size() const { return trajectories.size(); }
  /// Throws std::invalid_argument if buckets are missing, out of range or unbalanced.
  void validate() const;
};

struct OfflineConfig {
  double delta = 0.1;
  /// Bonus constant c.
  double c = 1.0;

  void validate() const;
};

/// Seeded balanced assignment of `n` items to `buckets` groups.
std::vector<std::size_t> balanced_partition(std::size_t n, std::size_t buckets, Rng& rng);

/// n rollouts of `behavior`, then a balanced random split into H buckets.
OfflineDataset collect_offline(const TabularMdp& mdp, const StochasticPolicy& behavior,
                               std::size_t n, Rng& rng);

/// Row h holds the step-h transitions of bucket-h trajectories only.
CountTable bucket_counts(const OfflineDataset& data);

/// log(HSA / delta).
double offline_iota(const Shape& shape, const OfflineConfig& cfg);

/// c * sqrt(H^2 iota / max(n, 1)).
double offline_bonus(const Shape& shape, std::uint64_t n, const OfflineConfig& cfg);

struct VilcbSolution {
  StochasticPolicy policy;
  /// Pessimistic Q_hat and V_hat.
  ValueTable values;
};

VilcbSolution vi_lcb_solve(const OfflineDataset& data, const RewardTable& rewards,
                           const OfflineConfig& cfg);

/// Deterministic pessimistic policy as point masses.
StochasticPolicy vi_lcb(const OfflineDataset& data, const RewardTable& rewards,
                        const OfflineConfig& cfg);

/// 2 c iota sqrt(H^5 S A / n): bound on V^mu - V^pi_hat under the good events.
double offline_gap_bound(const Shape& shape, std::size_t n, const OfflineConfig& cfg);

/// ceil(16 c^2 iota'^2 H^5 S A / (V_mu - gamma)^2) with iota' = log(2HSA/delta).
/// Throws std::domain_error when v_mu <= gamma and std::overflow_error when
/// the result does not fit in 64 bits.
std::uint64_t required_offline_samples(const Shape& shape, double v_mu, double gamma,
                                       const OfflineConfig& cfg);

struct OfflineRunResult {
  OfflineDataset dataset;
  StochasticPolicy learned_baseline;
  double behavior_value = 0.0;
  double learned_value = 0.0;
  RunResult online;
};

/// collect_offline -> vi_lcb -> online agent with the learned baseline.
/// `online.baseline` is ignored and replaced by the learned policy.
OfflineRunResult offline_to_online(const TabularMdp& mdp, const StochasticPolicy& behavior,
                                   std::size_t n, const OfflineConfig& offline_cfg,
                                   AgentConfig online, Algorithm algorithm, std::size_t episodes,
                                   Rng& offline_rng, Rng& rollout_rng, Rng& mixture_rng);

void write_dataset(std::ostream& out, const OfflineDataset& data);
OfflineDataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const OfflineDataset& data);
OfflineDataset load_dataset(const std::filesystem::path& path);

}  // namespace conex
