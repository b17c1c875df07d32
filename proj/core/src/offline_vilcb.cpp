#include "conex/offline_vilcb.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "conex/epsmix_agent.hpp"
#include "conex/text_io.hpp"

namespace conex {

void OfflineDataset::validate() const {
  validate_shape(shape);
  if (buckets.size() != trajectories.size()) {
    throw std::invalid_argument("dataset: one bucket per trajectory is required");
  }
  std::vector<std::size_t> sizes(shape.horizon, 0);
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (buckets[i] >= shape.horizon) throw std::invalid_argument("dataset: bucket out of range");
    if (!is_valid_trajectory(trajectories[i], shape, start_state)) {
      throw std::invalid_argument("dataset: trajectory " + std::to_string(i) + " is malformed");
    }
    ++sizes[buckets[i]];
  }
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  if (*hi - *lo > 1) throw std::invalid_argument("dataset: bucket sizes differ by more than one");
}

void OfflineConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("offline: delta must lie in (0,1)");
  if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("offline: c must be nonnegative");
}

std::vector<std::size_t> balanced_partition(std::size_t n, std::size_t buckets, Rng& rng) {
  if (buckets == 0) throw std::invalid_argument("balanced_partition: no buckets");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::size_t> assignment(n);
  for (std::size_t pos = 0; pos < n; ++pos) assignment[order[pos]] = pos % buckets;
  return assignment;
}

OfflineDataset collect_offline(const TabularMdp& mdp, const StochasticPolicy& behavior,
                               std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("collect_offline: need at least one trajectory");
  OfflineDataset data;
  data.shape = mdp.shape();
  data.start_state = mdp.start_state();
  data.trajectories.reserve(n);
  for (std::size_t i = 0; i < n; ++i) data.trajectories.push_back(rollout(mdp, behavior, rng, i));
  data.buckets = balanced_partition(n, mdp.shape().horizon, rng);
  return data;
}

CountTable bucket_counts(const OfflineDataset& data) {
  const Shape& sh = data.shape;
  std::vector<std::uint64_t> next(sh.horizon * sh.state_actions() * sh.states, 0);
  for (std::size_t i = 0; i < data.trajectories.size(); ++i) {
    const std::size_t h = data.buckets[i];
    const Transition& step = data.trajectories[i].steps.at(h);
    ++next[((h * sh.states + step.state) * sh.actions + step.action) * sh.states + step.next_state];
  }
  CountTable counts(sh);
  for (std::size_t h = 0; h < sh.horizon; ++h)
    for (std::size_t s = 0; s < sh.states; ++s)
      for (std::size_t a = 0; a < sh.actions; ++a)
        counts.set_counts(h, s, a,
                          std::span<const std::uint64_t>(
                              next.data() + ((h * sh.states + s) * sh.actions + a) * sh.states,
                              sh.states));
  return counts;
}

double offline_iota(const Shape& shape, const OfflineConfig& cfg) {
  cfg.validate();
  const double hsa = static_cast<double>(shape.horizon * shape.states * shape.actions);
  return std::log(hsa / cfg.delta);
}

double offline_bonus(const Shape& shape, std::uint64_t n, const OfflineConfig& cfg) {
  const double horizon = static_cast<double>(shape.horizon);
  const double visits = static_cast<double>(std::max<std::uint64_t>(n, 1));
  return cfg.c * std::sqrt(horizon * horizon * offline_iota(shape, cfg) / visits);
}

VilcbSolution vi_lcb_solve(const OfflineDataset& data, const RewardTable& rewards,
                           const OfflineConfig& cfg) {
  cfg.validate();
  data.validate();
  const Shape& sh = data.shape;
  if (!(rewards.shape() == sh)) throw std::invalid_argument("vi_lcb: reward shape mismatch");
  const EmpiricalModel model(bucket_counts(data));

  ValueTable values(sh);
  std::vector<std::size_t> greedy(sh.horizon * sh.states, 0);
  for (std::size_t h = sh.horizon; h-- > 0;) {
    const auto next = values.v_row(h + 1);
    for (std::size_t s = 0; s < sh.states; ++s) {
      for (std::size_t a = 0; a < sh.actions; ++a) {
        const auto p = model.transition_row(h, s, a);
        double expected = 0.0;
        for (std::size_t sp = 0; sp < sh.states; ++sp) expected += p[sp] * next[sp];
        values.q(h, s, a) =
            std::max(0.0, rewards(h, s, a) + expected - offline_bonus(sh, model.visits(h, s, a), cfg));
      }
      const std::size_t best = argmax_lowest(values.q_row(h, s));
      greedy[h * sh.states + s] = best;
      values.v(h, s) = values.q(h, s, best);
    }
  }
  return {StochasticPolicy::deterministic(sh, greedy), std::move(values)};
}

StochasticPolicy vi_lcb(const OfflineDataset& data, const RewardTable& rewards,
                        const OfflineConfig& cfg) {
  return vi_lcb_solve(data, rewards, cfg).policy;
}

double offline_gap_bound(const Shape& shape, std::size_t n, const OfflineConfig& cfg) {
  if (n == 0) throw std::invalid_argument("offline_gap_bound: n must be positive");
  const double h = static_cast<double>(shape.horizon);
  const double sa = static_cast<double>(shape.state_actions());
  return 2.0 * cfg.c * offline_iota(shape, cfg) * std::sqrt(std::pow(h, 5) * sa / static_cast<double>(n));
}

std::uint64_t required_offline_samples(const Shape& shape, double v_mu, double gamma,
                                       const OfflineConfig& cfg) {
  cfg.validate();
  validate_shape(shape);
  if (!(v_mu > gamma)) {
    throw std::domain_error("required_offline_samples: behavior value must exceed gamma");
  }
  const double h = static_cast<double>(shape.horizon);
  const double sa = static_cast<double>(shape.state_actions());
  const double iota_prime = std::log(2.0 * h * sa / cfg.delta);
  const double gap = v_mu - gamma;
  const double n = std::ceil(16.0 * cfg.c * cfg.c * iota_prime * iota_prime * std::pow(h, 5) * sa /
                             (gap * gap));
  if (!(n < 0x1.0p63)) throw std::overflow_error("required_offline_samples: result too large");
  return static_cast<std::uint64_t>(n);
}

OfflineRunResult offline_to_online(const TabularMdp& mdp, const StochasticPolicy& behavior,
                                   std::size_t n, const OfflineConfig& offline_cfg,
                                   AgentConfig online, Algorithm algorithm, std::size_t episodes,
                                   Rng& offline_rng, Rng& rollout_rng, Rng& mixture_rng) {
  OfflineRunResult result;
  result.dataset = collect_offline(mdp, behavior, n, offline_rng);
  result.learned_baseline = vi_lcb(result.dataset, mdp.rewards(), offline_cfg);
  result.behavior_value = policy_value(mdp, behavior);
  result.learned_value = policy_value(mdp, result.learned_baseline);
  online.baseline = result.learned_baseline;
  switch (algorithm) {
    case Algorithm::StepMix:
      result.online = run_stepmix(mdp, online, episodes, rollout_rng);
      break;
    case Algorithm::EpsMix:
      result.online = run_epsmix(mdp, online, episodes, rollout_rng, mixture_rng);
      break;
    case Algorithm::OptimisticOnly:
      result.online = run_optimistic(mdp, online, episodes, rollout_rng);
      break;
  }
  return result;
}

void write_dataset(std::ostream& out, const OfflineDataset& data) {
  data.validate();
  out << "conex-dataset 1\n"
      << "states " << data.shape.states << '\n'
      << "actions " << data.shape.actions << '\n'
      << "horizon " << data.shape.horizon << '\n'
      << "start_state " << data.start_state << '\n'
      << "trajectories " << data.size() << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << "episode " << i << " bucket " << data.buckets[i] << '\n';
    for (const auto& step : data.trajectories[i].steps) {
      out << step.state << '\t' << step.action << '\t' << step.next_state << '\n';
    }
  }
}

namespace {

std::string token_or_throw(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw std::invalid_argument("dataset: unexpected end of input");
  return token;
}

void expect(std::istream& in, std::string_view word) {
  const std::string token = token_or_throw(in);
  if (token != word) {
    throw std::invalid_argument("dataset: expected '" + std::string(word) + "' but found '" + token + "'");
  }
}

std::size_t keyed(std::istream& in, std::string_view key) {
  expect(in, key);
  return parse_count(token_or_throw(in));
}

}  // namespace

OfflineDataset read_dataset(std::istream& in) {
  expect(in, "conex-dataset");
  if (parse_count(token_or_throw(in)) != 1) throw std::invalid_argument("dataset: unsupported version");
  OfflineDataset data;
  data.shape.states = keyed(in, "states");
  data.shape.actions = keyed(in, "actions");
  data.shape.horizon = keyed(in, "horizon");
  validate_shape(data.shape);
  data.start_state = keyed(in, "start_state");
  const std::size_t n = keyed(in, "trajectories");
  data.trajectories.resize(n);
  data.buckets.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (keyed(in, "episode") != i) throw std::invalid_argument("dataset: episodes out of order");
    data.buckets[i] = keyed(in, "bucket");
    auto& traj = data.trajectories[i];
    traj.episode = i;
    traj.steps.resize(data.shape.horizon);
    for (auto& step : traj.steps) {
      step.state = parse_count(token_or_throw(in));
      step.action = parse_count(token_or_throw(in));
      step.next_state = parse_count(token_or_throw(in));
    }
  }
  data.validate();
  return data;
}

void save_dataset(const std::filesystem::path& path, const OfflineDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_dataset(out, data);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

OfflineDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  try {
    return read_dataset(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace conex
