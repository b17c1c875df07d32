#pragma once

// Multi-trial experiment runner and its on-disk artifacts.
//
// Config files are flat `key = value` lines; '#' starts a comment. Keys are
// the same names accepted by apply_setting (see README for the full list).
//
// Records CSV: header
//   trial,episode,algorithm,kind,rho,h_k,value,mixture_value,violation,cum_regret
// one row per (trial, episode, algorithm), sorted by trial, then algorithm in
// configuration order, then episode. Optional fields are empty, reals use 17
// significant digits, violation is 0/1, line endings are '\n'.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conex/episode_record.hpp"
#include "conex/tabular_mdp.hpp"

namespace conex {

inline constexpr int kSummarySchemaVersion = 1;

enum class BaselineSource { Boltzmann, Offline };

struct ExperimentConfig {
  Shape shape{5, 5, 3};
  std::uint64_t env_seed = 7;
  std::optional<std::filesystem::path> env_file;

  BaselineSource baseline = BaselineSource::Boltzmann;
  /// Boltzmann temperature of the baseline, or of the behavior policy when
  /// the baseline is learned offline.
  double eta = 10.0;
  std::size_t offline_n = 5000;
  double offline_c = 1.0;

  std::vector<Algorithm> algorithms{Algorithm::StepMix, Algorithm::EpsMix};
  /// Absolute threshold. Exactly one of gamma / gamma_frac must be set.
  std::optional<double> gamma;
  /// gamma = (1 - gamma_frac) * V^baseline, resolved per trial.
  std::optional<double> gamma_frac;
  double delta = 0.1;
  std::size_t episodes = 2000;
  std::size_t trials = 10;
  std::uint64_t root_seed = 1;
  double bonus_scale = 1.0;
  std::size_t threads = 1;

  /// Throws std::invalid_argument with a message naming the offending key.
  void validate() const;
};

/// Applies one `key = value` setting. Throws std::invalid_argument on unknown
/// keys or malformed values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Parses a config file on top of `base`. Missing files throw std::runtime_error.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});

struct TrialInfo {
  std::size_t trial = 0;
  double optimal_value = 0.0;
  double baseline_value = 0.0;
  /// Behavior policy value (offline baselines only).
  std::optional<double> behavior_value;
  double gamma = 0.0;
  double kappa = 0.0;
  double delta0 = 0.0;
  std::vector<std::string> warnings;
};

struct AlgorithmSummary {
  Algorithm algorithm = Algorithm::StepMix;
  std::size_t trials = 0;
  std::size_t episodes = 0;
  std::size_t total_violations = 0;
  std::size_t trials_with_violations = 0;
  /// EpsMix: episodes whose realized branch value fell below gamma.
  std::size_t realized_violations = 0;
  std::map<std::string, std::size_t> kind_counts;
  /// Mean over trials and the last ceil(K/10) episodes of the exact value.
  double final_window_mean_value = 0.0;
  /// Mean over trials of Reg(K).
  double mean_final_regret = 0.0;
  std::vector<double> mean_value_per_episode;
  std::vector<double> mean_cum_regret_per_episode;
};

struct ExperimentSummary {
  std::vector<TrialInfo> trials;
  std::vector<AlgorithmSummary> algorithms;
};

struct ExperimentResult {
  std::vector<EpisodeRecord> records;
  ExperimentSummary summary;
};

/// Loads the environment named by the config (file or generator).
TabularMdp load_environment(const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Per-algorithm aggregates. Realized violations need gamma per trial, so they
/// are only filled when `trials` is given.
std::vector<AlgorithmSummary> summarize_records(const std::vector<EpisodeRecord>& records,
                                                const std::vector<TrialInfo>& trials = {});

void write_csv(std::ostream& out, const std::vector<EpisodeRecord>& records);
std::vector<EpisodeRecord> read_csv(std::istream& in);
void emit_csv(const std::filesystem::path& path, const std::vector<EpisodeRecord>& records);
std::vector<EpisodeRecord> load_csv(const std::filesystem::path& path);

/// JSON summary with a `schema_version` field. `cfg` is embedded when given.
std::string summary_json(const ExperimentSummary& summary, const ExperimentConfig* cfg = nullptr);
void emit_summary_json(const std::filesystem::path& path, const ExperimentSummary& summary,
                       const ExperimentConfig* cfg = nullptr);

}  // namespace conex
