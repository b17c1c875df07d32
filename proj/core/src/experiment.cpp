#include "conex/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "conex/epsmix_agent.hpp"
#include "conex/offline_vilcb.hpp"
#include "conex/random.hpp"
#include "conex/stepmix_agent.hpp"
#include "conex/text_io.hpp"

namespace conex {

namespace {

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view canonical_key(std::string_view key) {
  if (key == "S") return "states";
  if (key == "A") return "actions";
  if (key == "H") return "horizon";
  if (key == "K") return "episodes";
  if (key == "env") return "env_file";
  return key;
}

std::size_t final_window(std::size_t episodes) { return std::max<std::size_t>(1, (episodes + 9) / 10); }

}  // namespace

void ExperimentConfig::validate() const {
  if (!env_file) validate_shape(shape);
  if (trials == 0) throw std::invalid_argument("config: trials must be at least 1");
  if (episodes == 0) throw std::invalid_argument("config: episodes must be at least 1");
  if (algorithms.empty()) throw std::invalid_argument("config: algorithms must not be empty");
  if (gamma.has_value() == gamma_frac.has_value()) {
    throw std::invalid_argument("config: set exactly one of gamma and gamma_frac");
  }
  if (gamma && !std::isfinite(*gamma)) throw std::invalid_argument("config: gamma must be finite");
  if (gamma_frac && !(*gamma_frac >= 0.0 && *gamma_frac <= 1.0)) {
    throw std::invalid_argument("config: gamma_frac must lie in [0,1]");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("config: delta must lie in (0,1)");
  if (!(bonus_scale > 0.0) || !std::isfinite(bonus_scale)) {
    throw std::invalid_argument("config: bonus_scale must be positive");
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("config: eta must be nonnegative");
  if (baseline == BaselineSource::Offline) {
    if (offline_n == 0) throw std::invalid_argument("config: offline_n must be at least 1");
    if (!(offline_c >= 0.0)) throw std::invalid_argument("config: offline_c must be nonnegative");
  }
  if (threads == 0) throw std::invalid_argument("config: threads must be at least 1");
}

void apply_setting(ExperimentConfig& cfg, std::string_view raw_key, std::string_view raw_value) {
  const std::string_view key = canonical_key(trim(raw_key));
  const std::string_view value = trim(raw_value);
  const auto fail = [&](const std::string& why) {
    throw std::invalid_argument("config key '" + std::string(key) + "': " + why);
  };
  try {
    if (key == "states") cfg.shape.states = parse_count(value);
    else if (key == "actions") cfg.shape.actions = parse_count(value);
    else if (key == "horizon") cfg.shape.horizon = parse_count(value);
    else if (key == "env_seed") cfg.env_seed = parse_count(value);
    else if (key == "env_file") cfg.env_file = std::filesystem::path(std::string(value));
    else if (key == "baseline") {
      if (value == "boltzmann") cfg.baseline = BaselineSource::Boltzmann;
      else if (value == "offline") cfg.baseline = BaselineSource::Offline;
      else fail("expected 'boltzmann' or 'offline'");
    } else if (key == "eta") cfg.eta = parse_real(value);
    else if (key == "offline_n") cfg.offline_n = parse_count(value);
    else if (key == "offline_c") cfg.offline_c = parse_real(value);
    else if (key == "algorithms") {
      cfg.algorithms.clear();
      for (auto name : split(value, ',')) {
        const Algorithm algorithm = parse_algorithm(trim(name));
        if (std::find(cfg.algorithms.begin(), cfg.algorithms.end(), algorithm) == cfg.algorithms.end())
          cfg.algorithms.push_back(algorithm);
      }
    } else if (key == "gamma") {
      cfg.gamma = parse_real(value);
      cfg.gamma_frac.reset();
    } else if (key == "gamma_frac") {
      cfg.gamma_frac = parse_real(value);
      cfg.gamma.reset();
    } else if (key == "delta") cfg.delta = parse_real(value);
    else if (key == "episodes") cfg.episodes = parse_count(value);
    else if (key == "trials") cfg.trials = parse_count(value);
    else if (key == "root_seed") cfg.root_seed = parse_count(value);
    else if (key == "bonus_scale") cfg.bonus_scale = parse_real(value);
    else if (key == "threads") cfg.threads = parse_count(value);
    else fail("unknown key");
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    if (what.rfind("config key", 0) == 0) throw;
    fail(what);
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      apply_setting(cfg, view.substr(0, eq), view.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
  try {
    return parse_config(in, std::move(base));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

TabularMdp load_environment(const ExperimentConfig& cfg) {
  if (cfg.env_file) return load_mdp(*cfg.env_file);
  return generate_random_mdp(cfg.shape, cfg.env_seed);
}

namespace {

struct TrialOutput {
  TrialInfo info;
  std::vector<EpisodeRecord> records;
};

TrialOutput run_trial(const ExperimentConfig& cfg, const TabularMdp& mdp, double optimal_value,
                      std::size_t trial) {
  TrialOutput out;
  out.info.trial = trial;
  out.info.optimal_value = optimal_value;

  StochasticPolicy baseline = boltzmann_baseline(mdp, cfg.eta);
  if (cfg.baseline == BaselineSource::Offline) {
    Rng offline_rng(derive_seed(cfg.root_seed, trial, Stream::Offline));
    out.info.behavior_value = policy_value(mdp, baseline);
    const auto data = collect_offline(mdp, baseline, cfg.offline_n, offline_rng);
    baseline = vi_lcb(data, mdp.rewards(), OfflineConfig{cfg.delta, cfg.offline_c});
  }
  out.info.baseline_value = policy_value(mdp, baseline);
  out.info.gamma = cfg.gamma ? *cfg.gamma : (1.0 - *cfg.gamma_frac) * out.info.baseline_value;
  out.info.kappa = out.info.baseline_value - out.info.gamma;
  out.info.delta0 = optimal_value - out.info.baseline_value;

  AgentConfig agent{out.info.gamma, cfg.delta, cfg.bonus_scale, baseline};
  for (const Algorithm algorithm : cfg.algorithms) {
    Rng rollout_rng(derive_seed(cfg.root_seed, trial, Stream::Rollout));
    Rng mixture_rng(derive_seed(cfg.root_seed, trial, Stream::Mixture));
    RunResult run;
    switch (algorithm) {
      case Algorithm::StepMix:
        run = run_stepmix(mdp, agent, cfg.episodes, rollout_rng);
        break;
      case Algorithm::EpsMix:
        run = run_epsmix(mdp, agent, cfg.episodes, rollout_rng, mixture_rng);
        break;
      case Algorithm::OptimisticOnly:
        run = run_optimistic(mdp, agent, cfg.episodes, rollout_rng);
        break;
    }
    for (auto& warning : run.warnings) {
      if (std::find(out.info.warnings.begin(), out.info.warnings.end(), warning) == out.info.warnings.end())
        out.info.warnings.push_back(std::move(warning));
    }
    for (auto& record : run.records) {
      record.trial = trial;
      out.records.push_back(std::move(record));
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const TabularMdp mdp = load_environment(cfg);
  const double optimal_value = solve_optimal(mdp).values.v(0, mdp.start_state());

  std::vector<TrialOutput> outputs(cfg.trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t t = next++; t < cfg.trials; t = next++) {
      try {
        outputs[t] = run_trial(cfg, mdp, optimal_value, t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(cfg.threads, cfg.trials);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  for (auto& out : outputs) {
    result.summary.trials.push_back(std::move(out.info));
    for (auto& record : out.records) result.records.push_back(std::move(record));
  }
  result.summary.algorithms = summarize_records(result.records, result.summary.trials);
  return result;
}

std::vector<AlgorithmSummary> summarize_records(const std::vector<EpisodeRecord>& records,
                                                const std::vector<TrialInfo>& trials) {
  std::vector<Algorithm> order;
  for (const auto& r : records)
    if (std::find(order.begin(), order.end(), r.algorithm) == order.end()) order.push_back(r.algorithm);

  std::vector<AlgorithmSummary> summaries;
  for (const Algorithm algorithm : order) {
    AlgorithmSummary summary;
    summary.algorithm = algorithm;
    std::map<std::size_t, std::vector<const EpisodeRecord*>> by_trial;
    for (const auto& r : records)
      if (r.algorithm == algorithm) by_trial[r.trial].push_back(&r);

    summary.trials = by_trial.size();
    for (const auto& [trial, rows] : by_trial) summary.episodes = std::max(summary.episodes, rows.size());
    summary.mean_value_per_episode.assign(summary.episodes, 0.0);
    summary.mean_cum_regret_per_episode.assign(summary.episodes, 0.0);
    std::vector<std::size_t> contributors(summary.episodes, 0);

    const std::size_t window = final_window(summary.episodes);
    double window_sum = 0.0;
    std::size_t window_count = 0;
    for (const auto& [trial, rows] : by_trial) {
      std::optional<double> trial_gamma;
      for (const auto& info : trials)
        if (info.trial == trial) trial_gamma = info.gamma;

      bool any_violation = false;
      for (const EpisodeRecord* r : rows) {
        ++summary.kind_counts[std::string(to_string(r->kind))];
        if (r->violation) {
          ++summary.total_violations;
          any_violation = true;
        }
        if (trial_gamma && r->value < *trial_gamma) ++summary.realized_violations;
        if (r->episode >= 1 && r->episode <= summary.episodes) {
          summary.mean_value_per_episode[r->episode - 1] += r->value;
          summary.mean_cum_regret_per_episode[r->episode - 1] += r->cum_regret;
          ++contributors[r->episode - 1];
        }
        if (r->episode + window > summary.episodes) {
          window_sum += r->value;
          ++window_count;
        }
      }
      if (any_violation) ++summary.trials_with_violations;
      summary.mean_final_regret += rows.back()->cum_regret;
    }
    for (std::size_t k = 0; k < summary.episodes; ++k) {
      if (contributors[k] == 0) continue;
      summary.mean_value_per_episode[k] /= static_cast<double>(contributors[k]);
      summary.mean_cum_regret_per_episode[k] /= static_cast<double>(contributors[k]);
    }
    if (summary.trials > 0) summary.mean_final_regret /= static_cast<double>(summary.trials);
    if (window_count > 0) summary.final_window_mean_value = window_sum / static_cast<double>(window_count);
    summaries.push_back(std::move(summary));
  }
  return summaries;
}

namespace {

constexpr std::string_view kCsvHeader =
    "trial,episode,algorithm,kind,rho,h_k,value,mixture_value,violation,cum_regret";

template <typename T, typename Fn>
std::string optional_field(const std::optional<T>& value, Fn&& format) {
  return value ? format(*value) : std::string();
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<EpisodeRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.trial << ',' << r.episode << ',' << to_string(r.algorithm) << ',' << to_string(r.kind)
        << ',' << optional_field(r.rho, format_real) << ','
        << optional_field(r.h_k, [](std::size_t h) { return std::to_string(h); }) << ','
        << format_real(r.value) << ',' << optional_field(r.mixture_value, format_real) << ','
        << (r.violation ? 1 : 0) << ',' << format_real(r.cum_regret) << '\n';
  }
}

std::vector<EpisodeRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCsvHeader) {
    throw std::invalid_argument("records CSV: missing or unexpected header");
  }
  std::vector<EpisodeRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    if (fields.size() != 10) {
      throw std::invalid_argument("records CSV line " + std::to_string(line_no) + ": expected 10 fields");
    }
    try {
      EpisodeRecord r;
      r.trial = parse_count(fields[0]);
      r.episode = parse_count(fields[1]);
      r.algorithm = parse_algorithm(fields[2]);
      r.kind = parse_selection_kind(fields[3]);
      if (!fields[4].empty()) r.rho = parse_real(fields[4]);
      if (!fields[5].empty()) r.h_k = parse_count(fields[5]);
      r.value = parse_real(fields[6]);
      if (!fields[7].empty()) r.mixture_value = parse_real(fields[7]);
      if (fields[8] != "0" && fields[8] != "1") throw std::invalid_argument("violation must be 0 or 1");
      r.violation = fields[8] == "1";
      r.cum_regret = parse_real(fields[9]);
      records.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("records CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void emit_csv(const std::filesystem::path& path, const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw std::invalid_argument("emit_csv: no records to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_csv(out, records);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::vector<EpisodeRecord> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  try {
    return read_csv(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

namespace {

nlohmann::ordered_json config_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  if (cfg.env_file) {
    j["env_file"] = cfg.env_file->string();
  } else {
    j["states"] = cfg.shape.states;
    j["actions"] = cfg.shape.actions;
    j["horizon"] = cfg.shape.horizon;
    j["env_seed"] = cfg.env_seed;
  }
  j["baseline"] = cfg.baseline == BaselineSource::Boltzmann ? "boltzmann" : "offline";
  j["eta"] = cfg.eta;
  if (cfg.baseline == BaselineSource::Offline) {
    j["offline_n"] = cfg.offline_n;
    j["offline_c"] = cfg.offline_c;
  }
  auto& algorithms = j["algorithms"] = nlohmann::ordered_json::array();
  for (const Algorithm a : cfg.algorithms) algorithms.push_back(std::string(to_string(a)));
  if (cfg.gamma) j["gamma"] = *cfg.gamma;
  if (cfg.gamma_frac) j["gamma_frac"] = *cfg.gamma_frac;
  j["delta"] = cfg.delta;
  j["episodes"] = cfg.episodes;
  j["trials"] = cfg.trials;
  j["root_seed"] = cfg.root_seed;
  j["bonus_scale"] = cfg.bonus_scale;
  return j;
}

}  // namespace

std::string summary_json(const ExperimentSummary& summary, const ExperimentConfig* cfg) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSummarySchemaVersion;
  if (cfg) j["config"] = config_json(*cfg);
  auto& trials = j["trials"] = nlohmann::ordered_json::array();
  for (const auto& t : summary.trials) {
    nlohmann::ordered_json tj;
    tj["trial"] = t.trial;
    tj["optimal_value"] = t.optimal_value;
    tj["baseline_value"] = t.baseline_value;
    if (t.behavior_value) tj["behavior_value"] = *t.behavior_value;
    tj["gamma"] = t.gamma;
    tj["kappa"] = t.kappa;
    tj["delta0"] = t.delta0;
    tj["warnings"] = t.warnings;
    trials.push_back(std::move(tj));
  }
  auto& algorithms = j["algorithms"] = nlohmann::ordered_json::array();
  for (const auto& a : summary.algorithms) {
    nlohmann::ordered_json aj;
    aj["algorithm"] = std::string(to_string(a.algorithm));
    aj["trials"] = a.trials;
    aj["episodes"] = a.episodes;
    aj["total_violations"] = a.total_violations;
    aj["trials_with_violations"] = a.trials_with_violations;
    aj["realized_violations"] = a.realized_violations;
    aj["kind_counts"] = a.kind_counts;
    aj["final_window_mean_value"] = a.final_window_mean_value;
    aj["mean_final_regret"] = a.mean_final_regret;
    aj["mean_value_per_episode"] = a.mean_value_per_episode;
    aj["mean_cum_regret_per_episode"] = a.mean_cum_regret_per_episode;
    algorithms.push_back(std::move(aj));
  }
  return j.dump(2) + "\n";
}

void emit_summary_json(const std::filesystem::path& path, const ExperimentSummary& summary,
                       const ExperimentConfig* cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << summary_json(summary, cfg);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace conex
