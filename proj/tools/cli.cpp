#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <utility>

#include "conex/experiment.hpp"
#include "conex/offline_vilcb.hpp"
#include "conex/random.hpp"
#include "conex/text_io.hpp"

namespace conex::cli {

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Experiment flags. Each maps onto a config key and overrides the file.
struct ExperimentFlags {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::vector<std::string> storage;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_path, "Config file (flat key = value lines)");
    const std::vector<std::pair<std::string, std::string>> keys = {
        {"S", "Number of states"},
        {"A", "Number of actions"},
        {"H", "Horizon"},
        {"env-seed", "Seed of the generated environment"},
        {"env", "Pinned environment file (overrides S/A/H/env-seed)"},
        {"baseline", "boltzmann or offline"},
        {"eta", "Boltzmann temperature of the baseline or behavior policy"},
        {"offline-n", "Offline trajectories per trial"},
        {"offline-c", "Offline bonus constant"},
        {"algorithms", "Comma list of StepMix, EpsMix, OptimisticOnly"},
        {"gamma", "Absolute threshold on V_1"},
        {"gamma-frac", "Threshold as (1 - alpha) * V_1 of the baseline"},
        {"delta", "Confidence parameter"},
        {"K", "Episodes per trial"},
        {"trials", "Number of trials"},
        {"root-seed", "Root seed of all random streams"},
        {"bonus-scale", "Multiplier on every confidence term"},
        {"threads", "Worker threads across trials"},
    };
    storage.resize(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      options.emplace_back(keys[i].first, app.add_option("--" + keys[i].first, storage[i], keys[i].second));
    }
  }

  ExperimentConfig resolve(ExperimentConfig base) const {
    ExperimentConfig cfg = std::move(base);
    try {
      if (!config_path.empty()) cfg = load_config(config_path, std::move(cfg));
      for (std::size_t i = 0; i < options.size(); ++i) {
        if (options[i].second->count() == 0) continue;
        std::string key = options[i].first;
        std::replace(key.begin(), key.end(), '-', '_');
        apply_setting(cfg, key, storage[i]);
      }
      cfg.validate();
      if (cfg.env_file) (void)load_mdp(*cfg.env_file);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    return cfg;
  }
};

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;
  cfg.gamma = 2.0;
  return cfg;
}

void print_summary(std::ostream& out, const ExperimentResult& result) {
  for (const auto& a : result.summary.algorithms) {
    out << to_string(a.algorithm) << ": violations=" << a.total_violations
        << " trials_with_violations=" << a.trials_with_violations << "/" << a.trials
        << " final_window_mean=" << format_real(a.final_window_mean_value)
        << " mean_regret=" << format_real(a.mean_final_regret) << '\n';
  }
}

void report_warnings(std::ostream& err, const ExperimentResult& result) {
  for (const auto& t : result.summary.trials)
    for (const auto& w : t.warnings) err << "warning (trial " << t.trial << "): " << w << '\n';
}

int run_command(const ExperimentConfig& cfg, const std::string& csv_path,
                const std::string& summary_path, std::ostream& out, std::ostream& err) {
  const ExperimentResult result = run_experiment(cfg);
  report_warnings(err, result);
  emit_csv(csv_path, result.records);
  emit_summary_json(summary_path, result.summary, &cfg);
  print_summary(out, result);
  out << "wrote " << csv_path << " and " << summary_path << '\n';
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conservative exploration experiments on tabular episodic MDPs", "conex"};
  app.require_subcommand(1);

  // gen-env
  auto* gen = app.add_subcommand("gen-env", "Generate and pin a random environment");
  Shape shape{5, 5, 3};
  std::uint64_t env_seed = 7;
  std::string env_out;
  std::string policy_out;
  double policy_eta = 10.0;
  gen->add_option("--S", shape.states, "Number of states");
  gen->add_option("--A", shape.actions, "Number of actions");
  gen->add_option("--H", shape.horizon, "Horizon");
  gen->add_option("--seed", env_seed, "Generator seed");
  gen->add_option("--out", env_out, "Output file (stdout if omitted)");
  gen->add_option("--baseline-out", policy_out, "Also write the Boltzmann baseline policy here");
  gen->add_option("--eta", policy_eta, "Boltzmann temperature for --baseline-out");

  // run
  auto* run = app.add_subcommand("run", "Run a multi-trial experiment");
  ExperimentFlags run_flags;
  run_flags.add_to(*run);
  std::string csv_path = "records.csv";
  std::string summary_path = "summary.json";
  run->add_option("--csv", csv_path, "Records CSV output");
  run->add_option("--summary", summary_path, "Summary JSON output");

  // offline
  auto* offline = app.add_subcommand("offline", "Learn the baseline from offline data, then run online");
  ExperimentFlags offline_flags;
  offline_flags.add_to(*offline);
  std::string offline_csv = "records.csv";
  std::string offline_summary = "summary.json";
  std::string dataset_out;
  offline->add_option("--csv", offline_csv, "Records CSV output");
  offline->add_option("--summary", offline_summary, "Summary JSON output");
  offline->add_option("--dataset-out", dataset_out, "Write the trial-0 offline dataset here");

  // report
  auto* report = app.add_subcommand("report", "Aggregate record CSVs into a summary");
  std::vector<std::string> report_inputs;
  std::string report_out = "summary.json";
  report->add_option("--csv", report_inputs, "Records CSV files")->required();
  report->add_option("--out", report_out, "Summary JSON output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfigError;
  }

  try {
    if (gen->parsed()) {
      TabularMdp mdp = [&] {
        try {
          return generate_random_mdp(shape, env_seed);
        } catch (const std::exception& e) {
          throw ConfigError(e.what());
        }
      }();
      if (env_out.empty()) {
        write_mdp(out, mdp);
      } else {
        save_mdp(env_out, mdp);
        out << "wrote " << env_out << '\n';
      }
      if (!policy_out.empty()) save_policy(policy_out, boltzmann_baseline(mdp, policy_eta));
      return kExitOk;
    }
    if (run->parsed()) {
      const ExperimentConfig cfg = run_flags.resolve(default_experiment());
      return run_command(cfg, csv_path, summary_path, out, err);
    }
    if (offline->parsed()) {
      ExperimentConfig base = default_experiment();
      base.baseline = BaselineSource::Offline;
      ExperimentConfig cfg = offline_flags.resolve(std::move(base));
      if (cfg.baseline != BaselineSource::Offline) {
        throw ConfigError("offline: baseline must be 'offline' for this subcommand");
      }
      const TabularMdp mdp = load_environment(cfg);
      const OfflineConfig offline_cfg{cfg.delta, cfg.offline_c};
      const auto behavior = boltzmann_baseline(mdp, cfg.eta);
      const double behavior_value = policy_value(mdp, behavior);
      out << "behavior value " << format_real(behavior_value) << '\n';
      if (cfg.gamma && behavior_value > *cfg.gamma) {
        out << "sufficient offline samples (c=" << format_real(cfg.offline_c) << ") "
            << required_offline_samples(mdp.shape(), behavior_value, *cfg.gamma, offline_cfg) << '\n';
      }
      if (!dataset_out.empty()) {
        Rng rng(derive_seed(cfg.root_seed, 0, Stream::Offline));
        save_dataset(dataset_out, collect_offline(mdp, behavior, cfg.offline_n, rng));
      }
      return run_command(cfg, offline_csv, offline_summary, out, err);
    }
    if (report->parsed()) {
      std::vector<EpisodeRecord> records;
      std::size_t trial_offset = 0;
      for (const auto& path : report_inputs) {
        auto part = load_csv(path);
        std::size_t max_trial = 0;
        for (auto& r : part) {
          max_trial = std::max(max_trial, r.trial);
          r.trial += trial_offset;
          records.push_back(std::move(r));
        }
        if (!part.empty()) trial_offset += max_trial + 1;
      }
      ExperimentSummary summary;
      summary.algorithms = summarize_records(records);
      emit_summary_json(report_out, summary);
      out << "wrote " << report_out << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitConfigError;
}

}  // namespace conex::cli
