// Command-line front end: train, eval, experiment, tune, forecast, bench, synth.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "sqrdln/commands.hpp"
#include "sqrdln/synth.hpp"

using namespace sqrdln;

namespace {

std::vector<double> parse_taus(const std::string& text) {
  if (text.empty()) return default_quantile_grid();
  std::vector<double> taus;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      taus.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad quantile level '" + item + "' in --taus");
    }
  }
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] >= 0.0 && taus[i] <= 1.0) || (i > 0 && !(taus[i] > taus[i - 1]))) {
      throw ConfigError("--taus must be strictly increasing in [0,1]");
    }
  }
  if (taus.empty()) throw ConfigError("--taus is empty");
  return taus;
}

RunConfig config_with_overrides(const std::string& path, const std::string& dataset) {
  RunConfig c = load_config(path);
  if (!dataset.empty()) {
    c.data_path = dataset;
    c.synth.reset();
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LSTM feature extractor with simultaneous quantile regression heads"};
  app.require_subcommand(1);

  std::string config_path, dataset, split_name, taus_text, out_dir, checkpoint, window_path;
  std::vector<std::uint64_t> seeds;
  std::uint64_t seed = 0;
  std::size_t repeats = 100, max_params = 0;
  bool refine = false;

  auto* train_cmd = app.add_subcommand("train", "Train one model and write a checkpoint");
  train_cmd->add_option("--config", config_path, "JSON config")->required();
  train_cmd->add_option("--seed", seed, "Overrides the config seed");
  train_cmd->add_option("--dataset", dataset, "CSV dataset, overrides the config");
  train_cmd->add_option("--out-dir", out_dir, "Output directory");

  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on a split");
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--config", config_path, "JSON config naming the dataset")->required();
  eval_cmd->add_option("--dataset", dataset);
  eval_cmd->add_option("--split", split_name, "train, validation or test");
  eval_cmd->add_option("--taus", taus_text, "Comma-separated quantile levels");
  eval_cmd->add_option("--out-dir", out_dir);

  auto* exp_cmd = app.add_subcommand("experiment", "Multi-seed comparison of heads");
  exp_cmd->add_option("--config", config_path)->required();
  exp_cmd->add_option("--seeds", seeds, "Seeds, overrides the config")->delimiter(',');
  exp_cmd->add_option("--dataset", dataset);
  exp_cmd->add_option("--out-dir", out_dir);

  auto* tune_cmd = app.add_subcommand("tune", "Grid search ranked by validation CRPS then ACE");
  tune_cmd->add_option("--config", config_path)->required();
  tune_cmd->add_option("--dataset", dataset);
  tune_cmd->add_option("--max-params", max_params, "Parameter cap, overrides the config");
  tune_cmd->add_flag("--refine", refine, "Rerun a narrowed grid around the best trial");
  tune_cmd->add_option("--out-dir", out_dir);

  auto* fc_cmd = app.add_subcommand("forecast", "Quantile forecast from a window CSV");
  fc_cmd->add_option("--checkpoint", checkpoint)->required();
  fc_cmd->add_option("--window", window_path, "CSV with at least `window` rows")->required();
  fc_cmd->add_option("--taus", taus_text);
  fc_cmd->add_option("--out", out_dir, "Output CSV (stdout when omitted)");

  auto* bench_cmd = app.add_subcommand("bench", "Time one exploitation pass");
  bench_cmd->add_option("--checkpoint", checkpoint)->required();
  bench_cmd->add_option("--repeats", repeats);
  bench_cmd->add_option("--taus", taus_text);

  std::string synth_kind = "heteroscedastic-sine", synth_out;
  std::size_t synth_length = 5000;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
  synth_cmd->add_option("--kind", synth_kind, "heteroscedastic-sine or clear-sky-ramp");
  synth_cmd->add_option("--length", synth_length);
  synth_cmd->add_option("--seed", seed);
  synth_cmd->add_option("--out", synth_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) {
      RunConfig c = config_with_overrides(config_path, dataset);
      if (train_cmd->count("--seed")) c.seed = seed;
      const auto outcome = cmd_train(c, out_dir.empty() ? c.out_dir : std::filesystem::path(out_dir));
      std::cout << outcome.checkpoint.string() << '\n';
    } else if (*eval_cmd) {
      RunConfig c = config_with_overrides(config_path, dataset);
      const Split split = split_name.empty() ? c.eval.split : split_from_string(split_name);
      const auto taus = taus_text.empty() ? c.eval.taus : parse_taus(taus_text);
      const auto ev = cmd_eval(checkpoint, c, split, taus, out_dir.empty() ? c.out_dir : std::filesystem::path(out_dir));
      for (const auto& w : ev.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << to_json(ev.report).dump(2) << '\n';
    } else if (*exp_cmd) {
      RunConfig c = config_with_overrides(config_path, dataset);
      const auto result = cmd_experiment(c, seeds.empty() ? c.experiment.seeds : seeds,
                                         out_dir.empty() ? c.out_dir : std::filesystem::path(out_dir));
      for (const auto& f : result.failures) std::cerr << "failed: " << f << '\n';
      return result.exit_code;
    } else if (*tune_cmd) {
      RunConfig c = config_with_overrides(config_path, dataset);
      if (tune_cmd->count("--max-params")) c.tune.max_params = max_params;
      if (refine) c.tune.refine = true;
      const auto trials = cmd_tune(c, out_dir.empty() ? c.out_dir : std::filesystem::path(out_dir));
      for (const auto& t : trials) {
        std::cout << (t.skipped ? "skip" : std::to_string(t.rank)) << ' ' << t.params.dump();
        if (t.skipped) {
          std::cout << ' ' << t.reason;
        } else {
          std::cout << " crps=" << t.validation_crps << " ace=" << t.validation_ace;
        }
        std::cout << '\n';
      }
    } else if (*fc_cmd) {
      const auto taus = parse_taus(taus_text);
      if (out_dir.empty()) {
        cmd_forecast(checkpoint, window_path, taus, std::cout);
      } else {
        std::ofstream out(out_dir);
        if (!out) throw ConfigError("cannot write " + out_dir);
        cmd_forecast(checkpoint, window_path, taus, out);
      }
    } else if (*bench_cmd) {
      std::cout << cmd_bench(checkpoint, repeats, parse_taus(taus_text)).dump(2) << '\n';
    } else if (*synth_cmd) {
      write_csv(synth_out, synth_series(synth_kind_from_string(synth_kind), synth_length,
                                        synth_cmd->count("--seed") ? seed : 1));
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
