#include "sqrdln/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace sqrdln {

namespace {

using nlohmann::json;

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << std::setprecision(10);
  return out;
}

void check_compatible(const Model& model, const SeriesDataset& ds) {
  const auto& mc = model.config();
  if (mc.lstm.window != ds.window() || mc.lstm.input_features != ds.feature_count() ||
      mc.head.horizon != ds.horizon()) {
    std::ostringstream msg;
    msg << "checkpoint expects window " << mc.lstm.window << ", " << mc.lstm.input_features
        << " features, horizon " << mc.head.horizon << "; dataset has window " << ds.window()
        << ", " << ds.feature_count() << " features, horizon " << ds.horizon();
    throw ConfigError(msg.str());
  }
}

std::string format_tau(double tau) {
  std::ostringstream s;
  s << std::setprecision(6) << tau;
  return s.str();
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(10) << *v;
  return s.str();
}

}  // namespace

std::string model_label(HeadKind kind) {
  switch (kind) {
    case HeadKind::Point: return "LSTM-PP";
    case HeadKind::FixedQuantileQr: return "LSTM-QR";
    case HeadKind::Linear: return "LSTM-Lin";
    case HeadKind::Mlp: return "LSTM-NN";
    case HeadKind::ConstrainedLinear: return "LSTM-CLin";
    case HeadKind::Dln: return "LSTM-DLN";
  }
  return "?";
}

json data_manifest(const SeriesDataset& ds, const DataConfig& config) {
  const std::size_t extra = config.time_features ? 6 : 0;
  const auto& cols = ds.columns();
  json scale = json::array();
  for (const auto& p : ds.scale_params()) scale.push_back({p.min, p.max});
  return {{"columns", cols},
          {"input_columns", std::vector<std::string>(cols.begin(), cols.end() - static_cast<std::ptrdiff_t>(extra))},
          {"time_features", config.time_features},
          {"target_column", ds.target_column()},
          {"window", ds.window()},
          {"horizon", ds.horizon()},
          {"scale", scale}};
}

TrainOutcome cmd_train(const RunConfig& config, const std::filesystem::path& out_dir,
                       const TrainHooks& hooks) {
  const SeriesDataset ds = load_dataset(config);
  const ModelConfig mc = resolve_model_config(config, ds, config.head, config.seed);
  const TrainConfig tc = resolve_train_config(config, config.head, config.seed);
  ensure_dir(out_dir);

  TrainOutcome outcome;
  outcome.checkpoint = out_dir / "model.ckpt";
  outcome.log = out_dir / "train_log.jsonl";
  std::ofstream log = open_out(outcome.log);
  TrainHooks h = hooks;
  if (!h.log) h.log = &log;

  Model model(mc);
  outcome.result = train(model, ds, tc, h);
  model.save(outcome.checkpoint,
             {{"data", data_manifest(ds, config.data)},
              {"train",
               {{"epochs_run", outcome.result.epochs.size()},
                {"best_epoch", outcome.result.best_epoch},
                {"best_validation_crps", outcome.result.epochs.empty()
                                             ? json(nullptr)
                                             : json(outcome.result.best_validation_crps)}}}});
  return outcome;
}

Evaluation cmd_eval(const std::filesystem::path& checkpoint, const RunConfig& config,
                    Split split, const std::vector<double>& taus,
                    const std::filesystem::path& out_dir) {
  if (!std::filesystem::exists(checkpoint)) throw ConfigError("checkpoint not found: " + checkpoint.string());
  std::unique_ptr<Model> model;
  try {
    model = Model::load(checkpoint);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read checkpoint " + checkpoint.string() + ": " + e.what());
  }
  const SeriesDataset ds = load_dataset(config);
  check_compatible(*model, ds);
  Evaluation ev;
  try {
    ev = evaluate(*model, ds, split, taus);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  ensure_dir(out_dir);
  json report = to_json(ev.report);
  report["split"] = to_string(split);
  report["model"] = model_label(model->head().kind());
  report["warnings"] = ev.warnings;
  open_out(out_dir / "report.json") << report.dump(2) << '\n';
  write_curve_csv(out_dir / "picp.csv", ev.report.picp_curve);
  write_curve_csv(out_dir / "reliability.csv", ev.report.reliability_curve);
  return ev;
}

MetricSummary summarize(const std::vector<double>& values) {
  if (values.empty()) return {};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

std::vector<std::string> experiment_columns() {
  return {"model", "head", "runs", "CRPS", "CRPS_std", "MAE", "MAE_std", "RMSE", "RMSE_std",
          "ACE", "ACE_std", "SS", "SS_std"};
}

ExperimentResult cmd_experiment(const RunConfig& config, const std::vector<std::uint64_t>& seeds,
                                const std::filesystem::path& out_dir) {
  if (seeds.empty()) throw ConfigError("experiment needs at least one seed");
  const SeriesDataset ds = load_dataset(config);
  ensure_dir(out_dir);
  std::ofstream runs = open_out(out_dir / "runs.jsonl");

  ExperimentResult result;
  if (ds.clear_sky_column() && ds.window() >= 24) {
    const auto sp = persistence_score(ds, config.eval.split);
    std::vector<double> mae(seeds.size(), sp.point.mae), rmse(seeds.size(), sp.point.rmse);
    ExperimentRow row;
    row.model = "SP";
    row.mae = summarize(mae);
    row.rmse = summarize(rmse);
    row.runs = seeds.size();
    result.rows.push_back(row);
  }

  for (HeadKind head : config.experiment.heads) {
    std::vector<double> crps, mae, rmse, ace, ss;
    ExperimentRow row;
    row.model = model_label(head);
    row.head = to_string(head);
    for (std::uint64_t seed : seeds) {
      try {
        const ModelConfig mc = resolve_model_config(config, ds, head, seed);
        const TrainConfig tc = resolve_train_config(config, head, seed);
        Model model(mc);
        train(model, ds, tc);
        const Evaluation ev = evaluate(model, ds, config.eval.split, config.eval.taus);
        const MetricReport& r = ev.report;
        mae.push_back(r.mae);
        rmse.push_back(r.rmse);
        if (r.crps) crps.push_back(*r.crps);
        if (r.ace) ace.push_back(*r.ace);
        if (r.ss) ss.push_back(*r.ss);
        ++row.runs;
        runs << json{{"head", to_string(head)}, {"seed", seed}, {"report", to_json(r)}}.dump() << '\n';
      } catch (const NumericError& e) {
        result.failures.push_back(to_string(head) + " seed " + std::to_string(seed) + ": " + e.what());
        result.exit_code = kExitNumeric;
      } catch (const std::exception& e) {
        result.failures.push_back(to_string(head) + " seed " + std::to_string(seed) + ": " + e.what());
        if (result.exit_code == kExitOk) result.exit_code = kExitFailure;
      }
    }
    row.crps = summarize(crps);
    row.mae = summarize(mae);
    row.rmse = summarize(rmse);
    row.ace = summarize(ace);
    row.ss = summarize(ss);
    result.rows.push_back(row);
  }

  std::ofstream csv = open_out(out_dir / "experiment.csv");
  const auto cols = experiment_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
  csv << '\n';
  for (const auto& r : result.rows) {
    csv << r.model << ',' << r.head << ',' << r.runs;
    for (const MetricSummary* m : {&r.crps, &r.mae, &r.rmse, &r.ace, &r.ss}) {
      csv << ',' << cell(m->mean) << ',' << cell(m->stddev);
    }
    csv << '\n';
  }
  return result;
}

void rank_trials(std::vector<TuneTrial>& trials) {
  std::stable_sort(trials.begin(), trials.end(), [](const TuneTrial& a, const TuneTrial& b) {
    if (a.skipped != b.skipped) return !a.skipped;
    if (!a.skipped) {
      if (a.validation_crps != b.validation_crps) return a.validation_crps < b.validation_crps;
      if (a.validation_ace != b.validation_ace) return a.validation_ace < b.validation_ace;
    }
    return a.params.dump() < b.params.dump();
  });
  int rank = 0;
  for (auto& t : trials) t.rank = t.skipped ? 0 : ++rank;
}

namespace {

std::vector<json> cartesian(const json& grid) {
  std::vector<json> combos = {json::object()};
  for (const auto& [key, values] : grid.items()) {
    std::vector<json> next;
    for (const auto& base : combos) {
      for (const auto& v : values) {
        json c = base;
        c[key] = v;
        next.push_back(std::move(c));
      }
    }
    combos = std::move(next);
  }
  return combos;
}

// Narrows each numeric axis to the best value and the midpoints towards its
// grid neighbours.
json refine_grid(const json& grid, const json& best) {
  json refined = json::object();
  for (const auto& [key, values] : grid.items()) {
    const json& v = best.at(key);
    bool numeric = v.is_number();
    bool integral = v.is_number_integer();
    for (const auto& x : values) {
      numeric = numeric && x.is_number();
      integral = integral && x.is_number_integer();
    }
    if (!numeric) {
      refined[key] = json::array({v});
      continue;
    }
    std::vector<double> sorted;
    for (const auto& x : values) sorted.push_back(x.get<double>());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    const double b = v.get<double>();
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), b);
    std::vector<double> out = {b};
    if (it != sorted.begin()) out.push_back((b + *(it - 1)) / 2.0);
    if (it + 1 < sorted.end()) out.push_back((b + *(it + 1)) / 2.0);
    json arr = json::array();
    std::set<double> seen;
    for (double x : out) {
      const double y = integral ? std::round(x) : x;
      if (!seen.insert(y).second) continue;
      if (integral) {
        arr.push_back(static_cast<long long>(y));
      } else {
        arr.push_back(y);
      }
    }
    refined[key] = arr;
  }
  return refined;
}

TuneTrial run_trial(const RunConfig& base, const json& params, const SeriesDataset* shared_ds) {
  TuneTrial t;
  t.params = params;
  try {
    json doc = base.source;
    set_dotted(doc, "train.epochs", base.tune.epochs);
    for (const auto& [key, value] : params.items()) set_dotted(doc, key, value);
    RunConfig cfg = parse_config(doc);
    cfg.data_path = base.data_path;
    std::optional<SeriesDataset> own;
    if (!shared_ds) own.emplace(load_dataset(cfg));
    const SeriesDataset& ds = shared_ds ? *shared_ds : *own;
    const ModelConfig mc = resolve_model_config(cfg, ds, cfg.head, cfg.seed);
    t.parameter_count = model_parameter_count(mc);
    if (t.parameter_count > base.tune.max_params) {
      t.skipped = true;
      t.reason = "parameter count " + std::to_string(t.parameter_count) + " exceeds cap " +
                 std::to_string(base.tune.max_params);
      return t;
    }
    Model model(mc);
    train(model, ds, resolve_train_config(cfg, cfg.head, cfg.seed));
    const Evaluation ev = evaluate(model, ds, Split::Validation, cfg.eval.taus);
    t.validation_crps = ev.report.crps.value_or(ev.report.mae);
    t.validation_ace = ev.report.ace.value_or(std::numeric_limits<double>::infinity());
  } catch (const std::exception& e) {
    t.skipped = true;
    t.reason = e.what();
  }
  return t;
}

}  // namespace

std::vector<TuneTrial> cmd_tune(const RunConfig& config, const std::filesystem::path& out_dir) {
  if (config.tune.grid.empty()) throw ConfigError("tune.grid is empty");
  bool data_varies = false;
  for (const auto& [key, _] : config.tune.grid.items()) data_varies = data_varies || key.rfind("data.", 0) == 0;
  std::optional<SeriesDataset> shared;
  if (!data_varies) shared.emplace(load_dataset(config));
  const SeriesDataset* ds = shared ? &*shared : nullptr;

  std::vector<TuneTrial> trials;
  std::set<std::string> done;
  for (const auto& params : cartesian(config.tune.grid)) {
    done.insert(params.dump());
    trials.push_back(run_trial(config, params, ds));
  }
  rank_trials(trials);
  if (config.tune.refine && !trials.empty() && !trials.front().skipped) {
    for (const auto& params : cartesian(refine_grid(config.tune.grid, trials.front().params))) {
      if (!done.insert(params.dump()).second) continue;
      trials.push_back(run_trial(config, params, ds));
    }
    rank_trials(trials);
  }

  ensure_dir(out_dir);
  std::ofstream csv = open_out(out_dir / "tune_trials.csv");
  std::vector<std::string> keys;
  for (const auto& [key, _] : config.tune.grid.items()) keys.push_back(key);
  csv << "rank";
  for (const auto& k : keys) csv << ',' << k;
  csv << ",parameter_count,validation_crps,validation_ace,status\n";
  for (const auto& t : trials) {
    csv << t.rank;
    for (const auto& k : keys) {
      const json& v = t.params.at(k);
      csv << ',' << (v.is_string() ? v.get<std::string>() : v.dump());
    }
    csv << ',' << t.parameter_count;
    if (t.skipped) {
      std::string reason = t.reason;
      std::replace(reason.begin(), reason.end(), '"', '\'');
      csv << ",,,\"skipped: " << reason << "\"\n";
    } else {
      csv << ',' << t.validation_crps << ',' << t.validation_ace << ",ok\n";
    }
  }
  return trials;
}

void write_forecast_csv(std::ostream& out, const ForecastBatch& batch) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(10);
  out << "step";
  for (double tau : batch.taus) out << ",tau_" << format_tau(tau);
  out << '\n';
  for (std::size_t j = 0; j < batch.horizon; ++j) {
    out << j + 1;
    for (std::size_t k = 0; k < batch.quantiles(); ++k) out << ',' << batch.at(k, j);
    out << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

ForecastBatch cmd_forecast(const std::filesystem::path& checkpoint,
                           const std::filesystem::path& window_csv,
                           const std::vector<double>& taus, std::ostream& out) {
  if (!std::filesystem::exists(checkpoint)) throw ConfigError("checkpoint not found: " + checkpoint.string());
  json extra;
  std::unique_ptr<Model> model;
  try {
    model = Model::load(checkpoint, &extra);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read checkpoint " + checkpoint.string() + ": " + e.what());
  }
  if (!extra.contains("data")) throw ConfigError("checkpoint carries no data manifest");
  const json& m = extra.at("data");
  const auto inputs = m.at("input_columns").get<std::vector<std::string>>();
  const bool time_feats = m.at("time_features").get<bool>();
  const auto scale = m.at("scale").get<std::vector<std::array<double, 2>>>();
  const std::size_t target = m.at("target_column").get<std::size_t>();
  const std::size_t w = model->config().lstm.window;

  RawSeries raw;
  try {
    raw = read_csv(window_csv);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (raw.rows() < w) {
    throw ConfigError("window file has " + std::to_string(raw.rows()) + " rows; the model needs " +
                      std::to_string(w));
  }
  std::vector<std::size_t> col_index;
  for (const auto& name : inputs) {
    const auto it = std::find(raw.columns.begin(), raw.columns.end(), name);
    if (it == raw.columns.end()) throw ConfigError("window file lacks column '" + name + "'");
    col_index.push_back(static_cast<std::size_t>(it - raw.columns.begin()));
  }
  const std::size_t f = scale.size();
  std::vector<double> window;
  window.reserve(w * f);
  const auto apply = [&](std::size_t c, double v) {
    const ScaleParams p{scale[c][0], scale[c][1]};
    window.push_back(p.scale(v));
  };
  for (std::size_t r = raw.rows() - w; r < raw.rows(); ++r) {
    for (std::size_t c = 0; c < col_index.size(); ++c) apply(c, raw.at(r, col_index[c]));
    if (time_feats) {
      const auto tf = time_features(raw.timestamps[r]);
      for (std::size_t c = 0; c < tf.size(); ++c) apply(col_index.size() + c, tf[c]);
    }
  }
  if (window.size() != w * model->config().lstm.input_features) {
    throw ConfigError("window file does not match the checkpoint's feature layout");
  }
  ForecastBatch batch;
  try {
    batch = exploit(*model, window, taus, 0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const ScaleParams tp{scale[target][0], scale[target][1]};
  for (double& v : batch.values) v = tp.unscale(v);
  write_forecast_csv(out, batch);
  return batch;
}

json cmd_bench(const std::filesystem::path& checkpoint, std::size_t repeats,
               const std::vector<double>& taus) {
  if (!std::filesystem::exists(checkpoint)) throw ConfigError("checkpoint not found: " + checkpoint.string());
  std::unique_ptr<Model> model;
  try {
    model = Model::load(checkpoint);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read checkpoint " + checkpoint.string() + ": " + e.what());
  }
  const auto& lc = model->config().lstm;
  const std::vector<double> window(lc.window * lc.input_features, 0.5);
  const TimingReport t = timing_probe(*model, window, taus, repeats);
  return {{"model", model_label(model->head().kind())},
          {"mean_seconds", t.mean_seconds},
          {"variance_seconds", t.variance_seconds},
          {"repeats", t.repeats},
          {"quantiles", taus.size()},
          {"parameter_count", t.parameter_count}};
}

}  // namespace sqrdln
