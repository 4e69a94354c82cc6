#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sqrdln/commands.hpp"

using namespace sqrdln;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("sqrdln_cmd_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

json tiny_doc(const std::string& kind = "clear-sky-ramp") {
  return {{"data",
           {{"synthetic", {{"kind", kind}, {"length", 600}, {"seed", 2}}},
            {"window", 24},
            {"horizon", 6}}},
          {"model",
           {{"head", "dln"},
            {"hidden_size", 3},
            {"num_layers", 1},
            {"dln", {{"feature_calib_keypoints", 5}, {"lattice_keypoints", 3}, {"output_calib_keypoints", 7}}}}},
          {"train", {{"epochs", 1}, {"batch_size", 64}}},
          {"experiment", {{"heads", {"dln", "point"}}, {"seeds", {1}}}}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(tiny_doc());
  CHECK(c.synth.has_value());
  CHECK(c.data.window == 24);
  CHECK(c.head == HeadKind::Dln);
  CHECK(c.dln.lattice_keypoints == 3);
  CHECK(c.eval.taus == default_quantile_grid());
  CHECK(c.eval.taus.size() == 11);
  CHECK(c.eval.taus.front() == doctest::Approx(0.025));
  CHECK(c.eval.taus.back() == doctest::Approx(0.975));
  const auto t = resolve_train_config(c, HeadKind::Mlp, 3);
  CHECK(t.epochs == 1);
  CHECK(t.scheduler.increase_patience == 1);  // per-head default survives
  CHECK(t.seed == 3);

  json bad = tiny_doc();
  bad["model"]["colour"] = "red";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  json bad_type = tiny_doc();
  bad_type["train"]["epochs"] = "many";
  CHECK_THROWS_AS(parse_config(bad_type), ConfigError);
  json bad_head = tiny_doc();
  bad_head["model"]["head"] = "forest";
  CHECK_THROWS_AS(parse_config(bad_head), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);

  json missing = tiny_doc();
  missing["data"].erase("synthetic");
  missing["data"]["path"] = "/nonexistent/data.csv";
  CHECK_THROWS_AS(load_dataset(parse_config(missing)), ConfigError);

  json d = json::object();
  set_dotted(d, "model.dln.lattice_keypoints", 5);
  CHECK(d["model"]["dln"]["lattice_keypoints"] == 5);
}

TEST_CASE("train twice with one seed gives identical checkpoints") {
  const auto dir = scratch("train");
  RunConfig c = parse_config(tiny_doc());
  const auto a = cmd_train(c, dir / "a");
  const auto b = cmd_train(c, dir / "b");
  CHECK(slurp(a.checkpoint) == slurp(b.checkpoint));
  CHECK(slurp(a.log) == slurp(b.log));
  c.seed = 2;
  const auto other = cmd_train(c, dir / "c");
  CHECK(slurp(a.checkpoint) != slurp(other.checkpoint));
}

TEST_CASE("zero-epoch training writes the initialization") {
  const auto dir = scratch("zero");
  json doc = tiny_doc();
  doc["train"]["epochs"] = 0;
  const RunConfig c = parse_config(doc);
  const auto out = cmd_train(c, dir);
  const SeriesDataset ds = load_dataset(c);
  Model fresh(resolve_model_config(c, ds, c.head, c.seed));
  CHECK(Model::load(out.checkpoint)->snapshot() == fresh.snapshot());
}

TEST_CASE("eval writes a report and curves") {
  const auto dir = scratch("eval");
  const RunConfig c = parse_config(tiny_doc());
  const auto trained = cmd_train(c, dir);
  const auto ev = cmd_eval(trained.checkpoint, c, Split::Test, default_quantile_grid(), dir);
  CHECK(ev.report.crossover_rate == 0.0);
  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report.contains("crps"));
  CHECK(report.contains("ss"));
  CHECK(report["split"] == "test");
  CHECK(read_rows(dir / "picp.csv").size() == 6);
  CHECK(read_rows(dir / "reliability.csv").size() == 12);

  json other = tiny_doc();
  other["data"]["horizon"] = 4;
  CHECK_THROWS_AS(cmd_eval(trained.checkpoint, parse_config(other), Split::Test,
                           default_quantile_grid(), dir),
                  ConfigError);
  CHECK_THROWS_AS(cmd_eval(dir / "absent.ckpt", c, Split::Test, default_quantile_grid(), dir), ConfigError);
}

TEST_CASE("experiment table") {
  const auto dir = scratch("experiment");
  const RunConfig c = parse_config(tiny_doc());
  const auto r = cmd_experiment(c, {1, 1}, dir);
  CHECK(r.exit_code == kExitOk);
  const auto rows = read_rows(dir / "experiment.csv");
  REQUIRE(rows.size() == 4);  // header, SP, DLN, PP
  CHECK(rows[0] == experiment_columns());
  CHECK(rows[1][0] == "SP");
  CHECK(rows[2][0] == "LSTM-DLN");
  CHECK(rows[3][0] == "LSTM-PP");
  for (std::size_t r_i = 1; r_i < rows.size(); ++r_i) {
    for (std::size_t col = 4; col < rows[0].size(); col += 2) {
      if (!rows[r_i][col].empty()) CHECK(std::stod(rows[r_i][col]) == 0.0);
    }
  }
  CHECK(rows[3][3].empty());  // point predictor has no CRPS
  const auto single = cmd_experiment(c, {3}, scratch("experiment1"));
  for (const auto& row : single.rows) {
    if (row.mae.stddev) CHECK(*row.mae.stddev == 0.0);
  }
  const auto s = summarize({1.0, 3.0});
  CHECK(*s.mean == 2.0);
  CHECK(*s.stddev == 1.0);
  CHECK_FALSE(summarize({}).mean.has_value());
}

TEST_CASE("tune grid, ranking and parameter cap") {
  const auto dir = scratch("tune");
  json doc = tiny_doc("heteroscedastic-sine");
  doc["tune"] = {{"epochs", 1}, {"grid", {{"train.learning_rate", {0.01}}}}};
  const auto one = cmd_tune(parse_config(doc), dir);
  REQUIRE(one.size() == 1);
  CHECK(one[0].rank == 1);
  CHECK_FALSE(one[0].skipped);

  json capped = tiny_doc("heteroscedastic-sine");
  capped["model"]["hidden_size"] = 128;
  capped["tune"] = {{"epochs", 1},
                    {"max_params", 5000000},
                    {"grid", {{"model.dln.lattice_keypoints", {21}}, {"model.dln.lattice_input_size", {4}}}}};
  const auto skip = cmd_tune(parse_config(capped), dir);
  REQUIRE(skip.size() == 1);
  CHECK(skip[0].skipped);
  CHECK(skip[0].reason.find("exceeds cap") != std::string::npos);
  CHECK(skip[0].parameter_count > 5000000);

  std::vector<TuneTrial> trials(4);
  const double crps[4] = {0.3, 0.1, 0.1, 0.2};
  const double aces[4] = {0.0, 0.05, 0.02, 0.0};
  for (int i = 0; i < 4; ++i) {
    trials[i].params = {{"k", i}};
    trials[i].validation_crps = crps[i];
    trials[i].validation_ace = aces[i];
  }
  trials[0].skipped = true;
  auto a = trials;
  auto b = std::vector<TuneTrial>(trials.rbegin(), trials.rend());
  rank_trials(a);
  rank_trials(b);
  for (std::size_t i = 0; i < 4; ++i) CHECK(a[i].params == b[i].params);
  CHECK(a[0].params["k"] == 2);  // CRPS tie broken by ACE
  CHECK(a[3].rank == 0);
}

TEST_CASE("forecast and bench") {
  const auto dir = scratch("forecast");
  const RunConfig c = parse_config(tiny_doc());
  const auto trained = cmd_train(c, dir);
  const auto raw = synth_series(SynthKind::ClearSkyRamp, 100, 5);
  write_csv(dir / "window.csv", raw);
  std::ostringstream first, second;
  const auto batch = cmd_forecast(trained.checkpoint, dir / "window.csv", default_quantile_grid(), first);
  cmd_forecast(trained.checkpoint, dir / "window.csv", default_quantile_grid(), second);
  CHECK(first.str() == second.str());
  CHECK(batch.quantiles() == 11);
  CHECK(crossover_rate(batch) == 0.0);
  std::istringstream lines(first.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header.rfind("step,tau_0.025,", 0) == 0);
  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 6);

  RawSeries short_raw = raw;
  short_raw.timestamps.resize(10);
  short_raw.values.resize(20);
  write_csv(dir / "short.csv", short_raw);
  std::ostringstream sink;
  CHECK_THROWS_AS(cmd_forecast(trained.checkpoint, dir / "short.csv", default_quantile_grid(), sink), ConfigError);

  const json bench = cmd_bench(trained.checkpoint, 3, default_quantile_grid());
  CHECK(bench["repeats"] == 3);
  CHECK(bench["parameter_count"].get<std::size_t>() == Model::load(trained.checkpoint)->parameter_count());
}
