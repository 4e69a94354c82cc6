#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqrdln/dataset.hpp"
#include "sqrdln/model.hpp"
#include "sqrdln/synth.hpp"
#include "sqrdln/trainer.hpp"

namespace sqrdln {

/// Invalid or unreadable configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthSource {
  SynthKind kind = SynthKind::HeteroscedasticSine;
  std::size_t length = 5000;
  std::uint64_t seed = 1;
};

struct EvalConfig {
  Split split = Split::Test;
  std::vector<double> taus = default_quantile_grid();
};

struct ExperimentConfig {
  std::vector<HeadKind> heads = all_head_kinds();
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
};

struct TuneConfig {
  int epochs = 3;
  std::size_t max_params = 5'000'000;
  bool refine = false;
  nlohmann::json grid = nlohmann::json::object();  // dotted key -> list of values
};

/// One parsed configuration document.
///
/// Sections: "data", "model", "train", "eval", "experiment", "tune", plus the
/// top-level "seed" and "out_dir". Optimizer settings that the "train"
/// section leaves out fall back to the per-head defaults.
struct RunConfig {
  std::optional<std::filesystem::path> data_path;
  std::optional<SynthSource> synth;
  DataConfig data;

  HeadKind head = HeadKind::Dln;
  std::size_t hidden_size = 128;
  std::size_t num_layers = 2;
  DlnHeadConfig dln;
  std::size_t mlp_width = 0;
  std::vector<double> qr_taus = default_quantile_grid();

  nlohmann::json train = nlohmann::json::object();  // validated overrides
  EvalConfig eval;
  ExperimentConfig experiment;
  TuneConfig tune;

  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";

  nlohmann::json source = nlohmann::json::object();  // document as given
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Builds the dataset the config points at (CSV file or synthetic generator).
SeriesDataset load_dataset(const RunConfig& config);

ModelConfig resolve_model_config(const RunConfig& config, const SeriesDataset& ds,
                                 HeadKind head, std::uint64_t seed);
TrainConfig resolve_train_config(const RunConfig& config, HeadKind head, std::uint64_t seed);

/// Writes `value` at a dotted path such as "model.dln.lattice_keypoints".
void set_dotted(nlohmann::json& doc, const std::string& dotted_key, const nlohmann::json& value);

}  // namespace sqrdln
