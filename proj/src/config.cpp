#include "sqrdln/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace sqrdln {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for " + where + "." + key + ": " + obj.at(key).dump());
  }
}

template <typename T>
T positive(T value, const std::string& what) {
  if (!(value > T{})) throw ConfigError(what + " must be positive");
  return value;
}

std::vector<double> read_taus(const json& obj, const char* key, std::vector<double> fallback,
                              const std::string& where) {
  read(obj, key, fallback, where);
  if (fallback.empty()) throw ConfigError(where + "." + key + " is empty");
  for (std::size_t i = 0; i < fallback.size(); ++i) {
    if (!(fallback[i] >= 0.0 && fallback[i] <= 1.0) || (i > 0 && !(fallback[i] > fallback[i - 1]))) {
      throw ConfigError(where + "." + key + " must be strictly increasing in [0,1]");
    }
  }
  return fallback;
}

const std::set<std::string> kTrainKeys = {
    "epochs", "batch_size", "learning_rate", "milestones", "milestone_factor",
    "increase_patience", "increase_factor", "tau_sampling", "early_stopping_patience",
    "validation_taus", "adam_beta1", "adam_beta2", "adam_epsilon"};

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig c;
  c.source = doc;
  check_keys(doc, "config", {"data", "model", "train", "eval", "experiment", "tune", "seed", "out_dir"});
  read(doc, "seed", c.seed, "config");
  if (doc.contains("out_dir")) {
    std::string dir;
    read(doc, "out_dir", dir, "config");
    c.out_dir = dir;
  }

  if (doc.contains("data")) {
    const json& d = doc.at("data");
    check_keys(d, "data", {"path", "synthetic", "target", "clear_sky", "window", "horizon",
                           "train_fraction", "validation_fraction", "time_features"});
    if (d.contains("path")) {
      std::string p;
      read(d, "path", p, "data");
      c.data_path = p;
    }
    if (d.contains("synthetic")) {
      const json& s = d.at("synthetic");
      check_keys(s, "data.synthetic", {"kind", "length", "seed"});
      SynthSource src;
      std::string kind = to_string(src.kind);
      read(s, "kind", kind, "data.synthetic");
      try {
        src.kind = synth_kind_from_string(kind);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      read(s, "length", src.length, "data.synthetic");
      read(s, "seed", src.seed, "data.synthetic");
      c.synth = src;
    }
    if (c.data_path && c.synth) throw ConfigError("data.path and data.synthetic are mutually exclusive");
    read(d, "target", c.data.target, "data");
    if (d.contains("clear_sky")) {
      if (d.at("clear_sky").is_null()) {
        c.data.clear_sky.reset();
      } else {
        std::string cs;
        read(d, "clear_sky", cs, "data");
        c.data.clear_sky = cs;
      }
    }
    read(d, "window", c.data.window, "data");
    read(d, "horizon", c.data.horizon, "data");
    read(d, "train_fraction", c.data.train_fraction, "data");
    read(d, "validation_fraction", c.data.validation_fraction, "data");
    read(d, "time_features", c.data.time_features, "data");
  }
  try {
    c.data.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (doc.contains("model")) {
    const json& m = doc.at("model");
    check_keys(m, "model", {"head", "hidden_size", "num_layers", "dln", "mlp_width", "qr_taus"});
    if (m.contains("head")) {
      std::string head;
      read(m, "head", head, "model");
      try {
        c.head = head_kind_from_string(head);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    read(m, "hidden_size", c.hidden_size, "model");
    read(m, "num_layers", c.num_layers, "model");
    positive(c.hidden_size, "model.hidden_size");
    positive(c.num_layers, "model.num_layers");
    read(m, "mlp_width", c.mlp_width, "model");
    c.qr_taus = read_taus(m, "qr_taus", c.qr_taus, "model");
    if (m.contains("dln")) {
      const json& d = m.at("dln");
      check_keys(d, "model.dln", {"feature_calib_keypoints", "quantile_calib_keypoints",
                                  "lattice_keypoints", "output_calib_keypoints",
                                  "lattice_input_size", "lattice_init_noise"});
      read(d, "feature_calib_keypoints", c.dln.feature_calib_keypoints, "model.dln");
      read(d, "quantile_calib_keypoints", c.dln.quantile_calib_keypoints, "model.dln");
      read(d, "lattice_keypoints", c.dln.lattice_keypoints, "model.dln");
      read(d, "output_calib_keypoints", c.dln.output_calib_keypoints, "model.dln");
      read(d, "lattice_input_size", c.dln.lattice_input_size, "model.dln");
      read(d, "lattice_init_noise", c.dln.lattice_init_noise, "model.dln");
    }
    try {
      c.dln.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  if (doc.contains("train")) {
    const json& t = doc.at("train");
    check_keys(t, "train", kTrainKeys);
    c.train = t;
  }

  if (doc.contains("eval")) {
    const json& e = doc.at("eval");
    check_keys(e, "eval", {"split", "taus"});
    if (e.contains("split")) {
      std::string s;
      read(e, "split", s, "eval");
      try {
        c.eval.split = split_from_string(s);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
      }
    }
    c.eval.taus = read_taus(e, "taus", c.eval.taus, "eval");
  }

  if (doc.contains("experiment")) {
    const json& e = doc.at("experiment");
    check_keys(e, "experiment", {"heads", "seeds"});
    if (e.contains("heads")) {
      std::vector<std::string> names;
      read(e, "heads", names, "experiment");
      c.experiment.heads.clear();
      for (const auto& n : names) {
        try {
          c.experiment.heads.push_back(head_kind_from_string(n));
        } catch (const std::invalid_argument& ex) {
          throw ConfigError(ex.what());
        }
      }
    }
    read(e, "seeds", c.experiment.seeds, "experiment");
    if (c.experiment.heads.empty()) throw ConfigError("experiment.heads is empty");
    if (c.experiment.seeds.empty()) throw ConfigError("experiment.seeds is empty");
  }

  if (doc.contains("tune")) {
    const json& t = doc.at("tune");
    check_keys(t, "tune", {"epochs", "max_params", "refine", "grid"});
    read(t, "epochs", c.tune.epochs, "tune");
    read(t, "max_params", c.tune.max_params, "tune");
    read(t, "refine", c.tune.refine, "tune");
    if (t.contains("grid")) {
      c.tune.grid = t.at("grid");
      if (!c.tune.grid.is_object()) throw ConfigError("tune.grid must be an object");
      for (const auto& [key, values] : c.tune.grid.items()) {
        if (!values.is_array() || values.empty()) {
          throw ConfigError("tune.grid." + key + " must be a nonempty list");
        }
      }
    }
  }

  // Resolve the train section once so bad values fail at load time.
  (void)resolve_train_config(c, c.head, c.seed);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  auto c = parse_config(doc);
  // Relative data paths are resolved against the config file's directory.
  if (c.data_path && c.data_path->is_relative() && !std::filesystem::exists(*c.data_path)) {
    c.data_path = path.parent_path() / *c.data_path;
  }
  return c;
}

SeriesDataset load_dataset(const RunConfig& config) {
  try {
    if (config.synth) {
      return synth_generate(config.synth->kind, config.synth->length, config.synth->seed, config.data);
    }
    if (!config.data_path) throw ConfigError("config names no dataset (data.path or data.synthetic)");
    if (!std::filesystem::exists(*config.data_path)) {
      throw ConfigError("dataset file not found: " + config.data_path->string());
    }
    return load_csv(*config.data_path, config.data);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

ModelConfig resolve_model_config(const RunConfig& config, const SeriesDataset& ds,
                                 HeadKind head, std::uint64_t seed) {
  ModelConfig m;
  m.lstm.input_features = ds.feature_count();
  m.lstm.hidden_size = config.hidden_size;
  m.lstm.num_layers = config.num_layers;
  m.lstm.window = ds.window();
  m.head.kind = head;
  m.head.horizon = ds.horizon();
  m.head.dln = config.dln;
  m.head.mlp_width = config.mlp_width;
  m.head.qr_taus = config.qr_taus;
  m.seed = seed;
  m.sync();
  return m;
}

TrainConfig resolve_train_config(const RunConfig& config, HeadKind head, std::uint64_t seed) {
  TrainConfig t = default_train_config(head);
  t.seed = seed;
  const json& o = config.train;
  read(o, "epochs", t.epochs, "train");
  read(o, "batch_size", t.batch_size, "train");
  read(o, "learning_rate", t.scheduler.base_lr, "train");
  read(o, "milestones", t.scheduler.milestones, "train");
  read(o, "milestone_factor", t.scheduler.milestone_factor, "train");
  read(o, "increase_patience", t.scheduler.increase_patience, "train");
  read(o, "increase_factor", t.scheduler.increase_factor, "train");
  read(o, "early_stopping_patience", t.early_stopping_patience, "train");
  read(o, "adam_beta1", t.adam.beta1, "train");
  read(o, "adam_beta2", t.adam.beta2, "train");
  read(o, "adam_epsilon", t.adam.epsilon, "train");
  if (o.contains("tau_sampling")) {
    std::string s;
    read(o, "tau_sampling", s, "train");
    if (s == "per-batch") {
      t.tau_sampling = TauSampling::PerBatch;
    } else if (s == "per-sample") {
      t.tau_sampling = TauSampling::PerSample;
    } else {
      throw ConfigError("train.tau_sampling must be 'per-batch' or 'per-sample'");
    }
  }
  t.validation_taus = read_taus(o, "validation_taus", t.validation_taus, "train");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return t;
}

void set_dotted(nlohmann::json& doc, const std::string& dotted_key, const nlohmann::json& value) {
  json* node = &doc;
  std::stringstream ss(dotted_key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("bad dotted key '" + dotted_key + "'");
    parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("empty dotted key");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
    node = &(*node)[parts[i]];
    if (!node->is_object()) throw ConfigError("dotted key '" + dotted_key + "' crosses a non-object");
  }
  (*node)[parts.back()] = value;
}

}  // namespace sqrdln
