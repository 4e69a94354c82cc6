#include "sqrdln/model.hpp"

#include <stdexcept>

#include "sqrdln/checkpoint.hpp"

namespace sqrdln {

ModelConfig& ModelConfig::sync() {
  head.embedding_size = lstm.hidden_size;
  return *this;
}

nlohmann::json to_json(const ModelConfig& c) {
  const auto& d = c.head.dln;
  return {
      {"seed", c.seed},
      {"lstm",
       {{"input_features", c.lstm.input_features},
        {"hidden_size", c.lstm.hidden_size},
        {"num_layers", c.lstm.num_layers},
        {"window", c.lstm.window}}},
      {"head",
       {{"kind", to_string(c.head.kind)},
        {"embedding_size", c.head.embedding_size},
        {"horizon", c.head.horizon},
        {"mlp_width", c.head.mlp_width},
        {"qr_taus", c.head.qr_taus},
        {"dln",
         {{"feature_calib_keypoints", d.feature_calib_keypoints},
          {"quantile_calib_keypoints", d.quantile_calib_keypoints},
          {"lattice_keypoints", d.lattice_keypoints},
          {"output_calib_keypoints", d.output_calib_keypoints},
          {"lattice_input_size", d.lattice_input_size},
          {"feature_lo", d.feature_lo},
          {"feature_hi", d.feature_hi},
          {"output_lo", d.output_lo},
          {"output_hi", d.output_hi},
          {"lattice_init_noise", d.lattice_init_noise}}}}},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& l = j.at("lstm");
  c.lstm.input_features = l.at("input_features");
  c.lstm.hidden_size = l.at("hidden_size");
  c.lstm.num_layers = l.at("num_layers");
  c.lstm.window = l.at("window");
  const auto& h = j.at("head");
  c.head.kind = head_kind_from_string(h.at("kind"));
  c.head.embedding_size = h.at("embedding_size");
  c.head.horizon = h.at("horizon");
  c.head.mlp_width = h.at("mlp_width");
  c.head.qr_taus = h.at("qr_taus").get<std::vector<double>>();
  const auto& d = h.at("dln");
  c.head.dln.feature_calib_keypoints = d.at("feature_calib_keypoints");
  c.head.dln.quantile_calib_keypoints = d.at("quantile_calib_keypoints");
  c.head.dln.lattice_keypoints = d.at("lattice_keypoints");
  c.head.dln.output_calib_keypoints = d.at("output_calib_keypoints");
  c.head.dln.lattice_input_size = d.at("lattice_input_size");
  c.head.dln.feature_lo = d.at("feature_lo");
  c.head.dln.feature_hi = d.at("feature_hi");
  c.head.dln.output_lo = d.at("output_lo");
  c.head.dln.output_hi = d.at("output_hi");
  c.head.dln.lattice_init_noise = d.at("lattice_init_noise");
  return c;
}

std::size_t lstm_parameter_count(const LstmConfig& config) {
  const std::size_t h = config.hidden_size;
  std::size_t total = 0;
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const std::size_t in = l == 0 ? config.input_features : h;
    total += 4 * h * in + 4 * h * h + 8 * h;
  }
  return total;
}

std::size_t model_parameter_count(const ModelConfig& config) {
  return lstm_parameter_count(config.lstm) + head_parameter_count(config.head);
}

Model::Model(ModelConfig config) : config_(std::move(config)), embedding_(config_.lstm) {
  if (config_.head.embedding_size != config_.lstm.hidden_size) {
    throw std::invalid_argument("model: head embedding size must equal LSTM hidden size");
  }
  SeededRng rng(config_.seed);
  SeededRng lstm_rng = rng.fork(1);
  SeededRng head_rng = rng.fork(2);
  embedding_.init(lstm_rng);
  head_ = make_head(config_.head, head_rng);
}

std::vector<double> Model::embed(std::span<const double> window, LstmTape* tape) const {
  embed_calls_.fetch_add(1);
  return embedding_.forward(window, tape);
}

ParameterList Model::parameters() {
  ParameterList out = embedding_.parameters();
  for (auto* p : head_->parameters()) out.push_back(p);
  return out;
}

std::size_t Model::parameter_count() { return total_size(parameters()); }

std::vector<std::vector<double>> Model::snapshot() {
  std::vector<std::vector<double>> out;
  for (auto* p : parameters()) out.push_back(p->values());
  return out;
}

void Model::restore(const std::vector<std::vector<double>>& snapshot) {
  const auto params = parameters();
  if (snapshot.size() != params.size()) throw std::invalid_argument("model restore: block count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->assign(snapshot[i]);
}

void Model::save(const std::filesystem::path& path, const nlohmann::json& extra) {
  write_checkpoint(path, {{"model", to_json(config_)}, {"extra", extra}}, parameters());
}

std::unique_ptr<Model> Model::load(const std::filesystem::path& path, nlohmann::json* extra) {
  const Checkpoint ckpt = read_checkpoint(path);
  auto model = std::make_unique<Model>(model_config_from_json(ckpt.meta.at("model")));
  restore_blocks(ckpt, model->parameters());
  if (extra) *extra = ckpt.meta.value("extra", nlohmann::json{});
  return model;
}

}  // namespace sqrdln
