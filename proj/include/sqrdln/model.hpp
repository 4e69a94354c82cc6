#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqrdln/heads.hpp"
#include "sqrdln/lstm.hpp"

namespace sqrdln {

struct ModelConfig {
  LstmConfig lstm;
  HeadConfig head;
  std::uint64_t seed = 1;

  /// Keeps the head's embedding size equal to the LSTM hidden size.
  ModelConfig& sync();
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Total trainable parameters of the embedding plus head for `config`.
std::size_t model_parameter_count(const ModelConfig& config);
std::size_t lstm_parameter_count(const LstmConfig& config);

/// Forecaster f(window, tau) = f2(f1(window), tau).
class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  LstmEmbedding& embedding() { return embedding_; }
  const LstmEmbedding& embedding() const { return embedding_; }
  Head& head() { return *head_; }
  const Head& head() const { return *head_; }

  /// Runs f1 on a w x F window. Every call increments embed_calls().
  std::vector<double> embed(std::span<const double> window, LstmTape* tape = nullptr) const;
  long embed_calls() const { return embed_calls_.load(); }
  void reset_embed_calls() { embed_calls_.store(0); }

  ParameterList parameters();
  std::size_t parameter_count();

  std::vector<std::vector<double>> snapshot();
  void restore(const std::vector<std::vector<double>>& snapshot);

  /// Writes a checkpoint whose meta holds {"model": config, "extra": extra}.
  void save(const std::filesystem::path& path, const nlohmann::json& extra = {});
  /// Rebuilds a model from a checkpoint; `extra` receives the stored extra data.
  static std::unique_ptr<Model> load(const std::filesystem::path& path,
                                     nlohmann::json* extra = nullptr);

 private:
  ModelConfig config_;
  LstmEmbedding embedding_;
  std::unique_ptr<Head> head_;
  mutable std::atomic<long> embed_calls_{0};
};

}  // namespace sqrdln
