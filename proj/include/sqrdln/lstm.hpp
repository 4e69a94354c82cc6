#pragma once

#include <span>
#include <vector>

#include "sqrdln/parameter.hpp"
#include "sqrdln/rng.hpp"

namespace sqrdln {

struct LstmConfig {
  std::size_t input_features = 1;
  std::size_t hidden_size = 128;
  std::size_t num_layers = 2;
  std::size_t window = 96;

  void validate() const;
};

/// Intermediate states of one forward pass, consumed by backward().
struct LstmTape {
  struct Layer {
    std::vector<double> inputs;  // [window][in]
    std::vector<double> hidden;  // [window + 1][H], row 0 is the initial state
    std::vector<double> cell;    // [window + 1][H]
    std::vector<double> gates;   // [window][4H], activated i, f, g, o
    std::vector<double> tanh_cell;  // [window][H]
  };
  std::vector<Layer> layers;
  bool valid = false;
};

/// Stacked LSTM mapping a w x F window (row-major) to the last hidden state
/// of the top layer. Gate order in every weight block is (input, forget,
/// cell, output); each layer carries separate input and recurrent biases.
class LstmEmbedding {
 public:
  explicit LstmEmbedding(LstmConfig config);

  const LstmConfig& config() const { return config_; }
  std::size_t output_size() const { return config_.hidden_size; }

  /// Uniform(+-1/sqrt(H)) weights and biases, forget-gate input bias set to 1.
  void init(SeededRng& rng);

  std::vector<double> forward(std::span<const double> window, LstmTape* tape = nullptr) const;

  /// Backpropagation through time from a gradient on the embedding.
  /// Accumulates into the parameter grads. Throws if the tape is empty.
  void backward(const LstmTape& tape, std::span<const double> upstream);

  ParameterList parameters();

 private:
  struct LayerParams {
    ParameterBlock weight_ih;  // [4H, in]
    ParameterBlock weight_hh;  // [4H, H]
    ParameterBlock bias_ih;    // [4H]
    ParameterBlock bias_hh;    // [4H]
  };

  LstmConfig config_;
  std::vector<LayerParams> layers_;
};

}  // namespace sqrdln
