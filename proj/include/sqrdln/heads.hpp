#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sqrdln/calibrator.hpp"
#include "sqrdln/lattice.hpp"
#include "sqrdln/linear.hpp"
#include "sqrdln/parameter.hpp"
#include "sqrdln/rng.hpp"

namespace sqrdln {

enum class HeadKind { Dln, Linear, ConstrainedLinear, Mlp, FixedQuantileQr, Point };

std::string to_string(HeadKind kind);
HeadKind head_kind_from_string(const std::string& name);
std::vector<HeadKind> all_head_kinds();

/// True for heads that take the quantile level as an input.
bool is_sqr(HeadKind kind);
/// True for heads whose output is guaranteed nondecreasing in the quantile level.
bool is_quantile_monotone(HeadKind kind);

/// The 11 equidistant evaluation quantiles in [0.025, 0.975].
std::vector<double> default_quantile_grid();

struct DlnHeadConfig {
  std::size_t feature_calib_keypoints = 61;
  std::size_t quantile_calib_keypoints = 11;
  std::size_t lattice_keypoints = 21;
  std::size_t output_calib_keypoints = 61;
  std::size_t lattice_input_size = 2;
  /// Input domain of the embedding calibrators (LSTM outputs lie in (-1, 1)).
  double feature_lo = -1.0;
  double feature_hi = 1.0;
  /// Input domain of the output calibrator, in scaled target units.
  double output_lo = -0.5;
  double output_hi = 1.5;
  double lattice_init_noise = 0.01;

  void validate() const;
};

struct HeadConfig {
  HeadKind kind = HeadKind::Dln;
  std::size_t embedding_size = 128;
  std::size_t horizon = 36;
  DlnHeadConfig dln;
  /// Hidden width of the MLP head; 0 selects embedding_size + 1.
  std::size_t mlp_width = 0;
  /// Quantile levels of the fixed-quantile QR head.
  std::vector<double> qr_taus = default_quantile_grid();

  std::size_t resolved_mlp_width() const { return mlp_width ? mlp_width : embedding_size + 1; }
  void validate() const;
};

/// Per-call record of a head's forward pass, consumed by backward().
struct HeadTape {
  std::vector<double> embedding;
  double tau = 0.0;
  std::vector<std::vector<double>> buffers;
  bool valid = false;
};

/// Output model f2: maps an embedding (and a quantile level for SQR heads) to
/// a horizon of forecasts. Fixed-quantile QR returns Q x h values, row per level.
class Head {
 public:
  virtual ~Head() = default;

  virtual HeadKind kind() const = 0;
  virtual std::size_t embedding_size() const = 0;
  virtual std::size_t horizon() const = 0;
  virtual std::size_t output_size() const { return horizon(); }

  virtual void init(SeededRng& rng) = 0;
  virtual std::vector<double> forward(std::span<const double> embedding, double tau,
                                      HeadTape* tape = nullptr) const = 0;
  /// Accumulates parameter gradients and adds d(loss)/d(embedding) into `dembedding`.
  virtual void backward(const HeadTape& tape, std::span<const double> dout,
                        std::span<double> dembedding) = 0;
  virtual ParameterList parameters() = 0;

 protected:
  void check_embedding(std::span<const double> embedding) const;
  static void check_tape(const HeadTape& tape);
};

std::unique_ptr<Head> make_head(const HeadConfig& config, SeededRng& rng);

/// Exact trainable parameter count of a head built from `config`.
std::size_t head_parameter_count(const HeadConfig& config);

/// Deep lattice network head: embedding calibrators, a monotone quantile
/// calibrator, a lattice ensemble with the quantile in every lattice, a
/// constrained linear layer to the horizon and a shared monotone output
/// calibrator.
class DlnHead final : public Head {
 public:
  DlnHead(const HeadConfig& config, SeededRng& rng);

  HeadKind kind() const override { return HeadKind::Dln; }
  std::size_t embedding_size() const override { return embedding_size_; }
  std::size_t horizon() const override { return horizon_; }

  void init(SeededRng& rng) override;
  std::vector<double> forward(std::span<const double> embedding, double tau,
                              HeadTape* tape = nullptr) const override;
  void backward(const HeadTape& tape, std::span<const double> dout,
                std::span<double> dembedding) override;
  ParameterList parameters() override;

  std::vector<Calibrator>& feature_calibrators() { return feature_calibrators_; }
  Calibrator& quantile_calibrator() { return quantile_calibrator_; }
  LatticeEnsemble& ensemble() { return ensemble_; }
  ConstrainedLinear& output_linear() { return output_linear_; }
  Calibrator& output_calibrator() { return output_calibrator_; }

  /// One step of the quantile-to-output path: the block and the constraint it
  /// must carry for the output to stay monotone in the quantile level.
  struct PathLink {
    const ParameterBlock* block;
    Constraint required;
  };
  std::vector<PathLink> quantile_path() const;

 private:
  std::size_t embedding_size_;
  std::size_t horizon_;
  DlnHeadConfig config_;
  std::vector<Calibrator> feature_calibrators_;
  Calibrator quantile_calibrator_;
  LatticeEnsemble ensemble_;
  ConstrainedLinear output_linear_;
  Calibrator output_calibrator_;
};

/// Single affine map of [embedding, tau]. The constrained variant routes tau
/// through a nonnegative weight.
class LinearHead final : public Head {
 public:
  LinearHead(const HeadConfig& config, bool constrained);

  HeadKind kind() const override {
    return constrained_ ? HeadKind::ConstrainedLinear : HeadKind::Linear;
  }
  std::size_t embedding_size() const override { return embedding_size_; }
  std::size_t horizon() const override { return horizon_; }

  void init(SeededRng& rng) override;
  std::vector<double> forward(std::span<const double> embedding, double tau,
                              HeadTape* tape = nullptr) const override;
  void backward(const HeadTape& tape, std::span<const double> dout,
                std::span<double> dembedding) override;
  ParameterList parameters() override;

  ConstrainedLinear& layer() { return layer_; }

 private:
  std::size_t embedding_size_;
  std::size_t horizon_;
  bool constrained_;
  ConstrainedLinear layer_;  // unconstrained variant uses free weights only
};

/// Two dense layers with one ReLU in between, on [embedding, tau].
class MlpHead final : public Head {
 public:
  explicit MlpHead(const HeadConfig& config);

  HeadKind kind() const override { return HeadKind::Mlp; }
  std::size_t embedding_size() const override { return embedding_size_; }
  std::size_t horizon() const override { return horizon_; }

  void init(SeededRng& rng) override;
  std::vector<double> forward(std::span<const double> embedding, double tau,
                              HeadTape* tape = nullptr) const override;
  void backward(const HeadTape& tape, std::span<const double> dout,
                std::span<double> dembedding) override;
  ParameterList parameters() override;

  Dense& hidden() { return hidden_; }
  Dense& output() { return output_; }

 private:
  std::size_t embedding_size_;
  std::size_t horizon_;
  Dense hidden_;
  Dense output_;
};

/// Dense map of the embedding to a fixed set of quantile levels (QR) or to a
/// single point forecast (Point). The quantile level argument is ignored.
class DirectHead final : public Head {
 public:
  DirectHead(const HeadConfig& config, HeadKind kind);

  HeadKind kind() const override { return kind_; }
  std::size_t embedding_size() const override { return embedding_size_; }
  std::size_t horizon() const override { return horizon_; }
  std::size_t output_size() const override { return layer_.out_size(); }
  const std::vector<double>& taus() const { return taus_; }

  void init(SeededRng& rng) override;
  std::vector<double> forward(std::span<const double> embedding, double tau,
                              HeadTape* tape = nullptr) const override;
  void backward(const HeadTape& tape, std::span<const double> dout,
                std::span<double> dembedding) override;
  ParameterList parameters() override;

  Dense& layer() { return layer_; }

 private:
  HeadKind kind_;
  std::size_t embedding_size_;
  std::size_t horizon_;
  std::vector<double> taus_;
  Dense layer_;
};

}  // namespace sqrdln
