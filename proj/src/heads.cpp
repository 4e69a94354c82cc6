#include "sqrdln/heads.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqrdln {

namespace {

constexpr std::size_t kInput = 0;
constexpr std::size_t kHidden = 1;

std::vector<double> with_tau(std::span<const double> embedding, double tau) {
  std::vector<double> x(embedding.begin(), embedding.end());
  x.push_back(tau);
  return x;
}

std::size_t pow_size(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace

std::string to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::Dln:
      return "dln";
    case HeadKind::Linear:
      return "linear";
    case HeadKind::ConstrainedLinear:
      return "constrained-linear";
    case HeadKind::Mlp:
      return "mlp";
    case HeadKind::FixedQuantileQr:
      return "fixed-quantile-qr";
    case HeadKind::Point:
      return "point";
  }
  return "dln";
}

HeadKind head_kind_from_string(const std::string& name) {
  for (HeadKind k : all_head_kinds()) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown head kind '" + name + "'");
}

std::vector<HeadKind> all_head_kinds() {
  return {HeadKind::Point, HeadKind::FixedQuantileQr, HeadKind::Linear,
          HeadKind::Mlp,   HeadKind::ConstrainedLinear, HeadKind::Dln};
}

bool is_sqr(HeadKind kind) {
  return kind != HeadKind::FixedQuantileQr && kind != HeadKind::Point;
}

bool is_quantile_monotone(HeadKind kind) {
  return kind == HeadKind::Dln || kind == HeadKind::ConstrainedLinear;
}

std::vector<double> default_quantile_grid() {
  std::vector<double> taus(11);
  for (std::size_t i = 0; i < taus.size(); ++i) taus[i] = 0.025 + 0.095 * static_cast<double>(i);
  taus[5] = 0.5;
  taus.back() = 0.975;
  return taus;
}

void DlnHeadConfig::validate() const {
  if (feature_calib_keypoints < 2 || quantile_calib_keypoints < 2 || lattice_keypoints < 2 ||
      output_calib_keypoints < 2) {
    throw std::invalid_argument("dln config: keypoint counts must be at least 2");
  }
  if (lattice_input_size < 1) throw std::invalid_argument("dln config: lattice_input_size must be >= 1");
  if (!(feature_hi > feature_lo) || !(output_hi > output_lo)) {
    throw std::invalid_argument("dln config: calibrator domains must be nonempty");
  }
}

void HeadConfig::validate() const {
  if (embedding_size == 0 || horizon == 0) {
    throw std::invalid_argument("head config: embedding size and horizon must be positive");
  }
  if (kind == HeadKind::Dln) dln.validate();
  if (kind == HeadKind::FixedQuantileQr) {
    if (qr_taus.empty()) throw std::invalid_argument("head config: qr_taus is empty");
    for (std::size_t i = 0; i < qr_taus.size(); ++i) {
      if (qr_taus[i] < 0.0 || qr_taus[i] > 1.0 || (i > 0 && !(qr_taus[i] > qr_taus[i - 1]))) {
        throw std::invalid_argument("head config: qr_taus must be strictly increasing in [0,1]");
      }
    }
  }
}

void Head::check_embedding(std::span<const double> embedding) const {
  if (embedding.size() != embedding_size()) {
    throw std::invalid_argument("head: embedding has " + std::to_string(embedding.size()) +
                                " entries, expected " + std::to_string(embedding_size()));
  }
}

void Head::check_tape(const HeadTape& tape) {
  if (!tape.valid) throw std::logic_error("head backward called without a forward tape");
}

std::unique_ptr<Head> make_head(const HeadConfig& config, SeededRng& rng) {
  config.validate();
  std::unique_ptr<Head> head;
  switch (config.kind) {
    case HeadKind::Dln:
      head = std::make_unique<DlnHead>(config, rng);
      break;
    case HeadKind::Linear:
      head = std::make_unique<LinearHead>(config, false);
      break;
    case HeadKind::ConstrainedLinear:
      head = std::make_unique<LinearHead>(config, true);
      break;
    case HeadKind::Mlp:
      head = std::make_unique<MlpHead>(config);
      break;
    case HeadKind::FixedQuantileQr:
    case HeadKind::Point:
      head = std::make_unique<DirectHead>(config, config.kind);
      break;
  }
  head->init(rng);
  return head;
}

std::size_t head_parameter_count(const HeadConfig& config) {
  config.validate();
  const std::size_t e = config.embedding_size;
  const std::size_t h = config.horizon;
  switch (config.kind) {
    case HeadKind::Dln: {
      const auto& d = config.dln;
      std::size_t lattices = 0;
      std::size_t lattice_params = 0;
      for (std::size_t start = 0; start < e; start += d.lattice_input_size) {
        const std::size_t group = std::min(d.lattice_input_size, e - start);
        lattice_params += pow_size(d.lattice_keypoints, group + 1);
        ++lattices;
      }
      return e * d.feature_calib_keypoints + d.quantile_calib_keypoints + lattice_params +
             lattices * h + h + d.output_calib_keypoints;
    }
    case HeadKind::Linear:
    case HeadKind::ConstrainedLinear:
      return h * (e + 1) + h;
    case HeadKind::Mlp: {
      const std::size_t width = config.resolved_mlp_width();
      return width * (e + 1) + width + h * width + h;
    }
    case HeadKind::FixedQuantileQr:
      return (e + 1) * h * config.qr_taus.size();
    case HeadKind::Point:
      return (e + 1) * h;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// DLN

DlnHead::DlnHead(const HeadConfig& config, SeededRng& rng)
    : embedding_size_(config.embedding_size),
      horizon_(config.horizon),
      config_(config.dln),
      quantile_calibrator_(
          "dln.quantile_calib",
          Calibrator::uniform_keypoints(config.dln.quantile_calib_keypoints, 0.0, 1.0), true),
      ensemble_("dln.ensemble",
                LatticeEnsemble::partition(config.embedding_size, config.dln.lattice_input_size,
                                           rng),
                config.dln.lattice_keypoints),
      output_linear_("dln.output_linear", ensemble_.size(), 0, config.horizon),
      output_calibrator_("dln.output_calib",
                         Calibrator::uniform_keypoints(config.dln.output_calib_keypoints,
                                                       config.dln.output_lo,
                                                       config.dln.output_hi),
                         true) {
  const auto keypoints = Calibrator::uniform_keypoints(config_.feature_calib_keypoints,
                                                       config_.feature_lo, config_.feature_hi);
  feature_calibrators_.reserve(embedding_size_);
  for (std::size_t e = 0; e < embedding_size_; ++e) {
    feature_calibrators_.emplace_back("dln.feature_calib" + std::to_string(e), keypoints, false);
  }
}

void DlnHead::init(SeededRng& rng) {
  for (auto& c : feature_calibrators_) c.init_ramp(0.0, 1.0);
  quantile_calibrator_.init_ramp(0.0, 1.0);
  for (auto& l : ensemble_.lattices()) l.init_ramp(rng, config_.lattice_init_noise);
  const double scale = 2.0 / static_cast<double>(ensemble_.size());
  for (double& w : output_linear_.monotone_weight().values()) w = rng.uniform(0.0, scale);
  for (double& b : output_linear_.bias().values()) b = 0.0;
  output_calibrator_.init_ramp(config_.output_lo, config_.output_hi);
}

std::vector<double> DlnHead::forward(std::span<const double> embedding, double tau,
                                     HeadTape* tape) const {
  check_embedding(embedding);
  if (!std::isfinite(tau)) throw std::invalid_argument("dln: non-finite quantile level");
  const double t = std::clamp(tau, 0.0, 1.0);
  std::vector<double> features(embedding_size_);
  for (std::size_t e = 0; e < embedding_size_; ++e) {
    features[e] = feature_calibrators_[e].forward(embedding[e]);
  }
  const double q = quantile_calibrator_.forward(t);
  std::vector<double> lattice_out(ensemble_.size());
  ensemble_.forward(features, q, lattice_out);
  std::vector<double> linear_out(horizon_);
  output_linear_.forward(lattice_out, {}, linear_out);
  std::vector<double> out(horizon_);
  for (std::size_t j = 0; j < horizon_; ++j) out[j] = output_calibrator_.forward(linear_out[j]);
  if (tape) {
    tape->embedding.assign(embedding.begin(), embedding.end());
    tape->tau = t;
    tape->buffers = {std::move(features), {q}, std::move(lattice_out), std::move(linear_out)};
    tape->valid = true;
  }
  return out;
}

void DlnHead::backward(const HeadTape& tape, std::span<const double> dout,
                       std::span<double> dembedding) {
  check_tape(tape);
  if (dout.size() != horizon_ || dembedding.size() != embedding_size_) {
    throw std::invalid_argument("dln backward: shape mismatch");
  }
  const auto& features = tape.buffers[0];
  const double q = tape.buffers[1][0];
  const auto& lattice_out = tape.buffers[2];
  const auto& linear_out = tape.buffers[3];

  std::vector<double> dlinear(horizon_);
  for (std::size_t j = 0; j < horizon_; ++j) {
    dlinear[j] = output_calibrator_.backward(linear_out[j], dout[j]);
  }
  std::vector<double> dlattice(ensemble_.size(), 0.0);
  output_linear_.backward(lattice_out, {}, dlinear, dlattice, {});
  std::vector<double> dfeatures(embedding_size_, 0.0);
  double dq = 0.0;
  ensemble_.backward(features, q, dlattice, dfeatures, dq);
  quantile_calibrator_.backward(tape.tau, dq);
  for (std::size_t e = 0; e < embedding_size_; ++e) {
    dembedding[e] += feature_calibrators_[e].backward(tape.embedding[e], dfeatures[e]);
  }
}

ParameterList DlnHead::parameters() {
  ParameterList out;
  for (auto& c : feature_calibrators_) out.push_back(&c.outputs());
  out.push_back(&quantile_calibrator_.outputs());
  for (auto* p : ensemble_.parameters()) out.push_back(p);
  for (auto* p : output_linear_.parameters()) out.push_back(p);
  out.push_back(&output_calibrator_.outputs());
  return out;
}

std::vector<DlnHead::PathLink> DlnHead::quantile_path() const {
  std::vector<PathLink> path;
  path.push_back({&quantile_calibrator_.outputs(), Constraint::monotone({0})});
  for (std::size_t i = 0; i < ensemble_.size(); ++i) {
    path.push_back({&ensemble_.lattices()[i].theta(), Constraint::monotone({ensemble_.quantile_dim(i)})});
  }
  path.push_back({&output_linear_.monotone_weight(), Constraint::nonnegative()});
  path.push_back({&output_calibrator_.outputs(), Constraint::monotone({0})});
  return path;
}

// ---------------------------------------------------------------------------
// Linear / constrained linear

LinearHead::LinearHead(const HeadConfig& config, bool constrained)
    : embedding_size_(config.embedding_size),
      horizon_(config.horizon),
      constrained_(constrained),
      layer_(constrained ? "clin" : "lin", constrained ? 1 : 0,
             constrained ? config.embedding_size : config.embedding_size + 1, config.horizon) {}

void LinearHead::init(SeededRng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(embedding_size_ + 1));
  for (double& w : layer_.free_weight().values()) w = rng.uniform(-bound, bound);
  for (double& w : layer_.monotone_weight().values()) w = rng.uniform(0.0, bound);
  for (double& b : layer_.bias().values()) b = rng.uniform(-bound, bound);
}

std::vector<double> LinearHead::forward(std::span<const double> embedding, double tau,
                                        HeadTape* tape) const {
  check_embedding(embedding);
  std::vector<double> out(horizon_);
  std::vector<double> input;
  const double t = std::clamp(tau, 0.0, 1.0);
  if (constrained_) {
    const double mono[1] = {t};
    layer_.forward(mono, embedding, out);
  } else {
    input = with_tau(embedding, t);
    layer_.forward({}, input, out);
  }
  if (tape) {
    tape->embedding.assign(embedding.begin(), embedding.end());
    tape->tau = t;
    tape->buffers.clear();
    tape->valid = true;
  }
  return out;
}

void LinearHead::backward(const HeadTape& tape, std::span<const double> dout,
                          std::span<double> dembedding) {
  check_tape(tape);
  if (dout.size() != horizon_ || dembedding.size() != embedding_size_) {
    throw std::invalid_argument("linear backward: shape mismatch");
  }
  if (constrained_) {
    const double mono[1] = {tape.tau};
    double dmono[1] = {0.0};
    layer_.backward(mono, tape.embedding, dout, dmono, dembedding);
  } else {
    const auto input = with_tau(tape.embedding, tape.tau);
    std::vector<double> dinput(input.size(), 0.0);
    layer_.backward({}, input, dout, {}, dinput);
    for (std::size_t e = 0; e < embedding_size_; ++e) dembedding[e] += dinput[e];
  }
}

ParameterList LinearHead::parameters() {
  if (constrained_) return layer_.parameters();
  return {&layer_.free_weight(), &layer_.bias()};
}

// ---------------------------------------------------------------------------
// MLP

MlpHead::MlpHead(const HeadConfig& config)
    : embedding_size_(config.embedding_size),
      horizon_(config.horizon),
      hidden_("mlp.hidden", config.embedding_size + 1, config.resolved_mlp_width()),
      output_("mlp.output", config.resolved_mlp_width(), config.horizon) {}

void MlpHead::init(SeededRng& rng) {
  hidden_.init_uniform(rng);
  output_.init_uniform(rng);
}

std::vector<double> MlpHead::forward(std::span<const double> embedding, double tau,
                                     HeadTape* tape) const {
  check_embedding(embedding);
  const double t = std::clamp(tau, 0.0, 1.0);
  auto input = with_tau(embedding, t);
  std::vector<double> pre(hidden_.out_size());
  hidden_.forward(input, pre);
  std::vector<double> act(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) act[i] = std::max(pre[i], 0.0);
  std::vector<double> out(horizon_);
  output_.forward(act, out);
  if (tape) {
    tape->embedding.assign(embedding.begin(), embedding.end());
    tape->tau = t;
    tape->buffers = {std::move(input), std::move(pre), std::move(act)};
    tape->valid = true;
  }
  return out;
}

void MlpHead::backward(const HeadTape& tape, std::span<const double> dout,
                       std::span<double> dembedding) {
  check_tape(tape);
  if (dout.size() != horizon_ || dembedding.size() != embedding_size_) {
    throw std::invalid_argument("mlp backward: shape mismatch");
  }
  const auto& input = tape.buffers[kInput];
  const auto& pre = tape.buffers[kHidden];
  const auto& act = tape.buffers[2];
  std::vector<double> dact(act.size(), 0.0);
  output_.backward(act, dout, dact);
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (pre[i] <= 0.0) dact[i] = 0.0;
  }
  std::vector<double> dinput(input.size(), 0.0);
  hidden_.backward(input, dact, dinput);
  for (std::size_t e = 0; e < embedding_size_; ++e) dembedding[e] += dinput[e];
}

ParameterList MlpHead::parameters() {
  ParameterList out = hidden_.parameters();
  for (auto* p : output_.parameters()) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------
// Fixed-quantile QR and point predictor

DirectHead::DirectHead(const HeadConfig& config, HeadKind kind)
    : kind_(kind),
      embedding_size_(config.embedding_size),
      horizon_(config.horizon),
      taus_(kind == HeadKind::FixedQuantileQr ? config.qr_taus : std::vector<double>{}),
      layer_(kind == HeadKind::FixedQuantileQr ? "qr" : "point", config.embedding_size,
             config.horizon * (kind == HeadKind::FixedQuantileQr ? config.qr_taus.size() : 1)) {
  if (kind != HeadKind::FixedQuantileQr && kind != HeadKind::Point) {
    throw std::invalid_argument("DirectHead supports only qr and point kinds");
  }
}

void DirectHead::init(SeededRng& rng) { layer_.init_uniform(rng); }

std::vector<double> DirectHead::forward(std::span<const double> embedding, double tau,
                                        HeadTape* tape) const {
  check_embedding(embedding);
  std::vector<double> out(layer_.out_size());
  layer_.forward(embedding, out);
  if (tape) {
    tape->embedding.assign(embedding.begin(), embedding.end());
    tape->tau = tau;
    tape->buffers.clear();
    tape->valid = true;
  }
  return out;
}

void DirectHead::backward(const HeadTape& tape, std::span<const double> dout,
                          std::span<double> dembedding) {
  check_tape(tape);
  if (dout.size() != layer_.out_size() || dembedding.size() != embedding_size_) {
    throw std::invalid_argument("direct head backward: shape mismatch");
  }
  layer_.backward(tape.embedding, dout, dembedding);
}

ParameterList DirectHead::parameters() { return layer_.parameters(); }

}  // namespace sqrdln
