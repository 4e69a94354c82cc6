#include "sqrdln/lstm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sqrdln {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void LstmConfig::validate() const {
  if (input_features == 0 || hidden_size == 0 || num_layers == 0 || window == 0) {
    throw std::invalid_argument("lstm config: all sizes must be positive");
  }
}

LstmEmbedding::LstmEmbedding(LstmConfig config) : config_(config) {
  config_.validate();
  const std::size_t h = config_.hidden_size;
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::size_t in = l == 0 ? config_.input_features : h;
    const std::string prefix = "lstm.layer" + std::to_string(l);
    layers_.push_back(LayerParams{ParameterBlock(prefix + ".weight_ih", {4 * h, in}),
                                  ParameterBlock(prefix + ".weight_hh", {4 * h, h}),
                                  ParameterBlock(prefix + ".bias_ih", {4 * h}),
                                  ParameterBlock(prefix + ".bias_hh", {4 * h})});
  }
}

void LstmEmbedding::init(SeededRng& rng) {
  const std::size_t h = config_.hidden_size;
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  for (auto& layer : layers_) {
    for (auto* block : {&layer.weight_ih, &layer.weight_hh, &layer.bias_ih, &layer.bias_hh}) {
      for (double& v : block->values()) v = rng.uniform(-bound, bound);
    }
    for (std::size_t j = 0; j < h; ++j) {
      layer.bias_ih[h + j] = 1.0;
      layer.bias_hh[h + j] = 0.0;
    }
  }
}

std::vector<double> LstmEmbedding::forward(std::span<const double> window, LstmTape* tape) const {
  const std::size_t w = config_.window;
  const std::size_t h = config_.hidden_size;
  if (window.size() != w * config_.input_features) {
    throw std::invalid_argument("lstm: window has " + std::to_string(window.size()) +
                                " values, expected " +
                                std::to_string(w * config_.input_features));
  }
  for (double v : window) {
    if (!std::isfinite(v)) throw std::invalid_argument("lstm: non-finite value in input window");
  }

  LstmTape local;
  LstmTape& t = tape ? *tape : local;
  t.layers.assign(layers_.size(), {});
  t.valid = false;

  std::vector<double> inputs(window.begin(), window.end());
  std::vector<double> pre(4 * h);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& p = layers_[l];
    const std::size_t in = l == 0 ? config_.input_features : h;
    auto& rec = t.layers[l];
    rec.inputs = std::move(inputs);
    rec.hidden.assign((w + 1) * h, 0.0);
    rec.cell.assign((w + 1) * h, 0.0);
    rec.gates.assign(w * 4 * h, 0.0);
    rec.tanh_cell.assign(w * h, 0.0);
    const auto& wih = p.weight_ih.values();
    const auto& whh = p.weight_hh.values();
    for (std::size_t s = 0; s < w; ++s) {
      const double* x = rec.inputs.data() + s * in;
      const double* h_prev = rec.hidden.data() + s * h;
      const double* c_prev = rec.cell.data() + s * h;
      for (std::size_t r = 0; r < 4 * h; ++r) {
        double acc = p.bias_ih[r] + p.bias_hh[r];
        const double* wi = wih.data() + r * in;
        for (std::size_t c = 0; c < in; ++c) acc += wi[c] * x[c];
        const double* wh = whh.data() + r * h;
        for (std::size_t c = 0; c < h; ++c) acc += wh[c] * h_prev[c];
        pre[r] = acc;
      }
      double* g = rec.gates.data() + s * 4 * h;
      double* h_next = rec.hidden.data() + (s + 1) * h;
      double* c_next = rec.cell.data() + (s + 1) * h;
      double* tc = rec.tanh_cell.data() + s * h;
      for (std::size_t j = 0; j < h; ++j) {
        const double ig = sigmoid(pre[j]);
        const double fg = sigmoid(pre[h + j]);
        const double gg = std::tanh(pre[2 * h + j]);
        const double og = sigmoid(pre[3 * h + j]);
        g[j] = ig;
        g[h + j] = fg;
        g[2 * h + j] = gg;
        g[3 * h + j] = og;
        c_next[j] = fg * c_prev[j] + ig * gg;
        tc[j] = std::tanh(c_next[j]);
        h_next[j] = og * tc[j];
      }
    }
    inputs.assign(rec.hidden.begin() + static_cast<std::ptrdiff_t>(h),
                  rec.hidden.end());  // [w][H] sequence for the next layer
  }
  t.valid = true;
  const auto& top = t.layers.back().hidden;
  return std::vector<double>(top.end() - static_cast<std::ptrdiff_t>(h), top.end());
}

void LstmEmbedding::backward(const LstmTape& tape, std::span<const double> upstream) {
  if (!tape.valid || tape.layers.size() != layers_.size()) {
    throw std::logic_error("lstm backward called without a matching forward tape");
  }
  const std::size_t w = config_.window;
  const std::size_t h = config_.hidden_size;
  if (upstream.size() != h) throw std::invalid_argument("lstm backward: upstream size mismatch");

  // Gradient arriving at each time step's hidden output from the layer above.
  std::vector<double> dh_ext(w * h, 0.0);
  for (std::size_t j = 0; j < h; ++j) dh_ext[(w - 1) * h + j] = upstream[j];

  std::vector<double> da(4 * h);
  std::vector<double> dh_rec(h);
  std::vector<double> dc_rec(h);
  for (std::size_t l = layers_.size(); l-- > 0;) {
    auto& p = layers_[l];
    const auto& rec = tape.layers[l];
    const std::size_t in = l == 0 ? config_.input_features : h;
    std::vector<double> dx(l > 0 ? w * in : 0, 0.0);
    std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
    std::fill(dc_rec.begin(), dc_rec.end(), 0.0);
    const auto& wih = p.weight_ih.values();
    const auto& whh = p.weight_hh.values();
    auto& gwih = p.weight_ih.grad();
    auto& gwhh = p.weight_hh.grad();
    auto& gbih = p.bias_ih.grad();
    auto& gbhh = p.bias_hh.grad();
    for (std::size_t s = w; s-- > 0;) {
      const double* g = rec.gates.data() + s * 4 * h;
      const double* tc = rec.tanh_cell.data() + s * h;
      const double* c_prev = rec.cell.data() + s * h;
      const double* h_prev = rec.hidden.data() + s * h;
      const double* x = rec.inputs.data() + s * in;
      for (std::size_t j = 0; j < h; ++j) {
        const double ig = g[j];
        const double fg = g[h + j];
        const double gg = g[2 * h + j];
        const double og = g[3 * h + j];
        const double dh = dh_ext[s * h + j] + dh_rec[j];
        const double dout = dh * tc[j];
        const double dc = dc_rec[j] + dh * og * (1.0 - tc[j] * tc[j]);
        da[j] = dc * gg * ig * (1.0 - ig);
        da[h + j] = dc * c_prev[j] * fg * (1.0 - fg);
        da[2 * h + j] = dc * ig * (1.0 - gg * gg);
        da[3 * h + j] = dout * og * (1.0 - og);
        dc_rec[j] = dc * fg;
      }
      std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
      for (std::size_t r = 0; r < 4 * h; ++r) {
        const double a = da[r];
        if (a == 0.0) continue;
        gbih[r] += a;
        gbhh[r] += a;
        double* gi = gwih.data() + r * in;
        for (std::size_t c = 0; c < in; ++c) gi[c] += a * x[c];
        double* gh = gwhh.data() + r * h;
        for (std::size_t c = 0; c < h; ++c) gh[c] += a * h_prev[c];
        const double* wh = whh.data() + r * h;
        for (std::size_t c = 0; c < h; ++c) dh_rec[c] += a * wh[c];
        if (l > 0) {
          const double* wi = wih.data() + r * in;
          double* dxs = dx.data() + s * in;
          for (std::size_t c = 0; c < in; ++c) dxs[c] += a * wi[c];
        }
      }
    }
    if (l > 0) dh_ext = std::move(dx);
  }
}

ParameterList LstmEmbedding::parameters() {
  ParameterList out;
  for (auto& layer : layers_) {
    out.push_back(&layer.weight_ih);
    out.push_back(&layer.weight_hh);
    out.push_back(&layer.bias_ih);
    out.push_back(&layer.bias_hh);
  }
  return out;
}

}  // namespace sqrdln
