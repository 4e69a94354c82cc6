#include "sqrdln/linear.hpp"

#include <cmath>
#include <stdexcept>

namespace sqrdln {

namespace {

void matvec_add(const std::vector<double>& w, std::size_t rows, std::size_t cols,
                std::span<const double> x, std::span<double> out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] += acc;
  }
}

void matvec_backward(const std::vector<double>& w, std::vector<double>& gw, std::size_t rows,
                     std::size_t cols, std::span<const double> x, std::span<const double> dout,
                     std::span<double> dx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dout[r];
    if (g == 0.0) continue;
    double* grow = gw.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) grow[c] += g * x[c];
    if (!dx.empty()) {
      const double* row = w.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) dx[c] += g * row[c];
    }
  }
}

}  // namespace

Dense::Dense(const std::string& name, std::size_t in, std::size_t out)
    : in_(in), out_(out), weight_(name + ".weight", {out, in}), bias_(name + ".bias", {out}) {}

void Dense::init_uniform(SeededRng& rng) {
  const double bound = in_ > 0 ? 1.0 / std::sqrt(static_cast<double>(in_)) : 0.0;
  for (double& v : weight_.values()) v = rng.uniform(-bound, bound);
  for (double& v : bias_.values()) v = rng.uniform(-bound, bound);
}

void Dense::forward(std::span<const double> x, std::span<double> out) const {
  if (x.size() != in_ || out.size() != out_) throw std::invalid_argument("dense: shape mismatch");
  for (std::size_t r = 0; r < out_; ++r) out[r] = bias_[r];
  matvec_add(weight_.values(), out_, in_, x, out);
}

void Dense::backward(std::span<const double> x, std::span<const double> dout,
                     std::span<double> dx) {
  if (x.size() != in_ || dout.size() != out_ || (!dx.empty() && dx.size() != in_)) {
    throw std::invalid_argument("dense: shape mismatch");
  }
  for (std::size_t r = 0; r < out_; ++r) bias_.grad()[r] += dout[r];
  matvec_backward(weight_.values(), weight_.grad(), out_, in_, x, dout, dx);
}

ConstrainedLinear::ConstrainedLinear(const std::string& name, std::size_t monotone_in,
                                     std::size_t free_in, std::size_t out)
    : monotone_in_(monotone_in),
      free_in_(free_in),
      out_(out),
      monotone_weight_(name + ".monotone_weight", {out, monotone_in}, Constraint::nonnegative()),
      free_weight_(name + ".free_weight", {out, free_in}),
      bias_(name + ".bias", {out}) {}

void ConstrainedLinear::forward(std::span<const double> monotone_in,
                                std::span<const double> free_in, std::span<double> out) const {
  if (monotone_in.size() != monotone_in_ || free_in.size() != free_in_ || out.size() != out_) {
    throw std::invalid_argument("constrained linear: shape mismatch");
  }
  for (std::size_t r = 0; r < out_; ++r) out[r] = bias_[r];
  matvec_add(monotone_weight_.values(), out_, monotone_in_, monotone_in, out);
  matvec_add(free_weight_.values(), out_, free_in_, free_in, out);
}

void ConstrainedLinear::backward(std::span<const double> monotone_in,
                                 std::span<const double> free_in, std::span<const double> dout,
                                 std::span<double> dmonotone, std::span<double> dfree) {
  if (monotone_in.size() != monotone_in_ || free_in.size() != free_in_ || dout.size() != out_) {
    throw std::invalid_argument("constrained linear: shape mismatch");
  }
  for (std::size_t r = 0; r < out_; ++r) bias_.grad()[r] += dout[r];
  matvec_backward(monotone_weight_.values(), monotone_weight_.grad(), out_, monotone_in_,
                  monotone_in, dout, dmonotone);
  matvec_backward(free_weight_.values(), free_weight_.grad(), out_, free_in_, free_in, dout,
                  dfree);
}

}  // namespace sqrdln
