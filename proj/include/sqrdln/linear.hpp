#pragma once

#include <span>
#include <string>

#include "sqrdln/parameter.hpp"
#include "sqrdln/rng.hpp"

namespace sqrdln {

/// Affine layer out = W x + b with W of shape [out, in].
class Dense {
 public:
  Dense(const std::string& name, std::size_t in, std::size_t out);

  std::size_t in_size() const { return in_; }
  std::size_t out_size() const { return out_; }
  ParameterBlock& weight() { return weight_; }
  ParameterBlock& bias() { return bias_; }
  const ParameterBlock& weight() const { return weight_; }
  const ParameterBlock& bias() const { return bias_; }

  /// Uniform(-1/sqrt(in), 1/sqrt(in)) for weights and bias.
  void init_uniform(SeededRng& rng);

  void forward(std::span<const double> x, std::span<double> out) const;
  /// Accumulates parameter gradients; adds d(loss)/dx into `dx` when non-empty.
  void backward(std::span<const double> x, std::span<const double> dout, std::span<double> dx);

  ParameterList parameters() { return {&weight_, &bias_}; }

 private:
  std::size_t in_;
  std::size_t out_;
  ParameterBlock weight_;
  ParameterBlock bias_;
};

/// out = Wq * monotone_in + Wm * free_in + b with Wq kept nonnegative, so the
/// output is nondecreasing in every monotone input.
class ConstrainedLinear {
 public:
  ConstrainedLinear(const std::string& name, std::size_t monotone_in, std::size_t free_in,
                    std::size_t out);

  std::size_t monotone_size() const { return monotone_in_; }
  std::size_t free_size() const { return free_in_; }
  std::size_t out_size() const { return out_; }
  ParameterBlock& monotone_weight() { return monotone_weight_; }
  ParameterBlock& free_weight() { return free_weight_; }
  ParameterBlock& bias() { return bias_; }
  const ParameterBlock& monotone_weight() const { return monotone_weight_; }
  const ParameterBlock& free_weight() const { return free_weight_; }
  const ParameterBlock& bias() const { return bias_; }

  void forward(std::span<const double> monotone_in, std::span<const double> free_in,
               std::span<double> out) const;
  void backward(std::span<const double> monotone_in, std::span<const double> free_in,
                std::span<const double> dout, std::span<double> dmonotone,
                std::span<double> dfree);

  ParameterList parameters() { return {&monotone_weight_, &free_weight_, &bias_}; }

 private:
  std::size_t monotone_in_;
  std::size_t free_in_;
  std::size_t out_;
  ParameterBlock monotone_weight_;
  ParameterBlock free_weight_;
  ParameterBlock bias_;
};

}  // namespace sqrdln
