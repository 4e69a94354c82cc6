#pragma once

#include <span>
#include <string>
#include <vector>

#include "sqrdln/parameter.hpp"

namespace sqrdln {

/// One-dimensional piecewise-linear lattice: fixed input keypoints `a`,
/// trainable outputs `b`. Inputs outside [a.front(), a.back()] are clamped.
class Calibrator {
 public:
  Calibrator(std::string name, std::vector<double> keypoints, bool monotone);

  /// Evenly spaced keypoints over [lo, hi].
  static std::vector<double> uniform_keypoints(std::size_t count, double lo, double hi);

  const std::vector<double>& keypoints() const { return keypoints_; }
  ParameterBlock& outputs() { return outputs_; }
  const ParameterBlock& outputs() const { return outputs_; }
  bool monotone() const { return outputs_.constraint().kind != ConstraintKind::None; }

  /// Sets outputs to a linear ramp from `lo` at the first keypoint to `hi` at the last.
  void init_ramp(double lo, double hi);

  double forward(double x) const;
  void forward(std::span<const double> x, std::span<double> out) const;

  /// Adds d(loss)/d(outputs) for one input into the grad buffer and returns
  /// d(loss)/dx. The input derivative is zero in the clamped regions.
  double backward(double x, double upstream);

 private:
  struct Segment {
    std::size_t left;
    double frac;
    bool clamped;
  };
  Segment locate(double x) const;

  std::vector<double> keypoints_;
  ParameterBlock outputs_;
};

}  // namespace sqrdln
