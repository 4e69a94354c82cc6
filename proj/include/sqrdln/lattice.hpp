#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sqrdln/parameter.hpp"
#include "sqrdln/rng.hpp"

namespace sqrdln {

/// Multilinear interpolation weights of a point over the 2^D corners of the
/// unit hypercube. Corner c has vertex bit v[d] = (c >> d) & 1. The point is
/// clamped to [0,1]^D first.
std::vector<double> interpolation_weights(std::span<const double> x);

/// Corners of the grid cell containing a point, with their flat indices into
/// a row-major k^D table and their interpolation weights.
struct CellWeights {
  std::vector<std::size_t> vertex;
  std::vector<double> weight;
};

/// Locates `x` (clamped to [0,1]^D) on a uniform grid with `k` keypoints per
/// dimension. Coordinates within rounding distance of a keypoint snap to it so
/// that grid vertices reproduce their table entry exactly.
CellWeights cell_weights(std::span<const double> x, std::size_t k);

/// Multilinear lattice over [0,1]^D with k uniformly spaced keypoints per
/// dimension. The table is a row-major k^D block, monotone along the
/// flagged dimensions.
class Lattice {
 public:
  Lattice(std::string name, std::size_t dims, std::size_t keypoints,
          std::vector<std::size_t> monotone_dims);

  std::size_t dims() const { return dims_; }
  std::size_t keypoints() const { return keypoints_; }
  const std::vector<std::size_t>& monotone_dims() const { return theta_.constraint().dims; }
  ParameterBlock& theta() { return theta_; }
  const ParameterBlock& theta() const { return theta_; }

  /// Linear ramp 0 -> 1 along the monotone dimensions (averaged when there
  /// are several), plus zero-mean gaussian noise of `noise` std elsewhere.
  void init_ramp(SeededRng& rng, double noise);

  double forward(std::span<const double> x) const;

  /// Accumulates d(loss)/d(theta) and writes d(loss)/dx into `dx` (zero for
  /// coordinates outside [0,1]).
  void backward(std::span<const double> x, double upstream, std::span<double> dx);

 private:
  void check_input(std::span<const double> x) const;

  std::size_t dims_;
  std::size_t keypoints_;
  ParameterBlock theta_;
};

/// Layer of lattices, each fed a disjoint group of features plus the quantile
/// level in its last (monotone) dimension.
class LatticeEnsemble {
 public:
  LatticeEnsemble(std::string name, std::vector<std::vector<std::size_t>> assignment,
                  std::size_t keypoints);

  /// Shuffles 0..features-1 with `rng` and cuts the result into contiguous
  /// groups of `group_size` (the last group may be smaller).
  static std::vector<std::vector<std::size_t>> partition(std::size_t features,
                                                         std::size_t group_size,
                                                         SeededRng& rng);

  std::size_t size() const { return lattices_.size(); }
  std::size_t feature_count() const { return feature_count_; }
  const std::vector<std::vector<std::size_t>>& assignment() const { return assignment_; }
  std::vector<Lattice>& lattices() { return lattices_; }
  const std::vector<Lattice>& lattices() const { return lattices_; }
  /// Index of the dimension reserved for the quantile level in lattice i.
  std::size_t quantile_dim(std::size_t i) const { return lattices_[i].dims() - 1; }

  void forward(std::span<const double> features, double quantile, std::span<double> out) const;

  /// Accumulates parameter gradients; adds input gradients into
  /// `dfeatures` and `dquantile`.
  void backward(std::span<const double> features, double quantile,
                std::span<const double> upstream, std::span<double> dfeatures,
                double& dquantile);

  ParameterList parameters();

 private:
  std::vector<std::vector<std::size_t>> assignment_;
  std::vector<Lattice> lattices_;
  std::size_t feature_count_ = 0;
};

}  // namespace sqrdln
