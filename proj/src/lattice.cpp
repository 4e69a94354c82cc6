#include "sqrdln/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sqrdln {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::vector<double> interpolation_weights(std::span<const double> x) {
  const std::size_t d_count = x.size();
  const std::size_t corners = std::size_t{1} << d_count;
  std::vector<double> w(corners, 1.0);
  for (std::size_t c = 0; c < corners; ++c) {
    for (std::size_t d = 0; d < d_count; ++d) {
      const double xd = clamp01(x[d]);
      w[c] *= ((c >> d) & 1U) ? xd : 1.0 - xd;
    }
  }
  return w;
}

CellWeights cell_weights(std::span<const double> x, std::size_t k) {
  const std::size_t d_count = x.size();
  std::vector<std::size_t> lower(d_count);
  std::vector<double> frac(d_count);
  const double cells = static_cast<double>(k - 1);
  for (std::size_t d = 0; d < d_count; ++d) {
    double u = clamp01(x[d]) * cells;
    const double nearest = std::round(u);
    if (std::abs(u - nearest) < 1e-12 * cells) u = nearest;
    auto i = static_cast<std::size_t>(std::floor(u));
    if (i > k - 2) i = k - 2;
    lower[d] = i;
    frac[d] = u - static_cast<double>(i);
  }
  const std::size_t corners = std::size_t{1} << d_count;
  CellWeights out;
  out.vertex.assign(corners, 0);
  out.weight.assign(corners, 1.0);
  for (std::size_t c = 0; c < corners; ++c) {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < d_count; ++d) {
      const std::size_t bit = (c >> d) & 1U;
      flat = flat * k + lower[d] + bit;
      out.weight[c] *= bit ? frac[d] : 1.0 - frac[d];
    }
    out.vertex[c] = flat;
  }
  return out;
}

Lattice::Lattice(std::string name, std::size_t dims, std::size_t keypoints,
                 std::vector<std::size_t> monotone_dims)
    : dims_(dims),
      keypoints_(keypoints),
      theta_(std::move(name), std::vector<std::size_t>(dims, keypoints),
             monotone_dims.empty() ? Constraint::none()
                                   : Constraint::monotone(std::move(monotone_dims))) {
  if (dims < 1) throw std::invalid_argument("lattice needs at least one dimension");
  if (keypoints < 2) throw std::invalid_argument("lattice needs at least 2 keypoints per dimension");
  if (dims > 16) throw std::invalid_argument("lattice dimension too large");
}

void Lattice::init_ramp(SeededRng& rng, double noise) {
  const auto& mono = theta_.constraint().dims;
  const auto is_mono = [&](std::size_t d) {
    return std::find(mono.begin(), mono.end(), d) != mono.end();
  };
  std::size_t free_count = 1;
  for (std::size_t d = 0; d < dims_; ++d) {
    if (!is_mono(d)) free_count *= keypoints_;
  }
  // Noise is drawn per position of the free dimensions and shared along the
  // monotone ones, so the ramp stays feasible.
  std::vector<double> offset(free_count, 0.0);
  if (noise > 0.0) {
    for (auto& o : offset) o = rng.normal(0.0, noise);
  }
  auto& v = theta_.values();
  const double cells = static_cast<double>(keypoints_ - 1);
  for (std::size_t flat = 0; flat < v.size(); ++flat) {
    std::size_t rest = flat;
    std::size_t key = 0;
    std::size_t mult = 1;
    double ramp = 0.0;
    for (std::size_t d = dims_; d-- > 0;) {
      const std::size_t i = rest % keypoints_;
      rest /= keypoints_;
      if (is_mono(d)) {
        ramp += static_cast<double>(i) / cells;
      } else {
        key += i * mult;
        mult *= keypoints_;
      }
    }
    if (!mono.empty()) ramp /= static_cast<double>(mono.size());
    v[flat] = ramp + offset[key];
  }
}

void Lattice::check_input(std::span<const double> x) const {
  if (x.size() != dims_) {
    throw std::invalid_argument("lattice '" + theta_.name() + "' expects " +
                                std::to_string(dims_) + " inputs, got " +
                                std::to_string(x.size()));
  }
}

double Lattice::forward(std::span<const double> x) const {
  check_input(x);
  const CellWeights cw = cell_weights(x, keypoints_);
  const auto& theta = theta_.values();
  double out = 0.0;
  for (std::size_t c = 0; c < cw.vertex.size(); ++c) out += theta[cw.vertex[c]] * cw.weight[c];
  return out;
}

void Lattice::backward(std::span<const double> x, double upstream, std::span<double> dx) {
  check_input(x);
  if (dx.size() != dims_) throw std::invalid_argument("lattice backward: dx size mismatch");
  const std::size_t k = keypoints_;
  const double cells = static_cast<double>(k - 1);
  std::vector<std::size_t> lower(dims_);
  std::vector<double> frac(dims_);
  std::vector<bool> inside(dims_);
  for (std::size_t d = 0; d < dims_; ++d) {
    inside[d] = x[d] >= 0.0 && x[d] <= 1.0;
    double u = clamp01(x[d]) * cells;
    const double nearest = std::round(u);
    if (std::abs(u - nearest) < 1e-12 * cells) u = nearest;
    auto i = static_cast<std::size_t>(std::floor(u));
    if (i > k - 2) i = k - 2;
    lower[d] = i;
    frac[d] = u - static_cast<double>(i);
  }
  auto& theta = theta_.values();
  auto& grad = theta_.grad();
  std::fill(dx.begin(), dx.end(), 0.0);
  const std::size_t corners = std::size_t{1} << dims_;
  for (std::size_t c = 0; c < corners; ++c) {
    std::size_t flat = 0;
    double w = 1.0;
    for (std::size_t d = 0; d < dims_; ++d) {
      const std::size_t bit = (c >> d) & 1U;
      flat = flat * k + lower[d] + bit;
      w *= bit ? frac[d] : 1.0 - frac[d];
    }
    grad[flat] += upstream * w;
    const double value = theta[flat];
    for (std::size_t d = 0; d < dims_; ++d) {
      if (!inside[d]) continue;
      double partial = cells;
      for (std::size_t e = 0; e < dims_; ++e) {
        const std::size_t bit = (c >> e) & 1U;
        if (e == d) {
          partial *= bit ? 1.0 : -1.0;
        } else {
          partial *= bit ? frac[e] : 1.0 - frac[e];
        }
      }
      dx[d] += upstream * value * partial;
    }
  }
}

LatticeEnsemble::LatticeEnsemble(std::string name,
                                 std::vector<std::vector<std::size_t>> assignment,
                                 std::size_t keypoints)
    : assignment_(std::move(assignment)) {
  std::vector<std::size_t> seen;
  for (const auto& group : assignment_) {
    if (group.empty()) throw std::invalid_argument("lattice ensemble: empty feature group");
    seen.insert(seen.end(), group.begin(), group.end());
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] != i) {
      throw std::invalid_argument("lattice ensemble: assignment is not a partition of 0..E-1");
    }
  }
  feature_count_ = seen.size();
  lattices_.reserve(assignment_.size());
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    const std::size_t dims = assignment_[i].size() + 1;
    lattices_.emplace_back(name + ".lattice" + std::to_string(i), dims, keypoints,
                           std::vector<std::size_t>{dims - 1});
  }
}

std::vector<std::vector<std::size_t>> LatticeEnsemble::partition(std::size_t features,
                                                                 std::size_t group_size,
                                                                 SeededRng& rng) {
  if (features == 0 || group_size == 0) {
    throw std::invalid_argument("partition: features and group size must be positive");
  }
  std::vector<std::size_t> order(features);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t start = 0; start < features; start += group_size) {
    const std::size_t stop = std::min(features, start + group_size);
    groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                        order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return groups;
}

void LatticeEnsemble::forward(std::span<const double> features, double quantile,
                              std::span<double> out) const {
  if (features.size() != feature_count_) {
    throw std::invalid_argument("lattice ensemble: feature count mismatch");
  }
  if (out.size() != lattices_.size()) throw std::invalid_argument("lattice ensemble: output size mismatch");
  std::vector<double> x;
  for (std::size_t i = 0; i < lattices_.size(); ++i) {
    const auto& group = assignment_[i];
    x.resize(group.size() + 1);
    for (std::size_t j = 0; j < group.size(); ++j) x[j] = features[group[j]];
    x.back() = quantile;
    out[i] = lattices_[i].forward(x);
  }
}

void LatticeEnsemble::backward(std::span<const double> features, double quantile,
                               std::span<const double> upstream, std::span<double> dfeatures,
                               double& dquantile) {
  if (features.size() != feature_count_ || dfeatures.size() != feature_count_) {
    throw std::invalid_argument("lattice ensemble: feature count mismatch");
  }
  std::vector<double> x;
  std::vector<double> dx;
  for (std::size_t i = 0; i < lattices_.size(); ++i) {
    const auto& group = assignment_[i];
    x.resize(group.size() + 1);
    dx.resize(group.size() + 1);
    for (std::size_t j = 0; j < group.size(); ++j) x[j] = features[group[j]];
    x.back() = quantile;
    lattices_[i].backward(x, upstream[i], dx);
    for (std::size_t j = 0; j < group.size(); ++j) dfeatures[group[j]] += dx[j];
    dquantile += dx.back();
  }
}

ParameterList LatticeEnsemble::parameters() {
  ParameterList out;
  for (auto& l : lattices_) out.push_back(&l.theta());
  return out;
}

}  // namespace sqrdln
