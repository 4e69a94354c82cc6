#include "sqrdln/calibrator.hpp"

#include <algorithm>
#include <stdexcept>

namespace sqrdln {

Calibrator::Calibrator(std::string name, std::vector<double> keypoints, bool monotone)
    : keypoints_(std::move(keypoints)),
      outputs_(std::move(name), {keypoints_.size()},
               monotone ? Constraint::monotone({0}) : Constraint::none()) {
  if (keypoints_.size() < 2) throw std::invalid_argument("calibrator needs at least 2 keypoints");
  for (std::size_t i = 1; i < keypoints_.size(); ++i) {
    if (!(keypoints_[i] > keypoints_[i - 1])) {
      throw std::invalid_argument("calibrator keypoints must be strictly increasing");
    }
  }
}

std::vector<double> Calibrator::uniform_keypoints(std::size_t count, double lo, double hi) {
  if (count < 2 || !(hi > lo)) throw std::invalid_argument("uniform_keypoints: bad range");
  std::vector<double> a(count);
  for (std::size_t i = 0; i < count; ++i) {
    a[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  a.back() = hi;
  return a;
}

void Calibrator::init_ramp(double lo, double hi) {
  auto& b = outputs_.values();
  const double first = keypoints_.front();
  const double span = keypoints_.back() - first;
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = lo + (hi - lo) * (keypoints_[i] - first) / span;
  }
}

Calibrator::Segment Calibrator::locate(double x) const {
  const std::size_t k = keypoints_.size();
  if (x <= keypoints_.front()) return {0, 0.0, x < keypoints_.front()};
  if (x >= keypoints_.back()) return {k - 2, 1.0, x > keypoints_.back()};
  const auto it = std::upper_bound(keypoints_.begin(), keypoints_.end(), x);
  const std::size_t left = static_cast<std::size_t>(it - keypoints_.begin()) - 1;
  const double frac = (x - keypoints_[left]) / (keypoints_[left + 1] - keypoints_[left]);
  return {left, frac, false};
}

double Calibrator::forward(double x) const {
  const Segment s = locate(x);
  const auto& b = outputs_.values();
  if (s.frac == 0.0) return b[s.left];
  if (s.frac == 1.0) return b[s.left + 1];
  return (1.0 - s.frac) * b[s.left] + s.frac * b[s.left + 1];
}

void Calibrator::forward(std::span<const double> x, std::span<double> out) const {
  if (x.size() != out.size()) throw std::invalid_argument("calibrator: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = forward(x[i]);
}

double Calibrator::backward(double x, double upstream) {
  const Segment s = locate(x);
  auto& g = outputs_.grad();
  g[s.left] += upstream * (1.0 - s.frac);
  g[s.left + 1] += upstream * s.frac;
  if (s.clamped) return 0.0;
  const auto& b = outputs_.values();
  const double slope =
      (b[s.left + 1] - b[s.left]) / (keypoints_[s.left + 1] - keypoints_[s.left]);
  return upstream * slope;
}

}  // namespace sqrdln
