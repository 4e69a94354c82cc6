#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sqrdln {

/// Explicitly seeded random source. Every consumer owns its instance; there is
/// no process-wide generator.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  std::uint64_t next() { return engine_(); }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    std::shuffle(items.begin(), items.end(), engine_);
  }

  /// Derives an independent stream, e.g. one per subsystem of a run.
  SeededRng fork(std::uint64_t salt) {
    return SeededRng(seed_ * 0x9E3779B97F4A7C15ULL + salt + next());
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace sqrdln
