#include "sqrdln/projection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sqrdln {

std::vector<double> isotonic_regression(std::span<const double> y,
                                        std::span<const double> weights) {
  const std::size_t n = y.size();
  if (!weights.empty() && weights.size() != n) {
    throw std::invalid_argument("isotonic_regression: weight length mismatch");
  }
  // Stack of pooled blocks: mean, total weight, element count.
  std::vector<double> mean;
  std::vector<double> weight;
  std::vector<std::size_t> count;
  mean.reserve(n);
  weight.reserve(n);
  count.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = y[i];
    double w = weights.empty() ? 1.0 : weights[i];
    if (!(w > 0.0)) throw std::invalid_argument("isotonic_regression: weights must be positive");
    std::size_t c = 1;
    while (!mean.empty() && mean.back() > m) {
      const double wt = weight.back() + w;
      m = (mean.back() * weight.back() + m * w) / wt;
      w = wt;
      c += count.back();
      mean.pop_back();
      weight.pop_back();
      count.pop_back();
    }
    mean.push_back(m);
    weight.push_back(w);
    count.push_back(c);
  }
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t b = 0; b < mean.size(); ++b) out.insert(out.end(), count[b], mean[b]);
  return out;
}

namespace {

// Replaces `values` by its projection onto the set nondecreasing along `dim`.
void project_chains(std::vector<double>& values, const std::vector<std::size_t>& shape,
                    std::size_t dim) {
  std::size_t stride = 1;
  for (std::size_t j = dim + 1; j < shape.size(); ++j) stride *= shape[j];
  const std::size_t len = shape[dim];
  const std::size_t outer = values.size() / (len * stride);
  std::vector<double> chain(len);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t s = 0; s < stride; ++s) {
      const std::size_t base = o * len * stride + s;
      bool sorted = true;
      for (std::size_t i = 0; i < len; ++i) {
        chain[i] = values[base + i * stride];
        if (i > 0 && chain[i] < chain[i - 1]) sorted = false;
      }
      if (sorted) continue;
      const auto fitted = isotonic_regression(chain);
      for (std::size_t i = 0; i < len; ++i) values[base + i * stride] = fitted[i];
    }
  }
}

}  // namespace

ProjectionReport project_monotone_array(std::vector<double>& values,
                                        const std::vector<std::size_t>& shape,
                                        const std::vector<std::size_t>& dims,
                                        const ProjectionOptions& options) {
  if (element_count(shape) != values.size()) {
    throw std::invalid_argument("project_monotone: shape does not match value count");
  }
  ProjectionReport report;
  if (dims.empty()) return report;
  if (dims.size() == 1) {
    project_chains(values, shape, dims.front());
    report.sweeps = 1;
    return report;
  }

  // Dykstra: x is the running iterate, one correction term per constraint set.
  std::vector<std::vector<double>> corrections(dims.size(),
                                               std::vector<double>(values.size(), 0.0));
  std::vector<double> shifted(values.size());
  std::vector<double> sweep_start;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    sweep_start = values;
    for (std::size_t c = 0; c < dims.size(); ++c) {
      auto& corr = corrections[c];
      for (std::size_t i = 0; i < values.size(); ++i) shifted[i] = values[i] + corr[i];
      values = shifted;
      project_chains(values, shape, dims[c]);
      for (std::size_t i = 0; i < values.size(); ++i) corr[i] = shifted[i] - values[i];
    }
    double change = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      change = std::max(change, std::abs(values[i] - sweep_start[i]));
    }
    report.sweeps = sweep + 1;
    report.last_change = change;
    if (change < options.tolerance) break;
  }
  return report;
}

ProjectionReport project_monotone(ParameterBlock& block, const ProjectionOptions& options) {
  switch (block.constraint().kind) {
    case ConstraintKind::None:
      return {};
    case ConstraintKind::Nonnegative:
      for (double& v : block.values()) v = std::max(v, 0.0);
      return {1, 0.0};
    case ConstraintKind::MonotonePerDimension:
      return project_monotone_array(block.values(), block.shape(), block.constraint().dims,
                                    options);
  }
  return {};
}

void apply_constraints(const ParameterList& params) {
  for (auto* p : params) project_monotone(*p);
}

}  // namespace sqrdln
