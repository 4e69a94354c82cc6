#include "sqrdln/parameter.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace sqrdln {

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::None:
      return "none";
    case ConstraintKind::Nonnegative:
      return "nonnegative";
    case ConstraintKind::MonotonePerDimension:
      return "monotone";
  }
  return "none";
}

ConstraintKind constraint_kind_from_string(const std::string& name) {
  if (name == "none") return ConstraintKind::None;
  if (name == "nonnegative") return ConstraintKind::Nonnegative;
  if (name == "monotone") return ConstraintKind::MonotonePerDimension;
  throw std::invalid_argument("unknown constraint kind '" + name + "'");
}

std::size_t element_count(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

ParameterBlock::ParameterBlock(std::string name, std::vector<std::size_t> shape,
                               Constraint constraint)
    : name_(std::move(name)),
      shape_(std::move(shape)),
      constraint_(std::move(constraint)),
      values_(element_count(shape_), 0.0),
      grad_(values_.size(), 0.0) {
  for (std::size_t d : constraint_.dims) {
    if (d >= shape_.size()) {
      throw std::invalid_argument("constraint dimension out of range for block '" +
                                  name_ + "'");
    }
  }
}

void ParameterBlock::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

void ParameterBlock::assign(const std::vector<double>& values) {
  if (values.size() != values_.size()) {
    throw std::invalid_argument("size mismatch assigning block '" + name_ + "'");
  }
  values_ = values;
}

void ParameterBlock::check_shape() const {
  const std::size_t n = element_count(shape_);
  if (values_.size() != n || grad_.size() != n) {
    throw std::logic_error("values/grad shape mismatch in block '" + name_ + "'");
  }
}

bool satisfies_constraint(const ParameterBlock& block, double tol) {
  const auto& v = block.values();
  switch (block.constraint().kind) {
    case ConstraintKind::None:
      return true;
    case ConstraintKind::Nonnegative:
      return std::all_of(v.begin(), v.end(), [&](double x) { return x >= -tol; });
    case ConstraintKind::MonotonePerDimension: {
      const auto& shape = block.shape();
      for (std::size_t d : block.constraint().dims) {
        std::size_t stride = 1;
        for (std::size_t j = d + 1; j < shape.size(); ++j) stride *= shape[j];
        const std::size_t len = shape[d];
        for (std::size_t i = 0; i < v.size(); ++i) {
          const std::size_t pos = (i / stride) % len;
          if (pos + 1 < len && v[i + stride] < v[i] - tol) return false;
        }
      }
      return true;
    }
  }
  return true;
}

std::size_t total_size(const ParameterList& params) {
  std::size_t n = 0;
  for (const auto* p : params) n += p->size();
  return n;
}

void zero_grads(const ParameterList& params) {
  for (auto* p : params) p->zero_grad();
}

}  // namespace sqrdln
