#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sqrdln {

enum class ConstraintKind { None, Nonnegative, MonotonePerDimension };

/// Constraint attached to a parameter block. For MonotonePerDimension the
/// block is kept nondecreasing along every listed dimension index.
struct Constraint {
  ConstraintKind kind = ConstraintKind::None;
  std::vector<std::size_t> dims;

  static Constraint none() { return {}; }
  static Constraint nonnegative() { return {ConstraintKind::Nonnegative, {}}; }
  static Constraint monotone(std::vector<std::size_t> dims) {
    return {ConstraintKind::MonotonePerDimension, std::move(dims)};
  }

  bool operator==(const Constraint&) const = default;
};

std::string to_string(ConstraintKind kind);
ConstraintKind constraint_kind_from_string(const std::string& name);

/// Named array of trainable values with a gradient buffer of identical shape.
/// Storage is row-major (last dimension fastest).
class ParameterBlock {
 public:
  ParameterBlock() = default;
  ParameterBlock(std::string name, std::vector<std::size_t> shape,
                 Constraint constraint = {});

  const std::string& name() const { return name_; }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const Constraint& constraint() const { return constraint_; }
  std::size_t size() const { return values_.size(); }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& grad() { return grad_; }
  const std::vector<double>& grad() const { return grad_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  void zero_grad();
  /// Replaces the values; throws std::invalid_argument on size mismatch.
  void assign(const std::vector<double>& values);

  /// Checks that values and grad agree with the declared shape.
  void check_shape() const;

 private:
  std::string name_;
  std::vector<std::size_t> shape_;
  Constraint constraint_;
  std::vector<double> values_;
  std::vector<double> grad_;
};

std::size_t element_count(const std::vector<std::size_t>& shape);

/// True when the block satisfies its constraint up to `tol`.
bool satisfies_constraint(const ParameterBlock& block, double tol = 1e-9);

using ParameterList = std::vector<ParameterBlock*>;

std::size_t total_size(const ParameterList& params);
void zero_grads(const ParameterList& params);

}  // namespace sqrdln
