#pragma once

#include <cstddef>
#include <span>

#include "aasm/sparse_matrix.hpp"

namespace aasm {

/// Composite objective F + G in DOF coordinates: F smooth, G the indicator of
/// a box (or zero). Only F is evaluated; G enters through `project`.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  /// Writes grad F(x) into `grad` and returns F(x).
  virtual double value_and_gradient(std::span<const double> x, std::span<double> grad) const = 0;
  /// Euclidean projection onto dom G, in place.
  virtual void project(std::span<double> /*x*/) const {}
  /// Size of a step dx as used by the successive-iterate stopping rule.
  virtual double step_metric(std::span<const double> dx) const { return norm_sq(dx); }
};

}  // namespace aasm
