#pragma once

#include <cstddef>
#include <span>

#include "eigstab/fem.hpp"

namespace eigstab {

class ReflectionAxis {
 public:
  enum class Kind { Vertical, Horizontal };

  static ReflectionAxis vertical(double x0) { return {Kind::Vertical, x0}; }
  static ReflectionAxis horizontal(double y0) { return {Kind::Horizontal, y0}; }

  Kind kind() const { return kind_; }
  double position() const { return position_; }

  Point2 reflect(Point2 p) const {
    return kind_ == Kind::Vertical ? Point2{2 * position_ - p.x, p.y} : Point2{p.x, 2 * position_ - p.y};
  }

 private:
  ReflectionAxis(Kind k, double pos) : kind_(k), position_(pos) {}
  Kind kind_;
  double position_;
};

/// A = |u + u*| / |u| in L2, u* the nodal interpolant of u(reflect(x)).
/// 0 for an antisymmetric field, 2 for a symmetric one.
double antisymmetry(const FEFunction& u, const ReflectionAxis& axis, double tol);

/// (lambda_t - lambda_0) / t.
double difference_quotient(double lambda_t, double lambda_0, double t);

/// values[j] - values[i] (0-based).
double gap(std::span<const double> values, std::size_t i, std::size_t j);

/// |(u,v)_B| / (|u|_B |v|_B).
double cross_orthogonality(const FEFunction& u, const FEFunction& v, const SparseSym& B, const DofMap& dofs);

}  // namespace eigstab
