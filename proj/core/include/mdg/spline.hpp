#pragma once

#include <span>
#include <vector>

#include "mdg/types.hpp"

namespace mdg {

/// Natural cubic spline (zero second derivative at both ends) through
/// strictly increasing knots.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> knots, std::vector<double> values);

  double operator()(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

  const std::vector<double>& knots() const { return knots_; }
  /// Second derivatives at the knots.
  const std::vector<double>& moments() const { return moments_; }

 private:
  std::size_t segment(double t) const;

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> moments_;
};

inline constexpr Eigen::Index kDefaultSplineKnots = 5;

/// Fill a gap of `gap` frames between `left` (frames just before the gap) and
/// `right` (frames just after it). Left knots sit at t = 0..L-1, the gap at
/// t = L..L+gap-1, right knots at t = L+gap..L+gap+R-1; each channel gets its
/// own natural cubic spline through all L+R knots.
Matrix spline_fill(const Matrix& left, const Matrix& right, Eigen::Index gap);

}  // namespace mdg
