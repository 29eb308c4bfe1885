#include "mdg/spline.hpp"

#include <algorithm>
#include <cmath>

#include "mdg/error.hpp"

namespace mdg {

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  const std::size_t n = knots_.size();
  require(n >= 2, "NaturalCubicSpline: need at least 2 knots");
  require(values_.size() == n, "NaturalCubicSpline: knot/value size mismatch");
  for (std::size_t i = 1; i < n; ++i) require(knots_[i] > knots_[i - 1], "NaturalCubicSpline: knots must increase");

  // Tridiagonal system for interior moments, solved by the Thomas algorithm.
  moments_.assign(n, 0.0);
  if (n == 2) return;
  const std::size_t m = n - 2;
  std::vector<double> diag(m), upper(m), rhs(m);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = knots_[i] - knots_[i - 1];
    const double h1 = knots_[i + 1] - knots_[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((values_[i + 1] - values_[i]) / h1 - (values_[i] - values_[i - 1]) / h0);
  }
  // lower[i] (coefficient of M_{i-1} in row i) equals upper[i-1].
  for (std::size_t i = 1; i < m; ++i) {
    const double factor = upper[i - 1] / diag[i - 1];
    diag[i] -= factor * upper[i - 1];
    rhs[i] -= factor * rhs[i - 1];
  }
  moments_[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) moments_[i + 1] = (rhs[i] - upper[i] * moments_[i + 2]) / diag[i];
}

std::size_t NaturalCubicSpline::segment(double t) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  std::size_t i = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
  return std::min(i, knots_.size() - 2);
}

double NaturalCubicSpline::operator()(double t) const {
  const std::size_t i = segment(t);
  if (t == knots_[i]) return values_[i];
  if (t == knots_[i + 1]) return values_[i + 1];
  const double h = knots_[i + 1] - knots_[i];
  const double a = (knots_[i + 1] - t) / h;
  const double b = (t - knots_[i]) / h;
  return a * values_[i] + b * values_[i + 1] +
         ((a * a * a - a) * moments_[i] + (b * b * b - b) * moments_[i + 1]) * h * h / 6.0;
}

double NaturalCubicSpline::derivative(double t) const {
  const std::size_t i = segment(t);
  const double h = knots_[i + 1] - knots_[i];
  const double a = (knots_[i + 1] - t) / h;
  const double b = (t - knots_[i]) / h;
  return (values_[i + 1] - values_[i]) / h - (3 * a * a - 1) * h / 6.0 * moments_[i] +
         (3 * b * b - 1) * h / 6.0 * moments_[i + 1];
}

double NaturalCubicSpline::second_derivative(double t) const {
  const std::size_t i = segment(t);
  const double h = knots_[i + 1] - knots_[i];
  const double b = (t - knots_[i]) / h;
  return (1 - b) * moments_[i] + b * moments_[i + 1];
}

Matrix spline_fill(const Matrix& left, const Matrix& right, Eigen::Index gap) {
  if (left.rows() < 2 || right.rows() < 2) throw InvalidArgument("spline_fill: each side needs at least 2 knot frames");
  if (left.cols() != right.cols()) throw InvalidArgument("spline_fill: channel count mismatch");
  if (gap < 1) throw InvalidArgument("spline_fill: gap must be >= 1");
  const Eigen::Index nl = left.rows();
  const Eigen::Index nr = right.rows();
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(nl + nr));
  for (Eigen::Index i = 0; i < nl; ++i) knots.push_back(static_cast<double>(i));
  for (Eigen::Index i = 0; i < nr; ++i) knots.push_back(static_cast<double>(nl + gap + i));

  Matrix out(gap, left.cols());
  std::vector<double> values(knots.size());
  for (Eigen::Index c = 0; c < left.cols(); ++c) {
    for (Eigen::Index i = 0; i < nl; ++i) values[static_cast<std::size_t>(i)] = left(i, c);
    for (Eigen::Index i = 0; i < nr; ++i) values[static_cast<std::size_t>(nl + i)] = right(i, c);
    const NaturalCubicSpline spline(knots, values);
    for (Eigen::Index g = 0; g < gap; ++g) out(g, c) = spline(static_cast<double>(nl + g));
  }
  return out;
}

}  // namespace mdg
