#pragma once

// Thin-plate spline solve and evaluation.
//
// A transform maps a point p in the driving (origin) space D to the source
// (deformation) space S:
//
//   T(p) = A [p; 1] + sum_i w_i U(|p_i^D - p|),   U(r) = r^2 log r^2
//
// The parameters come from the (N+3)x(N+3) system [K P; P^T 0] theta = Y,
// whose bottom three rows force sum w_i = sum w_i x_i = sum w_i y_i = 0.
// All coordinates are normalized: pixel (0,0) is (-1,-1) and pixel
// (W-1,H-1) is (1,1).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mdg/binary_io.hpp"

namespace mdg {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Normalized coordinate of pixel (row, col) on a height x width lattice.
Point2 pixel_to_normalized(std::size_t row, std::size_t col, std::size_t height, std::size_t width);

struct ControlPair {
  Point2 src;  // deformation space S
  Point2 dst;  // origin space D
};

struct TpsTransform {
  Eigen::Matrix<double, 2, 3> affine = Eigen::Matrix<double, 2, 3>::Zero();  // columns: x, y, 1
  Eigen::Matrix<double, Eigen::Dynamic, 2> weights;                          // row i is w_i^T
  std::vector<Point2> controls_d;
  double regularization = 0.0;

  std::size_t size() const { return controls_d.size(); }
};

/// Dense H x W lattice of points, row-major.
struct PointGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Point2> points;

  const Point2& at(std::size_t row, std::size_t col) const { return points[row * width + col]; }
  Point2& at(std::size_t row, std::size_t col) { return points[row * width + col]; }
};

/// U(r) = r^2 log(r^2) with U(0) = 0.
double rbf_u(double r);

/// Solve for the TPS through `pairs`. `regularization` is added to the
/// diagonal of the K block. Throws SingularSystem when the destinations are
/// degenerate (duplicates, collinear) and InvalidArgument for N < 3.
TpsTransform solve_tps(std::span<const ControlPair> pairs, double regularization = 0.0);

Point2 eval_tps(const TpsTransform& t, Point2 p);

/// eval_tps over every pixel of the normalized lattice.
PointGrid eval_tps_grid(const TpsTransform& t, std::size_t height, std::size_t width);

/// Discrete bending energy sum_d w_d^T K w_d over both output dimensions,
/// with K built from the unregularized kernel. Clamped at 0.
double bending_energy(const TpsTransform& t);

/// Identity lattice (what eval_tps_grid returns for the identity transform).
PointGrid identity_grid(std::size_t height, std::size_t width);

/// Largest |T(p_i^D) - p_i^S| over the pairs, infinity norm.
double max_interpolation_residual(const TpsTransform& t, std::span<const ControlPair> pairs);

// CSV with header `src_x,src_y,dst_x,dst_y`.
std::vector<ControlPair> parse_pairs_csv(const std::string& text);
std::string format_pairs_csv(std::span<const ControlPair> pairs);

// Binary `MDTP`: u32 N, float32 A (row-major 2x3), float32 w (N x 2
// row-major), float32 controls (N x 2).
io::Bytes encode_tps(const TpsTransform& t);
TpsTransform decode_tps(std::span<const std::uint8_t> bytes);

}  // namespace mdg
