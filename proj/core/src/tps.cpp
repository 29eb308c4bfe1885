#include "mdg/tps.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "mdg/error.hpp"

namespace mdg {

namespace {

constexpr double kSingularResidual = 1e-6;

bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

Point2 pixel_to_normalized(std::size_t row, std::size_t col, std::size_t height, std::size_t width) {
  require(height >= 2 && width >= 2, "pixel_to_normalized: lattice must be at least 2x2");
  return {2.0 * static_cast<double>(col) / static_cast<double>(width - 1) - 1.0,
          2.0 * static_cast<double>(row) / static_cast<double>(height - 1) - 1.0};
}

double rbf_u(double r) {
  if (!std::isfinite(r) || r < 0.0) throw InvalidArgument("rbf_u: r must be finite and non-negative");
  if (r == 0.0) return 0.0;
  const double r2 = r * r;
  return r2 * std::log(r2);
}

TpsTransform solve_tps(std::span<const ControlPair> pairs, double regularization) {
  const auto n = static_cast<Eigen::Index>(pairs.size());
  if (n < 3) throw InvalidArgument("solve_tps: need at least 3 control pairs, got " + std::to_string(n));
  if (!std::isfinite(regularization) || regularization < 0.0)
    throw InvalidArgument("solve_tps: regularization must be finite and >= 0");
  for (const auto& pair : pairs)
    if (!finite(pair.src) || !finite(pair.dst)) throw InvalidArgument("solve_tps: non-finite control point");

  const Eigen::Index dim = n + 3;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(dim, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point2 pi = pairs[i].dst;
    for (Eigen::Index j = 0; j < n; ++j) system(i, j) = i == j ? regularization : rbf_u(distance(pi, pairs[j].dst));
    system(i, n) = 1.0;
    system(i, n + 1) = pi.x;
    system(i, n + 2) = pi.y;
    system(n, i) = 1.0;
    system(n + 1, i) = pi.x;
    system(n + 2, i) = pi.y;
    rhs(i, 0) = pairs[i].src.x;
    rhs(i, 1) = pairs[i].src.y;
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw SingularSystem("solve_tps: L system is singular (duplicate or collinear controls)");
  Eigen::MatrixX2d theta = lu.solve(rhs);
  // One step of iterative refinement tightens the side conditions.
  theta += lu.solve(Eigen::MatrixX2d(rhs - system * theta));
  const double residual = (system * theta - rhs).cwiseAbs().maxCoeff();
  if (!(residual <= kSingularResidual))
    throw SingularSystem("solve_tps: residual " + std::to_string(residual) + " exceeds singularity bound");

  TpsTransform t;
  t.regularization = regularization;
  t.weights = theta.topRows(n);
  t.affine.col(0) = theta.row(n + 1).transpose();
  t.affine.col(1) = theta.row(n + 2).transpose();
  t.affine.col(2) = theta.row(n).transpose();
  t.controls_d.reserve(pairs.size());
  for (const auto& pair : pairs) t.controls_d.push_back(pair.dst);
  return t;
}

Point2 eval_tps(const TpsTransform& t, Point2 p) {
  if (!finite(p)) throw InvalidArgument("eval_tps: non-finite query point");
  double x = t.affine(0, 0) * p.x + t.affine(0, 1) * p.y + t.affine(0, 2);
  double y = t.affine(1, 0) * p.x + t.affine(1, 1) * p.y + t.affine(1, 2);
  for (std::size_t i = 0; i < t.controls_d.size(); ++i) {
    const double u = rbf_u(distance(t.controls_d[i], p));
    x += t.weights(static_cast<Eigen::Index>(i), 0) * u;
    y += t.weights(static_cast<Eigen::Index>(i), 1) * u;
  }
  return {x, y};
}

PointGrid eval_tps_grid(const TpsTransform& t, std::size_t height, std::size_t width) {
  if (height < 2 || width < 2) throw InvalidArgument("eval_tps_grid: height and width must be >= 2");
  PointGrid grid{height, width, std::vector<Point2>(height * width)};
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c) grid.at(r, c) = eval_tps(t, pixel_to_normalized(r, c, height, width));
  return grid;
}

PointGrid identity_grid(std::size_t height, std::size_t width) {
  if (height < 2 || width < 2) throw InvalidArgument("identity_grid: height and width must be >= 2");
  PointGrid grid{height, width, std::vector<Point2>(height * width)};
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c) grid.at(r, c) = pixel_to_normalized(r, c, height, width);
  return grid;
}

double bending_energy(const TpsTransform& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd kernel(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) kernel(i, j) = rbf_u(distance(t.controls_d[i], t.controls_d[j]));
  const double energy = (t.weights.transpose() * kernel * t.weights).trace();
  return std::max(energy, 0.0);
}

double max_interpolation_residual(const TpsTransform& t, std::span<const ControlPair> pairs) {
  double worst = 0.0;
  for (const auto& pair : pairs) {
    const Point2 q = eval_tps(t, pair.dst);
    worst = std::max({worst, std::abs(q.x - pair.src.x), std::abs(q.y - pair.src.y)});
  }
  return worst;
}

std::vector<ControlPair> parse_pairs_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<ControlPair> pairs;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "src_x,src_y,dst_x,dst_y")
        throw ParseError("pairs csv: expected header 'src_x,src_y,dst_x,dst_y', got '" + line + "'");
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string cell;
    double values[4];
    int count = 0;
    while (std::getline(fields, cell, ',')) {
      if (count == 4) throw ParseError("pairs csv: too many fields on line " + std::to_string(line_no));
      std::istringstream num(cell);
      num.imbue(std::locale::classic());
      if (!(num >> values[count]) || !(num >> std::ws).eof())
        throw ParseError("pairs csv: bad number '" + cell + "' on line " + std::to_string(line_no));
      ++count;
    }
    if (count != 4) throw ParseError("pairs csv: expected 4 fields on line " + std::to_string(line_no));
    pairs.push_back({{values[0], values[1]}, {values[2], values[3]}});
  }
  if (!header_seen) throw ParseError("pairs csv: missing header");
  return pairs;
}

std::string format_pairs_csv(std::span<const ControlPair> pairs) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "src_x,src_y,dst_x,dst_y\n" << std::setprecision(17);
  for (const auto& p : pairs) out << p.src.x << ',' << p.src.y << ',' << p.dst.x << ',' << p.dst.y << '\n';
  return out.str();
}

io::Bytes encode_tps(const TpsTransform& t) {
  io::Writer w;
  w.magic("MDTP");
  w.u32(static_cast<std::uint32_t>(t.size()));
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(t.affine(r, c)));
  for (Eigen::Index i = 0; i < t.weights.rows(); ++i) {
    w.f32(static_cast<float>(t.weights(i, 0)));
    w.f32(static_cast<float>(t.weights(i, 1)));
  }
  for (const auto& p : t.controls_d) {
    w.f32(static_cast<float>(p.x));
    w.f32(static_cast<float>(p.y));
  }
  return w.take();
}

TpsTransform decode_tps(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "MDTP");
  r.expect_magic("MDTP");
  const std::uint32_t n = r.u32("control count");
  if (n < 3) r.fail("control count must be >= 3");
  if (r.remaining() != (6 + 4 * static_cast<std::size_t>(n)) * 4) r.fail("payload size does not match control count");
  TpsTransform t;
  for (int row = 0; row < 2; ++row)
    for (int c = 0; c < 3; ++c) t.affine(row, c) = r.f32("affine");
  t.weights.resize(n, 2);
  for (std::uint32_t i = 0; i < n; ++i) {
    t.weights(i, 0) = r.f32("weights");
    t.weights(i, 1) = r.f32("weights");
  }
  t.controls_d.resize(n);
  for (auto& p : t.controls_d) {
    p.x = r.f32("controls");
    p.y = r.f32("controls");
  }
  r.expect_end();
  if (!t.affine.allFinite() || !t.weights.allFinite()) r.fail("non-finite parameter");
  for (const auto& p : t.controls_d)
    if (!finite(p)) r.fail("non-finite control point");
  return t;
}

}  // namespace mdg
