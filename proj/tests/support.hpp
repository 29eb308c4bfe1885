#pragma once

#include <cmath>
#include <vector>

#include "mdg/image.hpp"
#include "mdg/rng.hpp"
#include "mdg/tps.hpp"

namespace mdg::testing {

// Random pair set whose destination points are spread over [-0.9, 0.9]^2 and
// kept at least `min_gap` apart so the system stays well conditioned.
inline std::vector<ControlPair> random_pairs(CounterRng& rng, std::size_t n, double jitter = 0.2,
                                             double min_gap = 0.1) {
  std::vector<ControlPair> pairs;
  while (pairs.size() < n) {
    const Point2 d{rng.uniform() * 1.8 - 0.9, rng.uniform() * 1.8 - 0.9};
    bool ok = true;
    for (const auto& p : pairs) ok = ok && std::hypot(p.dst.x - d.x, p.dst.y - d.y) >= min_gap;
    if (!ok) continue;
    pairs.push_back({{d.x + jitter * (rng.uniform() * 2 - 1), d.y + jitter * (rng.uniform() * 2 - 1)}, d});
  }
  return pairs;
}

inline std::vector<ControlPair> identity_pairs() {
  const std::vector<Point2> pts{{-0.5, -0.5}, {0.5, -0.4}, {0.4, 0.6}, {-0.6, 0.3}, {0.1, 0.05}};
  std::vector<ControlPair> out;
  for (const auto& p : pts) out.push_back({p, p});
  return out;
}

inline std::vector<ControlPair> shifted_pairs(double dx, double dy) {
  auto pairs = identity_pairs();
  for (auto& p : pairs) p.src = {p.dst.x + dx, p.dst.y + dy};
  return pairs;
}

// Brute-force reading of the interpolant, independent of eval_tps.
inline Point2 eval_reference(const TpsTransform& t, Point2 p) {
  double x = t.affine(0, 0) * p.x + t.affine(0, 1) * p.y + t.affine(0, 2);
  double y = t.affine(1, 0) * p.x + t.affine(1, 1) * p.y + t.affine(1, 2);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double dx = t.controls_d[i].x - p.x, dy = t.controls_d[i].y - p.y;
    const double r2 = dx * dx + dy * dy;
    const double u = r2 == 0.0 ? 0.0 : r2 * std::log(r2);
    x += t.weights(static_cast<Eigen::Index>(i), 0) * u;
    y += t.weights(static_cast<Eigen::Index>(i), 1) * u;
  }
  return {x, y};
}

inline RasterImage random_image(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
  CounterRng rng(seed);
  RasterImage img(h, w, c);
  // Multiples of 1/255 so PPM round trips are exact.
  for (auto& v : img.data) v = static_cast<double>(rng.uniform_int(0, 255)) / 255.0;
  return img;
}

}  // namespace mdg::testing
