#include "mdg/flow_warp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdg/error.hpp"

namespace mdg {

namespace {

// Sample position in pixel units, snapped to the nearest integer when within
// round-off of it so integer shifts reproduce pixels exactly.
double to_pixel(double normalized, std::size_t extent) {
  const double px = (normalized + 1.0) * 0.5 * static_cast<double>(extent - 1);
  const double nearest = std::round(px);
  return std::abs(px - nearest) < 1e-9 ? nearest : px;
}

double min_distance(Point2 q, const std::vector<Point2>& controls) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : controls) best = std::min(best, std::hypot(q.x - c.x, q.y - c.y));
  return best;
}

}  // namespace

bool inside_unit_square(Point2 p) {
  return p.x >= -1.0 - kBoundsSlack && p.x <= 1.0 + kBoundsSlack && p.y >= -1.0 - kBoundsSlack &&
         p.y <= 1.0 + kBoundsSlack;
}

FlowField make_flow(PointGrid grid) {
  FlowField flow{grid.height, grid.width, std::move(grid.points), {}};
  flow.valid.resize(flow.map.size());
  for (std::size_t i = 0; i < flow.map.size(); ++i) {
    if (!std::isfinite(flow.map[i].x) || !std::isfinite(flow.map[i].y))
      throw NumericError("make_flow: non-finite flow coordinate");
    flow.valid[i] = inside_unit_square(flow.map[i]) ? 1 : 0;
  }
  return flow;
}

std::vector<PointGrid> deform_grids(std::span<const TpsTransform> transforms, std::size_t height,
                                    std::size_t width) {
  require(!transforms.empty(), "deform_grids: need at least one transform");
  std::vector<PointGrid> grids;
  grids.reserve(transforms.size());
  for (const auto& t : transforms) grids.push_back(eval_tps_grid(t, height, width));
  return grids;
}

std::vector<double> blend_weights(std::span<const std::vector<Point2>> controls_d, std::size_t height,
                                  std::size_t width, double softness, bool background) {
  require(!controls_d.empty(), "blend_weights: need at least one control set");
  require(softness > 0.0 && std::isfinite(softness), "blend_weights: softness must be positive");
  for (const auto& set : controls_d) require(!set.empty(), "blend_weights: empty control set");
  const std::size_t k = controls_d.size();
  const std::size_t slots = k + (background ? 1 : 0);
  std::vector<double> weights(height * width * slots);
  std::vector<double> logits(slots);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const Point2 q = pixel_to_normalized(r, c, height, width);
      double farthest = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double d = min_distance(q, controls_d[i]);
        farthest = std::max(farthest, d);
        logits[i] = -d / softness;
      }
      if (background) logits[k] = -farthest / softness;
      const double top = *std::max_element(logits.begin(), logits.end());
      double total = 0.0;
      for (auto& l : logits) total += (l = std::exp(l - top));
      double* out = &weights[(r * width + c) * slots];
      for (std::size_t i = 0; i < slots; ++i) out[i] = logits[i] / total;
    }
  }
  return weights;
}

FlowField combine_flow(std::span<const PointGrid> grids, std::span<const std::vector<Point2>> controls_d,
                       double softness, bool background) {
  require(!grids.empty(), "combine_flow: need at least one grid");
  if (grids.size() != controls_d.size()) throw InvalidArgument("combine_flow: grid and control-set counts differ");
  const std::size_t h = grids.front().height;
  const std::size_t w = grids.front().width;
  for (const auto& g : grids)
    if (g.height != h || g.width != w || g.points.size() != h * w)
      throw InvalidArgument("combine_flow: grids have different shapes");

  const std::size_t k = grids.size();
  const std::size_t slots = k + (background ? 1 : 0);
  const auto weights = blend_weights(controls_d, h, w, softness, background);

  PointGrid out{h, w, std::vector<Point2>(h * w)};
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t idx = r * w + c;
      const double* lambda = &weights[idx * slots];
      if (k == 1 && !background) {
        out.points[idx] = grids[0].points[idx];
        continue;
      }
      Point2 acc;
      for (std::size_t i = 0; i < k; ++i) {
        acc.x += lambda[i] * grids[i].points[idx].x;
        acc.y += lambda[i] * grids[i].points[idx].y;
      }
      if (background) {
        const Point2 q = pixel_to_normalized(r, c, h, w);
        acc.x += lambda[k] * q.x;
        acc.y += lambda[k] * q.y;
      }
      out.points[idx] = acc;
    }
  }
  return make_flow(std::move(out));
}

FlowField compose_flow(std::span<const TpsTransform> transforms, std::size_t height, std::size_t width,
                       double softness, bool background) {
  const auto grids = deform_grids(transforms, height, width);
  std::vector<std::vector<Point2>> controls;
  controls.reserve(transforms.size());
  for (const auto& t : transforms) controls.push_back(t.controls_d);
  return combine_flow(grids, controls, softness, background);
}

FlowField upsample_flow(const FlowField& flow, std::size_t height, std::size_t width) {
  require(flow.height >= 2 && flow.width >= 2, "upsample_flow: source flow must be at least 2x2");
  require(height >= 2 && width >= 2, "upsample_flow: target must be at least 2x2");
  PointGrid out{height, width, std::vector<Point2>(height * width)};
  for (std::size_t r = 0; r < height; ++r) {
    const double py = to_pixel(pixel_to_normalized(r, 0, height, width).y, flow.height);
    const auto y0 = std::min(static_cast<std::size_t>(py), flow.height - 2);
    const double fy = py - static_cast<double>(y0);
    for (std::size_t c = 0; c < width; ++c) {
      const double px = to_pixel(pixel_to_normalized(r, c, height, width).x, flow.width);
      const auto x0 = std::min(static_cast<std::size_t>(px), flow.width - 2);
      const double fx = px - static_cast<double>(x0);
      const Point2& a = flow.at(y0, x0);
      const Point2& b = flow.at(y0, x0 + 1);
      const Point2& d = flow.at(y0 + 1, x0);
      const Point2& e = flow.at(y0 + 1, x0 + 1);
      out.at(r, c) = {(1 - fy) * ((1 - fx) * a.x + fx * b.x) + fy * ((1 - fx) * d.x + fx * e.x),
                      (1 - fy) * ((1 - fx) * a.y + fx * b.y) + fy * ((1 - fx) * d.y + fx * e.y)};
    }
  }
  return make_flow(std::move(out));
}

RasterImage warp_image(const RasterImage& src, const FlowField& flow) {
  require(!src.empty() && src.data.size() == src.height * src.width * src.channels, "warp_image: malformed source");
  require(src.height >= 2 && src.width >= 2, "warp_image: source must be at least 2x2");
  require(flow.map.size() == flow.height * flow.width && flow.valid.size() == flow.map.size(),
          "warp_image: malformed flow");
  RasterImage out(flow.height, flow.width, src.channels);
  for (std::size_t r = 0; r < flow.height; ++r) {
    for (std::size_t c = 0; c < flow.width; ++c) {
      const std::size_t idx = r * flow.width + c;
      if (!flow.valid[idx]) continue;
      const Point2 p = flow.map[idx];
      const double px = std::clamp(to_pixel(p.x, src.width), 0.0, static_cast<double>(src.width - 1));
      const double py = std::clamp(to_pixel(p.y, src.height), 0.0, static_cast<double>(src.height - 1));
      const auto x0 = std::min(static_cast<std::size_t>(px), src.width - 2);
      const auto y0 = std::min(static_cast<std::size_t>(py), src.height - 2);
      const double fx = px - static_cast<double>(x0);
      const double fy = py - static_cast<double>(y0);
      for (std::size_t ch = 0; ch < src.channels; ++ch) {
        double v;
        if (fx == 0.0 && fy == 0.0) {
          v = src.at(y0, x0, ch);
        } else {
          v = (1 - fy) * ((1 - fx) * src.at(y0, x0, ch) + fx * src.at(y0, x0 + 1, ch)) +
              fy * ((1 - fx) * src.at(y0 + 1, x0, ch) + fx * src.at(y0 + 1, x0 + 1, ch));
        }
        out.at(r, c, ch) = v;
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> occlusion_mask(const FlowField& flow) {
  std::vector<std::uint8_t> mask(flow.valid.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = flow.valid[i] ? 0 : 1;
  return mask;
}

io::Bytes encode_flow(const FlowField& flow) {
  io::Writer w;
  w.magic("MDFL");
  w.u32(static_cast<std::uint32_t>(flow.height));
  w.u32(static_cast<std::uint32_t>(flow.width));
  std::vector<std::uint8_t> mask(flow.map.size());
  for (std::size_t i = 0; i < flow.map.size(); ++i) {
    const Point2 stored{static_cast<float>(flow.map[i].x), static_cast<float>(flow.map[i].y)};
    w.f32(static_cast<float>(stored.x));
    w.f32(static_cast<float>(stored.y));
    // The mask is derived from the stored float32 coordinates so the file is
    // self-consistent even when rounding crosses the border.
    mask[i] = inside_unit_square(stored) ? 1 : 0;
  }
  for (auto v : mask) w.u8(v);
  return w.take();
}

FlowField decode_flow(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "MDFL");
  r.expect_magic("MDFL");
  const std::uint32_t h = r.u32("height");
  const std::uint32_t w = r.u32("width");
  if (h == 0 || w == 0) r.fail("zero dimension");
  const std::size_t cells = static_cast<std::size_t>(h) * w;
  if (r.remaining() != cells * 9) r.fail("payload size does not match dimensions");
  FlowField flow{h, w, std::vector<Point2>(cells), std::vector<std::uint8_t>(cells)};
  for (auto& p : flow.map) {
    p.x = r.f32("map");
    p.y = r.f32("map");
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) r.fail("non-finite flow coordinate");
  }
  for (std::size_t i = 0; i < cells; ++i) {
    const std::uint8_t v = r.u8("mask");
    if (v > 1) r.fail("mask byte must be 0 or 1");
    if ((v == 1) != inside_unit_square(flow.map[i])) r.fail("mask inconsistent with map");
    flow.valid[i] = v;
  }
  return flow;
}

}  // namespace mdg
