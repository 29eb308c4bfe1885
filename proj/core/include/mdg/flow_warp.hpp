#pragma once

// Composition of K local TPS transforms into one dense backward flow, the
// bounds-derived occlusion mask, and bilinear backward warping.
//
// Blending rule: at output pixel q, transform k gets weight
// softmax_k(-d_k(q) / softness) where d_k(q) is the distance from q to the
// nearest of its D-space control points. With `background` set, an identity
// grid joins the softmax with d_bg(q) = max_k d_k(q).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mdg/binary_io.hpp"
#include "mdg/image.hpp"
#include "mdg/tps.hpp"

namespace mdg {

inline constexpr double kDefaultSoftness = 0.1;
inline constexpr std::size_t kFlowResolution = 64;
/// Slack on the [-1,1]^2 validity test so round-off at the border does not
/// flip a pixel to occluded.
inline constexpr double kBoundsSlack = 1e-9;

struct FlowField {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<Point2> map;          // backward coordinates into the source, normalized
  std::vector<std::uint8_t> valid;  // 1 where map lands inside [-1,1]^2

  const Point2& at(std::size_t row, std::size_t col) const { return map[row * width + col]; }
};

bool inside_unit_square(Point2 p);

/// Build a FlowField from a map, deriving the validity mask.
FlowField make_flow(PointGrid grid);

std::vector<PointGrid> deform_grids(std::span<const TpsTransform> transforms, std::size_t height,
                                    std::size_t width);

FlowField combine_flow(std::span<const PointGrid> grids, std::span<const std::vector<Point2>> controls_d,
                       double softness = kDefaultSoftness, bool background = false);

/// Per-pixel blend weights used by combine_flow, K (+1 with background)
/// values per pixel, pixel-major.
std::vector<double> blend_weights(std::span<const std::vector<Point2>> controls_d, std::size_t height,
                                  std::size_t width, double softness, bool background);

/// deform_grids + combine_flow over the transforms' own control points.
FlowField compose_flow(std::span<const TpsTransform> transforms, std::size_t height, std::size_t width,
                       double softness = kDefaultSoftness, bool background = false);

/// Bilinear resampling of the map onto a larger lattice; mask re-derived.
FlowField upsample_flow(const FlowField& flow, std::size_t height, std::size_t width);

/// Backward bilinear sampling of src at flow.map; invalid pixels become 0.
RasterImage warp_image(const RasterImage& src, const FlowField& flow);

/// Complement of flow.valid (1 = occluded / missing).
std::vector<std::uint8_t> occlusion_mask(const FlowField& flow);

// Binary `MDFL`: u32 height, u32 width, H*W*2 float32 (x, y), H*W mask bytes.
io::Bytes encode_flow(const FlowField& flow);
FlowField decode_flow(std::span<const std::uint8_t> bytes);

}  // namespace mdg
