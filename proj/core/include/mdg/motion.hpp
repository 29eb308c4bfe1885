#pragma once

// Latent motion features: each frame's K x N keypoints flattened into one
// C = K*N*2 row, group-major, point-minor, x before y.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mdg/binary_io.hpp"
#include "mdg/tps.hpp"
#include "mdg/types.hpp"

namespace mdg {

struct KeypointFrame {
  std::size_t groups = 0;            // K
  std::size_t points_per_group = 0;  // N
  std::vector<Point2> points;        // K*N, group-major

  const Point2& at(std::size_t k, std::size_t n) const { return points[k * points_per_group + n]; }
  Point2& at(std::size_t k, std::size_t n) { return points[k * points_per_group + n]; }
};

enum class FlattenOrder { GroupPointXY };

struct MotionSequence {
  Matrix frames;  // M x C
  Fps fps{};
  FlattenOrder layout = FlattenOrder::GroupPointXY;

  Eigen::Index length() const { return frames.rows(); }
  Eigen::Index channels() const { return frames.cols(); }
};

MotionSequence flatten(std::span<const KeypointFrame> frames, Fps fps = {});
std::vector<KeypointFrame> unflatten(const MotionSequence& seq, std::size_t groups, std::size_t points_per_group);

/// Row m = frames[m+1] - frames[m]. Requires M >= 2.
Matrix velocity(const Matrix& frames);
/// Row m = frames[m+2] - 2 frames[m+1] + frames[m]. Requires M >= 3.
Matrix acceleration(const Matrix& frames);
inline Matrix velocity(const MotionSequence& seq) { return velocity(seq.frames); }
inline Matrix acceleration(const MotionSequence& seq) { return acceleration(seq.frames); }

/// Windows of `window` frames starting at 0, stride, 2*stride, ... that fit
/// entirely inside seq. Empty when window > M.
std::vector<MotionSequence> clip_windows(const MotionSequence& seq, std::size_t window, std::size_t stride);

/// Frames [begin, begin + count) as a new sequence with the same fps.
MotionSequence slice(const MotionSequence& seq, Eigen::Index begin, Eigen::Index count);

// Binary `MDSQ`: u32 M, u32 C, u32 fps_num, u32 fps_den, M*C float32.
io::Bytes encode_sequence(const MotionSequence& seq);
MotionSequence decode_sequence(std::span<const std::uint8_t> bytes);
MotionSequence load_sequence(const std::string& path);
void save_sequence(const std::string& path, const MotionSequence& seq);

/// Debug mirror: header `frame,c0,c1,...`, one row per frame.
std::string sequence_to_csv(const MotionSequence& seq);

}  // namespace mdg
