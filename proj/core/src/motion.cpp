#include "mdg/motion.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "mdg/error.hpp"

namespace mdg {

MotionSequence flatten(std::span<const KeypointFrame> frames, Fps fps) {
  require(!frames.empty(), "flatten: need at least one frame");
  const std::size_t k = frames.front().groups;
  const std::size_t n = frames.front().points_per_group;
  require(k >= 1 && n >= 1, "flatten: K and N must be >= 1");
  MotionSequence seq;
  seq.fps = fps;
  seq.frames.resize(static_cast<Eigen::Index>(frames.size()), static_cast<Eigen::Index>(k * n * 2));
  for (std::size_t m = 0; m < frames.size(); ++m) {
    const auto& f = frames[m];
    if (f.groups != k || f.points_per_group != n || f.points.size() != k * n)
      throw InvalidArgument("flatten: inconsistent keypoint layout at frame " + std::to_string(m));
    for (std::size_t i = 0; i < k * n; ++i) {
      if (!std::isfinite(f.points[i].x) || !std::isfinite(f.points[i].y))
        throw InvalidArgument("flatten: non-finite keypoint");
      seq.frames(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(2 * i)) = f.points[i].x;
      seq.frames(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(2 * i + 1)) = f.points[i].y;
    }
  }
  return seq;
}

std::vector<KeypointFrame> unflatten(const MotionSequence& seq, std::size_t groups, std::size_t points_per_group) {
  if (groups == 0 || points_per_group == 0 ||
      static_cast<std::size_t>(seq.channels()) != groups * points_per_group * 2)
    throw InvalidArgument("unflatten: C=" + std::to_string(seq.channels()) + " does not equal K*N*2=" +
                          std::to_string(groups * points_per_group * 2));
  std::vector<KeypointFrame> frames(static_cast<std::size_t>(seq.length()));
  for (std::size_t m = 0; m < frames.size(); ++m) {
    auto& f = frames[m];
    f.groups = groups;
    f.points_per_group = points_per_group;
    f.points.resize(groups * points_per_group);
    for (std::size_t i = 0; i < f.points.size(); ++i)
      f.points[i] = {seq.frames(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(2 * i)),
                     seq.frames(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(2 * i + 1))};
  }
  return frames;
}

Matrix velocity(const Matrix& frames) {
  if (frames.rows() < 2) throw InvalidArgument("velocity: need at least 2 frames");
  const Eigen::Index m = frames.rows();
  return frames.bottomRows(m - 1) - frames.topRows(m - 1);
}

Matrix acceleration(const Matrix& frames) {
  if (frames.rows() < 3) throw InvalidArgument("acceleration: need at least 3 frames");
  return velocity(velocity(frames));
}

std::vector<MotionSequence> clip_windows(const MotionSequence& seq, std::size_t window, std::size_t stride) {
  require(window >= 1, "clip_windows: window must be >= 1");
  require(stride >= 1, "clip_windows: stride must be >= 1");
  std::vector<MotionSequence> out;
  const auto total = static_cast<std::size_t>(seq.length());
  for (std::size_t start = 0; start + window <= total; start += stride)
    out.push_back(slice(seq, static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(window)));
  return out;
}

MotionSequence slice(const MotionSequence& seq, Eigen::Index begin, Eigen::Index count) {
  require(begin >= 0 && count >= 0 && begin + count <= seq.length(), "slice: range outside sequence");
  return {seq.frames.middleRows(begin, count), seq.fps, seq.layout};
}

io::Bytes encode_sequence(const MotionSequence& seq) {
  io::Writer w;
  w.magic("MDSQ");
  w.u32(static_cast<std::uint32_t>(seq.length()));
  w.u32(static_cast<std::uint32_t>(seq.channels()));
  w.u32(seq.fps.num);
  w.u32(seq.fps.den);
  for (Eigen::Index r = 0; r < seq.frames.rows(); ++r)
    for (Eigen::Index c = 0; c < seq.frames.cols(); ++c) w.f32(static_cast<float>(seq.frames(r, c)));
  return w.take();
}

MotionSequence decode_sequence(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "MDSQ");
  r.expect_magic("MDSQ");
  const std::uint32_t m = r.u32("M");
  const std::uint32_t c = r.u32("C");
  const std::uint32_t num = r.u32("fps_numerator");
  const std::uint32_t den = r.u32("fps_denominator");
  if (m == 0) r.fail("M must be >= 1");
  if (c == 0 || c % 2 != 0) r.fail("C must be a positive multiple of 2");
  if (num == 0 || den == 0) r.fail("fps must be positive");
  if (r.remaining() != static_cast<std::size_t>(m) * c * 4) r.fail("payload size does not match M x C");
  MotionSequence seq;
  seq.fps = {num, den};
  seq.frames.resize(m, c);
  for (std::uint32_t i = 0; i < m; ++i)
    for (std::uint32_t j = 0; j < c; ++j) {
      const float v = r.f32("frames");
      if (!std::isfinite(v)) r.fail("non-finite motion value");
      seq.frames(i, j) = v;
    }
  return seq;
}

MotionSequence load_sequence(const std::string& path) {
  const auto bytes = io::read_file(path);
  return decode_sequence(bytes);
}

void save_sequence(const std::string& path, const MotionSequence& seq) { io::write_file(path, encode_sequence(seq)); }

std::string sequence_to_csv(const MotionSequence& seq) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "frame";
  for (Eigen::Index c = 0; c < seq.channels(); ++c) out << ",c" << c;
  out << '\n' << std::setprecision(9);
  for (Eigen::Index r = 0; r < seq.length(); ++r) {
    out << r;
    for (Eigen::Index c = 0; c < seq.channels(); ++c) out << ',' << seq.frames(r, c);
    out << '\n';
  }
  return out.str();
}

}  // namespace mdg
