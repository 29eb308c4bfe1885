#include "mdg/verify.hpp"

#include <cmath>
#include <cstring>

#include "mdg/audio.hpp"
#include "mdg/binary_io.hpp"
#include "mdg/denoiser.hpp"
#include "mdg/error.hpp"
#include "mdg/flow_warp.hpp"
#include "mdg/image.hpp"
#include "mdg/motion.hpp"
#include "mdg/tps.hpp"

namespace mdg {

namespace {

bool starts_with(std::span<const std::uint8_t> bytes, const char* magic) {
  const std::size_t n = std::strlen(magic);
  return bytes.size() >= n && std::memcmp(bytes.data(), magic, n) == 0;
}

// Side conditions of a stored transform, allowing for float32 storage.
void check_side_conditions(const TpsTransform& t) {
  double scale = 1.0;
  Eigen::Vector2d sums[3] = {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Eigen::Vector2d w = t.weights.row(static_cast<Eigen::Index>(i)).transpose();
    const Point2 p = t.controls_d[i];
    sums[0] += w;
    sums[1] += w * p.x;
    sums[2] += w * p.y;
    scale = std::max(scale, w.cwiseAbs().maxCoeff() * std::max({1.0, std::abs(p.x), std::abs(p.y)}));
  }
  const double tol = 1e-5 * scale * static_cast<double>(t.size());
  for (const auto& s : sums)
    if (s.cwiseAbs().maxCoeff() > tol) throw ParseError("MDTP: TPS side conditions violated");
}

}  // namespace

VerifyReport verify_artifact(std::span<const std::uint8_t> bytes) {
  if (starts_with(bytes, "MDSQ")) {
    const auto seq = decode_sequence(bytes);
    return {"MDSQ", "M=" + std::to_string(seq.length()) + " C=" + std::to_string(seq.channels()) +
                        " fps=" + std::to_string(seq.fps.num) + "/" + std::to_string(seq.fps.den)};
  }
  if (starts_with(bytes, "MDFL")) {
    const auto flow = decode_flow(bytes);
    return {"MDFL", std::to_string(flow.height) + "x" + std::to_string(flow.width)};
  }
  if (starts_with(bytes, "MDAF")) {
    const auto cond = decode_features(bytes);
    return {"MDAF", "M=" + std::to_string(cond.features.rows()) + " C_a=" + std::to_string(cond.features.cols()) +
                        " beats=" + std::to_string(cond.beats.size())};
  }
  if (starts_with(bytes, "MDTP")) {
    const auto t = decode_tps(bytes);
    check_side_conditions(t);
    return {"MDTP", "N=" + std::to_string(t.size())};
  }
  if (starts_with(bytes, "MDNN")) {
    const auto model = MlpDenoiser::decode(bytes);
    return {"MDNN", "C=" + std::to_string(model.shape().motion_dim) + " C_a=" +
                        std::to_string(model.shape().audio_dim) + " hidden=" + std::to_string(model.shape().hidden)};
  }
  if (starts_with(bytes, "P6") || starts_with(bytes, "P5")) {
    const auto image = decode_pnm(bytes);
    return {image.channels == 3 ? "PPM" : "PGM", std::to_string(image.width) + "x" + std::to_string(image.height)};
  }
  if (starts_with(bytes, "RIFF")) {
    const auto clip = read_wav(bytes);
    return {"WAV", std::to_string(clip.samples.size()) + " samples @ " + std::to_string(clip.sample_rate) + " Hz"};
  }
  throw ParseError("verify: unrecognized artifact magic");
}

VerifyReport verify_file(const std::string& path) { return verify_artifact(io::read_file(path)); }

}  // namespace mdg
