#include "mdg/long_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "mdg/error.hpp"
#include "mdg/rng.hpp"
#include "mdg/spline.hpp"

namespace mdg {

namespace {

void check_windows(const Matrix& a, const Matrix& b, Eigen::Index window, const char* op) {
  if (window < 2 || a.rows() != window || b.rows() != window)
    throw InvalidArgument(std::string(op) + ": both windows must have exactly " + std::to_string(window) + " frames");
  if (a.cols() != b.cols()) throw InvalidArgument(std::string(op) + ": channel count mismatch");
}

}  // namespace

double position_score(const Matrix& prev_tail, const Matrix& cand_head, Eigen::Index window) {
  check_windows(prev_tail, cand_head, window, "position_score");
  return (prev_tail.colwise().mean() - cand_head.colwise().mean()).cwiseAbs().sum();
}

double velocity_angle_score(const Matrix& prev_tail, const Matrix& cand_head, Eigen::Index window) {
  check_windows(prev_tail, cand_head, window, "velocity_angle_score");
  if (prev_tail.cols() % 2 != 0) throw InvalidArgument("velocity_angle_score: channels do not decode to 2D points");
  // Mean of consecutive differences telescopes to (last - first) / (w - 1).
  const Eigen::RowVectorXd v_prev = velocity(prev_tail).colwise().mean();
  const Eigen::RowVectorXd v_cand = velocity(cand_head).colwise().mean();
  const Eigen::Index points = prev_tail.cols() / 2;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < points; ++k) {
    const double ax = v_prev(2 * k), ay = v_prev(2 * k + 1);
    const double bx = v_cand(2 * k), by = v_cand(2 * k + 1);
    const double na = std::hypot(ax, ay);
    const double nb = std::hypot(bx, by);
    if (na < 1e-6 || nb < 1e-6) continue;
    const double cosine = std::clamp((ax * bx + ay * by) / (na * nb), -1.0, 1.0);
    sum += std::acos(cosine);
  }
  return sum / static_cast<double>(points);
}

Selection select_best(const MotionSequence& prev_segment, std::span<const MotionSequence> candidates,
                      ScoreWeights weights, Eigen::Index window) {
  if (candidates.empty()) throw InvalidArgument("select_best: empty candidate list");
  if (prev_segment.length() < window) throw InvalidArgument("select_best: previous segment shorter than window");
  const Matrix tail = prev_segment.frames.bottomRows(window);
  Selection out;
  for (const auto& cand : candidates) {
    if (cand.length() != candidates.front().length() || cand.channels() != candidates.front().channels())
      throw InvalidArgument("select_best: candidates differ in shape");
    if (cand.length() < window) throw InvalidArgument("select_best: candidate shorter than window");
    const Matrix head = cand.frames.topRows(window);
    CandidateScore s;
    s.position = position_score(tail, head, window);
    s.angle = velocity_angle_score(tail, head, window);
    s.total = weights.position * s.position + weights.angle * s.angle;
    out.scores.push_back(s);
  }
  for (std::size_t i = 1; i < out.scores.size(); ++i)
    if (out.scores[i].total < out.scores[out.index].total) out.index = i;
  return out;
}

std::uint64_t candidate_seed(std::uint64_t base, std::size_t segment, std::size_t candidate) {
  return derive_seed(base, segment, candidate);
}

LongSampleResult generate_long(const Denoiser& d, const Matrix& audio, const Vector& seed_motion,
                               const DiffusionSchedule& sched, const LongSampleConfig& config, Fps fps) {
  const Eigen::Index seg = config.segment_frames;
  const Eigen::Index total = audio.rows();
  require(seg >= 1, "generate_long: segment length must be >= 1");
  require(config.candidates >= 1, "generate_long: need at least one candidate");
  require(config.gap >= 0, "generate_long: gap must be >= 0");
  if (total < seg)
    throw InvalidArgument("generate_long: audio has " + std::to_string(total) + " frames, shorter than one segment (" +
                          std::to_string(seg) + ")");
  const Eigen::Index channels = seed_motion.size();
  const Eigen::Index segments = (total + seg - 1) / seg;
  if (segments > 1) {
    require(seg >= config.window, "generate_long: segment shorter than selection window");
    require(config.gap == 0 || seg >= config.gap + config.spline_knots,
            "generate_long: segment too short for the junction fill");
  }

  const auto audio_slice = [&](Eigen::Index s) {
    Matrix slice(seg, audio.cols());
    for (Eigen::Index r = 0; r < seg; ++r) slice.row(r) = audio.row(std::min(s * seg + r, total - 1));
    return slice;
  };

  LongSampleResult result;
  Matrix stitched(segments * seg, channels);
  Condition cond;
  cond.audio = audio_slice(0);
  cond.seed_motion = seed_motion;
  MotionSequence prev = sample(d, cond, seg, channels, sched, config.seed, config.gamma, fps);
  stitched.topRows(seg) = prev.frames;

  for (Eigen::Index s = 1; s < segments; ++s) {
    cond.audio = audio_slice(s);
    cond.seed_motion = prev.frames.row(seg - 1).transpose();
    std::vector<MotionSequence> candidates;
    for (int p = 0; p < config.candidates; ++p)
      candidates.push_back(sample(d, cond, seg, channels, sched,
                                  candidate_seed(config.seed, static_cast<std::size_t>(s), static_cast<std::size_t>(p)),
                                  config.gamma, fps));
    const Selection chosen = select_best(prev, candidates, config.weights, config.window);
    for (std::size_t p = 0; p < chosen.scores.size(); ++p)
      result.scores.push_back({static_cast<std::size_t>(s), p, chosen.scores[p], p == chosen.index});
    prev = std::move(candidates[chosen.index]);
    stitched.middleRows(s * seg, seg) = prev.frames;
  }

  // Re-fill the junction frames [j - gap/2, j - gap/2 + gap) from
  // spline_knots frames on either side. Knots come from the raw stitched
  // sequence so fills at different junctions do not interact.
  if (config.gap > 0 && segments > 1) {
    const Matrix raw = stitched;
    const Eigen::Index half = config.gap / 2;
    const Eigen::Index knots = config.spline_knots;
    for (Eigen::Index s = 1; s < segments; ++s) {
      const Eigen::Index start = s * seg - half;
      const Eigen::Index left_begin = start - knots;
      const Eigen::Index right_begin = start + config.gap;
      if (left_begin < 0 || right_begin + knots > raw.rows()) continue;
      stitched.middleRows(start, config.gap) =
          spline_fill(raw.middleRows(left_begin, knots), raw.middleRows(right_begin, knots), config.gap);
    }
  }

  result.motion = {stitched.topRows(total), fps, FlattenOrder::GroupPointXY};
  return result;
}

std::string format_scores_csv(std::span<const ScoreRow> rows, std::uint64_t seed) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "# seed=" << seed << '\n' << "segment,candidate,position,angle,total,selected\n" << std::setprecision(10);
  for (const auto& r : rows)
    out << r.segment << ',' << r.candidate << ',' << r.score.position << ',' << r.score.angle << ',' << r.score.total
        << ',' << (r.selected ? 1 : 0) << '\n';
  return out.str();
}

JunctionStats junction_discontinuity(const Matrix& motion, Eigen::Index segment_frames, Eigen::Index window) {
  require(segment_frames >= window, "junction_discontinuity: segment shorter than window");
  JunctionStats stats;
  for (Eigen::Index j = segment_frames; j + window <= motion.rows(); j += segment_frames) {
    stats.mean_angle += velocity_angle_score(motion.middleRows(j - window, window), motion.middleRows(j, window), window);
    stats.mean_position_jump += (motion.row(j) - motion.row(j - 1)).cwiseAbs().sum();
    ++stats.junctions;
  }
  if (stats.junctions > 0) {
    stats.mean_angle /= static_cast<double>(stats.junctions);
    stats.mean_position_jump /= static_cast<double>(stats.junctions);
  }
  return stats;
}

}  // namespace mdg
