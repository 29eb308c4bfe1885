#pragma once

// Arbitrary-length generation: segment-wise sampling where, from the second
// segment on, P candidates conditioned on the previous segment's last frame
// are scored against that segment's tail and the lowest total wins. Junction
// frames are then re-filled with a natural cubic spline.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdg/diffusion.hpp"
#include "mdg/motion.hpp"
#include "mdg/schedule.hpp"

namespace mdg {

inline constexpr Eigen::Index kSelectionWindow = 5;

struct CandidateScore {
  double position = 0.0;
  double angle = 0.0;
  double total = 0.0;
};

struct ScoreWeights {
  double position = 1.0;
  double angle = 1.0;
};

/// L1 norm over channels of mean(prev_tail rows) - mean(cand_head rows).
double position_score(const Matrix& prev_tail, const Matrix& cand_head, Eigen::Index window = kSelectionWindow);

/// Mean over keypoints of the angle between the windows' mean velocity
/// vectors. Keypoints whose mean velocity is shorter than 1e-6 in either
/// window contribute 0.
double velocity_angle_score(const Matrix& prev_tail, const Matrix& cand_head,
                            Eigen::Index window = kSelectionWindow);

struct Selection {
  std::size_t index = 0;
  std::vector<CandidateScore> scores;
};

/// Scores every candidate's first `window` frames against the last `window`
/// frames of prev_segment; argmin of total, lowest index on ties.
Selection select_best(const MotionSequence& prev_segment, std::span<const MotionSequence> candidates,
                      ScoreWeights weights = {}, Eigen::Index window = kSelectionWindow);

struct LongSampleConfig {
  Eigen::Index segment_frames = 80;  // M
  int candidates = 5;                // P
  Eigen::Index gap = 2;              // frames re-filled at each junction, 0 disables
  Eigen::Index window = kSelectionWindow;
  Eigen::Index spline_knots = 5;
  double gamma = 2.0;
  ScoreWeights weights{};
  std::uint64_t seed = 0;
};

struct ScoreRow {
  std::size_t segment = 0;
  std::size_t candidate = 0;
  CandidateScore score;
  bool selected = false;
};

struct LongSampleResult {
  MotionSequence motion;
  std::vector<ScoreRow> scores;
};

/// Seed used for candidate p of segment s. Segment 0 uses `base` itself so a
/// single-segment run matches sample(..., base, ...).
std::uint64_t candidate_seed(std::uint64_t base, std::size_t segment, std::size_t candidate);

/// `audio` covers the whole output (M_total x C_a). Segments whose audio
/// slice runs past the end are padded by repeating the last audio row and
/// trimmed after generation.
LongSampleResult generate_long(const Denoiser& d, const Matrix& audio, const Vector& seed_motion,
                               const DiffusionSchedule& sched, const LongSampleConfig& config, Fps fps = {});

/// CSV `segment,candidate,position,angle,total,selected`.
std::string format_scores_csv(std::span<const ScoreRow> rows, std::uint64_t seed);

/// Discontinuity at segment junctions j = M, 2M, ... of a stitched sequence.
struct JunctionStats {
  std::size_t junctions = 0;
  double mean_angle = 0.0;           // velocity_angle_score of out[j-w, j) vs out[j, j+w)
  double mean_position_jump = 0.0;   // L1 norm of out[j] - out[j-1]
};
JunctionStats junction_discontinuity(const Matrix& motion, Eigen::Index segment_frames,
                                     Eigen::Index window = kSelectionWindow);

}  // namespace mdg
