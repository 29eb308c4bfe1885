#pragma once

#include <span>
#include <string>
#include <vector>

#include "mdg/motion.hpp"
#include "mdg/types.hpp"

namespace mdg {

inline constexpr double kDefaultBeatSigma = 0.1;     // seconds
inline constexpr double kDefaultSpeedSmoothing = 2.0;  // frames

/// Per-frame keypoint speed, its Gaussian-smoothed version and the strict
/// local minima of the smoothed curve. Entry i describes frames i -> i+1.
struct VelocityCurve {
  std::vector<double> raw;
  std::vector<double> smoothed;
  std::vector<bool> is_beat;
};

/// Mean over keypoints of the per-frame displacement norm.
std::vector<double> keypoint_speed(const Matrix& frames);

VelocityCurve velocity_curve(const MotionSequence& seq, double sigma_smooth = kDefaultSpeedSmoothing);

/// Gesture beats: strict interior local minima of the smoothed speed, in
/// seconds (index / fps).
std::vector<double> gesture_beats(const MotionSequence& seq, double sigma_smooth = kDefaultSpeedSmoothing);

struct BeatAlignment {
  double score = 0.0;          // mean over audio beats of exp(-d^2 / (2 sigma^2))
  double mean_distance = 0.0;  // mean nearest-gesture-beat distance, seconds
};

BeatAlignment beat_alignment(std::span<const double> audio_beats, std::span<const double> gesture_beats,
                             double sigma_b = kDefaultBeatSigma);
inline double beat_align_score(std::span<const double> audio_beats, std::span<const double> gesture_beats,
                               double sigma_b = kDefaultBeatSigma) {
  return beat_alignment(audio_beats, gesture_beats, sigma_b).score;
}

/// Mean Euclidean distance over all unordered pairs of rows.
double diversity(const Matrix& features);

struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Sample mean and unbiased covariance of the rows (zero covariance for a
/// single row).
GaussianSummary summarize(const Matrix& features);

/// Squared Frechet (2-Wasserstein) distance between two Gaussians:
/// |mu1 - mu2|^2 + Tr(S1 + S2 - 2 (S1^{1/2} S2 S1^{1/2})^{1/2}).
double frechet_distance(const GaussianSummary& a, const GaussianSummary& b);

/// Statistical pooling of a sequence: per-channel mean, per-channel standard
/// deviation, mean keypoint speed, mean keypoint acceleration magnitude.
Eigen::VectorXd motion_features(const MotionSequence& seq);

/// CSV `frame,raw_speed,smoothed_speed,is_beat`.
std::string format_velocity_curve(const VelocityCurve& curve);

}  // namespace mdg
