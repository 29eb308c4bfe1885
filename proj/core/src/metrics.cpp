#include "mdg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mdg/audio.hpp"
#include "mdg/error.hpp"

namespace mdg {

namespace {

double mean_point_norm(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const Eigen::Index points = row.size() / 2;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < points; ++k) sum += std::hypot(row(2 * k), row(2 * k + 1));
  return sum / static_cast<double>(points);
}

void check_summary(const GaussianSummary& g, const char* which) {
  const Eigen::Index d = g.mean.size();
  if (g.covariance.rows() != d || g.covariance.cols() != d)
    throw InvalidArgument(std::string("frechet_distance: ") + which + " covariance shape does not match mean");
  if (!g.mean.allFinite() || !g.covariance.allFinite())
    throw InvalidArgument(std::string("frechet_distance: ") + which + " summary is not finite");
  const double scale = std::max(1.0, g.covariance.cwiseAbs().maxCoeff());
  if ((g.covariance - g.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument(std::string("frechet_distance: ") + which + " covariance is not symmetric");
}

}  // namespace

std::vector<double> keypoint_speed(const Matrix& frames) {
  if (frames.cols() % 2 != 0) throw InvalidArgument("keypoint_speed: channels do not decode to 2D points");
  const Matrix vel = velocity(frames);
  std::vector<double> speed(static_cast<std::size_t>(vel.rows()));
  for (Eigen::Index i = 0; i < vel.rows(); ++i) speed[static_cast<std::size_t>(i)] = mean_point_norm(vel.row(i));
  return speed;
}

VelocityCurve velocity_curve(const MotionSequence& seq, double sigma_smooth) {
  if (seq.length() < 3) throw InvalidArgument("gesture_beats: need at least 3 frames");
  VelocityCurve curve;
  curve.raw = keypoint_speed(seq.frames);
  curve.smoothed = gaussian_smooth(curve.raw, sigma_smooth);
  const std::size_t n = curve.smoothed.size();
  curve.is_beat.assign(n, false);
  for (std::size_t i = 1; i + 1 < n; ++i)
    curve.is_beat[i] = curve.smoothed[i] < curve.smoothed[i - 1] && curve.smoothed[i] < curve.smoothed[i + 1];
  return curve;
}

std::vector<double> gesture_beats(const MotionSequence& seq, double sigma_smooth) {
  const auto curve = velocity_curve(seq, sigma_smooth);
  std::vector<double> beats;
  const double fps = seq.fps.value();
  for (std::size_t i = 0; i < curve.is_beat.size(); ++i)
    if (curve.is_beat[i]) beats.push_back(static_cast<double>(i) / fps);
  return beats;
}

BeatAlignment beat_alignment(std::span<const double> audio_beats, std::span<const double> gesture_beats,
                             double sigma_b) {
  if (audio_beats.empty()) throw InvalidArgument("beat_align_score: no audio beats");
  require(sigma_b > 0.0, "beat_align_score: sigma_b must be positive");
  BeatAlignment out;
  if (gesture_beats.empty()) {
    out.mean_distance = std::numeric_limits<double>::infinity();
    return out;
  }
  for (double ta : audio_beats) {
    double nearest = std::numeric_limits<double>::infinity();
    for (double tg : gesture_beats) nearest = std::min(nearest, std::abs(ta - tg));
    out.score += std::exp(-nearest * nearest / (2.0 * sigma_b * sigma_b));
    out.mean_distance += nearest;
  }
  out.score /= static_cast<double>(audio_beats.size());
  out.mean_distance /= static_cast<double>(audio_beats.size());
  return out;
}

double diversity(const Matrix& features) {
  if (features.rows() < 2) throw InvalidArgument("diversity: need at least 2 feature vectors");
  double sum = 0.0;
  const Eigen::Index n = features.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) sum += (features.row(i) - features.row(j)).norm();
  return sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

GaussianSummary summarize(const Matrix& features) {
  require(features.rows() >= 1 && features.cols() >= 1, "summarize: empty feature set");
  GaussianSummary g;
  g.mean = features.colwise().mean().transpose();
  const Eigen::Index n = features.rows();
  if (n == 1) {
    g.covariance = Eigen::MatrixXd::Zero(features.cols(), features.cols());
    return g;
  }
  const Eigen::MatrixXd centered = features.rowwise() - g.mean.transpose();
  g.covariance = centered.transpose() * centered / static_cast<double>(n - 1);
  g.covariance = 0.5 * (g.covariance + g.covariance.transpose()).eval();
  return g;
}

double frechet_distance(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.mean.size() != b.mean.size()) throw InvalidArgument("frechet_distance: dimension mismatch");
  check_summary(a, "first");
  check_summary(b, "second");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_a(a.covariance);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_b(b.covariance);
  if (eig_a.info() != Eigen::Success || eig_b.info() != Eigen::Success)
    throw NumericError("frechet_distance: eigendecomposition failed");
  if (eig_a.eigenvalues().minCoeff() < -1e-6 || eig_b.eigenvalues().minCoeff() < -1e-6)
    throw InvalidArgument("frechet_distance: covariance is not positive semidefinite");

  const Eigen::VectorXd root_vals = eig_a.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd root_a = eig_a.eigenvectors() * root_vals.asDiagonal() * eig_a.eigenvectors().transpose();
  Eigen::MatrixXd inner = root_a * b.covariance * root_a;
  inner = 0.5 * (inner + inner.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_inner(inner, Eigen::EigenvaluesOnly);
  if (eig_inner.info() != Eigen::Success) throw NumericError("frechet_distance: eigendecomposition failed");
  const double trace_root = eig_inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double d = (a.mean - b.mean).squaredNorm() + a.covariance.trace() + b.covariance.trace() - 2.0 * trace_root;
  return std::max(d, 0.0);
}

Eigen::VectorXd motion_features(const MotionSequence& seq) {
  const Eigen::Index c = seq.channels();
  require(seq.length() >= 1 && c >= 2 && c % 2 == 0, "motion_features: need a non-empty keypoint sequence");
  Eigen::VectorXd f(2 * c + 2);
  const Eigen::RowVectorXd mean = seq.frames.colwise().mean();
  const Matrix centered = seq.frames.rowwise() - mean;
  f.head(c) = mean.transpose();
  f.segment(c, c) = (centered.colwise().squaredNorm() / static_cast<double>(seq.length())).cwiseSqrt().transpose();
  double speed = 0.0, accel = 0.0;
  if (seq.length() >= 2) {
    const Matrix vel = velocity(seq.frames);
    for (Eigen::Index i = 0; i < vel.rows(); ++i) speed += mean_point_norm(vel.row(i));
    speed /= static_cast<double>(vel.rows());
  }
  if (seq.length() >= 3) {
    const Matrix acc = acceleration(seq.frames);
    for (Eigen::Index i = 0; i < acc.rows(); ++i) accel += mean_point_norm(acc.row(i));
    accel /= static_cast<double>(acc.rows());
  }
  f(2 * c) = speed;
  f(2 * c + 1) = accel;
  return f;
}

std::string format_velocity_curve(const VelocityCurve& curve) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "frame,raw_speed,smoothed_speed,is_beat\n" << std::setprecision(10);
  for (std::size_t i = 0; i < curve.raw.size(); ++i)
    out << i << ',' << curve.raw[i] << ',' << curve.smoothed[i] << ',' << (curve.is_beat[i] ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace mdg
