#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdg/long_sampler.hpp"
#include "mdg/schedule.hpp"
#include "mdg/trainer.hpp"
#include "mdg/types.hpp"

namespace mdg {

/// Every tunable of the pipeline. Defaults follow the reference setup:
/// K=20 transforms of N=5 keypoints (C=200), 80-frame clips with stride 10,
/// T=50 steps, guidance 2, 5 candidates, unit velocity/acceleration weights,
/// 25% audio masking.
struct PipelineConfig {
  // layout
  std::size_t K = 20;
  std::size_t N = 5;
  unsigned fps = 25;
  // clips and sampling
  Eigen::Index M = 80;
  std::size_t stride = 10;
  int T = 50;
  ScheduleKind schedule = ScheduleKind::Cosine;
  double gamma = 2.0;
  int P = 5;
  Eigen::Index gap = 2;
  double weight_position = 1.0;
  double weight_angle = 1.0;
  // training
  double lambda_vel = 1.0;
  double lambda_acc = 1.0;
  double mask_prob = 0.25;
  int steps = 2000;
  int batch = 16;
  double lr = 0.01;
  double momentum = 0.9;
  Eigen::Index hidden = 64;
  int log_every = 50;
  // warping
  double softness = 0.1;
  bool background = false;
  double tps_regularization = 0.0;
  // metrics and audio
  double sigma_b = 0.1;
  double sigma_smooth = 2.0;
  double beat_threshold = 1.5;
  std::size_t onset_window = 1024;
  std::size_t onset_hop = 256;
  // synthetic data
  std::size_t num_sequences = 200;
  Eigen::Index audio_dim = 6;
  double amplitude = 0.3;
  double duration = 16.0;  // seconds generated when no audio is supplied
  // reproducibility
  std::uint64_t seed = 0;
  // optional default paths
  std::string dataset_dir;
  std::string params_path;
  std::string output_dir;

  Eigen::Index motion_dim() const { return static_cast<Eigen::Index>(K * N * 2); }
  Fps frame_rate() const { return {fps, 1}; }

  /// Apply one `key = value` assignment. Unknown keys and malformed values
  /// throw ParseError.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  TrainConfig train_config() const;
  LongSampleConfig long_sample_config() const;

  /// key = value lines for every field, in declaration order.
  std::string to_text() const;

  static std::vector<std::string> keys();
};

/// Parse `key = value` lines; `#` starts a comment. Starts from defaults.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);

}  // namespace mdg
