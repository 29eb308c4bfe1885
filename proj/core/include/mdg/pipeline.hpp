#pragma once

// End-to-end commands behind the `mdg` CLI: decouple (TPS) -> diffuse ->
// select -> warp. Each command is deterministic given its config and seed.

#include <string>
#include <vector>

#include "mdg/audio.hpp"
#include "mdg/config.hpp"
#include "mdg/flow_warp.hpp"
#include "mdg/long_sampler.hpp"
#include "mdg/trainer.hpp"

namespace mdg {

struct TpsSolveReport {
  TpsTransform transform;
  double bending_energy = 0.0;
  double max_residual = 0.0;
};
TpsSolveReport cmd_tps_solve(const std::string& pairs_csv, const std::string& out_path, double regularization = 0.0);

struct WarpOptions {
  std::string image_path;
  std::vector<std::string> transform_paths;
  std::string out_path;
  std::string mask_path;  // optional occlusion PGM
  std::string flow_path;  // optional MDFL dump
  double softness = kDefaultSoftness;
  bool background = false;
};
struct WarpReport {
  std::size_t occluded = 0;
  std::size_t pixels = 0;
};
WarpReport cmd_warp(const WarpOptions& options);

/// Flow for an output of height x width: computed on a lattice of at most
/// 64 x 64 and bilinearly upsampled when the output is larger.
FlowField flow_for_size(std::span<const TpsTransform> transforms, std::size_t height, std::size_t width,
                        double softness, bool background);

struct SynthReport {
  std::size_t sequences = 0;
  double mean_bas = 0.0;
};
SynthReport cmd_synth_data(const PipelineConfig& config, const std::string& out_dir);

struct TrainReport {
  TrainResult result;
  double gradient_check_error = 0.0;
  std::size_t examples = 0;
};
TrainReport cmd_train(const PipelineConfig& config, const std::string& dataset_dir, const std::string& out_params,
                      const std::string& log_csv = {});

struct GenerateOptions {
  std::string params_path;
  std::string features_path;     // MDAF conditioning, or
  std::string wav_path;          // WAV -> onset beats -> synthetic features, or neither: synthetic beats
  std::string seed_motion_path;  // MDSQ, row 0; falls back to frame 0 of nothing -> zeros
  std::string out_path;
  std::string scores_path;
  std::string render_source;  // PPM; frames rendered when set together with render_dir
  std::string render_dir;
};
struct GenerateReport {
  LongSampleResult result;
  AudioCondition condition;
  std::size_t frames_rendered = 0;
};
GenerateReport cmd_generate(const PipelineConfig& config, const GenerateOptions& options);

/// Warp `source` by K TPS transforms solved from the seed keypoints (source
/// space) to `frame` keypoints (driving space).
RasterImage render_frame(const RasterImage& source, const KeypointFrame& seed, const KeypointFrame& frame,
                         const PipelineConfig& config);

struct MetricsOptions {
  std::string generated_dir;
  std::string reference_dir;
  std::string features_path;  // audio beats for every sequence; otherwise cond_XXXX.mdaf beside each sequence
  std::string out_csv;
  std::string summary_path;
  std::string curves_dir;
};
struct MetricsReport {
  std::size_t sequences = 0;
  double bas = 0.0;
  double beat_distance = 0.0;
  double diversity = 0.0;
  double frechet = 0.0;
  std::string summary;  // key = value lines
};
MetricsReport cmd_metrics(const PipelineConfig& config, const MetricsOptions& options);

struct BeatsReport {
  std::vector<double> beats;
  std::string curve_csv;  // filled for motion input
};
BeatsReport cmd_beats_wav(const PipelineConfig& config, const std::string& wav_path);
BeatsReport cmd_beats_sequence(const PipelineConfig& config, const std::string& sequence_path);

}  // namespace mdg
