#pragma once

// Synthetic beat-driven keypoint motion used for training and evaluation at
// desk scale. Between consecutive beats every keypoint eases from one
// extreme of its stroke to the other, so speed drops to zero exactly on the
// beats. Stroke amplitude is redrawn at every beat.

#include <cstdint>
#include <string>
#include <vector>

#include "mdg/audio.hpp"
#include "mdg/motion.hpp"
#include "mdg/trainer.hpp"

namespace mdg {

struct SynthMotionConfig {
  std::size_t groups = 2;  // K
  std::size_t points = 2;  // N
  Eigen::Index frames = 80;
  Fps fps{};
  double amplitude = 0.3;
  Eigen::Index audio_dim = 6;
};

/// Beat times in [0.2, duration - 0.2] with inter-beat intervals drawn from
/// [0.4, 0.8] s.
std::vector<double> synth_beat_times(double duration, std::uint64_t seed);

struct DatasetItem {
  std::string name;
  MotionSequence motion;  // M x C
  Vector seed_motion;     // the frame right before motion.frames.row(0)
  AudioCondition cond;    // aligned 1:1 with motion frames
};

/// One sequence; frame m sits at time m / fps and the seed motion at -1 / fps.
DatasetItem synth_item(const SynthMotionConfig& config, std::uint64_t seed);

/// Same keypoint model driven by given beats over `frames` frames.
DatasetItem synth_item_with_beats(const SynthMotionConfig& config, const std::vector<double>& beats,
                                  std::uint64_t seed);

/// Writes seq_XXXX.mdsq, seed_XXXX.mdsq, cond_XXXX.mdaf and index.txt.
void write_dataset(const std::string& dir, const std::vector<DatasetItem>& items, std::uint64_t seed);
std::vector<DatasetItem> load_dataset(const std::string& dir);

/// Cut each item into `window`-frame clips with `stride`; clips after the
/// first take their seed motion from the frame preceding the clip.
std::vector<TrainingExample> training_examples(const std::vector<DatasetItem>& items, Eigen::Index window,
                                               std::size_t stride);

}  // namespace mdg
