#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mdg/binary_io.hpp"
#include "mdg/types.hpp"

namespace mdg {

struct AudioClip {
  std::vector<double> samples;  // mono, [-1, 1]
  unsigned sample_rate = 16000;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

/// Per-frame conditioning features plus the beat times they were built from.
struct AudioCondition {
  Matrix features;  // M x C_a
  Fps fps{};
  std::vector<double> beats;  // seconds, ascending

  double duration() const { return static_cast<double>(features.rows()) / fps.value(); }
};

/// RIFF/WAVE PCM16, mono or stereo (stereo is averaged). Samples scaled by
/// 1/32768. Errors name the offending chunk.
AudioClip read_wav(std::span<const std::uint8_t> bytes);
/// Mono PCM16 writer; samples are rounded to the nearest 1/32768 step.
io::Bytes encode_wav(const AudioClip& clip);

struct OnsetConfig {
  std::size_t window = 1024;
  std::size_t hop = 256;
};

/// Half-wave rectified spectral flux of Hann-windowed frames. Frames are
/// centered: frame i covers samples [i*hop - window/2, i*hop + window/2),
/// zero-padded at the clip edges, so frame i sits at time i*hop/rate.
std::vector<double> onset_envelope(const AudioClip& clip, OnsetConfig config = {});

inline constexpr double kMinBeatSpacing = 0.1;
inline constexpr double kDefaultBeatThreshold = 1.5;

/// Local maxima above threshold_ratio x the +-10 frame moving mean, at least
/// 0.1 s apart (the larger peak wins), in seconds.
std::vector<double> detect_beats(std::span<const double> envelope, std::size_t hop, unsigned sample_rate,
                                 double threshold_ratio = kDefaultBeatThreshold);

/// Linear interpolation of source rows (row r at r / source_fps) onto target
/// frames (frame m at m / target_fps); clamped at both ends.
Matrix align_features(const Matrix& source, Fps source_fps, Eigen::Index target_frames, Fps target_fps);

/// Deterministic test conditions: up to three beat-impulse channels smoothed
/// with Gaussians of 1, 2 and 4 frames, the rest seeded slow sinusoids.
AudioCondition synth_condition(std::span<const double> beat_times, Eigen::Index frames, Fps fps,
                               Eigen::Index audio_dim, std::uint64_t seed);

/// Gaussian smoothing along time, kernel truncated at 3 sigma and
/// renormalized over the in-range taps. sigma <= 0 returns the input.
std::vector<double> gaussian_smooth(std::span<const double> signal, double sigma);

// Binary `MDAF`: u32 M, u32 C_a, u32 fps_num, u32 fps_den, u32 beat_count,
// beat_count float64, M*C_a float32.
io::Bytes encode_features(const AudioCondition& cond);
AudioCondition decode_features(std::span<const std::uint8_t> bytes);
AudioCondition load_features(const std::string& path);
void save_features(const std::string& path, const AudioCondition& cond);

}  // namespace mdg
