#include "mdg/audio.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <numeric>

#include <unsupported/Eigen/FFT>

#include "mdg/error.hpp"
#include "mdg/rng.hpp"

namespace mdg {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

bool chunk_is(std::span<const std::uint8_t> id, const char* name) { return std::memcmp(id.data(), name, 4) == 0; }

}  // namespace

AudioClip read_wav(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "WAV");
  if (bytes.size() < 12) throw ParseError("WAV: truncated RIFF header");
  if (!chunk_is(r.take(4, "RIFF id"), "RIFF")) throw ParseError("WAV: missing 'RIFF' chunk id");
  const std::uint32_t riff_size = r.u32("RIFF size");
  if (static_cast<std::size_t>(riff_size) + 8 != bytes.size())
    throw ParseError("WAV: 'RIFF' chunk size " + std::to_string(riff_size) + " does not match file size");
  if (!chunk_is(r.take(4, "WAVE id"), "WAVE")) throw ParseError("WAV: 'RIFF' form type is not 'WAVE'");

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t block_align = 0;
  while (r.remaining() > 0) {
    if (r.remaining() < 8) throw ParseError("WAV: truncated chunk header");
    const auto id = r.take(4, "chunk id");
    const std::uint32_t size = r.u32("chunk size");
    const std::string name(reinterpret_cast<const char*>(id.data()), 4);
    if (r.remaining() < size) throw ParseError("WAV: '" + name + "' chunk truncated");
    const auto body = r.take(size, "chunk body");
    if (size % 2 == 1 && r.remaining() > 0) r.take(1, "pad byte");

    if (name == "fmt ") {
      if (size < 16) throw ParseError("WAV: 'fmt ' chunk too short");
      io::Reader f(body, "WAV 'fmt '");
      const std::uint16_t format = f.u16("format");
      channels = f.u16("channels");
      rate = f.u32("sample rate");
      f.u32("byte rate");
      block_align = f.u16("block align");
      const std::uint16_t bits = f.u16("bits");
      if (format != 1) throw ParseError("WAV: 'fmt ' format " + std::to_string(format) + " is not PCM");
      if (bits != 16) throw ParseError("WAV: 'fmt ' has " + std::to_string(bits) + " bits per sample, expected 16");
      if (channels != 1 && channels != 2) throw ParseError("WAV: 'fmt ' channel count must be 1 or 2");
      if (rate == 0) throw ParseError("WAV: 'fmt ' sample rate is zero");
      if (block_align != channels * 2) throw ParseError("WAV: 'fmt ' block align inconsistent");
      have_fmt = true;
    } else if (name == "data") {
      if (!have_fmt) throw ParseError("WAV: 'data' chunk before 'fmt '");
      if (size % block_align != 0) throw ParseError("WAV: 'data' size is not a whole number of frames");
      AudioClip clip;
      clip.sample_rate = rate;
      const std::size_t frames = size / block_align;
      clip.samples.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::uint16_t c = 0; c < channels; ++c) {
          const std::size_t at = i * block_align + c * 2u;
          const auto v = static_cast<std::int16_t>(body[at] | (body[at + 1] << 8));
          acc += v / 32768.0;
        }
        clip.samples[i] = acc / channels;
      }
      if (clip.samples.empty()) throw ParseError("WAV: 'data' chunk is empty");
      return clip;
    }
  }
  throw ParseError(have_fmt ? "WAV: missing 'data' chunk" : "WAV: missing 'fmt ' chunk");
}

io::Bytes encode_wav(const AudioClip& clip) {
  require(!clip.samples.empty() && clip.sample_rate > 0, "encode_wav: empty clip");
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  io::Writer w;
  w.magic("RIFF");
  w.u32(36 + data_bytes);
  w.magic("WAVE");
  w.magic("fmt ");
  w.u32(16);
  w.u8(1), w.u8(0);  // PCM
  w.u8(1), w.u8(0);  // mono
  w.u32(clip.sample_rate);
  w.u32(clip.sample_rate * 2);
  w.u8(2), w.u8(0);   // block align
  w.u8(16), w.u8(0);  // bits
  w.magic("data");
  w.u32(data_bytes);
  for (double s : clip.samples) {
    const long v = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
    const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
    w.u8(static_cast<std::uint8_t>(u & 0xff));
    w.u8(static_cast<std::uint8_t>(u >> 8));
  }
  return w.take();
}

std::vector<double> onset_envelope(const AudioClip& clip, OnsetConfig config) {
  require(is_power_of_two(config.window), "onset_envelope: window must be a power of two");
  require(config.hop >= 1, "onset_envelope: hop must be >= 1");
  if (clip.samples.size() < config.window)
    throw InvalidArgument("onset_envelope: clip has " + std::to_string(clip.samples.size()) +
                          " samples, shorter than the window");
  const std::size_t n = clip.samples.size();
  const std::size_t win = config.window;
  const std::size_t half = win / 2;
  const std::size_t frames = 1 + n / config.hop;

  std::vector<double> hann(win);
  for (std::size_t i = 0; i < win; ++i) hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / win);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(win);
  std::vector<std::complex<double>> spectrum;
  std::vector<double> magnitude(win / 2 + 1), previous(win / 2 + 1, 0.0);
  std::vector<double> envelope(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto start = static_cast<std::ptrdiff_t>(f * config.hop) - static_cast<std::ptrdiff_t>(half);
    for (std::size_t i = 0; i < win; ++i) {
      const std::ptrdiff_t at = start + static_cast<std::ptrdiff_t>(i);
      frame[i] = (at >= 0 && at < static_cast<std::ptrdiff_t>(n)) ? clip.samples[static_cast<std::size_t>(at)] * hann[i] : 0.0;
    }
    fft.fwd(spectrum, frame);
    for (std::size_t k = 0; k < magnitude.size(); ++k) magnitude[k] = std::abs(spectrum[k]);
    if (f > 0) {
      double flux = 0.0;
      for (std::size_t k = 0; k < magnitude.size(); ++k) flux += std::max(0.0, magnitude[k] - previous[k]);
      envelope[f] = flux;
    }
    std::swap(magnitude, previous);
  }
  return envelope;
}

std::vector<double> detect_beats(std::span<const double> envelope, std::size_t hop, unsigned sample_rate,
                                 double threshold_ratio) {
  require(!envelope.empty(), "detect_beats: empty envelope");
  require(hop >= 1 && sample_rate > 0, "detect_beats: hop and rate must be positive");
  const std::size_t n = envelope.size();
  constexpr std::size_t kRadius = 10;

  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = envelope[i];
    if (!(v > 0.0)) continue;
    if (i > 0 && !(v > envelope[i - 1])) continue;
    if (i + 1 < n && !(v >= envelope[i + 1])) continue;
    const std::size_t lo = i >= kRadius ? i - kRadius : 0;
    const std::size_t hi = std::min(n - 1, i + kRadius);
    double mean = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) mean += envelope[j];
    mean /= static_cast<double>(hi - lo + 1);
    if (v > threshold_ratio * mean) peaks.push_back(i);
  }

  // Greedy by height enforces the minimum spacing, keeping the larger peak.
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return envelope[a] > envelope[b]; });
  const double frame_seconds = static_cast<double>(hop) / sample_rate;
  std::vector<double> beats;
  for (std::size_t p : peaks) {
    const double t = static_cast<double>(p) * frame_seconds;
    const bool clear = std::none_of(beats.begin(), beats.end(),
                                    [&](double kept) { return std::abs(kept - t) < kMinBeatSpacing - 1e-12; });
    if (clear) beats.push_back(t);
  }
  std::sort(beats.begin(), beats.end());
  return beats;
}

Matrix align_features(const Matrix& source, Fps source_fps, Eigen::Index target_frames, Fps target_fps) {
  if (source.rows() == 0 || source.cols() == 0) throw InvalidArgument("align_features: empty source");
  require(target_frames >= 1, "align_features: target must have at least one frame");
  require(source_fps.num > 0 && source_fps.den > 0 && target_fps.num > 0 && target_fps.den > 0,
          "align_features: frame rates must be positive");
  // Source row position of target frame m is m * (src_num * tgt_den) / (src_den * tgt_num),
  // evaluated in integers so on-grid frames land exactly on source rows.
  const std::uint64_t numer = static_cast<std::uint64_t>(source_fps.num) * target_fps.den;
  const std::uint64_t denom = static_cast<std::uint64_t>(source_fps.den) * target_fps.num;
  const Eigen::Index last = source.rows() - 1;
  Matrix out(target_frames, source.cols());
  for (Eigen::Index m = 0; m < target_frames; ++m) {
    const std::uint64_t scaled = static_cast<std::uint64_t>(m) * numer;
    const auto base = static_cast<Eigen::Index>(scaled / denom);
    const std::uint64_t rem = scaled % denom;
    if (base >= last) {
      out.row(m) = source.row(last);
    } else if (rem == 0) {
      out.row(m) = source.row(base);
    } else {
      const double frac = static_cast<double>(rem) / static_cast<double>(denom);
      out.row(m) = source.row(base) + frac * (source.row(base + 1) - source.row(base));
    }
  }
  return out;
}

std::vector<double> gaussian_smooth(std::span<const double> signal, double sigma) {
  std::vector<double> out(signal.begin(), signal.end());
  if (!(sigma > 0.0) || signal.empty()) return out;
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (std::ptrdiff_t j = -radius; j <= radius; ++j)
    kernel[static_cast<std::size_t>(j + radius)] = std::exp(-0.5 * (j / sigma) * (j / sigma));
  const auto n = static_cast<std::ptrdiff_t>(signal.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0, norm = 0.0;
    for (std::ptrdiff_t j = -radius; j <= radius; ++j) {
      const std::ptrdiff_t at = i + j;
      if (at < 0 || at >= n) continue;
      const double w = kernel[static_cast<std::size_t>(j + radius)];
      acc += w * signal[static_cast<std::size_t>(at)];
      norm += w;
    }
    out[static_cast<std::size_t>(i)] = acc / norm;
  }
  return out;
}

AudioCondition synth_condition(std::span<const double> beat_times, Eigen::Index frames, Fps fps,
                               Eigen::Index audio_dim, std::uint64_t seed) {
  require(frames >= 1 && audio_dim >= 1, "synth_condition: frames and audio_dim must be >= 1");
  AudioCondition cond;
  cond.fps = fps;
  cond.features = Matrix::Zero(frames, audio_dim);
  const double rate = fps.value();
  const double duration = static_cast<double>(frames) / rate;

  std::vector<double> impulses(static_cast<std::size_t>(frames), 0.0);
  for (double t : beat_times) {
    if (!(t >= 0.0) || t > duration) continue;
    const auto m = static_cast<Eigen::Index>(std::lround(t * rate));
    if (m < frames) impulses[static_cast<std::size_t>(m)] = 1.0;
    cond.beats.push_back(t);
  }
  std::sort(cond.beats.begin(), cond.beats.end());
  cond.beats.erase(std::unique(cond.beats.begin(), cond.beats.end()), cond.beats.end());

  constexpr double kWidths[] = {1.0, 2.0, 4.0};
  const Eigen::Index impulse_channels = std::min<Eigen::Index>(audio_dim, 3);
  for (Eigen::Index c = 0; c < impulse_channels; ++c) {
    const auto smooth = gaussian_smooth(impulses, kWidths[c]);
    for (Eigen::Index m = 0; m < frames; ++m) cond.features(m, c) = smooth[static_cast<std::size_t>(m)];
  }

  CounterRng rng(seed, 0x6175646e);
  for (Eigen::Index c = impulse_channels; c < audio_dim; ++c) {
    double freq[2], phase[2];
    for (int k = 0; k < 2; ++k) {
      freq[k] = 0.1 + 0.9 * rng.uniform();
      phase[k] = 2.0 * std::numbers::pi * rng.uniform();
    }
    for (Eigen::Index m = 0; m < frames; ++m) {
      const double t = static_cast<double>(m) / rate;
      cond.features(m, c) = 0.1 * (std::sin(2.0 * std::numbers::pi * freq[0] * t + phase[0]) +
                                   std::sin(2.0 * std::numbers::pi * freq[1] * t + phase[1]));
    }
  }
  return cond;
}

io::Bytes encode_features(const AudioCondition& cond) {
  io::Writer w;
  w.magic("MDAF");
  w.u32(static_cast<std::uint32_t>(cond.features.rows()));
  w.u32(static_cast<std::uint32_t>(cond.features.cols()));
  w.u32(cond.fps.num);
  w.u32(cond.fps.den);
  w.u32(static_cast<std::uint32_t>(cond.beats.size()));
  for (double b : cond.beats) w.f64(b);
  for (Eigen::Index r = 0; r < cond.features.rows(); ++r)
    for (Eigen::Index c = 0; c < cond.features.cols(); ++c) w.f32(static_cast<float>(cond.features(r, c)));
  return w.take();
}

AudioCondition decode_features(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "MDAF");
  r.expect_magic("MDAF");
  const std::uint32_t m = r.u32("M");
  const std::uint32_t ca = r.u32("C_a");
  const std::uint32_t num = r.u32("fps_numerator");
  const std::uint32_t den = r.u32("fps_denominator");
  const std::uint32_t beats = r.u32("beat_count");
  if (m == 0 || ca == 0) r.fail("M and C_a must be >= 1");
  if (num == 0 || den == 0) r.fail("fps must be positive");
  if (r.remaining() != static_cast<std::size_t>(beats) * 8 + static_cast<std::size_t>(m) * ca * 4)
    r.fail("payload size does not match header");
  AudioCondition cond;
  cond.fps = {num, den};
  const double duration = static_cast<double>(m) * den / num;
  for (std::uint32_t i = 0; i < beats; ++i) {
    const double t = r.f64("beats");
    if (!std::isfinite(t) || t < 0.0 || t > duration) r.fail("beat time outside the clip");
    if (!cond.beats.empty() && t <= cond.beats.back()) r.fail("beat times not strictly ascending");
    cond.beats.push_back(t);
  }
  cond.features.resize(m, ca);
  for (std::uint32_t i = 0; i < m; ++i)
    for (std::uint32_t j = 0; j < ca; ++j) {
      const float v = r.f32("features");
      if (!std::isfinite(v)) r.fail("non-finite feature value");
      cond.features(i, j) = v;
    }
  return cond;
}

AudioCondition load_features(const std::string& path) { return decode_features(io::read_file(path)); }

void save_features(const std::string& path, const AudioCondition& cond) {
  io::write_file(path, encode_features(cond));
}

}  // namespace mdg
