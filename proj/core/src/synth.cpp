#include "mdg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "mdg/error.hpp"
#include "mdg/rng.hpp"

namespace mdg {

namespace fs = std::filesystem;

std::vector<double> synth_beat_times(double duration, std::uint64_t seed) {
  CounterRng rng(seed, 0x62656174);
  std::vector<double> beats;
  double t = 0.2 + 0.3 * rng.uniform();
  while (t <= duration - 0.2) {
    beats.push_back(t);
    t += 0.4 + 0.4 * rng.uniform();
  }
  return beats;
}

DatasetItem synth_item_with_beats(const SynthMotionConfig& config, const std::vector<double>& beats,
                                  std::uint64_t seed) {
  require(config.groups >= 1 && config.points >= 1 && config.frames >= 1, "synth_item: empty layout");
  CounterRng rng(seed, 0x6d6f74);
  const std::size_t kp = config.groups * config.points;
  const double fps = config.fps.value();
  const double duration = static_cast<double>(config.frames) / fps;

  std::vector<Point2> base(kp), dir(kp);
  for (std::size_t g = 0; g < config.groups; ++g) {
    const double group_angle = 2.0 * std::numbers::pi * rng.uniform();
    for (std::size_t n = 0; n < config.points; ++n) {
      const std::size_t i = g * config.points + n;
      base[i] = {-0.6 + 1.2 * rng.uniform(), -0.6 + 1.2 * rng.uniform()};
      const double angle = group_angle + 0.3 * (rng.uniform() - 0.5);
      dir[i] = {std::cos(angle), std::sin(angle)};
    }
  }

  // Stroke knots: real beats plus virtual ones extending the grid so every
  // frame in [-1/fps, duration] lies between two knots.
  std::vector<double> knots = beats;
  if (knots.empty()) knots.push_back(duration / 2.0);
  const double head_step = knots.size() > 1 ? knots[1] - knots[0] : 0.6;
  const double tail_step = knots.size() > 1 ? knots.back() - knots[knots.size() - 2] : 0.6;
  while (knots.front() > -1.0 / fps) knots.insert(knots.begin(), knots.front() - head_step);
  while (knots.back() < duration) knots.push_back(knots.back() + tail_step);
  std::vector<double> extreme(knots.size());
  for (std::size_t j = 0; j < knots.size(); ++j)
    extreme[j] = (j % 2 == 0 ? 1.0 : -1.0) * config.amplitude * (0.5 + 0.5 * rng.uniform());

  const auto offset_at = [&](double t) {
    const auto it = std::upper_bound(knots.begin(), knots.end(), t);
    const auto j = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - knots.begin() - 1, 0,
                                                                       static_cast<std::ptrdiff_t>(knots.size()) - 2));
    const double u = std::clamp((t - knots[j]) / (knots[j + 1] - knots[j]), 0.0, 1.0);
    const double ease = 0.5 - 0.5 * std::cos(std::numbers::pi * u);
    return extreme[j] + (extreme[j + 1] - extreme[j]) * ease;
  };

  const Eigen::Index channels = static_cast<Eigen::Index>(kp * 2);
  const auto frame_at = [&](double t) {
    Eigen::RowVectorXd row(channels);
    const double s = offset_at(t);
    for (std::size_t i = 0; i < kp; ++i) {
      row(static_cast<Eigen::Index>(2 * i)) = base[i].x + s * dir[i].x;
      row(static_cast<Eigen::Index>(2 * i + 1)) = base[i].y + s * dir[i].y;
    }
    return row;
  };

  DatasetItem item;
  item.motion.fps = config.fps;
  item.motion.frames.resize(config.frames, channels);
  for (Eigen::Index m = 0; m < config.frames; ++m) item.motion.frames.row(m) = frame_at(static_cast<double>(m) / fps);
  item.seed_motion = frame_at(-1.0 / fps).transpose();
  item.cond = synth_condition(beats, config.frames, config.fps, config.audio_dim, derive_seed(seed, 7));
  return item;
}

DatasetItem synth_item(const SynthMotionConfig& config, std::uint64_t seed) {
  const double duration = static_cast<double>(config.frames) / config.fps.value();
  return synth_item_with_beats(config, synth_beat_times(duration, derive_seed(seed, 11)), seed);
}

namespace {

std::string indexed(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu.%s", prefix, i, ext);
  return buf;
}

}  // namespace

void write_dataset(const std::string& dir, const std::vector<DatasetItem>& items, std::uint64_t seed) {
  fs::create_directories(dir);
  std::ofstream index(fs::path(dir) / "index.txt");
  index << "# seed=" << seed << "\n";
  index << "count = " << items.size() << "\n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    save_sequence((fs::path(dir) / indexed("seq", i, "mdsq")).string(), item.motion);
    MotionSequence seed_seq{item.seed_motion.transpose(), item.motion.fps, item.motion.layout};
    save_sequence((fs::path(dir) / indexed("seed", i, "mdsq")).string(), seed_seq);
    save_features((fs::path(dir) / indexed("cond", i, "mdaf")).string(), item.cond);
    index << indexed("seq", i, "mdsq") << "\n";
  }
  if (!index) throw InvalidArgument("write_dataset: cannot write index in '" + dir + "'");
}

std::vector<DatasetItem> load_dataset(const std::string& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument("load_dataset: '" + dir + "' is not a directory");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("seq_", 0) == 0 && entry.path().extension() == ".mdsq") names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  std::vector<DatasetItem> items;
  for (const auto& name : names) {
    const std::string stem = name.substr(4, name.size() - 4 - 5);
    DatasetItem item;
    item.name = name;
    item.motion = load_sequence((fs::path(dir) / name).string());
    const auto seed_path = fs::path(dir) / ("seed_" + stem + ".mdsq");
    item.seed_motion = fs::exists(seed_path) ? Vector(load_sequence(seed_path.string()).frames.row(0).transpose())
                                             : Vector(item.motion.frames.row(0).transpose());
    const auto cond_path = fs::path(dir) / ("cond_" + stem + ".mdaf");
    if (fs::exists(cond_path)) {
      item.cond = load_features(cond_path.string());
      if (item.cond.features.rows() != item.motion.length() || !(item.cond.fps == item.motion.fps)) {
        item.cond.features = align_features(item.cond.features, item.cond.fps, item.motion.length(), item.motion.fps);
        item.cond.fps = item.motion.fps;
      }
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<TrainingExample> training_examples(const std::vector<DatasetItem>& items, Eigen::Index window,
                                               std::size_t stride) {
  std::vector<TrainingExample> out;
  for (const auto& item : items) {
    if (item.cond.features.rows() != item.motion.length())
      throw InvalidArgument("training_examples: '" + item.name + "' has no aligned audio features");
    const auto total = static_cast<std::size_t>(item.motion.length());
    for (std::size_t start = 0; start + static_cast<std::size_t>(window) <= total; start += stride) {
      const auto s = static_cast<Eigen::Index>(start);
      TrainingExample ex;
      ex.x0 = item.motion.frames.middleRows(s, window);
      ex.cond.audio = item.cond.features.middleRows(s, window);
      ex.cond.seed_motion = s == 0 ? item.seed_motion : Vector(item.motion.frames.row(s - 1).transpose());
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace mdg
