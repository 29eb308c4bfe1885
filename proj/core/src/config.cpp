#include "mdg/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "mdg/binary_io.hpp"
#include "mdg/error.hpp"

namespace mdg {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ParseError("config: '" + key + "' expects an integer, got '" + value + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  in.imbue(std::locale::classic());
  double out = 0.0;
  if (!(in >> out) || !(in >> std::ws).eof())
    throw ParseError("config: '" + key + "' expects a number, got '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw ParseError("config: '" + key + "' expects a boolean, got '" + value + "'");
}

struct Field {
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

std::string fmt(double v) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out.precision(17);
  out << v;
  return out.str();
}

#define MDG_INT_FIELD(name, member, type)                                                                  \
  {name, Field{[](PipelineConfig& c, const std::string& k, const std::string& v) {                        \
                 c.member = parse_integer<type>(k, v);                                                     \
               },                                                                                          \
               [](const PipelineConfig& c) { return std::to_string(c.member); }}}
#define MDG_REAL_FIELD(name, member)                                                                       \
  {name, Field{[](PipelineConfig& c, const std::string& k, const std::string& v) {                        \
                 c.member = parse_double(k, v);                                                            \
               },                                                                                          \
               [](const PipelineConfig& c) { return fmt(c.member); }}}
#define MDG_STRING_FIELD(name, member)                                                                     \
  {name, Field{[](PipelineConfig& c, const std::string&, const std::string& v) { c.member = v; },        \
               [](const PipelineConfig& c) { return c.member; }}}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      MDG_INT_FIELD("K", K, std::size_t),
      MDG_INT_FIELD("N", N, std::size_t),
      MDG_INT_FIELD("fps", fps, unsigned),
      MDG_INT_FIELD("M", M, Eigen::Index),
      MDG_INT_FIELD("stride", stride, std::size_t),
      MDG_INT_FIELD("T", T, int),
      {"schedule", Field{[](PipelineConfig& c, const std::string&, const std::string& v) {
                           try {
                             c.schedule = parse_schedule_kind(v);
                           } catch (const InvalidArgument& e) {
                             throw ParseError(std::string("config: ") + e.what());
                           }
                         },
                         [](const PipelineConfig& c) { return to_string(c.schedule); }}},
      MDG_REAL_FIELD("gamma", gamma),
      MDG_INT_FIELD("P", P, int),
      MDG_INT_FIELD("gap", gap, Eigen::Index),
      MDG_REAL_FIELD("weight_position", weight_position),
      MDG_REAL_FIELD("weight_angle", weight_angle),
      MDG_REAL_FIELD("lambda_vel", lambda_vel),
      MDG_REAL_FIELD("lambda_acc", lambda_acc),
      MDG_REAL_FIELD("mask_prob", mask_prob),
      MDG_INT_FIELD("steps", steps, int),
      MDG_INT_FIELD("batch", batch, int),
      MDG_REAL_FIELD("lr", lr),
      MDG_REAL_FIELD("momentum", momentum),
      MDG_INT_FIELD("hidden", hidden, Eigen::Index),
      MDG_INT_FIELD("log_every", log_every, int),
      MDG_REAL_FIELD("softness", softness),
      {"background", Field{[](PipelineConfig& c, const std::string& k, const std::string& v) {
                             c.background = parse_bool(k, v);
                           },
                           [](const PipelineConfig& c) { return std::string(c.background ? "true" : "false"); }}},
      MDG_REAL_FIELD("tps_regularization", tps_regularization),
      MDG_REAL_FIELD("sigma_b", sigma_b),
      MDG_REAL_FIELD("sigma_smooth", sigma_smooth),
      MDG_REAL_FIELD("beat_threshold", beat_threshold),
      MDG_INT_FIELD("onset_window", onset_window, std::size_t),
      MDG_INT_FIELD("onset_hop", onset_hop, std::size_t),
      MDG_INT_FIELD("num_sequences", num_sequences, std::size_t),
      MDG_INT_FIELD("audio_dim", audio_dim, Eigen::Index),
      MDG_REAL_FIELD("amplitude", amplitude),
      MDG_REAL_FIELD("duration", duration),
      MDG_INT_FIELD("seed", seed, std::uint64_t),
      MDG_STRING_FIELD("dataset_dir", dataset_dir),
      MDG_STRING_FIELD("params_path", params_path),
      MDG_STRING_FIELD("output_dir", output_dir),
  };
  return table;
}

#undef MDG_INT_FIELD
#undef MDG_REAL_FIELD
#undef MDG_STRING_FIELD

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(*this, key, value);
      return;
    }
  }
  throw ParseError("config: unknown key '" + key + "'");
}

std::vector<std::string> PipelineConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [name, field] : fields()) out.push_back(name);
  return out;
}

std::string PipelineConfig::to_text() const {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(*this) + "\n";
  return out;
}

void PipelineConfig::validate() const {
  require(K >= 1 && N >= 1, "config: K and N must be >= 1");
  require(fps >= 1, "config: fps must be >= 1");
  require(M >= 3, "config: M must be >= 3");
  require(stride >= 1, "config: stride must be >= 1");
  require(T >= 1, "config: T must be >= 1");
  require(P >= 1, "config: P must be >= 1");
  require(gap >= 0, "config: gap must be >= 0");
  require(mask_prob >= 0.0 && mask_prob <= 1.0, "config: mask_prob must be in [0, 1]");
  require(lr > 0.0, "config: lr must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "config: momentum must be in [0, 1)");
  require(steps >= 0 && batch >= 1 && hidden >= 1, "config: steps >= 0, batch >= 1, hidden >= 1 required");
  require(softness > 0.0, "config: softness must be positive");
  require(sigma_b > 0.0 && sigma_smooth >= 0.0, "config: sigma_b > 0 and sigma_smooth >= 0 required");
  require(audio_dim >= 1, "config: audio_dim must be >= 1");
  require(amplitude >= 0.0 && duration > 0.0, "config: amplitude >= 0 and duration > 0 required");
  require(tps_regularization >= 0.0, "config: tps_regularization must be >= 0");
}

TrainConfig PipelineConfig::train_config() const {
  TrainConfig t;
  t.steps = steps;
  t.batch = batch;
  t.lr = lr;
  t.momentum = momentum;
  t.lambda_vel = lambda_vel;
  t.lambda_acc = lambda_acc;
  t.mask_prob = mask_prob;
  t.diffusion_steps = T;
  t.schedule = schedule;
  t.seed = seed;
  t.hidden = hidden;
  t.log_every = log_every;
  return t;
}

LongSampleConfig PipelineConfig::long_sample_config() const {
  LongSampleConfig l;
  l.segment_frames = M;
  l.candidates = P;
  l.gap = gap;
  l.gamma = gamma;
  l.weights = {weight_position, weight_angle};
  l.seed = seed;
  return l;
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("config line " + std::to_string(line_no) + ": empty key");
    config.set(key, value);
  }
  return config;
}

PipelineConfig load_config(const std::string& path) {
  const auto bytes = io::read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

}  // namespace mdg
