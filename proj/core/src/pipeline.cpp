#include "mdg/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mdg/audio.hpp"
#include "mdg/denoiser.hpp"
#include "mdg/error.hpp"
#include "mdg/image.hpp"
#include "mdg/metrics.hpp"
#include "mdg/rng.hpp"
#include "mdg/synth.hpp"

namespace mdg {

namespace fs = std::filesystem;

namespace {

void write_text(const std::string& path, const std::string& text) {
  io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::string& path) {
  const auto bytes = io::read_file(path);
  return {bytes.begin(), bytes.end()};
}

std::string numbered(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05zu.%s", prefix, i, ext);
  return buf;
}

}  // namespace

TpsSolveReport cmd_tps_solve(const std::string& pairs_csv, const std::string& out_path, double regularization) {
  const auto pairs = parse_pairs_csv(read_text(pairs_csv));
  TpsSolveReport report;
  report.transform = solve_tps(pairs, regularization);
  report.bending_energy = bending_energy(report.transform);
  report.max_residual = max_interpolation_residual(report.transform, pairs);
  if (!out_path.empty()) io::write_file(out_path, encode_tps(report.transform));
  return report;
}

FlowField flow_for_size(std::span<const TpsTransform> transforms, std::size_t height, std::size_t width,
                        double softness, bool background) {
  const std::size_t fh = std::min(height, kFlowResolution);
  const std::size_t fw = std::min(width, kFlowResolution);
  FlowField flow = compose_flow(transforms, fh, fw, softness, background);
  if (fh != height || fw != width) flow = upsample_flow(flow, height, width);
  return flow;
}

WarpReport cmd_warp(const WarpOptions& options) {
  require(!options.transform_paths.empty(), "warp: at least one transform is required");
  const RasterImage src = decode_pnm(io::read_file(options.image_path));
  std::vector<TpsTransform> transforms;
  for (const auto& path : options.transform_paths) transforms.push_back(decode_tps(io::read_file(path)));
  const FlowField flow = flow_for_size(transforms, src.height, src.width, options.softness, options.background);
  const RasterImage out = warp_image(src, flow);
  io::write_file(options.out_path, encode_pnm(out));
  const auto mask = occlusion_mask(flow);
  if (!options.mask_path.empty()) io::write_file(options.mask_path, encode_mask_pgm(flow.height, flow.width, mask));
  if (!options.flow_path.empty()) io::write_file(options.flow_path, encode_flow(flow));
  return {static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)), mask.size()};
}

SynthReport cmd_synth_data(const PipelineConfig& config, const std::string& out_dir) {
  config.validate();
  SynthMotionConfig sc;
  sc.groups = config.K;
  sc.points = config.N;
  sc.frames = config.M;
  sc.fps = config.frame_rate();
  sc.amplitude = config.amplitude;
  sc.audio_dim = config.audio_dim;
  std::vector<DatasetItem> items;
  items.reserve(config.num_sequences);
  double bas = 0.0;
  std::size_t scored = 0;
  for (std::size_t i = 0; i < config.num_sequences; ++i) {
    items.push_back(synth_item(sc, derive_seed(config.seed, i + 1)));
    const auto& item = items.back();
    if (!item.cond.beats.empty() && config.amplitude > 0.0) {
      bas += beat_align_score(item.cond.beats, gesture_beats(item.motion, config.sigma_smooth), config.sigma_b);
      ++scored;
    }
  }
  write_dataset(out_dir, items, config.seed);
  write_text((fs::path(out_dir) / "config.txt").string(), "# seed=" + std::to_string(config.seed) + "\n" + config.to_text());
  return {items.size(), scored ? bas / static_cast<double>(scored) : 0.0};
}

TrainReport cmd_train(const PipelineConfig& config, const std::string& dataset_dir, const std::string& out_params,
                      const std::string& log_csv) {
  config.validate();
  const auto items = load_dataset(dataset_dir);
  const auto examples = training_examples(items, config.M, config.stride);
  if (examples.empty()) throw InvalidArgument("train: dataset '" + dataset_dir + "' yields no training clips");
  const TrainConfig tc = config.train_config();

  TrainReport report;
  report.examples = examples.size();
  // Gradient check on the freshly initialized model before any update.
  const MlpDenoiser::Shape shape{examples.front().x0.cols(), examples.front().cond.audio.cols(), tc.hidden};
  const MlpDenoiser init(shape, derive_seed(tc.seed, 1));
  const auto sched = make_schedule(tc.diffusion_steps, tc.schedule);
  CounterRng rng(derive_seed(tc.seed, 4));
  const auto& probe_ex = examples.front();
  const int t = static_cast<int>(rng.uniform_int(1, tc.diffusion_steps));
  report.gradient_check_error = gradient_check(init, probe_ex, t, rng.normal_matrix(probe_ex.x0.rows(), probe_ex.x0.cols()),
                                               sched, tc.lambda_vel, tc.lambda_acc, 20, derive_seed(tc.seed, 5));
  if (!(report.gradient_check_error < 1e-4))
    throw NumericError("train: gradient check failed, max relative error " + std::to_string(report.gradient_check_error));

  report.result = train_denoiser(examples, tc, init);
  report.result.model.save(out_params);
  if (!log_csv.empty()) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out << "# seed=" << config.seed << "\nstep,batch_loss,probe_loss\n" << std::setprecision(10);
    out << 0 << ",," << report.result.probe_initial << '\n';
    for (const auto& e : report.result.log) out << e.step << ',' << e.batch_loss << ',' << e.probe_loss << '\n';
    write_text(log_csv, out.str());
  }
  return report;
}

RasterImage render_frame(const RasterImage& source, const KeypointFrame& seed, const KeypointFrame& frame,
                         const PipelineConfig& config) {
  require(seed.groups == frame.groups && seed.points_per_group == frame.points_per_group,
          "render_frame: keypoint layouts differ");
  if (seed.points_per_group < 3) throw InvalidArgument("render_frame: rendering needs N >= 3 keypoints per transform");
  std::vector<TpsTransform> transforms;
  for (std::size_t k = 0; k < seed.groups; ++k) {
    std::vector<ControlPair> pairs;
    for (std::size_t n = 0; n < seed.points_per_group; ++n) pairs.push_back({seed.at(k, n), frame.at(k, n)});
    transforms.push_back(solve_tps(pairs, config.tps_regularization));
  }
  const FlowField flow = flow_for_size(transforms, source.height, source.width, config.softness, config.background);
  return warp_image(source, flow);
}

GenerateReport cmd_generate(const PipelineConfig& config, const GenerateOptions& options) {
  config.validate();
  const MlpDenoiser model = MlpDenoiser::load(options.params_path);
  const Eigen::Index channels = model.shape().motion_dim;
  const Fps fps = config.frame_rate();

  GenerateReport report;
  if (!options.features_path.empty()) {
    report.condition = load_features(options.features_path);
    if (!(report.condition.fps == fps)) {
      const auto frames = static_cast<Eigen::Index>(report.condition.duration() * fps.value());
      report.condition.features = align_features(report.condition.features, report.condition.fps, frames, fps);
      report.condition.fps = fps;
    }
  } else if (!options.wav_path.empty()) {
    const AudioClip clip = read_wav(io::read_file(options.wav_path));
    const auto env = onset_envelope(clip, {config.onset_window, config.onset_hop});
    const auto beats = detect_beats(env, config.onset_hop, clip.sample_rate, config.beat_threshold);
    const auto frames = static_cast<Eigen::Index>(clip.duration() * fps.value());
    report.condition = synth_condition(beats, frames, fps, model.shape().audio_dim, derive_seed(config.seed, 21));
  } else {
    const auto frames = static_cast<Eigen::Index>(config.duration * fps.value());
    const auto beats = synth_beat_times(config.duration, derive_seed(config.seed, 22));
    report.condition = synth_condition(beats, frames, fps, model.shape().audio_dim, derive_seed(config.seed, 21));
  }
  if (report.condition.features.cols() != model.shape().audio_dim)
    throw InvalidArgument("generate: conditioning has " + std::to_string(report.condition.features.cols()) +
                          " audio channels, model expects " + std::to_string(model.shape().audio_dim));

  Vector seed_motion = Vector::Zero(channels);
  if (!options.seed_motion_path.empty()) {
    const auto seed_seq = load_sequence(options.seed_motion_path);
    if (seed_seq.channels() != channels) throw InvalidArgument("generate: seed motion channel count mismatch");
    seed_motion = seed_seq.frames.row(0).transpose();
  }

  const auto sched = make_schedule(config.T, config.schedule);
  report.result = generate_long(model, report.condition.features, seed_motion, sched, config.long_sample_config(), fps);
  if (!options.out_path.empty()) save_sequence(options.out_path, report.result.motion);
  if (!options.scores_path.empty()) write_text(options.scores_path, format_scores_csv(report.result.scores, config.seed));

  if (!options.render_source.empty() && !options.render_dir.empty()) {
    require(static_cast<std::size_t>(channels) == config.K * config.N * 2, "generate: K*N*2 does not match model");
    const RasterImage source = decode_pnm(io::read_file(options.render_source));
    fs::create_directories(options.render_dir);
    MotionSequence seed_seq{seed_motion.transpose(), fps, FlattenOrder::GroupPointXY};
    const KeypointFrame seed_kp = unflatten(seed_seq, config.K, config.N).front();
    const auto frames = unflatten(report.result.motion, config.K, config.N);
    std::ostringstream index;
    index << "# seed=" << config.seed << "\n";
    for (std::size_t m = 0; m < frames.size(); ++m) {
      const auto image = render_frame(source, seed_kp, frames[m], config);
      const std::string name = numbered("frame", m, "ppm");
      io::write_file((fs::path(options.render_dir) / name).string(), encode_pnm(image));
      index << name << '\n';
    }
    write_text((fs::path(options.render_dir) / "frames.txt").string(), index.str());
    report.frames_rendered = frames.size();
  }
  return report;
}

namespace {

std::vector<std::pair<std::string, MotionSequence>> load_sequences(const std::string& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument("metrics: '" + dir + "' is not a directory");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("seq_", 0) == 0 && entry.path().extension() == ".mdsq") names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  std::vector<std::pair<std::string, MotionSequence>> out;
  for (const auto& n : names) out.emplace_back(n, load_sequence((fs::path(dir) / n).string()));
  return out;
}

Matrix feature_matrix(const std::vector<std::pair<std::string, MotionSequence>>& seqs) {
  Matrix f(static_cast<Eigen::Index>(seqs.size()), 0);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const Eigen::VectorXd v = motion_features(seqs[i].second);
    if (i == 0) f.resize(static_cast<Eigen::Index>(seqs.size()), v.size());
    if (v.size() != f.cols()) throw InvalidArgument("metrics: sequences have different channel counts");
    f.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  return f;
}

}  // namespace

MetricsReport cmd_metrics(const PipelineConfig& config, const MetricsOptions& options) {
  const auto generated = load_sequences(options.generated_dir);
  if (generated.empty()) throw InvalidArgument("metrics: no seq_*.mdsq files in '" + options.generated_dir + "'");

  std::vector<double> shared_beats;
  if (!options.features_path.empty()) shared_beats = load_features(options.features_path).beats;

  MetricsReport report;
  report.sequences = generated.size();
  std::ostringstream csv;
  csv.imbue(std::locale::classic());
  csv << "# seed=" << config.seed << "\nsequence,bas,beat_distance,gesture_beats,audio_beats\n" << std::setprecision(10);
  std::size_t scored = 0;
  if (!options.curves_dir.empty()) fs::create_directories(options.curves_dir);
  for (const auto& [name, seq] : generated) {
    std::vector<double> audio_beats = shared_beats;
    if (audio_beats.empty()) {
      const auto cond_path = fs::path(options.generated_dir) / ("cond_" + name.substr(4, name.size() - 9) + ".mdaf");
      if (fs::exists(cond_path)) audio_beats = load_features(cond_path.string()).beats;
    }
    const auto curve = velocity_curve(seq, config.sigma_smooth);
    const auto g_beats = gesture_beats(seq, config.sigma_smooth);
    if (!options.curves_dir.empty())
      write_text((fs::path(options.curves_dir) / (name.substr(0, name.size() - 5) + "_velocity.csv")).string(),
                 format_velocity_curve(curve));
    if (audio_beats.empty()) {
      csv << name << ",,," << g_beats.size() << ",0\n";
      continue;
    }
    const auto align = beat_alignment(audio_beats, g_beats, config.sigma_b);
    report.bas += align.score;
    report.beat_distance += align.mean_distance;
    ++scored;
    csv << name << ',' << align.score << ',' << align.mean_distance << ',' << g_beats.size() << ','
        << audio_beats.size() << '\n';
  }
  if (scored > 0) {
    report.bas /= static_cast<double>(scored);
    report.beat_distance /= static_cast<double>(scored);
  }

  const Matrix gen_features = feature_matrix(generated);
  report.diversity = generated.size() >= 2 ? diversity(gen_features) : 0.0;
  const std::string ref_dir = options.reference_dir.empty() ? options.generated_dir : options.reference_dir;
  const auto reference = load_sequences(ref_dir);
  if (reference.empty()) throw InvalidArgument("metrics: no reference sequences in '" + ref_dir + "'");
  report.frechet = frechet_distance(summarize(gen_features), summarize(feature_matrix(reference)));

  std::ostringstream summary;
  summary.imbue(std::locale::classic());
  summary << std::setprecision(10) << "# seed=" << config.seed << "\nsequences = " << report.sequences
          << "\nbas = " << report.bas << "\nbeat_distance = " << report.beat_distance
          << "\ndiversity = " << report.diversity << "\nfrechet = " << report.frechet << '\n';
  report.summary = summary.str();
  if (!options.out_csv.empty()) write_text(options.out_csv, csv.str());
  if (!options.summary_path.empty()) write_text(options.summary_path, report.summary);
  return report;
}

BeatsReport cmd_beats_wav(const PipelineConfig& config, const std::string& wav_path) {
  const AudioClip clip = read_wav(io::read_file(wav_path));
  const auto env = onset_envelope(clip, {config.onset_window, config.onset_hop});
  return {detect_beats(env, config.onset_hop, clip.sample_rate, config.beat_threshold), {}};
}

BeatsReport cmd_beats_sequence(const PipelineConfig& config, const std::string& sequence_path) {
  const auto seq = load_sequence(sequence_path);
  return {gesture_beats(seq, config.sigma_smooth), format_velocity_curve(velocity_curve(seq, config.sigma_smooth))};
}

}  // namespace mdg
