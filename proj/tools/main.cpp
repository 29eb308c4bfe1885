#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdg/error.hpp"
#include "mdg/pipeline.hpp"
#include "mdg/verify.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kParse = 3, kNumeric = 4 };

struct Global {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

mdg::PipelineConfig resolve(const Global& g) {
  mdg::PipelineConfig config = g.config_path.empty() ? mdg::PipelineConfig{} : mdg::load_config(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw mdg::ParseError("--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    config.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (g.seed) config.seed = *g.seed;
  config.validate();
  return config;
}

void print_beats(const std::vector<double>& beats, std::uint64_t seed) {
  std::printf("# seed=%llu\nbeat_time\n", static_cast<unsigned long long>(seed));
  for (double b : beats) std::printf("%.6f\n", b);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdg: motion-decoupled gesture generation toolkit"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--config", g.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.overrides, "override one config key (key=value)");
  app.add_option("--seed", g.seed, "master seed");

  // tps-solve
  std::string pairs_csv, tps_out;
  double reg = 0.0;
  auto* tps = app.add_subcommand("tps-solve", "solve a thin-plate spline from control pairs");
  tps->add_option("pairs", pairs_csv, "CSV with header src_x,src_y,dst_x,dst_y")->required();
  tps->add_option("-o,--out", tps_out, "MDTP output");
  tps->add_option("--reg", reg, "smoothing regularization");

  // warp
  mdg::WarpOptions warp_opts;
  auto* warp = app.add_subcommand("warp", "warp a PPM by one or more TPS transforms");
  warp->add_option("image", warp_opts.image_path, "source PPM/PGM")->required();
  warp->add_option("-t,--transform", warp_opts.transform_paths, "MDTP transform (repeatable)")->required();
  warp->add_option("-o,--out", warp_opts.out_path, "output image")->required();
  warp->add_option("--mask", warp_opts.mask_path, "occlusion mask PGM");
  warp->add_option("--flow", warp_opts.flow_path, "MDFL flow dump");

  std::string out_dir;
  auto* synth = app.add_subcommand("synth-data", "write a synthetic beat-driven dataset");
  synth->add_option("-o,--out", out_dir, "dataset directory")->required();

  std::string dataset_dir, params_out, log_csv;
  auto* train = app.add_subcommand("train", "train the denoiser");
  train->add_option("dataset", dataset_dir, "dataset directory")->required();
  train->add_option("-o,--out", params_out, "MDNN output")->required();
  train->add_option("--log", log_csv, "loss curve CSV");

  mdg::GenerateOptions gen_opts;
  auto* gen = app.add_subcommand("generate", "generate long motion with candidate selection");
  gen->add_option("-p,--params", gen_opts.params_path, "MDNN model")->required();
  auto* feat = gen->add_option("--features", gen_opts.features_path, "MDAF conditioning");
  gen->add_option("--wav", gen_opts.wav_path, "WAV audio")->excludes(feat);
  gen->add_option("--seed-motion", gen_opts.seed_motion_path, "MDSQ whose first frame seeds generation");
  gen->add_option("-o,--out", gen_opts.out_path, "MDSQ output")->required();
  gen->add_option("--scores", gen_opts.scores_path, "candidate score CSV");
  gen->add_option("--render-source", gen_opts.render_source, "source PPM for frame rendering");
  gen->add_option("--render-dir", gen_opts.render_dir, "directory for rendered frames");

  mdg::MetricsOptions met_opts;
  auto* met = app.add_subcommand("metrics", "BAS, diversity and Frechet distance");
  met->add_option("generated", met_opts.generated_dir, "directory of seq_*.mdsq")->required();
  met->add_option("--reference", met_opts.reference_dir, "reference directory (defaults to generated)");
  met->add_option("--features", met_opts.features_path, "MDAF whose beats apply to every sequence");
  met->add_option("--csv", met_opts.out_csv, "per-sequence CSV");
  met->add_option("--summary", met_opts.summary_path, "key = value summary");
  met->add_option("--curves", met_opts.curves_dir, "velocity curve directory");

  std::string beats_wav, beats_motion, beats_curve;
  auto* beats = app.add_subcommand("beats", "audio onset beats or gesture beats");
  auto* bw = beats->add_option("--wav", beats_wav, "WAV input");
  auto* bm = beats->add_option("--motion", beats_motion, "MDSQ input")->excludes(bw);
  beats->add_option("--curve", beats_curve, "velocity curve CSV (motion input)");
  beats->callback([&] {
    if (bw->count() + bm->count() != 1) throw CLI::ValidationError("beats", "exactly one of --wav, --motion");
  });

  std::vector<std::string> verify_files;
  auto* ver = app.add_subcommand("verify", "check magic and invariants of artifact files");
  ver->add_option("files", verify_files, "artifact files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*ver) {
      int status = kOk;
      for (const auto& f : verify_files) {
        try {
          const auto report = mdg::verify_file(f);
          std::printf("%s: OK %s %s\n", f.c_str(), report.format.c_str(), report.summary.c_str());
        } catch (const mdg::ParseError& e) {
          std::printf("%s: FAIL %s\n", f.c_str(), e.what());
          status = kParse;
        }
      }
      return status;
    }

    const mdg::PipelineConfig config = resolve(g);
    const auto seed = static_cast<unsigned long long>(config.seed);
    if (*tps) {
      const auto r = mdg::cmd_tps_solve(pairs_csv, tps_out, reg);
      std::printf("# seed=%llu\nbending_energy = %.12g\nmax_residual = %.12g\n", seed, r.bending_energy, r.max_residual);
    } else if (*warp) {
      warp_opts.softness = config.softness;
      warp_opts.background = config.background;
      const auto r = mdg::cmd_warp(warp_opts);
      std::printf("# seed=%llu\noccluded = %zu\npixels = %zu\n", seed, r.occluded, r.pixels);
    } else if (*synth) {
      const auto r = mdg::cmd_synth_data(config, out_dir);
      std::printf("# seed=%llu\nsequences = %zu\nmean_bas = %.6f\n", seed, r.sequences, r.mean_bas);
    } else if (*train) {
      const auto r = mdg::cmd_train(config, dataset_dir, params_out, log_csv);
      const double reduction = 1.0 - r.result.probe_final / r.result.probe_initial;
      std::printf("# seed=%llu\nexamples = %zu\ngradient_check = %.3e\nprobe_initial = %.6f\nprobe_final = %.6f\n"
                  "reduction = %.4f\n",
                  seed, r.examples, r.gradient_check_error, r.result.probe_initial, r.result.probe_final, reduction);
    } else if (*gen) {
      const auto r = mdg::cmd_generate(config, gen_opts);
      const auto frames = static_cast<long long>(r.result.motion.frames.rows());
      std::printf("# seed=%llu\nframes = %lld\nsegments = %lld\nrendered = %zu\n", seed, frames,
                  (frames + static_cast<long long>(config.M) - 1) / static_cast<long long>(config.M), r.frames_rendered);
    } else if (*met) {
      const auto r = mdg::cmd_metrics(config, met_opts);
      std::fputs(r.summary.c_str(), stdout);
    } else if (*beats) {
      const auto r = beats_wav.empty() ? mdg::cmd_beats_sequence(config, beats_motion) : mdg::cmd_beats_wav(config, beats_wav);
      if (!beats_curve.empty()) {
        if (r.curve_csv.empty()) throw mdg::InvalidArgument("--curve needs --motion input");
        std::FILE* f = std::fopen(beats_curve.c_str(), "wb");
        if (!f) throw mdg::InvalidArgument("cannot write '" + beats_curve + "'");
        std::fwrite(r.curve_csv.data(), 1, r.curve_csv.size(), f);
        std::fclose(f);
      }
      print_beats(r.beats, config.seed);
    }
    return kOk;
  } catch (const mdg::InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const mdg::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kParse;
  } catch (const mdg::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
}
