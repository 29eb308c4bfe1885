// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Usage: mdg_acceptance [work_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "mdg/audio.hpp"
#include "mdg/config.hpp"
#include "mdg/denoiser.hpp"
#include "mdg/diffusion.hpp"
#include "mdg/error.hpp"
#include "mdg/image.hpp"
#include "mdg/long_sampler.hpp"
#include "mdg/metrics.hpp"
#include "mdg/pipeline.hpp"
#include "mdg/synth.hpp"
#include "mdg/verify.hpp"
#include "support.hpp"

using namespace mdg;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

PipelineConfig toy_config() {
  PipelineConfig c;
  c.K = 2;
  c.N = 2;
  c.M = 80;
  c.fps = 25;
  c.num_sequences = 200;
  c.seed = 0;
  return c;
}

// ---------------------------------------------------------------- 1

Outcome tps_exactness() {
  Outcome o;
  const auto t0 = Clock::now();
  CounterRng rng(101);
  double worst_residual = 0, worst_side = 0, worst_w = 0, worst_energy = 0;
  const std::size_t sizes[] = {3, 5, 8};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = sizes[trial % 3];
    const auto pairs = mdg::testing::random_pairs(rng, n);
    const auto t = solve_tps(pairs);
    for (const auto& p : pairs) {
      const Point2 q = mdg::testing::eval_reference(t, p.dst);
      worst_residual = std::max({worst_residual, std::abs(q.x - p.src.x), std::abs(q.y - p.src.y)});
    }
    for (int d = 0; d < 2; ++d) {
      double s = 0, sx = 0, sy = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = t.weights(static_cast<Eigen::Index>(i), d);
        s += w;
        sx += w * pairs[i].dst.x;
        sy += w * pairs[i].dst.y;
      }
      worst_side = std::max({worst_side, std::abs(s), std::abs(sx), std::abs(sy)});
    }
    // affine map of the same destinations
    const double a = rng.uniform() * 2 - 1, b = rng.uniform() * 2 - 1, c = rng.uniform() * 2 - 1;
    const double d = rng.uniform() * 2 - 1, e = rng.uniform() - 0.5, f = rng.uniform() - 0.5;
    auto affine = pairs;
    for (auto& p : affine) p.src = {a * p.dst.x + b * p.dst.y + e, c * p.dst.x + d * p.dst.y + f};
    const auto ta = solve_tps(affine);
    worst_w = std::max(worst_w, ta.weights.cwiseAbs().maxCoeff());
    worst_energy = std::max(worst_energy, bending_energy(ta));
  }
  const double elapsed = seconds_since(t0);
  o.check(worst_residual < 1e-8, "residual " + fmt("%.2e", worst_residual));
  o.check(worst_side < 1e-8, "side conditions " + fmt("%.2e", worst_side));
  o.check(worst_w < 1e-8, "affine |w|inf " + fmt("%.2e", worst_w));
  o.check(worst_energy < 1e-10, "affine energy " + fmt("%.2e", worst_energy));
  o.check(elapsed < 10, "runtime " + fmt("%.2f s", elapsed));
  o.note("max residual " + fmt("%.1e", worst_residual) + ", side " + fmt("%.1e", worst_side) + ", affine |w| " +
         fmt("%.1e", worst_w) + ", energy " + fmt("%.1e", worst_energy) + ", " + fmt("%.2f s", elapsed));
  return o;
}

// ---------------------------------------------------------------- 2

Outcome flow_warp_suite() {
  Outcome o;
  const auto t0 = Clock::now();
  bool identity_ok = true, shift_ok = true;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::size_t h = 24 + 7 * s, w = 31 + 5 * s;
    const auto img = mdg::testing::random_image(h, w, 3, 200 + s);
    identity_ok = identity_ok && encode_pnm(warp_image(img, make_flow(identity_grid(h, w)))) == encode_pnm(img);
    // shift right by one pixel pitch: out(r, c) = img(r, c + 1)
    PointGrid g = identity_grid(h, w);
    for (auto& p : g.points) p.x += 2.0 / static_cast<double>(w - 1);
    const auto out = warp_image(img, make_flow(g));
    for (std::size_t r = 0; r < h; ++r)
      for (std::size_t c = 0; c + 1 < w; ++c)
        for (std::size_t ch = 0; ch < 3; ++ch) shift_ok = shift_ok && out.at(r, c, ch) == img.at(r, c + 1, ch);
  }
  o.check(identity_ok, "identity flow not byte-exact");
  o.check(shift_ok, "one-pixel shift mismatch on interior");

  CounterRng rng(202);
  double worst = 0, worst_sum = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform_int(0, 4));
    std::vector<TpsTransform> ts;
    std::vector<std::vector<Point2>> controls;
    for (std::size_t i = 0; i < k; ++i) {
      ts.push_back(solve_tps(mdg::testing::random_pairs(rng, 3 + static_cast<std::size_t>(rng.uniform_int(0, 5)), 0.4)));
      controls.push_back(ts.back().controls_d);
    }
    const bool background = trial % 2 == 1;
    const double softness = 0.01 + 0.5 * rng.uniform();
    auto grids = deform_grids(ts, 16, 16);
    const auto flow = combine_flow(grids, controls, softness, background);
    const auto weights = blend_weights(controls, 16, 16, softness, background);
    if (background) grids.push_back(identity_grid(16, 16));
    const std::size_t kk = grids.size();
    for (std::size_t q = 0; q < 256; ++q) {
      double lox = 1e300, hix = -1e300, loy = 1e300, hiy = -1e300, sum = 0;
      for (std::size_t i = 0; i < kk; ++i) {
        const Point2 p = grids[i].points[q];
        lox = std::min(lox, p.x), hix = std::max(hix, p.x), loy = std::min(loy, p.y), hiy = std::max(hiy, p.y);
        sum += weights[q * kk + i];
      }
      const Point2 m = flow.map[q];
      worst = std::max({worst, lox - m.x, m.x - hix, loy - m.y, m.y - hiy});
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
  }
  const double elapsed = seconds_since(t0);
  o.check(worst <= 1e-9, "convexity violated by " + fmt("%.2e", worst));
  o.check(worst_sum <= 1e-6, "weights sum off by " + fmt("%.2e", worst_sum));
  o.check(elapsed < 30, "runtime " + fmt("%.2f s", elapsed));
  o.note("hull excess " + fmt("%.1e", std::max(worst, 0.0)) + ", " + fmt("%.2f s", elapsed));
  return o;
}

// ---------------------------------------------------------------- 3

class ConstantDenoiser : public Denoiser {
 public:
  ConstantDenoiser(Matrix c, Matrix u) : c_(std::move(c)), u_(std::move(u)) {}
  Matrix predict(const Matrix&, int, const Condition& cond) const override { return cond.audio_masked ? u_ : c_; }

 private:
  Matrix c_, u_;
};

Outcome diffusion_algebra() {
  Outcome o;
  const auto t0 = Clock::now();
  bool sched_ok = true;
  for (auto kind : {ScheduleKind::Linear, ScheduleKind::Cosine})
    for (int T : {1, 10, 50}) {
      const auto s = make_schedule(T, kind);
      for (int t = 1; t <= T; ++t) {
        sched_ok = sched_ok && s.alpha_bar_at(t) < s.alpha_bar_at(t - 1);
        sched_ok = sched_ok && s.alpha_bar_at(t) == s.alpha_at(t) * s.alpha_bar_at(t - 1);
        sched_ok = sched_ok && s.posterior_variance(t) <= s.beta_at(t) && s.alpha_at(t) > 0;
      }
    }
  o.check(sched_ok, "schedule invariants");

  // Iterated one-step chain vs closed form, 1e5 trials of an 8-element x0.
  const auto s50 = make_schedule(50, ScheduleKind::Cosine);
  const int t = 10;
  const long trials = 100000;
  CounterRng rng(303);
  const Matrix x0 = rng.normal_matrix(1, 8);
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(8), sum2 = Eigen::RowVectorXd::Zero(8);
  for (long i = 0; i < trials; ++i) {
    Eigen::RowVectorXd x = x0.row(0);
    for (int k = 1; k <= t; ++k)
      for (Eigen::Index c = 0; c < 8; ++c) x(c) = std::sqrt(s50.alpha_at(k)) * x(c) + std::sqrt(s50.beta_at(k)) * rng.normal();
    sum += x;
    sum2 += x.cwiseProduct(x);
  }
  const double ab = s50.alpha_bar_at(t), var = 1 - ab, n = static_cast<double>(trials);
  double worst_mean_z = 0, worst_var_z = 0;
  CounterRng qrng(304);
  Eigen::RowVectorXd qsum = Eigen::RowVectorXd::Zero(8);
  for (long i = 0; i < trials; ++i) qsum += q_sample(x0, t, qrng.normal_matrix(1, 8), s50).row(0);
  double worst_q_z = 0;
  for (Eigen::Index c = 0; c < 8; ++c) {
    const double mean = sum(c) / n, v = sum2(c) / n - mean * mean;
    worst_mean_z = std::max(worst_mean_z, std::abs(mean - std::sqrt(ab) * x0(0, c)) / std::sqrt(var / n));
    worst_var_z = std::max(worst_var_z, std::abs(v - var) / (var * std::sqrt(2.0 / (n - 1))));
    worst_q_z = std::max(worst_q_z, std::abs(qsum(c) / n - mean) / std::sqrt(2 * var / n));
  }
  o.check(worst_mean_z < 3 && worst_var_z < 3 && worst_q_z < 3,
          "Monte-Carlo z " + fmt("%.2f", std::max({worst_mean_z, worst_var_z, worst_q_z})));

  double oracle_err = 0;
  for (auto kind : {ScheduleKind::Linear, ScheduleKind::Cosine}) {
    const auto s = make_schedule(50, kind);
    const Matrix target = rng.normal_matrix(20, 8);
    Matrix x = q_sample(target, 50, rng.normal_matrix(20, 8), s);
    for (int k = 50; k >= 1; --k) x = p_step(x, k, target, s, rng.normal_matrix(20, 8));
    oracle_err = std::max(oracle_err, (x - target).cwiseAbs().maxCoeff());
  }
  o.check(oracle_err < 1e-2, "oracle chain error " + fmt("%.2e", oracle_err));

  MlpDenoiser mlp({8, 3, 16}, 305);
  Condition cond{rng.normal_matrix(20, 3), rng.normal_matrix(8, 1), false};
  const Matrix xt = rng.normal_matrix(20, 8);
  bool gamma_ok = true;
  for (int k : {1, 25, 50}) gamma_ok = gamma_ok && guided_x0(mlp, xt, k, cond, 1.0) == mlp.predict(xt, k, cond);
  ConstantDenoiser cd(Matrix::Ones(4, 2), Matrix::Zero(4, 2));
  Condition c4{Matrix::Zero(4, 1), Vector::Zero(2), false};
  gamma_ok = gamma_ok && guided_x0(cd, Matrix::Zero(4, 2), 3, c4, 2.0) == Matrix::Constant(4, 2, 2.0);
  o.check(gamma_ok, "guidance identity");

  const double elapsed = seconds_since(t0);
  o.check(elapsed < 120, "runtime " + fmt("%.1f s", elapsed));
  o.note("MC z(mean) " + fmt("%.2f", worst_mean_z) + " z(var) " + fmt("%.2f", worst_var_z) + ", oracle err " +
         fmt("%.1e", oracle_err) + ", " + fmt("%.1f s", elapsed));
  return o;
}

// ---------------------------------------------------------------- 4

Outcome gradient_check_suite() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto cfg = toy_config();
  MlpDenoiser model({cfg.motion_dim(), cfg.audio_dim, cfg.hidden}, 401);
  const auto sched = make_schedule(cfg.T, cfg.schedule);
  CounterRng rng(402);
  double worst = 0;
  // 20 probes: each pairs a random example/step/noise with one random parameter direction set
  for (int probe = 0; probe < 20; ++probe) {
    TrainingExample ex{rng.normal_matrix(cfg.M, cfg.motion_dim()) * 0.3,
                       Condition{rng.normal_matrix(cfg.M, cfg.audio_dim), rng.normal_matrix(cfg.motion_dim(), 1),
                                 probe % 4 == 3}};
    const int t = static_cast<int>(rng.uniform_int(1, cfg.T));
    worst = std::max(worst, gradient_check(model, ex, t, rng.normal_matrix(cfg.M, cfg.motion_dim()), sched, 1.0, 1.0,
                                           1, derive_seed(403, static_cast<std::uint64_t>(probe))));
  }
  const double elapsed = seconds_since(t0);
  o.check(worst < 1e-4, "max relative error " + fmt("%.2e", worst));
  o.check(elapsed < 60, "runtime " + fmt("%.1f s", elapsed));
  o.note("max relative error " + fmt("%.2e", worst) + " over 20 probes, " + fmt("%.2f s", elapsed));
  return o;
}

// ---------------------------------------------------------------- 5

struct ToyRun {
  TrainReport train;
  GenerateReport generate;
};

ToyRun run_toy(const PipelineConfig& cfg, const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string data = (dir / "data").string();
  cmd_synth_data(cfg, data);
  ToyRun run;
  run.train = cmd_train(cfg, data, (dir / "model.mdnn").string(), (dir / "loss.csv").string());
  GenerateOptions g;
  g.params_path = (dir / "model.mdnn").string();
  g.seed_motion_path = (fs::path(data) / "seed_0000.mdsq").string();
  g.out_path = (dir / "generated.mdsq").string();
  g.scores_path = (dir / "scores.csv").string();
  run.generate = cmd_generate(cfg, g);
  save_features((dir / "generated_cond.mdaf").string(), run.generate.condition);
  return run;
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || io::read_file(e.path().string()) != io::read_file(other.string())) return false;
    ++files;
  }
  return files > 0;
}

Outcome toy_end_to_end(const fs::path& work) {
  Outcome o;
  const auto t0 = Clock::now();
  const auto cfg = toy_config();
  const ToyRun a = run_toy(cfg, work / "toy_a");
  const double first = seconds_since(t0);
  const ToyRun b = run_toy(cfg, work / "toy_b");
  (void)b;
  const double reduction = 1.0 - a.train.result.probe_final / a.train.result.probe_initial;
  const auto& motion = a.generate.result.motion;
  o.check(a.train.gradient_check_error < 1e-4, "pre-training gradient check");
  o.check(reduction >= 0.5, "probe-loss reduction " + fmt("%.1f%%", 100 * reduction));
  o.check(motion.length() == 400 && motion.channels() == 8, "generated shape");
  o.check(a.generate.result.scores.size() == 4u * 5u, "expected 4 selections of 5 candidates");
  o.check(same_tree(work / "toy_a", work / "toy_b"), "two runs differ");
  o.check(first < 600, "runtime " + fmt("%.1f s", first));
  o.note(std::to_string(a.train.examples) + " clips, probe loss " + fmt("%.4f", a.train.result.probe_initial) + " -> " +
         fmt("%.4f", a.train.result.probe_final) + " (" + fmt("%.1f%%", 100 * reduction) + "), 400x8 motion, " +
         fmt("%.1f s", first) + " per run, byte-identical reruns");
  return o;
}

// ---------------------------------------------------------------- 6

Outcome selection_directional(const fs::path& work) {
  Outcome o;
  const auto t0 = Clock::now();
  const auto cfg = toy_config();
  const MlpDenoiser model = MlpDenoiser::load((work / "toy_a" / "model.mdnn").string());
  const auto items = load_dataset((work / "toy_a" / "data").string());
  const auto sched = make_schedule(cfg.T, cfg.schedule);
  const Fps fps = cfg.frame_rate();
  const int seeds = 20;
  int angle_wins = 0, jump_wins = 0, joint_wins = 0;
  double angle5 = 0, angle1 = 0, jump5 = 0, jump1 = 0;
  for (int s = 0; s < seeds; ++s) {
    const auto us = static_cast<std::uint64_t>(s);
    const auto beats = synth_beat_times(16.0, derive_seed(601, us));
    const auto cond = synth_condition(beats, 400, fps, cfg.audio_dim, derive_seed(602, us));
    const Vector seed_motion = items[static_cast<std::size_t>(s) % items.size()].seed_motion;

    LongSampleConfig ours = cfg.long_sample_config();
    ours.seed = derive_seed(603, us);
    LongSampleConfig naive = ours;
    naive.candidates = 1;
    naive.gap = 0;
    const auto a = junction_discontinuity(generate_long(model, cond.features, seed_motion, sched, ours, fps).motion.frames, cfg.M);
    const auto b = junction_discontinuity(generate_long(model, cond.features, seed_motion, sched, naive, fps).motion.frames, cfg.M);
    angle5 += a.mean_angle, angle1 += b.mean_angle, jump5 += a.mean_position_jump, jump1 += b.mean_position_jump;
    angle_wins += a.mean_angle < b.mean_angle;
    jump_wins += a.mean_position_jump < b.mean_position_jump;
    joint_wins += a.mean_angle < b.mean_angle && a.mean_position_jump < b.mean_position_jump;
  }
  angle5 /= seeds, angle1 /= seeds, jump5 /= seeds, jump1 /= seeds;
  const double need = 0.8 * seeds;
  o.check(angle5 < angle1, "mean angle not lower");
  o.check(jump5 < jump1, "mean jump not lower");
  o.check(angle_wins >= need, "angle win rate " + std::to_string(angle_wins) + "/20");
  o.check(jump_wins >= need, "jump win rate " + std::to_string(jump_wins) + "/20");
  o.note("angle " + fmt("%.3f", angle5) + " vs " + fmt("%.3f", angle1) + " rad (wins " + std::to_string(angle_wins) +
         "/20), jump " + fmt("%.4f", jump5) + " vs " + fmt("%.4f", jump1) + " (wins " + std::to_string(jump_wins) +
         "/20), both " + std::to_string(joint_wins) + "/20, " + fmt("%.1f s", seconds_since(t0)));
  return o;
}

// ---------------------------------------------------------------- 7

Outcome metrics_suite() {
  Outcome o;
  const std::vector<double> audio{0.4, 1.1, 1.9, 2.6};
  o.check(std::abs(beat_align_score(audio, audio, 0.1) - 1.0) < 1e-9, "aligned BAS");
  o.check(std::abs(beat_align_score(std::vector{1.0}, std::vector{1.1}, 0.1) - std::exp(-0.5)) < 1e-9, "offset BAS");

  GaussianSummary a{Eigen::VectorXd::Constant(1, 1.5), Eigen::MatrixXd::Constant(1, 1, 2.25)};
  GaussianSummary b{Eigen::VectorXd::Constant(1, -0.5), Eigen::MatrixXd::Constant(1, 1, 0.36)};
  o.check(std::abs(frechet_distance(a, b) - (4.0 + 0.81)) < 1e-9, "1-D Frechet");
  Eigen::VectorXd m1(4), m2(4), l1(4), l2(4);
  m1 << 0.1, -2, 3, 0;
  m2 << 1, -1, 2.5, 0.2;
  l1 << 0.5, 2, 1e-3, 7;
  l2 << 1.5, 0.2, 4, 7;
  double want = 0;
  for (int i = 0; i < 4; ++i) want += std::pow(m1(i) - m2(i), 2) + std::pow(std::sqrt(l1(i)) - std::sqrt(l2(i)), 2);
  const double got = frechet_distance({m1, l1.asDiagonal()}, {m2, l2.asDiagonal()});
  o.check(std::abs(got - want) < 1e-9, "diagonal Frechet off by " + fmt("%.2e", std::abs(got - want)));

  CounterRng rng(701);
  const Matrix f = rng.normal_matrix(25, 6);
  double sum = 0;
  int pairs = 0;
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (Eigen::Index j = i + 1; j < f.rows(); ++j, ++pairs) {
      double d2 = 0;
      for (Eigen::Index c = 0; c < f.cols(); ++c) d2 += (f(i, c) - f(j, c)) * (f(i, c) - f(j, c));
      sum += std::sqrt(d2);
    }
  o.check(std::abs(diversity(f) - sum / pairs) < 1e-12, "diversity brute force");

  SynthMotionConfig sc;
  double locked = 0, shuffled = 0;
  const int items = 50;
  for (int i = 0; i < items; ++i) {
    const auto item = synth_item(sc, derive_seed(702, static_cast<std::uint64_t>(i)));
    locked += beat_align_score(item.cond.beats, gesture_beats(item.motion));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(item.motion.length()));
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<Eigen::Index>(k);
    for (std::size_t k = order.size() - 1; k > 0; --k)
      std::swap(order[k], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k)))]);
    MotionSequence mixed = item.motion;
    for (std::size_t k = 0; k < order.size(); ++k) mixed.frames.row(static_cast<Eigen::Index>(k)) = item.motion.frames.row(order[k]);
    shuffled += beat_align_score(item.cond.beats, gesture_beats(mixed));
  }
  locked /= items, shuffled /= items;
  o.check(locked > 0.8, "beat-locked BAS " + fmt("%.3f", locked));
  o.check(shuffled < locked, "shuffled BAS not lower");
  o.note("beat-locked BAS " + fmt("%.3f", locked) + ", time-shuffled " + fmt("%.3f", shuffled));
  return o;
}

// ---------------------------------------------------------------- 8

void put_u32(io::Bytes& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
}
std::uint32_t get_u32(const io::Bytes& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}
void put_f32(io::Bytes& b, std::size_t at, float f) {
  std::uint32_t v;
  std::memcpy(&v, &f, 4);
  put_u32(b, at, v);
}
void put_f64(io::Bytes& b, std::size_t at, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  for (int i = 0; i < 8; ++i) b[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
}

using Edit = std::function<void(io::Bytes&)>;

std::vector<Edit> generic_edits() {
  return {
      [](io::Bytes& b) { b.clear(); },
      [](io::Bytes& b) { b.pop_back(); },
      [](io::Bytes& b) { b.push_back(0); },
      [](io::Bytes& b) { b[1] ^= 0x20; },
  };
}

std::vector<Edit> mutants_for(const std::string& format, const io::Bytes& good) {
  auto e = generic_edits();
  const float nan = std::numeric_limits<float>::quiet_NaN();
  const float inf = std::numeric_limits<float>::infinity();
  if (format == "MDSQ") {
    e.push_back([](io::Bytes& b) { put_u32(b, 4, 0); });
    e.push_back([](io::Bytes& b) { put_u32(b, 8, get_u32(b, 8) + 1); });
    e.push_back([](io::Bytes& b) { put_u32(b, 8, get_u32(b, 8) + 2); });
    e.push_back([](io::Bytes& b) { put_u32(b, 12, 0); });
    e.push_back([](io::Bytes& b) { put_u32(b, 16, 0); });
    e.push_back([nan](io::Bytes& b) { put_f32(b, 20, nan); });
  } else if (format == "MDFL") {
    const std::size_t cells = static_cast<std::size_t>(get_u32(good, 4)) * get_u32(good, 8);
    const std::size_t mask = 12 + cells * 8;
    e.push_back([](io::Bytes& b) { put_u32(b, 4, 0); });
    e.push_back([](io::Bytes& b) { put_u32(b, 8, get_u32(b, 8) + 1); });
    e.push_back([nan](io::Bytes& b) { put_f32(b, 12, nan); });
    e.push_back([mask](io::Bytes& b) { b[mask] = 2; });
    e.push_back([mask](io::Bytes& b) { b[mask] ^= 1; });
    std::size_t inside = 0;
    while (inside + 1 < cells && good[mask + inside] != 1) ++inside;
    e.push_back([inside](io::Bytes& b) { put_f32(b, 12 + inside * 8, 7.5f); });  // stored mask still says inside
  } else if (format == "MDAF") {
    const std::size_t beats = get_u32(good, 20);
    const std::size_t feat = 24 + beats * 8;
    e.push_back([](io::Bytes& b) { put_u32(b, 4, 0); });
    e.push_back([](io::Bytes& b) { put_u32(b, 8, 0); });
    e.push_back([](io::Bytes& b) { put_u32(b, 16, 0); });
    e.push_back([](io::Bytes& b) { put_u32(b, 20, get_u32(b, 20) + 1); });
    e.push_back([beats](io::Bytes& b) { put_f64(b, 24, beats >= 2 ? 1e6 : -1.0); });  // out of clip / out of order
    e.push_back([feat, nan](io::Bytes& b) { put_f32(b, feat, nan); });
  } else if (format == "MDTP") {
    const std::size_t n = get_u32(good, 4);
    e.push_back([](io::Bytes& b) { put_u32(b, 4, 2); });
    e.push_back([](io::Bytes& b) { put_u32(b, 4, get_u32(b, 4) + 1); });
    e.push_back([nan](io::Bytes& b) { put_f32(b, 8, nan); });
    e.push_back([n, inf](io::Bytes& b) { put_f32(b, 8 + 24 + n * 8, inf); });
    e.push_back([](io::Bytes& b) { put_f32(b, 8 + 24, 10.0f); });  // breaks the side conditions
    e.push_back([](io::Bytes& b) { put_u32(b, 4, 0); });
  } else if (format == "MDNN") {
    const std::size_t rows1 = get_u32(good, 8), cols1 = get_u32(good, 12);
    const std::size_t layer2 = 16 + rows1 * cols1 * 4;
    e.push_back([](io::Bytes& b) { put_u32(b, 4, 3); });
    e.push_back([](io::Bytes& b) { put_u32(b, 8, 0); });
    e.push_back([](io::Bytes& b) { put_u32(b, 12, 1); });
    e.push_back([nan](io::Bytes& b) { put_f32(b, 16, nan); });
    e.push_back([layer2, inf](io::Bytes& b) { put_f32(b, layer2 - 4, inf); });
    e.push_back([layer2](io::Bytes& b) { put_u32(b, layer2 + 4, get_u32(b, layer2 + 4) + 1); });
  } else if (format == "PPM" || format == "PGM") {
    // header is "P6\n<w> <h>\n255\n"
    const std::string text(good.begin(), good.end());
    const std::size_t raster = text.find("255\n") + 4;
    const std::string header = text.substr(0, raster);
    const io::Bytes pixels(good.begin() + static_cast<std::ptrdiff_t>(raster), good.end());
    const auto rebuilt = [pixels](std::string h) {
      return [h, pixels](io::Bytes& b) {
        b.assign(h.begin(), h.end());
        b.insert(b.end(), pixels.begin(), pixels.end());
      };
    };
    const std::size_t sp = header.find(' ');
    const std::string magic = header.substr(0, 3);
    const std::string w = header.substr(3, sp - 3);
    const std::string h = header.substr(sp + 1, header.find('\n', sp) - sp - 1);
    e.push_back(rebuilt(magic + "0 " + h + "\n255\n"));
    e.push_back(rebuilt(magic + w + "1 " + h + "\n255\n"));
    e.push_back(rebuilt(magic + w + " " + h + "\n65535\n"));
    e.push_back(rebuilt(magic + w + " " + h + "\n255"));
    e.push_back(rebuilt(magic + w + " x" + h + "\n255\n"));
    e.push_back(rebuilt(magic + w + " " + h + "\n255\n\n"));
  } else if (format == "WAV") {
    e.push_back([](io::Bytes& b) { b[8] = 'X'; });                      // WAVE form type
    e.push_back([](io::Bytes& b) { b[20] = 3; });                       // float format
    e.push_back([](io::Bytes& b) { b[34] = 8; });                       // 8-bit
    e.push_back([](io::Bytes& b) { b[22] = 0; });                       // zero channels
    e.push_back([](io::Bytes& b) { b[32] = 4; });                       // block align
    e.push_back([](io::Bytes& b) { put_u32(b, 40, get_u32(b, 40) + 2); });  // data chunk overruns
  }
  std::vector<Edit> out;
  out.swap(e);
  return out;
}

Outcome format_suite(const fs::path& work) {
  Outcome o;
  const auto toy = work / "toy_a";
  CounterRng rng(801);

  // fixtures: bytes -> decode -> encode must reproduce the bytes
  std::vector<std::pair<std::string, io::Bytes>> fixtures;
  fixtures.emplace_back("MDSQ", io::read_file((toy / "generated.mdsq").string()));
  std::vector<TpsTransform> ts{solve_tps(mdg::testing::random_pairs(rng, 5, 0.5)),
                               solve_tps(mdg::testing::random_pairs(rng, 6, 0.5))};
  const auto flow = compose_flow(ts, 24, 20);
  fixtures.emplace_back("MDFL", encode_flow(flow));
  fixtures.emplace_back("MDAF", io::read_file((toy / "data" / "cond_0000.mdaf").string()));
  fixtures.emplace_back("MDTP", encode_tps(ts[0]));
  fixtures.emplace_back("MDNN", io::read_file((toy / "model.mdnn").string()));
  fixtures.emplace_back("PPM", encode_pnm(mdg::testing::random_image(13, 17, 3, 802)));
  fixtures.emplace_back("PGM", encode_mask_pgm(flow.height, flow.width, occlusion_mask(flow)));
  AudioClip clip{{}, 16000};
  for (int i = 0; i < 4000; ++i) clip.samples.push_back(static_cast<double>(rng.uniform_int(-32768, 32767)) / 32768.0);
  fixtures.emplace_back("WAV", encode_wav(clip));

  int round_trip_ok = 0;
  for (const auto& [name, bytes] : fixtures) {
    io::Bytes again;
    if (name == "MDSQ") again = encode_sequence(decode_sequence(bytes));
    if (name == "MDFL") again = encode_flow(decode_flow(bytes));
    if (name == "MDAF") again = encode_features(decode_features(bytes));
    if (name == "MDTP") again = encode_tps(decode_tps(bytes));
    if (name == "MDNN") again = MlpDenoiser::decode(bytes).encode();
    if (name == "PPM" || name == "PGM") again = encode_pnm(decode_pnm(bytes));
    if (name == "WAV") again = encode_wav(read_wav(bytes));
    if (again == bytes) ++round_trip_ok;
    else o.check(false, name + " round trip");
  }

  // verify accepts every artifact the suite wrote plus the fixtures
  std::size_t accepted = 0, artifacts = 0;
  for (const auto& e : fs::recursive_directory_iterator(toy)) {
    const auto ext = e.path().extension().string();
    if (!e.is_regular_file() || ext == ".csv" || ext == ".txt") continue;
    ++artifacts;
    try {
      verify_file(e.path().string());
      ++accepted;
    } catch (const std::exception& ex) {
      o.check(false, "verify rejected " + e.path().filename().string() + ": " + ex.what());
    }
  }
  for (const auto& [name, bytes] : fixtures) {
    ++artifacts;
    try {
      if (verify_artifact(bytes).format == name) ++accepted;
      else o.check(false, "verify misnamed " + name);
    } catch (const std::exception& ex) {
      o.check(false, "verify rejected " + name + " fixture: " + ex.what());
    }
  }

  std::size_t rejected = 0, mutants = 0;
  for (const auto& [name, bytes] : fixtures) {
    const auto edits = mutants_for(name, bytes);
    o.check(edits.size() == 10, name + " has " + std::to_string(edits.size()) + " mutants");
    for (std::size_t i = 0; i < edits.size(); ++i) {
      io::Bytes m = bytes;
      edits[i](m);
      ++mutants;
      try {
        verify_artifact(m);
        o.check(false, name + " mutant " + std::to_string(i) + " accepted");
      } catch (const ParseError&) {
        ++rejected;
      } catch (const std::exception& ex) {
        o.check(false, name + " mutant " + std::to_string(i) + " threw non-parse error: " + ex.what());
      }
    }
  }
  o.note(std::to_string(round_trip_ok) + "/" + std::to_string(fixtures.size()) + " formats round-trip, " +
         std::to_string(accepted) + "/" + std::to_string(artifacts) + " artifacts verified, " + std::to_string(rejected) +
         "/" + std::to_string(mutants) + " mutants rejected");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "mdg_acceptance";
  fs::create_directories(work);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "TPS exactness", tps_exactness},
      {2, "flow/warp", flow_warp_suite},
      {3, "diffusion algebra", diffusion_algebra},
      {4, "gradient check", gradient_check_suite},
      {5, "toy end-to-end", [&] { return toy_end_to_end(work); }},
      {6, "selection vs naive concatenation", [&] { return selection_directional(work); }},
      {7, "metrics", metrics_suite},
      {8, "format round trips and verify", [&] { return format_suite(work); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
