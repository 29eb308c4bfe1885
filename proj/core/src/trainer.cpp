#include "mdg/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "mdg/error.hpp"
#include "mdg/rng.hpp"

namespace mdg {

namespace {

struct ProbeItem {
  std::size_t index;
  int t;
  Matrix noise;
};

std::vector<ProbeItem> make_probe(std::span<const TrainingExample> dataset, const TrainConfig& config,
                                  std::uint64_t seed) {
  CounterRng rng(seed, 0x70726f6265);
  std::vector<ProbeItem> items;
  const int count = std::max(1, config.probe_size);
  for (int i = 0; i < count; ++i) {
    const auto index = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(dataset.size()) - 1));
    const int t = static_cast<int>(rng.uniform_int(1, config.diffusion_steps));
    const auto& x0 = dataset[index].x0;
    items.push_back({index, t, rng.normal_matrix(x0.rows(), x0.cols())});
  }
  return items;
}

double evaluate_probe(const MlpDenoiser& model, std::span<const TrainingExample> dataset,
                      const std::vector<ProbeItem>& probe, const DiffusionSchedule& sched, const TrainConfig& config) {
  double total = 0.0;
  for (const auto& item : probe) {
    const auto& ex = dataset[item.index];
    const Matrix x_t = q_sample(ex.x0, item.t, item.noise, sched);
    total += mdg::total_loss(ex.x0, model.predict(x_t, item.t, ex.cond), config.lambda_vel, config.lambda_acc);
  }
  return total / static_cast<double>(probe.size());
}

void validate(std::span<const TrainingExample> dataset, const TrainConfig& config) {
  if (dataset.empty()) throw InvalidArgument("train_denoiser: empty dataset");
  require(config.steps >= 0 && config.batch >= 1, "train_denoiser: steps >= 0 and batch >= 1 required");
  require(config.lr > 0.0 && config.momentum >= 0.0 && config.momentum < 1.0,
          "train_denoiser: lr > 0 and momentum in [0, 1) required");
  require(config.mask_prob >= 0.0 && config.mask_prob <= 1.0, "train_denoiser: mask_prob must be in [0, 1]");
  const auto& first = dataset.front();
  for (const auto& ex : dataset) {
    if (ex.x0.cols() != first.x0.cols() || ex.x0.rows() < 3)
      throw InvalidArgument("train_denoiser: examples need a common channel count and >= 3 frames");
    if (ex.cond.audio.rows() != ex.x0.rows() || ex.cond.audio.cols() != first.cond.audio.cols())
      throw InvalidArgument("train_denoiser: audio features must align with motion frames");
  }
}

}  // namespace

double probe_loss(const MlpDenoiser& model, std::span<const TrainingExample> dataset, const TrainConfig& config,
                  std::uint64_t seed) {
  require(!dataset.empty(), "probe_loss: empty dataset");
  const auto sched = make_schedule(config.diffusion_steps, config.schedule);
  return evaluate_probe(model, dataset, make_probe(dataset, config, seed), sched, config);
}

TrainResult train_denoiser(std::span<const TrainingExample> dataset, const TrainConfig& config) {
  if (dataset.empty()) throw InvalidArgument("train_denoiser: empty dataset");
  const MlpDenoiser::Shape shape{dataset.front().x0.cols(), dataset.front().cond.audio.cols(), config.hidden};
  return train_denoiser(dataset, config, MlpDenoiser(shape, derive_seed(config.seed, 1)));
}

TrainResult train_denoiser(std::span<const TrainingExample> dataset, const TrainConfig& config, MlpDenoiser init) {
  validate(dataset, config);
  const auto sched = make_schedule(config.diffusion_steps, config.schedule);
  const auto probe = make_probe(dataset, config, derive_seed(config.seed, 2));

  TrainResult result;
  result.model = std::move(init);
  auto& model = result.model;
  result.probe_initial = evaluate_probe(model, dataset, probe, sched, config);

  CounterRng rng(derive_seed(config.seed, 3));
  Eigen::VectorXd theta = model.parameters();
  Eigen::VectorXd velocity_buf = Eigen::VectorXd::Zero(theta.size());
  const auto n = static_cast<std::int64_t>(dataset.size());

  for (int step = 1; step <= config.steps; ++step) {
    auto grad = model.zero_gradient();
    double batch_loss = 0.0;
    for (int b = 0; b < config.batch; ++b) {
      const auto& ex = dataset[static_cast<std::size_t>(rng.uniform_int(0, n - 1))];
      const int t = static_cast<int>(rng.uniform_int(1, config.diffusion_steps));
      const Matrix noise = rng.normal_matrix(ex.x0.rows(), ex.x0.cols());
      const bool masked = rng.uniform() < config.mask_prob;
      const Matrix x_t = q_sample(ex.x0, t, noise, sched);
      batch_loss += model.loss_and_gradient(x_t, t, masked ? ex.cond.null() : ex.cond, ex.x0, config.lambda_vel,
                                            config.lambda_acc, grad);
    }
    const Eigen::VectorXd g = MlpDenoiser::flatten(grad) / static_cast<double>(config.batch);
    velocity_buf = config.momentum * velocity_buf + g;
    theta -= config.lr * velocity_buf;
    model.set_parameters(theta);
    if (!theta.allFinite()) throw NumericError("train_denoiser: parameters diverged at step " + std::to_string(step));

    if (config.log_every > 0 && (step % config.log_every == 0 || step == config.steps)) {
      result.log.push_back({step, batch_loss / config.batch, evaluate_probe(model, dataset, probe, sched, config)});
    }
  }
  result.probe_final = evaluate_probe(model, dataset, probe, sched, config);
  return result;
}

double gradient_check(const MlpDenoiser& model, const TrainingExample& example, int t, const Matrix& noise,
                      const DiffusionSchedule& sched, double lambda_vel, double lambda_acc, int probes,
                      std::uint64_t seed, double step) {
  const Matrix x_t = q_sample(example.x0, t, noise, sched);
  auto grad = model.zero_gradient();
  model.loss_and_gradient(x_t, t, example.cond, example.x0, lambda_vel, lambda_acc, grad);
  const Eigen::VectorXd analytic = MlpDenoiser::flatten(grad);

  const Eigen::VectorXd theta = model.parameters();
  MlpDenoiser probe_model = model;
  CounterRng rng(seed, 0x6772616463);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    const auto idx = static_cast<Eigen::Index>(rng.uniform_int(0, theta.size() - 1));
    Eigen::VectorXd shifted = theta;
    shifted(idx) = theta(idx) + step;
    probe_model.set_parameters(shifted);
    const double up = total_loss(example.x0, probe_model.predict(x_t, t, example.cond), lambda_vel, lambda_acc);
    shifted(idx) = theta(idx) - step;
    probe_model.set_parameters(shifted);
    const double down = total_loss(example.x0, probe_model.predict(x_t, t, example.cond), lambda_vel, lambda_acc);
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max({std::abs(numeric), std::abs(analytic(idx)), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic(idx)) / scale);
  }
  return worst;
}

}  // namespace mdg
