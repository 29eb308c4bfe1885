#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdg/denoiser.hpp"
#include "mdg/schedule.hpp"

namespace mdg {

struct TrainingExample {
  Matrix x0;  // M x C clean motion
  Condition cond;
};

struct TrainConfig {
  int steps = 2000;
  int batch = 16;
  double lr = 0.01;
  double momentum = 0.9;
  double lambda_vel = 1.0;
  double lambda_acc = 1.0;
  double mask_prob = 0.25;
  int diffusion_steps = 50;
  ScheduleKind schedule = ScheduleKind::Cosine;
  std::uint64_t seed = 0;
  Eigen::Index hidden = 64;
  int probe_size = 16;
  int log_every = 50;
};

struct TrainLogEntry {
  int step = 0;
  double batch_loss = 0.0;
  double probe_loss = 0.0;
};

struct TrainResult {
  MlpDenoiser model;
  std::vector<TrainLogEntry> log;
  double probe_initial = 0.0;
  double probe_final = 0.0;
};

/// Minibatch gradient descent with momentum on total_loss. Each sample gets
/// a uniform step t in [1, T] and has its audio replaced by c_null with
/// probability mask_prob.
TrainResult train_denoiser(std::span<const TrainingExample> dataset, const TrainConfig& config);

/// Same, continuing from an existing model.
TrainResult train_denoiser(std::span<const TrainingExample> dataset, const TrainConfig& config, MlpDenoiser init);

/// Mean total loss of the model over a fixed probe batch drawn from `seed`.
double probe_loss(const MlpDenoiser& model, std::span<const TrainingExample> dataset, const TrainConfig& config,
                  std::uint64_t seed);

/// Central-difference check of the parameter gradient at `probes` random
/// coordinates. Returns the largest relative error.
double gradient_check(const MlpDenoiser& model, const TrainingExample& example, int t, const Matrix& noise,
                      const DiffusionSchedule& sched, double lambda_vel, double lambda_acc, int probes,
                      std::uint64_t seed, double step = 1e-5);

}  // namespace mdg
