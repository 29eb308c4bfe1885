#pragma once

// Latent-motion DDPM with x0 prediction.
//
// Forward:  x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps
// Reverse:  x_{t-1} = c0 * x0_hat + ct * x_t + sigma_t z,
//           c0 = sqrt(abar_{t-1}) beta_t / (1 - abar_t),
//           ct = sqrt(alpha_t) (1 - abar_{t-1}) / (1 - abar_t),
//           sigma_t^2 = (1 - abar_{t-1}) / (1 - abar_t) beta_t, no noise at t = 1.
// Guidance: x0_hat = gamma G(x_t, t, c) + (1 - gamma) G(x_t, t, c_null).

#include <cstdint>

#include "mdg/motion.hpp"
#include "mdg/schedule.hpp"
#include "mdg/types.hpp"

namespace mdg {

struct Condition {
  Matrix audio;        // M x C_a, rows aligned with motion frames
  Vector seed_motion;  // C, the motion feature x0^(0) the segment starts from
  bool audio_masked = false;

  /// c_null: the same seed motion with all-zero audio.
  Condition null() const;
};

/// Predicts x0 from a noisy sample. Implementations must be deterministic
/// and return a matrix with the shape of x_t.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Matrix predict(const Matrix& x_t, int t, const Condition& cond) const = 0;
};

Matrix q_sample(const Matrix& x0, int t, const Matrix& noise, const DiffusionSchedule& sched);

Matrix p_step(const Matrix& x_t, int t, const Matrix& x0_hat, const DiffusionSchedule& sched, const Matrix& noise);

Matrix guided_x0(const Denoiser& d, const Matrix& x_t, int t, const Condition& cond, double gamma);

/// Full reverse chain from x_T ~ N(0, I) drawn from CounterRng(seed).
MotionSequence sample(const Denoiser& d, const Condition& cond, Eigen::Index frames, Eigen::Index channels,
                      const DiffusionSchedule& sched, std::uint64_t seed, double gamma, Fps fps = {});

// Losses. loss_simple averages over all M*C entries; loss_vel and loss_acc
// sum squared differences over channels and average over the M-1 (M-2)
// difference rows.
double loss_simple(const Matrix& x0, const Matrix& x0_hat);
double loss_vel(const Matrix& x0, const Matrix& x0_hat);
double loss_acc(const Matrix& x0, const Matrix& x0_hat);
double total_loss(const Matrix& x0, const Matrix& x0_hat, double lambda_vel = 1.0, double lambda_acc = 1.0);

/// total_loss together with its gradient with respect to x0_hat.
struct LossAndGradient {
  double loss = 0.0;
  Matrix grad;
};
LossAndGradient total_loss_gradient(const Matrix& x0, const Matrix& x0_hat, double lambda_vel = 1.0,
                                    double lambda_acc = 1.0);

}  // namespace mdg
