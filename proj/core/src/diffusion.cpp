#include "mdg/diffusion.hpp"

#include <cmath>
#include <string>

#include "mdg/error.hpp"
#include "mdg/rng.hpp"

namespace mdg {

namespace {

void check_step(int t, const DiffusionSchedule& sched, const char* op) {
  if (t < 1 || t > sched.steps)
    throw InvalidArgument(std::string(op) + ": step " + std::to_string(t) + " outside [1, " +
                          std::to_string(sched.steps) + "]");
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument(std::string(op) + ": shape mismatch");
}

}  // namespace

Condition Condition::null() const {
  Condition c;
  c.audio = Matrix::Zero(audio.rows(), audio.cols());
  c.seed_motion = seed_motion;
  c.audio_masked = true;
  return c;
}

Matrix q_sample(const Matrix& x0, int t, const Matrix& noise, const DiffusionSchedule& sched) {
  check_step(t, sched, "q_sample");
  check_same_shape(x0, noise, "q_sample");
  const double abar = sched.alpha_bar_at(t);
  return std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * noise;
}

Matrix p_step(const Matrix& x_t, int t, const Matrix& x0_hat, const DiffusionSchedule& sched, const Matrix& noise) {
  check_step(t, sched, "p_step");
  check_same_shape(x_t, x0_hat, "p_step");
  const double abar = sched.alpha_bar_at(t);
  const double abar_prev = sched.alpha_bar_at(t - 1);
  const double beta = sched.beta_at(t);
  const double c0 = std::sqrt(abar_prev) * beta / (1.0 - abar);
  const double ct = std::sqrt(sched.alpha_at(t)) * (1.0 - abar_prev) / (1.0 - abar);
  Matrix mean = c0 * x0_hat + ct * x_t;
  if (t == 1) return mean;
  check_same_shape(x_t, noise, "p_step");
  return mean + std::sqrt(sched.posterior_variance(t)) * noise;
}

Matrix guided_x0(const Denoiser& d, const Matrix& x_t, int t, const Condition& cond, double gamma) {
  Matrix conditional = d.predict(x_t, t, cond);
  if (gamma == 1.0) return conditional;
  const Matrix unconditional = d.predict(x_t, t, cond.null());
  if (gamma == 0.0) return unconditional;
  return gamma * conditional + (1.0 - gamma) * unconditional;
}

MotionSequence sample(const Denoiser& d, const Condition& cond, Eigen::Index frames, Eigen::Index channels,
                      const DiffusionSchedule& sched, std::uint64_t seed, double gamma, Fps fps) {
  require(frames >= 1 && channels >= 1, "sample: empty output shape");
  require(sched.steps >= 1, "sample: empty schedule");
  CounterRng rng(seed);
  Matrix x = rng.normal_matrix(frames, channels);
  for (int t = sched.steps; t >= 1; --t) {
    const Matrix x0_hat = guided_x0(d, x, t, cond, gamma);
    if (x0_hat.rows() != frames || x0_hat.cols() != channels)
      throw InvalidArgument("sample: denoiser returned the wrong shape");
    const Matrix noise = t > 1 ? rng.normal_matrix(frames, channels) : Matrix();
    x = p_step(x, t, x0_hat, sched, noise);
  }
  return {std::move(x), fps, FlattenOrder::GroupPointXY};
}

double loss_simple(const Matrix& x0, const Matrix& x0_hat) {
  check_same_shape(x0, x0_hat, "loss_simple");
  require(x0.size() > 0, "loss_simple: empty input");
  return (x0 - x0_hat).squaredNorm() / static_cast<double>(x0.size());
}

double loss_vel(const Matrix& x0, const Matrix& x0_hat) {
  check_same_shape(x0, x0_hat, "loss_vel");
  if (x0.rows() < 2) throw InvalidArgument("loss_vel: need at least 2 frames");
  return (velocity(x0) - velocity(x0_hat)).squaredNorm() / static_cast<double>(x0.rows() - 1);
}

double loss_acc(const Matrix& x0, const Matrix& x0_hat) {
  check_same_shape(x0, x0_hat, "loss_acc");
  if (x0.rows() < 3) throw InvalidArgument("loss_acc: need at least 3 frames");
  return (acceleration(x0) - acceleration(x0_hat)).squaredNorm() / static_cast<double>(x0.rows() - 2);
}

double total_loss(const Matrix& x0, const Matrix& x0_hat, double lambda_vel, double lambda_acc) {
  return loss_simple(x0, x0_hat) + lambda_vel * loss_vel(x0, x0_hat) + lambda_acc * loss_acc(x0, x0_hat);
}

LossAndGradient total_loss_gradient(const Matrix& x0, const Matrix& x0_hat, double lambda_vel, double lambda_acc) {
  LossAndGradient out;
  out.loss = total_loss(x0, x0_hat, lambda_vel, lambda_acc);
  const Eigen::Index m = x0.rows();
  const Matrix diff = x0_hat - x0;
  out.grad = (2.0 / static_cast<double>(diff.size())) * diff;

  // Adjoint of the forward difference: (D^T v)[i] = v[i-1] - v[i].
  const auto difference_adjoint = [](const Matrix& v) {
    Matrix g = Matrix::Zero(v.rows() + 1, v.cols());
    g.topRows(v.rows()) -= v;
    g.bottomRows(v.rows()) += v;
    return g;
  };
  const Matrix dv = velocity(diff);
  out.grad += (2.0 * lambda_vel / static_cast<double>(m - 1)) * difference_adjoint(dv);
  const Matrix da = velocity(dv);
  out.grad += (2.0 * lambda_acc / static_cast<double>(m - 2)) * difference_adjoint(difference_adjoint(da));
  return out;
}

}  // namespace mdg
