#include "mdg/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mdg/error.hpp"

namespace mdg {

namespace {
constexpr double kMaxBeta = 0.999;
}

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "linear") return ScheduleKind::Linear;
  if (name == "cosine") return ScheduleKind::Cosine;
  throw InvalidArgument("unknown schedule kind '" + name + "' (expected linear or cosine)");
}

std::string to_string(ScheduleKind kind) { return kind == ScheduleKind::Linear ? "linear" : "cosine"; }

double DiffusionSchedule::posterior_variance(int t) const {
  return (1.0 - alpha_bar_at(t - 1)) / (1.0 - alpha_bar_at(t)) * beta_at(t);
}

DiffusionSchedule make_schedule(int steps, ScheduleKind kind) {
  if (steps < 1) throw InvalidArgument("make_schedule: T must be >= 1");
  DiffusionSchedule s;
  s.steps = steps;
  std::vector<double> betas(static_cast<std::size_t>(steps));
  if (kind == ScheduleKind::Linear) {
    const double scale = 1000.0 / steps;
    const double lo = 1e-4 * scale;
    const double hi = 0.02 * scale;
    for (int i = 0; i < steps; ++i) {
      const double beta = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
      betas[static_cast<std::size_t>(i)] = std::min(beta, kMaxBeta);
    }
  } else {
    const auto f = [steps](double t) {
      const double c = std::cos((t / steps + 0.008) / 1.008 * std::numbers::pi / 2.0);
      return c * c;
    };
    const double f0 = f(0.0);
    for (int t = 1; t <= steps; ++t) {
      const double ratio = (f(t) / f0) / (f(t - 1) / f0);
      betas[static_cast<std::size_t>(t - 1)] = std::clamp(1.0 - ratio, 0.0, kMaxBeta);
    }
  }
  double running = 1.0;
  for (double beta : betas) {
    const double a = 1.0 - beta;
    s.alpha.push_back(a);
    running = a * running;
    s.alpha_bar.push_back(running);
  }
  return s;
}

}  // namespace mdg
