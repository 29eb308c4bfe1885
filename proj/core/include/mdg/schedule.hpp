#pragma once

#include <string>
#include <vector>

namespace mdg {

enum class ScheduleKind { Linear, Cosine };

ScheduleKind parse_schedule_kind(const std::string& name);
std::string to_string(ScheduleKind kind);

/// Noise schedule indexed by step t = 1..T. Index 0 of the accessors below
/// is the t = 0 convention (alpha_bar(0) = 1).
struct DiffusionSchedule {
  int steps = 0;
  std::vector<double> alpha;      // alpha[t-1] = alpha_t
  std::vector<double> alpha_bar;  // alpha_bar[t-1] = prod_{s<=t} alpha_s

  double alpha_at(int t) const { return alpha[static_cast<std::size_t>(t - 1)]; }
  double beta_at(int t) const { return 1.0 - alpha_at(t); }
  double alpha_bar_at(int t) const { return t == 0 ? 1.0 : alpha_bar[static_cast<std::size_t>(t - 1)]; }
  /// Posterior variance (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t) * beta_t.
  double posterior_variance(int t) const;
};

/// linear: beta_t evenly spaced over [1e-4, 0.02] * (1000 / T), capped at 0.999.
/// cosine: alpha_bar(t) = f(t) / f(0), f(t) = cos^2((t/T + 0.008) / 1.008 * pi/2),
///         betas capped at 0.999 and alpha_bar rebuilt as a running product.
DiffusionSchedule make_schedule(int steps, ScheduleKind kind);

}  // namespace mdg
