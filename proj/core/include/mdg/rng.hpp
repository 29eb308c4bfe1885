#pragma once

#include <cstdint>

#include "mdg/types.hpp"

namespace mdg {

/// Counter-based random stream. Draw i of stream (seed, stream_id) is a pure
/// function of (seed, stream_id, i), so results never depend on how work is
/// split across threads. Normals use Box-Muller on two uniform draws.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform in the open interval (0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Child seed for independent sub-tasks (segment s, candidate p, ...).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace mdg
