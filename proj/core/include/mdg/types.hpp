#pragma once

#include <Eigen/Core>

namespace mdg {

/// Row-major dense matrix; rows are frames (or samples), columns are channels.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Frame rate kept as a rational so 25 fps and 30000/1001 fps survive file round trips.
struct Fps {
  unsigned num = 25;
  unsigned den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fps&, const Fps&) = default;
};

}  // namespace mdg
