#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "mdg/binary_io.hpp"
#include "mdg/diffusion.hpp"

namespace mdg {

/// Width of the sinusoidal step embedding appended to every frame's input.
inline constexpr Eigen::Index kStepEmbeddingDim = 16;

/// sin/cos embedding of step t, interleaved, frequencies 1000^(-2i/dim).
Vector step_embedding(int t, Eigen::Index dim = kStepEmbeddingDim);

/// Reference denoiser: one hidden tanh layer applied frame by frame to
/// [x_t frame | audio frame | seed motion | step embedding].
class MlpDenoiser final : public Denoiser {
 public:
  struct Shape {
    Eigen::Index motion_dim = 0;  // C
    Eigen::Index audio_dim = 0;   // C_a
    Eigen::Index hidden = 64;

    Eigen::Index input_dim() const { return 2 * motion_dim + audio_dim + kStepEmbeddingDim; }
  };

  struct Gradient {
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;
  };

  MlpDenoiser() = default;
  /// Weights ~ N(0, 1/fan_in) from `seed`, biases zero.
  MlpDenoiser(Shape shape, std::uint64_t seed);

  Matrix predict(const Matrix& x_t, int t, const Condition& cond) const override;

  /// Total loss of predict(x_t, t, cond) against x0 and its parameter gradient.
  double loss_and_gradient(const Matrix& x_t, int t, const Condition& cond, const Matrix& x0, double lambda_vel,
                           double lambda_acc, Gradient& grad) const;

  const Shape& shape() const { return shape_; }
  Eigen::Index parameter_count() const;
  /// Flat parameter vector: w1 (row-major), b1, w2 (row-major), b2.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& theta);
  static Eigen::VectorXd flatten(const Gradient& g);
  Gradient zero_gradient() const;

  /// Column range of w1 that reads the audio features.
  Eigen::Index audio_column_begin() const { return shape_.motion_dim; }

  const Eigen::MatrixXd& w1() const { return w1_; }
  const Eigen::MatrixXd& w2() const { return w2_; }

  // Binary `MDNN`: u32 layer count (2), then per layer u32 rows, u32 cols,
  // rows*cols float32 row-major. Each layer is stored as [W | b].
  io::Bytes encode() const;
  static MlpDenoiser decode(std::span<const std::uint8_t> bytes);
  void save(const std::string& path) const;
  static MlpDenoiser load(const std::string& path);

 private:
  Matrix assemble_input(const Matrix& x_t, int t, const Condition& cond) const;

  Shape shape_;
  Eigen::MatrixXd w1_;  // hidden x input
  Eigen::VectorXd b1_;
  Eigen::MatrixXd w2_;  // motion x hidden
  Eigen::VectorXd b2_;
};

}  // namespace mdg
