#include "mdg/denoiser.hpp"

#include <cmath>

#include "mdg/error.hpp"
#include "mdg/rng.hpp"

namespace mdg {

Vector step_embedding(int t, Eigen::Index dim) {
  Vector e(dim);
  const Eigen::Index half = dim / 2;
  for (Eigen::Index i = 0; i < half; ++i) {
    const double freq = std::pow(1000.0, -static_cast<double>(i) / static_cast<double>(half));
    e(2 * i) = std::sin(t * freq);
    e(2 * i + 1) = std::cos(t * freq);
  }
  if (dim % 2) e(dim - 1) = 0.0;
  return e;
}

MlpDenoiser::MlpDenoiser(Shape shape, std::uint64_t seed) : shape_(shape) {
  require(shape.motion_dim >= 1 && shape.audio_dim >= 0 && shape.hidden >= 1, "MlpDenoiser: invalid shape");
  CounterRng rng(seed, 0x6d6c70);
  const Eigen::Index in = shape.input_dim();
  w1_.resize(shape.hidden, in);
  w2_.resize(shape.motion_dim, shape.hidden);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  for (Eigen::Index r = 0; r < w1_.rows(); ++r)
    for (Eigen::Index c = 0; c < w1_.cols(); ++c) w1_(r, c) = s1 * rng.normal();
  for (Eigen::Index r = 0; r < w2_.rows(); ++r)
    for (Eigen::Index c = 0; c < w2_.cols(); ++c) w2_(r, c) = s2 * rng.normal();
  b1_ = Eigen::VectorXd::Zero(shape.hidden);
  b2_ = Eigen::VectorXd::Zero(shape.motion_dim);
}

Matrix MlpDenoiser::assemble_input(const Matrix& x_t, int t, const Condition& cond) const {
  const Eigen::Index m = x_t.rows();
  const Eigen::Index c = shape_.motion_dim;
  const Eigen::Index ca = shape_.audio_dim;
  if (x_t.cols() != c) throw InvalidArgument("MlpDenoiser: x_t has " + std::to_string(x_t.cols()) + " channels, model expects " + std::to_string(c));
  if (cond.seed_motion.size() != c) throw InvalidArgument("MlpDenoiser: seed motion dimension mismatch");
  if (!cond.audio_masked && (cond.audio.rows() != m || cond.audio.cols() != ca))
    throw InvalidArgument("MlpDenoiser: audio features must be " + std::to_string(m) + " x " + std::to_string(ca));
  Matrix input(m, shape_.input_dim());
  input.leftCols(c) = x_t;
  if (cond.audio_masked)
    input.middleCols(c, ca).setZero();
  else
    input.middleCols(c, ca) = cond.audio;
  input.middleCols(c + ca, c) = cond.seed_motion.transpose().replicate(m, 1);
  input.rightCols(kStepEmbeddingDim) = step_embedding(t).transpose().replicate(m, 1);
  return input;
}

Matrix MlpDenoiser::predict(const Matrix& x_t, int t, const Condition& cond) const {
  const Matrix input = assemble_input(x_t, t, cond);
  const Matrix hidden = ((input * w1_.transpose()).rowwise() + b1_.transpose()).array().tanh().matrix();
  return (hidden * w2_.transpose()).rowwise() + b2_.transpose();
}

double MlpDenoiser::loss_and_gradient(const Matrix& x_t, int t, const Condition& cond, const Matrix& x0,
                                      double lambda_vel, double lambda_acc, Gradient& grad) const {
  const Matrix input = assemble_input(x_t, t, cond);
  const Matrix hidden = ((input * w1_.transpose()).rowwise() + b1_.transpose()).array().tanh().matrix();
  const Matrix output = (hidden * w2_.transpose()).rowwise() + b2_.transpose();
  const LossAndGradient lg = total_loss_gradient(x0, output, lambda_vel, lambda_acc);

  grad.w2 += lg.grad.transpose() * hidden;
  grad.b2 += lg.grad.colwise().sum().transpose();
  const Matrix d_hidden = lg.grad * w2_;
  const Matrix d_pre = (d_hidden.array() * (1.0 - hidden.array().square())).matrix();
  grad.w1 += d_pre.transpose() * input;
  grad.b1 += d_pre.colwise().sum().transpose();
  return lg.loss;
}

Eigen::Index MlpDenoiser::parameter_count() const { return w1_.size() + b1_.size() + w2_.size() + b2_.size(); }

namespace {

template <typename Mat>
void append_row_major(const Mat& m, Eigen::VectorXd& out, Eigen::Index& pos) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(pos++) = m(r, c);
}

template <typename Mat>
void read_row_major(Mat& m, const Eigen::VectorXd& in, Eigen::Index& pos) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in(pos++);
}

}  // namespace

Eigen::VectorXd MlpDenoiser::parameters() const {
  Eigen::VectorXd theta(parameter_count());
  Eigen::Index pos = 0;
  append_row_major(w1_, theta, pos);
  append_row_major(b1_, theta, pos);
  append_row_major(w2_, theta, pos);
  append_row_major(b2_, theta, pos);
  return theta;
}

void MlpDenoiser::set_parameters(const Eigen::VectorXd& theta) {
  require(theta.size() == parameter_count(), "MlpDenoiser::set_parameters: size mismatch");
  Eigen::Index pos = 0;
  read_row_major(w1_, theta, pos);
  read_row_major(b1_, theta, pos);
  read_row_major(w2_, theta, pos);
  read_row_major(b2_, theta, pos);
}

Eigen::VectorXd MlpDenoiser::flatten(const Gradient& g) {
  Eigen::VectorXd out(g.w1.size() + g.b1.size() + g.w2.size() + g.b2.size());
  Eigen::Index pos = 0;
  append_row_major(g.w1, out, pos);
  append_row_major(g.b1, out, pos);
  append_row_major(g.w2, out, pos);
  append_row_major(g.b2, out, pos);
  return out;
}

MlpDenoiser::Gradient MlpDenoiser::zero_gradient() const {
  return {Eigen::MatrixXd::Zero(w1_.rows(), w1_.cols()), Eigen::MatrixXd::Zero(w2_.rows(), w2_.cols()),
          Eigen::VectorXd::Zero(b1_.size()), Eigen::VectorXd::Zero(b2_.size())};
}

io::Bytes MlpDenoiser::encode() const {
  io::Writer w;
  w.magic("MDNN");
  w.u32(2);
  const auto layer = [&w](const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias) {
    w.u32(static_cast<std::uint32_t>(weights.rows()));
    w.u32(static_cast<std::uint32_t>(weights.cols() + 1));
    for (Eigen::Index r = 0; r < weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < weights.cols(); ++c) w.f32(static_cast<float>(weights(r, c)));
      w.f32(static_cast<float>(bias(r)));
    }
  };
  layer(w1_, b1_);
  layer(w2_, b2_);
  return w.take();
}

MlpDenoiser MlpDenoiser::decode(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "MDNN");
  r.expect_magic("MDNN");
  if (r.u32("layer count") != 2) r.fail("expected exactly 2 layers");
  const auto layer = [&r](Eigen::MatrixXd& weights, Eigen::VectorXd& bias) {
    const std::uint32_t rows = r.u32("rows");
    const std::uint32_t cols = r.u32("cols");
    if (rows == 0 || cols < 2) r.fail("degenerate layer shape");
    if (r.remaining() < static_cast<std::size_t>(rows) * cols * 4) r.fail("truncated layer data");
    weights.resize(rows, cols - 1);
    bias.resize(rows);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j + 1 < cols; ++j) weights(i, j) = r.f32("weights");
      bias(i) = r.f32("bias");
    }
    if (!weights.allFinite() || !bias.allFinite()) r.fail("non-finite parameter");
  };
  MlpDenoiser model;
  layer(model.w1_, model.b1_);
  layer(model.w2_, model.b2_);
  r.expect_end();
  if (model.w2_.cols() != model.w1_.rows()) r.fail("layer 2 input width does not match layer 1 output");
  const Eigen::Index c = model.w2_.rows();
  const Eigen::Index ca = model.w1_.cols() - 2 * c - kStepEmbeddingDim;
  if (ca < 0) r.fail("layer 1 input width too small for motion dimension");
  model.shape_ = {c, ca, model.w1_.rows()};
  return model;
}

void MlpDenoiser::save(const std::string& path) const { io::write_file(path, encode()); }

MlpDenoiser MlpDenoiser::load(const std::string& path) { return decode(io::read_file(path)); }

}  // namespace mdg
