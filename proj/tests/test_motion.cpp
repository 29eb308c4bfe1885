#include <gtest/gtest.h>

#include <Eigen/LU>

#include "mdg/error.hpp"
#include "mdg/motion.hpp"
#include "mdg/rng.hpp"
#include "mdg/spline.hpp"

using namespace mdg;

namespace {

std::vector<KeypointFrame> random_frames(std::size_t m, std::size_t k, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<KeypointFrame> frames(m);
  for (auto& f : frames) {
    f.groups = k;
    f.points_per_group = n;
    for (std::size_t i = 0; i < k * n; ++i) f.points.push_back({rng.normal(), rng.normal()});
  }
  return frames;
}

// Natural cubic spline by a dense solve of the moment equations.
double dense_spline(const std::vector<double>& t, const std::vector<double>& y, double x) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  a(0, 0) = 1;
  a(n - 1, n - 1) = 1;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
    a(i, i - 1) = h0 / 6;
    a(i, i) = (h0 + h1) / 3;
    a(i, i + 1) = h1 / 6;
    rhs(i) = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
  }
  const Eigen::VectorXd mom = a.fullPivLu().solve(rhs);
  Eigen::Index i = 0;
  while (i + 2 < n && x > t[i + 1]) ++i;
  const double h = t[i + 1] - t[i], u = t[i + 1] - x, v = x - t[i];
  return mom(i) * u * u * u / (6 * h) + mom(i + 1) * v * v * v / (6 * h) + (y[i] / h - mom(i) * h / 6) * u +
         (y[i + 1] / h - mom(i + 1) * h / 6) * v;
}

}  // namespace

TEST(Flatten, SinglePoint) {
  KeypointFrame f{1, 1, {{0.5, -0.5}}};
  const auto seq = flatten(std::vector{f});
  ASSERT_EQ(seq.channels(), 2);
  EXPECT_EQ(seq.frames(0, 0), 0.5);
  EXPECT_EQ(seq.frames(0, 1), -0.5);
}

TEST(Flatten, DefaultLayoutWidth) {
  const auto seq = flatten(random_frames(3, 20, 5, 1));
  EXPECT_EQ(seq.channels(), 200);
  EXPECT_EQ(unflatten(seq, 20, 5).size(), 3u);
}

TEST(Flatten, OrderAndRoundTrip) {
  const auto frames = random_frames(6, 3, 4, 2);
  const auto seq = flatten(frames);
  EXPECT_EQ(seq.frames(2, (1 * 4 + 3) * 2 + 1), frames[2].at(1, 3).y);
  const auto back = unflatten(seq, 3, 4);
  for (std::size_t m = 0; m < frames.size(); ++m) EXPECT_EQ(back[m].points, frames[m].points);
  EXPECT_THROW(unflatten(seq, 4, 4), InvalidArgument);
  auto bad = frames;
  bad[1].groups = 2;
  bad[1].points.resize(8);
  EXPECT_THROW(flatten(bad), InvalidArgument);
}

TEST(Differences, VelocityAndAcceleration) {
  Matrix constant = Matrix::Constant(5, 4, 0.7);
  EXPECT_TRUE(velocity(constant).isZero(0));

  Eigen::RowVectorXd v(3);
  v << 0.5, -1.25, 2.0;
  Matrix ramp(6, 3), quad(6, 3);
  for (Eigen::Index m = 0; m < 6; ++m) {
    ramp.row(m) = static_cast<double>(m) * v;
    quad.row(m) = static_cast<double>(m * m) * v;
  }
  for (Eigen::Index r = 0; r < 5; ++r) EXPECT_EQ(velocity(ramp).row(r), v);
  EXPECT_TRUE(acceleration(ramp).isZero(0));
  for (Eigen::Index r = 0; r < 4; ++r) EXPECT_EQ(acceleration(quad).row(r), 2.0 * v);

  CounterRng rng(3);
  const Matrix x = rng.normal_matrix(5, 4);
  const Matrix vel = velocity(x), acc = acceleration(x);
  for (Eigen::Index m = 0; m < 4; ++m)
    for (Eigen::Index c = 0; c < 4; ++c) EXPECT_EQ(vel(m, c), x(m + 1, c) - x(m, c));
  for (Eigen::Index m = 0; m < 3; ++m)
    for (Eigen::Index c = 0; c < 4; ++c)
      EXPECT_NEAR(acc(m, c), x(m + 2, c) - 2 * x(m + 1, c) + x(m, c), 1e-12);
  EXPECT_EQ(acc, velocity(vel));

  EXPECT_THROW(velocity(Matrix(1, 2)), InvalidArgument);
  EXPECT_THROW(acceleration(Matrix(2, 2)), InvalidArgument);
}

TEST(ClipWindows, Counts) {
  MotionSequence s80{Matrix::Zero(80, 2), {}, FlattenOrder::GroupPointXY};
  EXPECT_EQ(clip_windows(s80, 80, 10).size(), 1u);
  CounterRng rng(4);
  MotionSequence s100{rng.normal_matrix(100, 2), {}, FlattenOrder::GroupPointXY};
  const auto w = clip_windows(s100, 80, 10);
  ASSERT_EQ(w.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(w[i].length(), 80);
    EXPECT_EQ(w[i].frames.row(0), s100.frames.row(static_cast<Eigen::Index>(10 * i)));
  }
  MotionSequence s79{Matrix::Zero(79, 2), {}, FlattenOrder::GroupPointXY};
  EXPECT_TRUE(clip_windows(s79, 80, 10).empty());
  EXPECT_THROW(clip_windows(s80, 80, 0), InvalidArgument);
}

TEST(SequenceFormat, RoundTripAndValidation) {
  CounterRng rng(5);
  MotionSequence seq{rng.normal_matrix(7, 4), {30000, 1001}, FlattenOrder::GroupPointXY};
  const auto bytes = encode_sequence(seq);
  const auto back = decode_sequence(bytes);
  EXPECT_EQ(encode_sequence(back), bytes);
  EXPECT_EQ(back.fps, seq.fps);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(decode_sequence(truncated), ParseError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_sequence(magic), ParseError);
}

TEST(Spline, LinearAndConstantData) {
  Matrix left(5, 2), right(5, 2);
  for (Eigen::Index i = 0; i < 5; ++i) {
    left.row(i) << 0.5 * static_cast<double>(i) + 1, -2.0;
    right.row(i) << 0.5 * static_cast<double>(i + 7) + 1, -2.0;
  }
  const Matrix fill = spline_fill(left, right, 2);
  ASSERT_EQ(fill.rows(), 2);
  EXPECT_NEAR(fill(0, 0), 0.5 * 5 + 1, 1e-12);
  EXPECT_NEAR(fill(1, 0), 0.5 * 6 + 1, 1e-12);
  EXPECT_EQ(fill(0, 1), -2.0);
  EXPECT_EQ(fill(1, 1), -2.0);
}

TEST(Spline, MatchesDenseSolver) {
  CounterRng rng(6);
  const Matrix left = rng.normal_matrix(5, 3), right = rng.normal_matrix(5, 3);
  const Eigen::Index gap = 3;
  const Matrix fill = spline_fill(left, right, gap);
  for (Eigen::Index c = 0; c < 3; ++c) {
    std::vector<double> t, y;
    for (Eigen::Index i = 0; i < 5; ++i) {
      t.push_back(static_cast<double>(i));
      y.push_back(left(i, c));
    }
    for (Eigen::Index i = 0; i < 5; ++i) {
      t.push_back(static_cast<double>(5 + gap + i));
      y.push_back(right(i, c));
    }
    for (Eigen::Index g = 0; g < gap; ++g) EXPECT_NEAR(fill(g, c), dense_spline(t, y, static_cast<double>(5 + g)), 1e-9);
  }
}

TEST(Spline, InterpolatesKnotsAndIsSmooth) {
  CounterRng rng(7);
  std::vector<double> t{0, 1, 2.5, 3, 5}, y;
  for (int i = 0; i < 5; ++i) y.push_back(rng.normal());
  NaturalCubicSpline s(t, y);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(s(t[i]), y[i], 1e-12);
  EXPECT_NEAR(s.second_derivative(0), 0, 1e-12);
  EXPECT_NEAR(s.second_derivative(5), 0, 1e-12);
  for (int i = 1; i < 4; ++i) {
    EXPECT_NEAR(s.derivative(t[i] - 1e-9), s.derivative(t[i] + 1e-9), 1e-6);
    EXPECT_NEAR(s.second_derivative(t[i] - 1e-9), s.second_derivative(t[i] + 1e-9), 1e-6);
  }
  EXPECT_THROW(spline_fill(Matrix::Zero(1, 2), Matrix::Zero(5, 2), 2), InvalidArgument);
  EXPECT_THROW(spline_fill(Matrix::Zero(5, 2), Matrix::Zero(5, 2), 0), InvalidArgument);
}
