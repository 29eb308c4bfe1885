#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "mdg/denoiser.hpp"
#include "mdg/diffusion.hpp"
#include "mdg/flow_warp.hpp"
#include "mdg/image.hpp"
#include "mdg/long_sampler.hpp"
#include "mdg/rng.hpp"
#include "mdg/tps.hpp"

using namespace mdg;

namespace {

std::vector<ControlPair> pairs(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<ControlPair> out;
  // jittered ring keeps the system well conditioned
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 6.283185307179586 * static_cast<double>(i) / static_cast<double>(n);
    const Point2 d{0.6 * std::cos(a), 0.6 * std::sin(a)};
    out.push_back({{d.x + 0.05 * rng.normal(), d.y + 0.05 * rng.normal()}, d});
  }
  return out;
}

void BM_SolveTps(benchmark::State& state) {
  const auto p = pairs(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_tps(p));
}
BENCHMARK(BM_SolveTps)->Arg(5)->Arg(10)->Arg(40);

void BM_ComposeFlow(benchmark::State& state) {
  std::vector<TpsTransform> ts;
  for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(state.range(1)); ++k) ts.push_back(solve_tps(pairs(10, k + 2)));
  const auto side = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(compose_flow(ts, side, side));
}
BENCHMARK(BM_ComposeFlow)->Args({64, 1})->Args({64, 4})->Args({256, 4});

void BM_WarpImage(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  RasterImage img(side, side, 3);
  CounterRng rng(3);
  for (auto& v : img.data) v = rng.uniform();
  const std::vector<TpsTransform> ts{solve_tps(pairs(10, 4))};
  const auto flow = compose_flow(ts, side, side);
  for (auto _ : state) benchmark::DoNotOptimize(warp_image(img, flow));
}
BENCHMARK(BM_WarpImage)->Arg(128)->Arg(256);

void BM_DenoiserPredict(benchmark::State& state) {
  const MlpDenoiser model({8, 6, 128}, 5);
  CounterRng rng(6);
  const Matrix x = rng.normal_matrix(80, 8);
  const Condition cond{rng.normal_matrix(80, 6), rng.normal_matrix(8, 1), false};
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(x, 25, cond));
}
BENCHMARK(BM_DenoiserPredict);

void BM_Sample(benchmark::State& state) {
  const MlpDenoiser model({8, 6, 128}, 7);
  CounterRng rng(8);
  const Condition cond{rng.normal_matrix(80, 6), rng.normal_matrix(8, 1), false};
  const auto sched = make_schedule(static_cast<int>(state.range(0)), ScheduleKind::Cosine);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample(model, cond, 80, 8, sched, ++seed, 2.0));
}
BENCHMARK(BM_Sample)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
