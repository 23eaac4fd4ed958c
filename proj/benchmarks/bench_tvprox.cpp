#include <benchmark/benchmark.h>

#include <random>

#include "mrf/tvprox.hpp"

using namespace mrf;

namespace {

void BM_TvProx(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  RVector img(static_cast<Eigen::Index>(side * side));
  for (Eigen::Index i = 0; i < img.size(); ++i) img[i] = g(rng);
  TvConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(tv_prox(img, {side, side}, 0.1, cfg));
}
BENCHMARK(BM_TvProx)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_TvProxStack(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  CMatrix x(64 * 64, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = {g(rng), g(rng)};
  TvConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(tv_prox_stack(x, {64, 64}, 0.1, cfg));
}
BENCHMARK(BM_TvProxStack)->Unit(benchmark::kMillisecond);

}  // namespace
