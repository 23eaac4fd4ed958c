#include <benchmark/benchmark.h>

#include <random>

#include "mrf/operator.hpp"

using namespace mrf;

namespace {

struct Setup {
  ImageShape shape;
  SubspaceBasis basis;
  AcquisitionOperator op;
  CMatrix x;

  Setup(std::size_t side, std::size_t frames, std::size_t coils, std::size_t rank)
      : shape{side, side},
        op(make_coil_maps(shape, coils, CoilKind::gaussian_ring),
           make_vd_cartesian_masks(shape, frames, {8.0, 2.0, 0.0, 4}, 1)) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    CMatrix d(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(2 * frames));
    for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = {g(rng), g(rng)};
    basis = learn_subspace(d, rank);
    x.resize(static_cast<Eigen::Index>(shape.voxels()), static_cast<Eigen::Index>(rank));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = {g(rng), g(rng)};
  }
};

void BM_Forward(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)), 200, 4, 5);
  for (auto _ : state) benchmark::DoNotOptimize(s.op.forward(s.x, s.basis));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Normal(benchmark::State& state) {
  Setup s(static_cast<std::size_t>(state.range(0)), 200, 4, 5);
  for (auto _ : state) benchmark::DoNotOptimize(s.op.normal(s.x, s.basis));
}
BENCHMARK(BM_Normal)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
