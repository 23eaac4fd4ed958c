#include <benchmark/benchmark.h>

#include <random>

#include "mrf/inference.hpp"

using namespace mrf;

namespace {

RMatrix random_voxels(Eigen::Index n, Eigen::Index rank) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  RMatrix m(n, rank);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

void BM_NetInference(benchmark::State& state) {
  const MrfNet net = make_net(5, {}, {100.0, 4000.0, 20.0, 600.0}, 1);
  const RMatrix voxels = random_voxels(64 * 64, 5);
  for (auto _ : state) benchmark::DoNotOptimize(infer(net, voxels));
}
BENCHMARK(BM_NetInference)->Unit(benchmark::kMillisecond);

void BM_DictionaryMatch(benchmark::State& state) {
  const DictionaryGrid grid{GridRange::parse("100:50:4000"), GridRange::parse("20:10:600")};
  const Dictionary dict = build_dictionary(grid, default_schedule(200));
  const SubspaceBasis basis = learn_subspace(dict, 5);
  const MatchTemplates templates = MatchTemplates::build(dict, basis);
  const RMatrix voxels = random_voxels(64 * 64, 5);
  for (auto _ : state) benchmark::DoNotOptimize(dictionary_match(voxels, templates));
}
BENCHMARK(BM_DictionaryMatch)->Unit(benchmark::kMillisecond);

}  // namespace
