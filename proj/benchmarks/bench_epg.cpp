#include <benchmark/benchmark.h>

#include "mrf/epg.hpp"

using namespace mrf;

namespace {

void BM_Fingerprint(benchmark::State& state) {
  const auto frames = static_cast<std::size_t>(state.range(0));
  const SequenceSchedule schedule = default_schedule(frames);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_fingerprint({1000.0, 100.0}, schedule, default_k_max(frames)));
  }
}
BENCHMARK(BM_Fingerprint)->Arg(200)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_DeskDictionary(benchmark::State& state) {
  const DictionaryGrid grid{GridRange::parse("100:50:4000"), GridRange::parse("20:10:600")};
  const SequenceSchedule schedule = default_schedule(200);
  for (auto _ : state) benchmark::DoNotOptimize(build_dictionary(grid, schedule));
}
BENCHMARK(BM_DeskDictionary)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
