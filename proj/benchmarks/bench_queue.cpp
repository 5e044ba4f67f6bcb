#include <benchmark/benchmark.h>

#include "madrl/runtime/trajectory_queue.hpp"

namespace {

void BM_QueuePutSample(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  madrl::TrajectoryQueue queue({.capacity = 4096, .min_size_to_sample = 512});
  std::uint64_t id = 0;
  for (; id < 4096; ++id) queue.put({.id = id});
  for (auto _ : state) {
    std::vector<madrl::Trajectory> items(batch);
    for (auto& t : items) t.id = id++;
    queue.put_many(std::move(items));
    benchmark::DoNotOptimize(queue.try_sample_batch(batch, 0));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch));
}

}  // namespace

BENCHMARK(BM_QueuePutSample)->Arg(16)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
