#include <benchmark/benchmark.h>

#include <random>

#include "madrl/objectives.hpp"
#include "madrl/policy.hpp"
#include "madrl/sampler.hpp"

namespace {

madrl::PolicyParams model(int hidden) {
  madrl::PolicyConfig cfg;
  cfg.vocab_size = 54;
  cfg.hidden_size = hidden;
  cfg.dropout = 0.0;
  return madrl::PolicyParams::initialize(cfg, 1);
}

madrl::TokenSeq source(int len) {
  madrl::TokenSeq s;
  for (int i = 0; i < len; ++i) s.push_back(madrl::kNumReserved + (i * 7) % 50);
  return s;
}

void BM_GreedyDecode(benchmark::State& state) {
  const auto p = model(static_cast<int>(state.range(0)));
  const auto src = source(12);
  for (auto _ : state) benchmark::DoNotOptimize(madrl::greedy_decode(p, src));
}

void BM_BeamDecode(benchmark::State& state) {
  const auto p = model(32);
  const auto src = source(12);
  const madrl::BeamConfig cfg{.beams = static_cast<int>(state.range(0)), .alpha = 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(madrl::beam_decode(p, src, cfg));
}

void BM_SampleGrid(benchmark::State& state) {
  const auto p = model(32);
  const auto src = source(12);
  const madrl::TemperatureGrid grid(0.2, 0.6, static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(madrl::sample_temperatures(p, src, grid.values(), rng));
}

void BM_MadStep(benchmark::State& state) {
  const auto p = model(32);
  std::mt19937_64 rng(1);
  std::vector<madrl::Trajectory> batch;
  for (int i = 0; i < state.range(0); ++i) {
    madrl::Trajectory t;
    t.source = source(8 + i % 8);
    t.target = madrl::sample(p, t.source, 1.0, rng);
    t.q = madrl::sequence_log_prob(p, t.source, t.target);
    t.r_bar = (i % 3) - 1.0;
    batch.push_back(std::move(t));
  }
  for (auto _ : state) benchmark::DoNotOptimize(madrl::mad_step(p, batch, {}, true, rng));
}

}  // namespace

BENCHMARK(BM_GreedyDecode)->Arg(16)->Arg(64);
BENCHMARK(BM_BeamDecode)->Arg(1)->Arg(5)->Arg(50);
BENCHMARK(BM_SampleGrid)->Arg(4)->Arg(12);
BENCHMARK(BM_MadStep)->Arg(64);

BENCHMARK_MAIN();
