#include <benchmark/benchmark.h>

#include <random>

#include "madrl/metrics.hpp"
#include "madrl/tasks.hpp"

namespace {

madrl::TokenSeq random_sentence(std::mt19937_64& rng, int len) {
  std::uniform_int_distribution<madrl::TokenId> tok(madrl::kNumReserved, madrl::kNumReserved + 49);
  madrl::TokenSeq s(static_cast<std::size_t>(len));
  for (auto& t : s) t = tok(rng);
  return s;
}

template <class F>
void run_pairs(benchmark::State& state, F metric) {
  std::mt19937_64 rng(1);
  const int len = static_cast<int>(state.range(0));
  const auto hyp = random_sentence(rng, len);
  const auto ref = random_sentence(rng, len);
  for (auto _ : state) benchmark::DoNotOptimize(metric(hyp, ref));
}

void BM_SentenceBleu(benchmark::State& state) {
  run_pairs(state, [](const auto& h, const auto& r) { return madrl::sentence_bleu(h, r); });
}

void BM_SentenceTer(benchmark::State& state) {
  run_pairs(state, [](const auto& h, const auto& r) { return madrl::sentence_ter(h, r); });
}

void BM_SentenceChrf(benchmark::State& state) {
  const auto vocab = madrl::synthetic_vocabulary({});
  run_pairs(state, [&](const auto& h, const auto& r) {
    return madrl::sentence_chrf(vocab.decode(h), vocab.decode(r));
  });
}

}  // namespace

BENCHMARK(BM_SentenceBleu)->Arg(10)->Arg(30);
BENCHMARK(BM_SentenceTer)->Arg(10)->Arg(30);
BENCHMARK(BM_SentenceChrf)->Arg(10)->Arg(30);

BENCHMARK_MAIN();
