#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "madrl/metrics.hpp"
#include "madrl/runtime/evaluator.hpp"
#include "madrl/runtime/learner.hpp"
#include "madrl/runtime/metrics_log.hpp"
#include "madrl/runtime/trajectory_queue.hpp"
#include "madrl/runtime/worker.hpp"

namespace madrl {

enum class RewardNorm { kConditional, kBatch };

struct TrainConfig {
  Algorithm algorithm = Algorithm::kMad;
  std::uint64_t steps = 5000;
  int batch_size = 64;
  int publish_period = 20;
  int eval_every_versions = 1;  // evaluate every k-th published version
  int workers = 2;
  bool threaded = false;  // false runs workers, learner and evaluator in one deterministic loop
  std::uint64_t seed = 1;

  double t_min = 0.2;
  double t_max = 0.6;
  int n_samples = 12;
  double temperature = 0.6;  // single-temperature algorithms (ppo, mrt, reinforce)

  // Also the checkpoint selection metric: corpus BLEU for plain bleu, mean dev reward otherwise.
  RewardSpec reward = RewardSpec::single("bleu");
  RewardNorm reward_norm = RewardNorm::kConditional;
  bool mad_weights = true;
  PpoConfig ppo;
  MrtConfig mrt;
  QueueConfig queue;
  OptimizerConfig optimizer{.learning_rate = 1e-4, .warmup_steps = 100};
  bool dropout = true;
  EvaluatorConfig evaluator;

  void validate() const;
  TemperatureGrid grid() const;
};

struct TrainResult {
  PolicyParams final_params;
  PolicyParams best_params;
  RunState run;
  std::vector<MetricsRow> rows;
  std::uint64_t steps_done = 0;
  std::uint64_t skipped_steps = 0;
  bool failed = false;  // too many non-finite gradients
  ProducerStats producer;
  QueueCounters queue;
  double wall_s = 0.0;
};

struct TrainHooks {
  std::function<void(const MetricsRow&)> on_row;
};

// Fine-tunes init with the configured algorithm. Off-policy algorithms run
// the worker/queue/learner topology; on-policy ones sample from the current
// parameters inside the learner loop.
TrainResult train(const PolicyParams& init, const ParallelCorpus& corpus, const Vocabulary& vocab,
                  const TrainConfig& cfg, const TrainHooks& hooks = {});

// Trajectories enqueued per wall-clock second by `workers` threads sampling
// from a fixed policy with no learner attached.
double measure_worker_throughput(const PolicyParams& params, const ParallelCorpus& corpus, const Vocabulary& vocab,
                                 const TrainConfig& cfg, int workers, double seconds);

}  // namespace madrl
