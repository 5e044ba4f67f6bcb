#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <random>

#include "madrl/metrics.hpp"
#include "madrl/runtime/checkpoint_bus.hpp"
#include "madrl/runtime/trajectory_queue.hpp"
#include "madrl/sampler.hpp"
#include "madrl/tasks.hpp"

namespace madrl {

struct ProducerStats {
  std::uint64_t sources = 0;
  std::uint64_t unique_total = 0;
  std::uint64_t samples_drawn = 0;
  std::uint64_t truncated = 0;
  std::uint64_t degenerate = 0;  // sources whose candidate set carried no signal
  std::uint64_t trajectories = 0;

  double mean_unique() const { return sources ? static_cast<double>(unique_total) / sources : 0.0; }
  void merge(const ProducerStats& other);
};

// Shared by workers; the trainer drains a window per metrics row.
class ProducerStatsAccumulator {
 public:
  void add(const CandidateSet& cs, std::size_t produced);
  ProducerStats take_window();
  ProducerStats total() const;

 private:
  mutable std::mutex mu_;
  ProducerStats window_;
  ProducerStats total_;
};

struct WorkerConfig {
  TemperatureGrid grid{0.2, 0.6, 12};
  TrajectoryOptions trajectory;
  std::uint64_t seed = 0;
};

// One asynchronous data generator: refresh the behavior policy, draw a
// training pair, sample a candidate set, normalize, enqueue.
class Worker {
 public:
  Worker(int id, const CheckpointBus& bus, TrajectoryQueue& queue, const ParallelCorpus& corpus,
         const RewardFunction& reward, WorkerConfig cfg, ProducerStatsAccumulator* stats = nullptr);

  // Handles one source sentence. Returns the number of trajectories
  // enqueued, or -1 when no checkpoint has been published yet.
  int produce_one();
  // Loops until stop is set, backing off while no checkpoint is available.
  void run(const std::atomic<bool>& stop);

  int id() const { return id_; }
  std::uint64_t produced() const { return produced_; }

 private:
  int id_;
  const CheckpointBus& bus_;
  TrajectoryQueue& queue_;
  const ParallelCorpus& corpus_;
  const RewardFunction& reward_;
  WorkerConfig cfg_;
  ProducerStatsAccumulator* stats_;
  std::mt19937_64 rng_;
  CheckpointBus::Snapshot policy_;
  std::uint64_t next_id_ = 0;
  std::uint64_t produced_ = 0;
};

// Distinct, reproducible stream for (seed, stream index).
std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t stream);

}  // namespace madrl
