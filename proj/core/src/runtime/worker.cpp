#include "madrl/runtime/worker.hpp"

#include <chrono>
#include <thread>

namespace madrl {

void ProducerStats::merge(const ProducerStats& o) {
  sources += o.sources;
  unique_total += o.unique_total;
  samples_drawn += o.samples_drawn;
  truncated += o.truncated;
  degenerate += o.degenerate;
  trajectories += o.trajectories;
}

void ProducerStatsAccumulator::add(const CandidateSet& cs, std::size_t produced) {
  ProducerStats s;
  s.sources = 1;
  s.unique_total = cs.candidates.size();
  s.samples_drawn = static_cast<std::uint64_t>(cs.samples_drawn);
  for (char t : cs.truncated) s.truncated += t ? 1 : 0;
  s.degenerate = produced == 0 ? 1 : 0;
  s.trajectories = produced;
  std::lock_guard lock(mu_);
  window_.merge(s);
  total_.merge(s);
}

ProducerStats ProducerStatsAccumulator::take_window() {
  std::lock_guard lock(mu_);
  ProducerStats w = window_;
  window_ = {};
  return w;
}

ProducerStats ProducerStatsAccumulator::total() const {
  std::lock_guard lock(mu_);
  return total_;
}

std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6d6164u};
  return std::mt19937_64(seq);
}

Worker::Worker(int id, const CheckpointBus& bus, TrajectoryQueue& queue, const ParallelCorpus& corpus,
               const RewardFunction& reward, WorkerConfig cfg, ProducerStatsAccumulator* stats)
    : id_(id),
      bus_(bus),
      queue_(queue),
      corpus_(corpus),
      reward_(reward),
      cfg_(std::move(cfg)),
      stats_(stats),
      rng_(derive_rng(cfg_.seed, 100 + static_cast<std::uint64_t>(id))) {}

int Worker::produce_one() {
  // The behavior policy is refreshed only between source sentences.
  auto latest = bus_.latest();
  if (!latest) return -1;
  policy_ = std::move(latest);
  const auto& pair = sample_training_pair(corpus_, rng_);
  const auto cs =
      generate_candidates(policy_->params, pair.source, pair.target, cfg_.grid, reward_, rng_, policy_->version);
  auto trajectories = build_trajectories(cs, cfg_.trajectory);
  for (auto& t : trajectories) t.id = (static_cast<std::uint64_t>(id_ + 1) << 40) | next_id_++;
  const auto n = trajectories.size();
  if (stats_) stats_->add(cs, n);
  queue_.put_many(std::move(trajectories));
  produced_ += n;
  return static_cast<int>(n);
}

void Worker::run(const std::atomic<bool>& stop) {
  auto backoff = std::chrono::milliseconds(1);
  while (!stop.load(std::memory_order_relaxed)) {
    if (produce_one() < 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(backoff * 2, std::chrono::milliseconds(100));
    } else {
      backoff = std::chrono::milliseconds(1);
    }
  }
}

}  // namespace madrl
