#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "madrl/sampler.hpp"

namespace madrl {

struct QueueConfig {
  std::size_t capacity = 4096;
  std::size_t min_size_to_sample = 512;
  int max_times_sampled = 1;
  // Items sampled under a checkpoint more than this many versions behind the
  // consumer are discarded at consume time. Negative disables the guard.
  int max_staleness = 4;
  void validate() const;
};

enum class QueueEventKind { kInsert, kEvict, kSample, kStaleDrop };

struct QueueEvent {
  QueueEventKind kind;
  std::uint64_t id;
};

enum class SampleStatus { kOk, kNotReady, kShutdown };

struct SampleResult {
  SampleStatus status = SampleStatus::kNotReady;
  std::vector<Trajectory> items;
};

struct QueueCounters {
  std::uint64_t inserted = 0;
  std::uint64_t evicted = 0;
  std::uint64_t delivered = 0;
  std::uint64_t stale_dropped = 0;
};

// Bounded multi-producer, single-consumer trajectory table. Producers never
// block; when full, the oldest item is evicted on insert. The consumer draws
// uniformly without replacement once the table holds min_size_to_sample
// items, and an item leaves the table after max_times_sampled deliveries.
class TrajectoryQueue {
 public:
  explicit TrajectoryQueue(QueueConfig cfg = {}, std::uint64_t seed = 0);

  void put(Trajectory item);
  void put_many(std::vector<Trajectory> items);

  // Blocks until the table is ready, shutdown is requested, or the timeout
  // expires (kNotReady). Returns min(n, size) items.
  SampleResult sample_batch(std::size_t n, std::uint64_t consumer_version,
                            std::optional<std::chrono::milliseconds> timeout = std::nullopt);
  // Non-blocking variant.
  SampleResult try_sample_batch(std::size_t n, std::uint64_t consumer_version);

  void shutdown();
  bool is_shutdown() const;
  std::size_t size() const;
  QueueCounters counters() const;
  const QueueConfig& config() const { return cfg_; }

  // Invoked under the queue lock, so the event sequence is the
  // linearization order of all operations.
  void set_observer(std::function<void(const QueueEvent&)> observer);

 private:
  struct Entry {
    Trajectory item;
    int times_sampled = 0;
  };

  void insert_locked(Trajectory&& item);
  void drop_stale_locked(std::uint64_t consumer_version);
  bool ready_locked() const;
  std::vector<Trajectory> draw_locked(std::size_t n);
  void emit(QueueEventKind kind, std::uint64_t id);

  QueueConfig cfg_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Entry> entries_;
  std::mt19937_64 rng_;
  QueueCounters counters_;
  bool shutdown_ = false;
  std::function<void(const QueueEvent&)> observer_;
};

}  // namespace madrl
