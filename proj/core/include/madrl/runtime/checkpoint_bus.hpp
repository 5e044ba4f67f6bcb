#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>

#include "madrl/checkpoint.hpp"

namespace madrl {

// Latest-value channel for policy snapshots. Readers receive an immutable
// shared snapshot, so a checkpoint is never observed half-written.
class CheckpointBus {
 public:
  using Snapshot = std::shared_ptr<const PolicyCheckpoint>;

  // Publishes params as the next version (0 for the first publish) and
  // returns that version.
  std::uint64_t publish(const PolicyParams& params, std::uint64_t step);

  // Null until the first publish.
  Snapshot latest() const;
  // Blocks until a version >= min_version is available or the bus closes.
  Snapshot wait_for(std::uint64_t min_version, std::chrono::milliseconds timeout) const;
  bool has_checkpoint() const;
  std::uint64_t version() const;  // 0 before the first publish

  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  Snapshot latest_;
  bool closed_ = false;
};

}  // namespace madrl
