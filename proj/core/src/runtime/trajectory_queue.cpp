#include "madrl/runtime/trajectory_queue.hpp"

#include <algorithm>
#include <stdexcept>

namespace madrl {

void QueueConfig::validate() const {
  if (capacity < 1) throw std::invalid_argument("queue capacity must be >= 1");
  if (min_size_to_sample > capacity) throw std::invalid_argument("queue min_size_to_sample exceeds capacity");
  if (max_times_sampled < 1) throw std::invalid_argument("queue max_times_sampled must be >= 1");
}

TrajectoryQueue::TrajectoryQueue(QueueConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) { cfg_.validate(); }

void TrajectoryQueue::emit(QueueEventKind kind, std::uint64_t id) {
  if (observer_) observer_({kind, id});
}

void TrajectoryQueue::insert_locked(Trajectory&& item) {
  if (entries_.size() >= cfg_.capacity) {
    emit(QueueEventKind::kEvict, entries_.front().item.id);
    entries_.pop_front();
    ++counters_.evicted;
  }
  emit(QueueEventKind::kInsert, item.id);
  entries_.push_back({std::move(item), 0});
  ++counters_.inserted;
}

void TrajectoryQueue::put(Trajectory item) {
  {
    std::lock_guard lock(mu_);
    insert_locked(std::move(item));
  }
  cv_.notify_one();
}

void TrajectoryQueue::put_many(std::vector<Trajectory> items) {
  if (items.empty()) return;
  {
    std::lock_guard lock(mu_);
    for (auto& t : items) insert_locked(std::move(t));
  }
  cv_.notify_one();
}

void TrajectoryQueue::drop_stale_locked(std::uint64_t consumer_version) {
  if (cfg_.max_staleness < 0) return;
  const auto limit = static_cast<std::uint64_t>(cfg_.max_staleness);
  auto keep = std::remove_if(entries_.begin(), entries_.end(), [&](const Entry& e) {
    const bool stale = consumer_version > e.item.version && consumer_version - e.item.version > limit;
    if (stale) {
      emit(QueueEventKind::kStaleDrop, e.item.id);
      ++counters_.stale_dropped;
    }
    return stale;
  });
  entries_.erase(keep, entries_.end());
}

bool TrajectoryQueue::ready_locked() const {
  return !entries_.empty() && entries_.size() >= cfg_.min_size_to_sample;
}

std::vector<Trajectory> TrajectoryQueue::draw_locked(std::size_t n) {
  const std::size_t k = std::min(n, entries_.size());
  // Partial Fisher-Yates over the index range picks k distinct positions.
  std::vector<std::size_t> idx(entries_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng_)]);
  }
  idx.resize(k);
  std::vector<Trajectory> out;
  out.reserve(k);
  std::vector<std::size_t> spent;
  for (std::size_t i : idx) {
    auto& e = entries_[i];
    emit(QueueEventKind::kSample, e.item.id);
    ++e.times_sampled;
    out.push_back(e.item);
    if (e.times_sampled >= cfg_.max_times_sampled) spent.push_back(i);
  }
  std::sort(spent.begin(), spent.end(), std::greater<>());
  for (std::size_t i : spent) entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(i));
  counters_.delivered += k;
  return out;
}

SampleResult TrajectoryQueue::sample_batch(std::size_t n, std::uint64_t consumer_version,
                                           std::optional<std::chrono::milliseconds> timeout) {
  std::unique_lock lock(mu_);
  auto ready = [&] {
    if (shutdown_) return true;
    drop_stale_locked(consumer_version);
    return ready_locked();
  };
  if (timeout) {
    if (!cv_.wait_for(lock, *timeout, ready)) return {SampleStatus::kNotReady, {}};
  } else {
    cv_.wait(lock, ready);
  }
  if (shutdown_) return {SampleStatus::kShutdown, {}};
  return {SampleStatus::kOk, draw_locked(n)};
}

SampleResult TrajectoryQueue::try_sample_batch(std::size_t n, std::uint64_t consumer_version) {
  std::lock_guard lock(mu_);
  if (shutdown_) return {SampleStatus::kShutdown, {}};
  drop_stale_locked(consumer_version);
  if (!ready_locked()) return {SampleStatus::kNotReady, {}};
  return {SampleStatus::kOk, draw_locked(n)};
}

void TrajectoryQueue::shutdown() {
  {
    std::lock_guard lock(mu_);
    shutdown_ = true;
  }
  cv_.notify_all();
}

bool TrajectoryQueue::is_shutdown() const {
  std::lock_guard lock(mu_);
  return shutdown_;
}

std::size_t TrajectoryQueue::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

QueueCounters TrajectoryQueue::counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

void TrajectoryQueue::set_observer(std::function<void(const QueueEvent&)> observer) {
  std::lock_guard lock(mu_);
  observer_ = std::move(observer);
}

}  // namespace madrl
