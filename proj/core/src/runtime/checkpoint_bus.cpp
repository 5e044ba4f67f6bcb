#include "madrl/runtime/checkpoint_bus.hpp"

namespace madrl {

std::uint64_t CheckpointBus::publish(const PolicyParams& params, std::uint64_t step) {
  auto ckpt = std::make_shared<PolicyCheckpoint>();
  ckpt->params = params;
  ckpt->step = step;
  std::uint64_t version;
  {
    std::lock_guard lock(mu_);
    version = latest_ ? latest_->version + 1 : 0;
    ckpt->version = version;
    latest_ = std::move(ckpt);
  }
  cv_.notify_all();
  return version;
}

CheckpointBus::Snapshot CheckpointBus::latest() const {
  std::lock_guard lock(mu_);
  return latest_;
}

CheckpointBus::Snapshot CheckpointBus::wait_for(std::uint64_t min_version, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || (latest_ && latest_->version >= min_version); });
  if (latest_ && latest_->version >= min_version) return latest_;
  return nullptr;
}

bool CheckpointBus::has_checkpoint() const {
  std::lock_guard lock(mu_);
  return latest_ != nullptr;
}

std::uint64_t CheckpointBus::version() const {
  std::lock_guard lock(mu_);
  return latest_ ? latest_->version : 0;
}

void CheckpointBus::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool CheckpointBus::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

}  // namespace madrl
