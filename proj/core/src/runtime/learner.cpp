#include "madrl/runtime/learner.hpp"

#include <stdexcept>

#include "madrl/runtime/worker.hpp"

namespace madrl {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "mad") return Algorithm::kMad;
  if (name == "ppo") return Algorithm::kPpo;
  if (name == "mrt") return Algorithm::kMrt;
  if (name == "reinforce") return Algorithm::kReinforce;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::kMad: return "mad";
    case Algorithm::kPpo: return "ppo";
    case Algorithm::kMrt: return "mrt";
    case Algorithm::kReinforce: return "reinforce";
  }
  return "unknown";
}

bool is_on_policy(Algorithm algo) { return algo == Algorithm::kMrt || algo == Algorithm::kReinforce; }

void LearnerConfig::validate() const {
  if (publish_period < 1) throw std::invalid_argument("publish_period must be >= 1");
  ppo.validate();
  mrt.validate();
  optimizer.validate();
}

Learner::Learner(PolicyParams initial, CheckpointBus& bus, LearnerConfig cfg)
    : params_(std::move(initial)),
      bus_(bus),
      cfg_(cfg),
      optimizer_(params_, cfg_.optimizer),
      rng_(derive_rng(cfg_.seed, 1)) {
  cfg_.validate();
  version_ = bus_.publish(params_, 0);
}

LearnerStepInfo Learner::apply(StepResult result) {
  ++step_;
  LearnerStepInfo info;
  info.stats = result.stats;
  info.step = step_;
  if (!result.gradient.all_finite()) {
    info.skipped = true;
    ++skipped_;
  } else {
    if (info.stats.max_w > kMadWeightCap && cfg_.algorithm == Algorithm::kMad) {
      throw std::logic_error("MAD weight exceeded its cap");
    }
    info.update = optimizer_.apply(params_, std::move(result.gradient));
  }
  if (step_ % static_cast<std::uint64_t>(cfg_.publish_period) == 0) {
    version_ = bus_.publish(params_, step_);
    published_step_ = step_;
    info.published = true;
  }
  info.version = version_;
  return info;
}

LearnerStepInfo Learner::step(const std::vector<Trajectory>& batch) {
  switch (cfg_.algorithm) {
    case Algorithm::kMad: return apply(mad_step(params_, batch, cfg_.mad, cfg_.dropout, rng_));
    case Algorithm::kPpo: return apply(ppo_step(params_, batch, cfg_.ppo, cfg_.dropout, rng_));
    case Algorithm::kReinforce: return apply(reinforce_step(params_, batch, baseline_, cfg_.dropout, rng_));
    case Algorithm::kMrt: break;
  }
  throw std::logic_error("mrt consumes candidate sets, not trajectories");
}

LearnerStepInfo Learner::step(const std::vector<CandidateSet>& sets) {
  if (cfg_.algorithm != Algorithm::kMrt) throw std::logic_error("only mrt consumes candidate sets");
  return apply(mrt_step(params_, sets, cfg_.mrt, cfg_.dropout, rng_));
}

bool Learner::publish_if_dirty() {
  if (published_step_ == step_) return false;
  version_ = bus_.publish(params_, step_);
  published_step_ = step_;
  return true;
}

}  // namespace madrl
