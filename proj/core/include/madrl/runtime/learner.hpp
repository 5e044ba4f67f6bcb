#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "madrl/objectives.hpp"
#include "madrl/optimizer.hpp"
#include "madrl/runtime/checkpoint_bus.hpp"

namespace madrl {

enum class Algorithm { kMad, kPpo, kMrt, kReinforce };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm algo);
bool is_on_policy(Algorithm algo);

struct LearnerConfig {
  Algorithm algorithm = Algorithm::kMad;
  MadOptions mad;
  PpoConfig ppo;
  MrtConfig mrt;
  OptimizerConfig optimizer;
  bool dropout = true;
  int publish_period = 20;
  std::uint64_t seed = 0;
  void validate() const;
};

struct LearnerStepInfo {
  ObjectiveStats stats;
  UpdateInfo update;
  bool skipped = false;  // non-finite gradient, parameters untouched
  bool published = false;
  std::uint64_t version = 0;  // bus version after this step
  std::uint64_t step = 0;
};

// Owns the mutable policy. Publishes the initial parameters as version 0 and
// then every publish_period steps.
class Learner {
 public:
  Learner(PolicyParams initial, CheckpointBus& bus, LearnerConfig cfg);

  LearnerStepInfo step(const std::vector<Trajectory>& batch);  // mad, ppo, reinforce
  LearnerStepInfo step(const std::vector<CandidateSet>& sets);  // mrt
  // Publishes the current parameters unless the latest publish already holds them.
  bool publish_if_dirty();

  const PolicyParams& params() const { return params_; }
  std::uint64_t steps() const { return step_; }
  std::uint64_t skipped_steps() const { return skipped_; }
  std::uint64_t version() const { return version_; }
  const BaselineState& baseline() const { return baseline_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  LearnerStepInfo apply(StepResult result);

  PolicyParams params_;
  CheckpointBus& bus_;
  LearnerConfig cfg_;
  AdamAscent optimizer_;
  BaselineState baseline_;
  std::mt19937_64 rng_;
  std::uint64_t step_ = 0;
  std::uint64_t skipped_ = 0;
  std::uint64_t version_ = 0;
  std::uint64_t published_step_ = 0;
};

}  // namespace madrl
