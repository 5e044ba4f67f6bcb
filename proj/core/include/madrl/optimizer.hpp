#pragma once

#include <cstdint>

#include "madrl/policy.hpp"

namespace madrl {

struct OptimizerConfig {
  double learning_rate = 1e-5;
  int warmup_steps = 1000;  // linear ramp from lr/warmup to lr, then constant
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 1.0;  // global-norm clipping; <= 0 disables
  void validate() const;
};

struct UpdateInfo {
  double grad_norm = 0.0;  // before clipping
  double learning_rate = 0.0;
  bool clipped = false;
};

// Adam performing gradient *ascent*: parameters move along the gradient.
class AdamAscent {
 public:
  AdamAscent(const PolicyParams& params, const OptimizerConfig& cfg);

  double learning_rate_at(std::int64_t step) const;  // step counts from 1
  UpdateInfo apply(PolicyParams& params, Gradient grad);
  std::int64_t steps() const { return t_; }

 private:
  OptimizerConfig cfg_;
  Gradient m_;
  Gradient v_;
  std::int64_t t_ = 0;
};

}  // namespace madrl
