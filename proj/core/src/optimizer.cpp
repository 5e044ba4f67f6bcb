#include "madrl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace madrl {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (warmup_steps < 0) throw std::invalid_argument("warmup_steps must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("adam betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("adam epsilon must be > 0");
}

AdamAscent::AdamAscent(const PolicyParams& params, const OptimizerConfig& cfg)
    : cfg_(cfg), m_(Gradient::zeros_like(params)), v_(Gradient::zeros_like(params)) {
  cfg_.validate();
}

double AdamAscent::learning_rate_at(std::int64_t step) const {
  if (cfg_.warmup_steps == 0 || step >= cfg_.warmup_steps) return cfg_.learning_rate;
  return cfg_.learning_rate * static_cast<double>(std::max<std::int64_t>(step, 1)) / cfg_.warmup_steps;
}

UpdateInfo AdamAscent::apply(PolicyParams& params, Gradient grad) {
  if (grad.tensors.size() != params.tensors.size()) throw std::invalid_argument("gradient/parameter mismatch");
  UpdateInfo info;
  info.grad_norm = grad.global_norm();
  if (cfg_.clip_norm > 0.0 && info.grad_norm > cfg_.clip_norm) {
    grad.scale(cfg_.clip_norm / info.grad_norm);
    info.clipped = true;
  }
  ++t_;
  info.learning_rate = learning_rate_at(t_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    auto& m = m_.tensors[i];
    auto& v = v_.tensors[i];
    const auto& g = grad.tensors[i];
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    params.tensors[i].value.array() +=
        info.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.epsilon);
  }
  return info;
}

}  // namespace madrl
