#include "madrl/shaping.hpp"

#include <cmath>
#include <stdexcept>

namespace madrl {

MomentStats population_moments(std::span<const double> values) {
  MomentStats m;
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - m.mean) * (v - m.mean);
  m.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return m;
}

std::optional<std::vector<double>> conditional_standardize(std::span<const double> rewards) {
  if (rewards.size() < 2) return std::nullopt;
  for (double r : rewards) {
    if (!std::isfinite(r)) throw std::invalid_argument("conditional_standardize: non-finite reward");
  }
  const auto m = population_moments(rewards);
  if (m.stddev < kDegenerateEpsilon) return std::nullopt;
  std::vector<double> out(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - m.mean) / m.stddev;
  return out;
}

std::vector<double> batch_zscore(std::span<const double> rewards) {
  std::vector<double> out(rewards.size(), 0.0);
  const auto m = population_moments(rewards);
  if (rewards.size() < 2 || m.stddev < kDegenerateEpsilon) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - m.mean) / m.stddev;
  return out;
}

BaselineUpdate baseline_update(const BaselineState& state, double reward) {
  if (!std::isfinite(reward)) throw std::invalid_argument("baseline_update: non-finite reward");
  BaselineUpdate up{state, reward - state.running_mean};
  up.state.running_mean = state.decay * state.running_mean + (1.0 - state.decay) * reward;
  ++up.state.count;
  return up;
}

}  // namespace madrl
