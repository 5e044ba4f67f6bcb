#pragma once

#include <optional>
#include <span>
#include <vector>

namespace madrl {

inline constexpr double kDegenerateEpsilon = 1e-8;

struct MomentStats {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide-by-n)
};

MomentStats population_moments(std::span<const double> values);

// Per-source standardization (r - mean) / stddev with the population stddev.
// Returns nullopt when there is no learning signal: fewer than two rewards or
// stddev below kDegenerateEpsilon. Callers drop the source for the round.
std::optional<std::vector<double>> conditional_standardize(std::span<const double> rewards);

// Batch-level z-score over a mixed-source batch. A zero-variance batch maps to zeros.
std::vector<double> batch_zscore(std::span<const double> rewards);

// Exponential moving-average reward baseline.
struct BaselineState {
  double running_mean = 0.0;
  double decay = 0.99;
  long count = 0;
};

struct BaselineUpdate {
  BaselineState state;
  double advantage;  // reward minus the pre-update mean
};

BaselineUpdate baseline_update(const BaselineState& state, double reward);

}  // namespace madrl
