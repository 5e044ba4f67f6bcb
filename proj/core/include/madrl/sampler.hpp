#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "madrl/metrics.hpp"
#include "madrl/policy.hpp"

namespace madrl {

inline constexpr double kMadEpsilon = 1e-8;
// Floor on MAD factors so that v stays in (0, 1].
inline constexpr double kMinMadFactor = std::numeric_limits<double>::min();

class TemperatureGrid {
 public:
  // Evenly spaced values with exact endpoints t_min and t_max.
  TemperatureGrid(double t_min, double t_max, int n);
  // A grid of n copies of one temperature (single-temperature baselines).
  static TemperatureGrid constant(double t, int n);

  const std::vector<double>& values() const { return values_; }
  double t_min() const { return values_.front(); }
  double t_max() const { return values_.back(); }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  TemperatureGrid() = default;
  std::vector<double> values_;
};

struct CandidateSet {
  TokenSeq source;
  TokenSeq reference;
  std::vector<TokenSeq> candidates;  // distinct; terminated ones end with </s>
  std::vector<double> q;  // log p(candidate | source) at temperature 1 under the sampling policy
  std::vector<double> rewards;
  std::vector<char> truncated;
  int samples_drawn = 0;
  std::uint64_t version = 0;  // checkpoint version of the sampling policy
};

struct Trajectory {
  TokenSeq source;
  TokenSeq target;
  double q = 0.0;
  double r_bar = 0.0;  // conditionally standardized reward, or the raw reward when not normalized
  double v = 1.0;
  double reward = 0.0;  // raw reward
  std::uint64_t version = 0;
  std::uint64_t id = 0;  // assigned by the producer; unique per run
};

// Samples one sequence per grid temperature (batched, dropout off), removes
// duplicates keeping first occurrences, and scores each survivor.
CandidateSet generate_candidates(const PolicyParams& params, const TokenSeq& source, const TokenSeq& reference,
                                 const TemperatureGrid& grid, const RewardFunction& reward, std::mt19937_64& rng,
                                 std::uint64_t version = 0);

// Median; even lengths average the two middle order statistics.
double median(std::vector<double> values);

// v_i = exp(-|q_i - median(q)| / MAD(q)); all ones when MAD < kMadEpsilon.
std::vector<double> mad_factors(std::span<const double> q);

struct TrajectoryOptions {
  bool conditional_norm = true;  // false keeps raw rewards for learner-side batch z-scoring
  bool mad_weights = true;  // false fixes v = 1
};

// Empty when conditional normalization is on and the set is degenerate.
std::vector<Trajectory> build_trajectories(const CandidateSet& cs, const TrajectoryOptions& opts = {});

}  // namespace madrl
