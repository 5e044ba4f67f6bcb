#pragma once

#include <random>
#include <vector>

#include "madrl/policy.hpp"
#include "madrl/sampler.hpp"
#include "madrl/shaping.hpp"

namespace madrl {

inline constexpr double kStalenessCap = 1e6;
inline constexpr double kMadWeightCap = 2.0;

// exp(p - q), capped at kStalenessCap.
double staleness_ratio(double p, double q);

// min(u * v, 2). Used as a constant multiplier; no gradient flows through it.
double mad_loss_weight(double u, double v);

struct ObjectiveStats {
  std::size_t count = 0;
  double objective = 0.0;
  double mean_reward = 0.0;
  double mean_rbar = 0.0;  // the normalized reward the loss actually used
  double mean_u = 0.0;
  double mean_v = 0.0;
  double mean_w = 0.0;
  double max_w = 0.0;
  double clip_frac = 0.0;
  std::size_t skipped = 0;  // sources dropped as degenerate (MRT)
};

struct StepResult {
  Gradient gradient;
  ObjectiveStats stats;
};

struct MadOptions {
  bool batch_norm = false;  // z-score raw rewards over the batch instead of using worker r_bar
  bool mad_weights = true;  // false uses min(u, 2)
};

struct PpoConfig {
  double epsilon = 0.2;
  void validate() const;
};

struct MrtConfig {
  int sample_count = 5;
  void validate() const;
};

// Ascent direction of mean_i SG(w_i) * r_i * log p(y_i | x_i).
StepResult mad_step(const PolicyParams& params, const std::vector<Trajectory>& batch, const MadOptions& opts,
                    bool dropout, std::mt19937_64& rng);

// Ascent direction of mean_i min(u_i r~_i, clip(u_i, 1-eps, 1+eps) r~_i) with
// r~ the batch z-scored raw rewards and u carrying the gradient.
StepResult ppo_step(const PolicyParams& params, const std::vector<Trajectory>& batch, const PpoConfig& cfg,
                    bool dropout, std::mt19937_64& rng);

// Ascent direction of the mean over sources of sum_i r_i p_i / sum_j p_j,
// with probabilities renormalized within each candidate set.
StepResult mrt_step(const PolicyParams& params, const std::vector<CandidateSet>& sets, const MrtConfig& cfg,
                    bool dropout, std::mt19937_64& rng);

// Ascent direction of mean_i (r_i - b_i) log p(y_i | x_i); the baseline
// advances once per example in batch order.
StepResult reinforce_step(const PolicyParams& params, const std::vector<Trajectory>& batch,
                          BaselineState& baseline, bool dropout, std::mt19937_64& rng);

}  // namespace madrl
