#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "madrl/decoding.hpp"
#include "madrl/metrics.hpp"
#include "madrl/policy.hpp"
#include "madrl/tasks.hpp"

namespace madrl {

struct EvaluatorConfig {
  std::size_t dev_limit = 0;  // 0 uses the full dev split
  int gap_every = 0;  // measure the greedy-beam gap every k-th evaluation; 0 never
  std::size_t gap_limit = 100;  // sentences used for the gap measurement
  BeamConfig gap_beam{.beams = 5, .alpha = 1.0};
  std::uint64_t patience = 0;  // learner steps without improvement before stopping; 0 disables
};

struct EvalPoint {
  std::uint64_t step = 0;
  std::uint64_t version = 0;
  double dev_bleu = 0.0;
  double greedy_beam_gap = 0.0;  // NaN when not measured
  // Checkpoint selection score, higher is better; dev_bleu when unset.
  std::optional<double> score = std::nullopt;

  double selection_score() const { return score.value_or(dev_bleu); }
};

// Tracks best-dev selection and early stopping.
struct RunState {
  std::uint64_t step = 0;
  double best_dev_bleu = 0.0;  // dev BLEU at the selected checkpoint
  double best_score = 0.0;
  std::uint64_t best_step = 0;
  std::uint64_t best_version = 0;
  bool has_best = false;
  bool stop = false;
  std::vector<EvalPoint> history;

  // Records a point; returns true when it is a new best.
  bool record(const EvalPoint& point, std::uint64_t patience);
};

class Evaluator {
 public:
  Evaluator(std::vector<SentencePair> dev, EvaluatorConfig cfg);

  // Selects checkpoints on the mean dev reward instead of corpus BLEU.
  void select_on(RewardFunction reward) { select_.emplace(std::move(reward)); }

  EvalPoint evaluate(const PolicyParams& params, std::uint64_t step, std::uint64_t version);
  double beam_gap(const PolicyParams& params) const;
  const EvaluatorConfig& config() const { return cfg_; }

 private:
  std::vector<SentencePair> dev_;
  std::vector<SentencePair> gap_set_;
  EvaluatorConfig cfg_;
  std::optional<RewardFunction> select_;
  int evaluations_ = 0;
};

// Largest drop from a running peak along a curve.
double max_drawdown(const std::vector<double>& curve);

}  // namespace madrl
