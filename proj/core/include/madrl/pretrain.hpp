#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "madrl/optimizer.hpp"
#include "madrl/policy.hpp"
#include "madrl/tasks.hpp"

namespace madrl {

struct PretrainConfig {
  int steps = 4000;
  int batch_size = 32;
  int eval_every = 200;
  std::size_t dev_limit = 0;  // 0 evaluates the full dev split
  int patience_evals = 0;  // stop after this many evals without improvement; 0 disables
  bool dropout = true;
  std::uint64_t seed = 1;
  OptimizerConfig optimizer{.learning_rate = 3e-3, .warmup_steps = 100};
  void validate() const;
};

struct PretrainEval {
  int step = 0;
  double train_nll = 0.0;  // mean per-token negative log-likelihood since the last eval
  double dev_bleu = 0.0;
  double wall_s = 0.0;
};

struct PretrainResult {
  PolicyParams best;
  int best_step = 0;
  double best_dev_bleu = 0.0;
  std::vector<PretrainEval> log;
};

// Teacher-forced cross-entropy training. Keeps the parameters with the
// highest greedy dev corpus BLEU; step 0 (the initial parameters) is
// evaluated too.
PretrainResult ce_pretrain(PolicyParams params, const ParallelCorpus& corpus, const PretrainConfig& cfg,
                           const std::function<void(const PretrainEval&)>& on_eval = {});

}  // namespace madrl
