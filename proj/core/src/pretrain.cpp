#include "madrl/pretrain.hpp"

#include <chrono>
#include <random>
#include <stdexcept>

#include "madrl/evaluation.hpp"

namespace madrl {

void PretrainConfig::validate() const {
  if (steps < 0) throw std::invalid_argument("pretrain steps must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("pretrain batch_size must be >= 1");
  if (eval_every < 1) throw std::invalid_argument("pretrain eval_every must be >= 1");
  if (patience_evals < 0) throw std::invalid_argument("pretrain patience_evals must be >= 0");
  optimizer.validate();
}

PretrainResult ce_pretrain(PolicyParams params, const ParallelCorpus& corpus, const PretrainConfig& cfg,
                           const std::function<void(const PretrainEval&)>& on_eval) {
  cfg.validate();
  if (corpus.train.empty()) throw std::invalid_argument("ce_pretrain: empty training split");
  if (corpus.dev.empty()) throw std::invalid_argument("ce_pretrain: empty dev split");
  std::vector<SentencePair> dev = corpus.dev;
  if (cfg.dev_limit > 0 && dev.size() > cfg.dev_limit) dev.resize(cfg.dev_limit);

  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(cfg.seed);
  AdamAscent opt(params, cfg.optimizer);
  PretrainResult result;

  double nll_sum = 0.0;
  double token_sum = 0.0;
  int since_best = 0;
  auto evaluate = [&](int step) {
    PretrainEval e;
    e.step = step;
    e.train_nll = token_sum > 0 ? nll_sum / token_sum : 0.0;
    e.dev_bleu = greedy_corpus_bleu(params, dev);
    e.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nll_sum = token_sum = 0.0;
    result.log.push_back(e);
    if (result.log.size() == 1 || e.dev_bleu > result.best_dev_bleu) {
      result.best = params;
      result.best_step = step;
      result.best_dev_bleu = e.dev_bleu;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (on_eval) on_eval(e);
  };

  evaluate(0);
  std::vector<TokenSeq> targets(static_cast<std::size_t>(cfg.batch_size));
  std::vector<WeightedExample> batch(static_cast<std::size_t>(cfg.batch_size));
  for (int step = 1; step <= cfg.steps; ++step) {
    double tokens = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& pair = sample_training_pair(corpus, rng);
      targets[i] = pair.target;
      targets[i].push_back(kEosId);
      batch[i] = {&pair.source, &targets[i], 1.0};
      tokens += static_cast<double>(targets[i].size());
    }
    auto g = weighted_nll_grad(params, batch, tokens, cfg.dropout, rng);
    nll_sum -= g.objective * tokens;
    token_sum += tokens;
    if (g.gradient.all_finite()) opt.apply(params, std::move(g.gradient));
    if (step % cfg.eval_every == 0 || step == cfg.steps) {
      evaluate(step);
      if (cfg.patience_evals > 0 && since_best >= cfg.patience_evals) break;
    }
  }
  return result;
}

}  // namespace madrl
