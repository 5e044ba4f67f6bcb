#include "madrl/runtime/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "madrl/evaluation.hpp"

namespace madrl {

bool RunState::record(const EvalPoint& point, std::uint64_t patience) {
  history.push_back(point);
  step = std::max(step, point.step);
  bool improved = false;
  if (!has_best || point.selection_score() > best_score) {
    has_best = true;
    best_score = point.selection_score();
    best_dev_bleu = point.dev_bleu;
    best_step = point.step;
    best_version = point.version;
    improved = true;
  }
  if (patience > 0 && point.step >= best_step + patience) stop = true;
  return improved;
}

Evaluator::Evaluator(std::vector<SentencePair> dev, EvaluatorConfig cfg) : dev_(std::move(dev)), cfg_(cfg) {
  if (dev_.empty()) throw std::invalid_argument("evaluator: empty dev set");
  if (cfg_.dev_limit > 0 && dev_.size() > cfg_.dev_limit) dev_.resize(cfg_.dev_limit);
  gap_set_.assign(dev_.begin(), dev_.begin() + static_cast<std::ptrdiff_t>(std::min(cfg_.gap_limit, dev_.size())));
  cfg_.gap_beam.validate();
}

double Evaluator::beam_gap(const PolicyParams& params) const {
  const auto refs = references(gap_set_);
  const double greedy = corpus_bleu(decode_greedy(params, gap_set_), refs);
  const double beam = corpus_bleu(decode_beam(params, gap_set_, cfg_.gap_beam), refs);
  return beam - greedy;
}

EvalPoint Evaluator::evaluate(const PolicyParams& params, std::uint64_t step, std::uint64_t version) {
  EvalPoint p;
  p.step = step;
  p.version = version;
  if (select_) {
    const auto hyps = decode_greedy(params, dev_);
    double sum = 0.0;
    for (std::size_t i = 0; i < hyps.size(); ++i) sum += (*select_)(hyps[i], dev_[i].target);
    p.dev_bleu = corpus_bleu(hyps, references(dev_));
    p.score = sum / static_cast<double>(hyps.size());
  } else {
    p.dev_bleu = greedy_corpus_bleu(params, dev_);
  }
  p.greedy_beam_gap = std::numeric_limits<double>::quiet_NaN();
  if (cfg_.gap_every > 0 && evaluations_ % cfg_.gap_every == 0) p.greedy_beam_gap = beam_gap(params);
  ++evaluations_;
  return p;
}

double max_drawdown(const std::vector<double>& curve) {
  double peak = -std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (double v : curve) {
    peak = std::max(peak, v);
    worst = std::max(worst, peak - v);
  }
  return worst;
}

}  // namespace madrl
