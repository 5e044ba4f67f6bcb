#include "madrl/evaluation.hpp"

#include <algorithm>
#include <stdexcept>

namespace madrl {

std::vector<TokenSeq> decode_greedy(const PolicyParams& params, const std::vector<SentencePair>& pairs,
                                    std::size_t chunk) {
  std::vector<TokenSeq> out;
  out.reserve(pairs.size());
  std::vector<TokenSeq> sources;
  for (std::size_t start = 0; start < pairs.size(); start += chunk) {
    const std::size_t end = std::min(pairs.size(), start + chunk);
    sources.clear();
    for (std::size_t i = start; i < end; ++i) sources.push_back(pairs[i].source);
    for (auto& h : greedy_decode_batch(params, sources)) {
      const auto body = strip_eos(h);
      out.emplace_back(body.begin(), body.end());
    }
  }
  return out;
}

std::vector<TokenSeq> decode_beam(const PolicyParams& params, const std::vector<SentencePair>& pairs,
                                  const BeamConfig& cfg) {
  std::vector<TokenSeq> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    BeamConfig c = cfg;
    c.max_len = params.config.max_decode_length(p.source.size());
    const auto h = beam_decode(params, p.source, c);
    const auto body = strip_eos(h);
    out.emplace_back(body.begin(), body.end());
  }
  return out;
}

std::vector<TokenSeq> references(const std::vector<SentencePair>& pairs) {
  std::vector<TokenSeq> refs;
  refs.reserve(pairs.size());
  for (const auto& p : pairs) refs.push_back(p.target);
  return refs;
}

double greedy_corpus_bleu(const PolicyParams& params, const std::vector<SentencePair>& pairs,
                          const MetricConfig& cfg) {
  if (pairs.empty()) throw std::invalid_argument("greedy_corpus_bleu: empty set");
  return corpus_bleu(decode_greedy(params, pairs), references(pairs), cfg);
}

double mean_sentence_metric(const std::string& metric, const std::vector<TokenSeq>& hyps,
                            const std::vector<TokenSeq>& refs, const Vocabulary& vocab, const MetricConfig& cfg) {
  if (hyps.size() != refs.size() || hyps.empty()) throw std::invalid_argument("mean_sentence_metric: bad sizes");
  RewardSpec spec = RewardSpec::single(metric);
  spec.negate_ter = false;
  double sum = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) sum += composite_reward(hyps[i], refs[i], spec, vocab, cfg);
  return sum / static_cast<double>(hyps.size());
}

}  // namespace madrl
