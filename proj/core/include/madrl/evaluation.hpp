#pragma once

#include <vector>

#include "madrl/metrics.hpp"
#include "madrl/policy.hpp"
#include "madrl/tasks.hpp"

namespace madrl {

// Greedy decodes in fixed-size chunks; outputs have </s> stripped.
std::vector<TokenSeq> decode_greedy(const PolicyParams& params, const std::vector<SentencePair>& pairs,
                                    std::size_t chunk = 64);
std::vector<TokenSeq> decode_beam(const PolicyParams& params, const std::vector<SentencePair>& pairs,
                                  const BeamConfig& cfg);

std::vector<TokenSeq> references(const std::vector<SentencePair>& pairs);

double greedy_corpus_bleu(const PolicyParams& params, const std::vector<SentencePair>& pairs,
                          const MetricConfig& cfg = {});

// Mean of a sentence metric (bleu, gleu, chrf, ter, token_f1) over aligned
// hypotheses and references. TER is reported on the 0-100 scale.
double mean_sentence_metric(const std::string& metric, const std::vector<TokenSeq>& hyps,
                            const std::vector<TokenSeq>& refs, const Vocabulary& vocab,
                            const MetricConfig& cfg = {});

}  // namespace madrl
