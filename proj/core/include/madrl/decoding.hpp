#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "madrl/autograd.hpp"
#include "madrl/tokens.hpp"

namespace madrl {

// A batch of partially decoded rows over an autoregressive next-token model.
class DecodeSession {
 public:
  virtual ~DecodeSession() = default;
  virtual int vocab_size() const = 0;
  virtual int rows() const = 0;
  // Feeds each row its previous token (<s> on the first call) and returns
  // rows x vocab next-token log-probabilities at temperature 1.
  virtual Matrix next_log_probs(std::span<const TokenId> prev_tokens) = 0;
  // New row i continues old row parents[i]. Rows may be duplicated or dropped.
  virtual void reorder(std::span<const int> parents) = 0;
};

struct BeamConfig {
  int beams = 5;
  std::optional<double> alpha = 1.0;  // length normalization exponent; nullopt scores raw log-prob
  int max_len = 64;
  void validate() const;
};

struct Hypothesis {
  TokenSeq tokens;  // ends with </s> when finished
  double log_prob = 0.0;
  bool finished = false;
};

struct SampledSequence {
  TokenSeq tokens;
  double log_prob = 0.0;  // at temperature 1, regardless of the sampling temperature
  bool truncated = false;  // hit max_len without </s>
};

// Row-wise argmax until </s> or max_len. Ties go to the lowest id.
std::vector<Hypothesis> greedy_search(DecodeSession& session, int max_len);

// Standard beam search for a single-row session. Finished hypotheses are
// ranked by log_prob / |y|^alpha (raw log_prob without alpha); |y| counts </s>.
Hypothesis beam_search(DecodeSession& session, const BeamConfig& cfg);

double beam_score(const Hypothesis& h, const std::optional<double>& alpha);

// Ancestral sampling, one row per temperature, from softmax(log_probs / T).
// The session must already hold temperatures.size() rows.
std::vector<SampledSequence> sample_search(DecodeSession& session, std::span<const double> temperatures,
                                           int max_len, std::mt19937_64& rng);

}  // namespace madrl
