#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "madrl/tokens.hpp"
#include "madrl/vocabulary.hpp"

namespace madrl {

enum class BleuSmoothing { kNone, kExp };

struct MetricConfig {
  int bleu_max_order = 4;
  BleuSmoothing smoothing = BleuSmoothing::kExp;
  double smooth_value = 0.0;
  int gleu_max_order = 4;
  int chrf_order = 6;
  double chrf_beta = 2.0;
  bool chrf_whitespace = false;
  bool ter_shifts = true;
  int ter_max_shifts = 10;
  int ter_max_shift_size = 10;

  void validate() const;
};

// All sentence metrics ignore a single trailing </s> on either side and
// throw std::invalid_argument on an empty reference. Scores are 0-100,
// except TER which is an edit rate (0 is perfect, unbounded above).

double sentence_bleu(std::span<const TokenId> hyp, std::span<const TokenId> ref, const MetricConfig& cfg = {});

// min(precision, recall) over n-grams pooled across orders 1..gleu_max_order.
double sentence_gleu(std::span<const TokenId> hyp, std::span<const TokenId> ref, const MetricConfig& cfg = {});

// Character n-gram F-beta. Precision and recall are averaged across the
// orders both strings can populate, then combined.
double sentence_chrf(std::string_view hyp, std::string_view ref, const MetricConfig& cfg = {});

double sentence_ter(std::span<const TokenId> hyp, std::span<const TokenId> ref, const MetricConfig& cfg = {});

// Word-level Levenshtein distance, unit costs.
int edit_distance(std::span<const TokenId> a, std::span<const TokenId> b);

// Multiset-overlap F1.
double token_f1(std::span<const TokenId> hyp, std::span<const TokenId> ref);

// Aggregated n-gram statistics, no smoothing, full order.
double corpus_bleu(const std::vector<TokenSeq>& hyps, const std::vector<TokenSeq>& refs,
                   const MetricConfig& cfg = {});

struct RewardComponent {
  std::string metric;  // bleu | gleu | chrf | ter | token_f1
  double weight = 1.0;
  bool operator==(const RewardComponent&) const = default;
};

// A weighted sum of sentence metrics. TER enters on the 0-100 scale and,
// when negate_ter is set, with a minus sign so that every component is a
// higher-is-better reward.
struct RewardSpec {
  std::vector<RewardComponent> components;
  bool negate_ter = true;

  static RewardSpec single(const std::string& metric);
  // bleu, gleu, chrf, token_f1 and -ter at weight 1/5 each.
  static RewardSpec all();
  // "bleu", "ter", "all", or "bleu:0.5,chrf:0.5".
  static RewardSpec parse(const std::string& text);
  std::string to_string() const;
  bool uses(const std::string& metric) const;
  void validate() const;
  bool operator==(const RewardSpec&) const = default;
};

// vocab is only consulted for surface strings when the reward includes chrf.
double composite_reward(std::span<const TokenId> hyp, std::span<const TokenId> ref, const RewardSpec& spec,
                        const Vocabulary& vocab, const MetricConfig& cfg = {});

// Bundles the pieces needed to score a hypothesis; cheap to copy.
class RewardFunction {
 public:
  RewardFunction(RewardSpec spec, const Vocabulary& vocab, MetricConfig cfg = {});
  double operator()(std::span<const TokenId> hyp, std::span<const TokenId> ref) const;
  const RewardSpec& spec() const { return spec_; }

 private:
  RewardSpec spec_;
  const Vocabulary* vocab_;
  MetricConfig cfg_;
};

}  // namespace madrl
