#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "madrl/autograd.hpp"
#include "madrl/decoding.hpp"
#include "madrl/tokens.hpp"

namespace madrl {

// GRU encoder-decoder with single-head dot-product attention. Token
// embeddings are shared by encoder, decoder, and (when tied) the softmax.
struct PolicyConfig {
  int vocab_size = 54;
  int hidden_size = 64;
  int layers = 1;
  double dropout = 0.1;
  bool tied_softmax = true;
  double init_scale = 0.1;
  // Sampling and greedy decoding stop after ratio * |source| + offset tokens.
  int max_len_ratio = 2;
  int max_len_offset = 8;

  int max_decode_length(std::size_t source_length) const {
    return max_len_ratio * static_cast<int>(source_length) + max_len_offset;
  }
  void validate() const;
  bool operator==(const PolicyConfig&) const = default;
};

struct NamedTensor {
  std::string name;
  Matrix value;
};

struct PolicyParams {
  PolicyConfig config;
  std::vector<NamedTensor> tensors;  // fixed layout, see tensor_layout()

  // Uniform(-init_scale, init_scale) initialization.
  static PolicyParams initialize(const PolicyConfig& config, std::uint64_t seed);

  std::size_t parameter_count() const;
  const Matrix& tensor(const std::string& name) const;
  Matrix& tensor(const std::string& name);
  bool all_finite() const;
};

// Names and shapes of the tensors a config produces, in storage order.
std::vector<std::pair<std::string, std::pair<int, int>>> tensor_layout(const PolicyConfig& config);

// Parameter-shaped buffer; used for gradients and optimizer moments.
struct Gradient {
  std::vector<Matrix> tensors;

  static Gradient zeros_like(const PolicyParams& params);
  double global_norm() const;
  bool all_finite() const;
  void scale(double factor);
  void add_scaled(const Gradient& other, double factor);
  double max_abs_diff(const Gradient& other) const;
};

struct WeightedExample {
  const TokenSeq* source = nullptr;
  const TokenSeq* target = nullptr;  // scored as given; include </s> when terminated
  double weight = 1.0;
};

struct GradientResult {
  Gradient gradient;
  std::vector<double> log_probs;  // per example, from the same (possibly dropout) pass
  double objective = 0.0;  // (1/normalizer) * sum weight * log_prob
};

// Sum of per-step log-softmax values of target given source, dropout off.
// Tokens outside the vocabulary raise std::out_of_range.
double sequence_log_prob(const PolicyParams& params, const TokenSeq& source, const TokenSeq& target);

// As sequence_log_prob, but target must end with </s>.
double log_prob(const PolicyParams& params, const TokenSeq& source, const TokenSeq& target);

// Batched sequence_log_prob.
std::vector<double> batch_log_prob(const PolicyParams& params, std::span<const WeightedExample> examples);

// Gradient of (1/normalizer) * sum_i weight_i * log p(target_i | source_i).
// Weights are constants. Dropout at config.dropout is applied when requested.
GradientResult weighted_nll_grad(const PolicyParams& params, std::span<const WeightedExample> examples,
                                 double normalizer, bool dropout, std::mt19937_64& rng);

// Decoding session over one or more sources; one initial row per source.
std::unique_ptr<DecodeSession> open_session(const PolicyParams& params, std::span<const TokenSeq> sources);

TokenSeq sample(const PolicyParams& params, const TokenSeq& source, double temperature, std::mt19937_64& rng);

// One sample per temperature for a single source, batched.
std::vector<SampledSequence> sample_temperatures(const PolicyParams& params, const TokenSeq& source,
                                                 std::span<const double> temperatures, std::mt19937_64& rng);

// max_len <= 0 selects config.max_decode_length(|source|).
TokenSeq greedy_decode(const PolicyParams& params, const TokenSeq& source, int max_len = 0);
std::vector<TokenSeq> greedy_decode_batch(const PolicyParams& params, std::span<const TokenSeq> sources,
                                          int max_len = 0);

TokenSeq beam_decode(const PolicyParams& params, const TokenSeq& source, const BeamConfig& cfg);

}  // namespace madrl
