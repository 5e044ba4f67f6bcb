#include "madrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "network.hpp"

namespace madrl {
namespace {

using detail::EagerOps;
using detail::Encoded;
using detail::TapeOps;
using detail::Weights;

Weights<EagerOps> eager_weights(const PolicyParams& params) {
  Weights<EagerOps> w;
  w.layers = params.config.layers;
  w.hidden = params.config.hidden_size;
  w.tied = params.config.tied_softmax;
  w.all.reserve(params.tensors.size());
  for (const auto& t : params.tensors) w.all.emplace_back(std::cref(t.value));
  return w;
}

Weights<TapeOps> tape_weights(autograd::Tape& tape, const PolicyParams& params, Gradient& grad) {
  Weights<TapeOps> w;
  w.layers = params.config.layers;
  w.hidden = params.config.hidden_size;
  w.tied = params.config.tied_softmax;
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    w.all.push_back(tape.parameter(params.tensors[i].value, &grad.tensors[i]));
  }
  return w;
}

void check_tokens(const PolicyParams& params, const TokenSeq& seq, const char* what) {
  for (TokenId t : seq) {
    if (t < 0 || t >= params.config.vocab_size) {
      throw std::out_of_range(std::string(what) + ": token id " + std::to_string(t) + " outside vocabulary of size " +
                              std::to_string(params.config.vocab_size));
    }
  }
}

class PolicySession final : public DecodeSession {
 public:
  PolicySession(const PolicyParams& params, std::span<const TokenSeq> sources)
      : params_(params), weights_(eager_weights(params)) {
    for (const auto& s : sources) check_tokens(params, s, "open_session");
    EagerOps ops;
    enc_ = detail::encode(ops, weights_, sources);
    state_ = detail::initial_decoder_state(ops, weights_, enc_);
    rows_ = static_cast<int>(sources.size());
  }

  int vocab_size() const override { return params_.config.vocab_size; }
  int rows() const override { return rows_; }

  Matrix next_log_probs(std::span<const TokenId> prev_tokens) override {
    if (static_cast<int>(prev_tokens.size()) != rows_) throw std::invalid_argument("session: one token per row");
    EagerOps ops;
    const Matrix logits = detail::decoder_step(ops, weights_, enc_, state_, prev_tokens);
    return autograd::eager::log_softmax_rows(logits);
  }

  void reorder(std::span<const int> parents) override {
    auto pick = [&](const Matrix& m) {
      Matrix out(static_cast<Eigen::Index>(parents.size()), m.cols());
      for (std::size_t i = 0; i < parents.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(parents[i]);
      return out;
    };
    for (auto& k : enc_.keys) k = pick(k);
    for (auto& v : enc_.values) v = pick(v);
    for (auto& s : state_) s = pick(s);
    std::vector<int> lengths;
    lengths.reserve(parents.size());
    for (int p : parents) lengths.push_back(enc_.lengths[static_cast<std::size_t>(p)]);
    enc_.lengths = std::move(lengths);
    rows_ = static_cast<int>(parents.size());
  }

 private:
  const PolicyParams& params_;
  Weights<EagerOps> weights_;
  Encoded<EagerOps> enc_;
  std::vector<Matrix> state_;
  int rows_ = 0;
};

}  // namespace

void PolicyConfig::validate() const {
  if (vocab_size <= kNumReserved) throw std::invalid_argument("policy vocab_size must exceed the reserved ids");
  if (hidden_size < 1) throw std::invalid_argument("policy hidden_size must be >= 1");
  if (layers < 1) throw std::invalid_argument("policy layers must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("policy dropout must be in [0, 1)");
  if (!(init_scale > 0.0)) throw std::invalid_argument("policy init_scale must be > 0");
  if (max_len_ratio < 0 || max_len_offset < 1) throw std::invalid_argument("policy decode limits invalid");
}

std::vector<std::pair<std::string, std::pair<int, int>>> tensor_layout(const PolicyConfig& c) {
  const int h = c.hidden_size;
  std::vector<std::pair<std::string, std::pair<int, int>>> out;
  out.push_back({"embed", {c.vocab_size, h}});
  for (int l = 0; l < c.layers; ++l) {
    const auto p = "enc." + std::to_string(l) + ".";
    out.push_back({p + "w", {h, 3 * h}});
    out.push_back({p + "u", {h, 3 * h}});
    out.push_back({p + "b", {1, 3 * h}});
  }
  for (int l = 0; l < c.layers; ++l) {
    const auto p = "dec." + std::to_string(l) + ".";
    out.push_back({p + "w", {h, 3 * h}});
    out.push_back({p + "u", {h, 3 * h}});
    out.push_back({p + "b", {1, 3 * h}});
  }
  for (int l = 0; l < c.layers; ++l) {
    const auto p = "bridge." + std::to_string(l) + ".";
    out.push_back({p + "w", {h, h}});
    out.push_back({p + "b", {1, h}});
  }
  out.push_back({"att.w", {h, h}});
  out.push_back({"out.w", {2 * h, h}});
  out.push_back({"out.b", {1, h}});
  out.push_back({"proj.b", {1, c.vocab_size}});
  if (!c.tied_softmax) out.push_back({"proj.w", {h, c.vocab_size}});
  return out;
}

PolicyParams PolicyParams::initialize(const PolicyConfig& config, std::uint64_t seed) {
  config.validate();
  PolicyParams p;
  p.config = config;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-config.init_scale, config.init_scale);
  for (const auto& [name, shape] : tensor_layout(config)) {
    Matrix m(shape.first, shape.second);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    p.tensors.push_back({name, std::move(m)});
  }
  return p;
}

std::size_t PolicyParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += static_cast<std::size_t>(t.value.size());
  return n;
}

const Matrix& PolicyParams::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.value;
  }
  throw std::out_of_range("no tensor named '" + name + "'");
}

Matrix& PolicyParams::tensor(const std::string& name) {
  return const_cast<Matrix&>(static_cast<const PolicyParams&>(*this).tensor(name));
}

bool PolicyParams::all_finite() const {
  return std::all_of(tensors.begin(), tensors.end(), [](const auto& t) { return t.value.allFinite(); });
}

Gradient Gradient::zeros_like(const PolicyParams& params) {
  Gradient g;
  g.tensors.reserve(params.tensors.size());
  for (const auto& t : params.tensors) g.tensors.push_back(Matrix::Zero(t.value.rows(), t.value.cols()));
  return g;
}

double Gradient::global_norm() const {
  double sq = 0.0;
  for (const auto& t : tensors) sq += t.squaredNorm();
  return std::sqrt(sq);
}

bool Gradient::all_finite() const {
  return std::all_of(tensors.begin(), tensors.end(), [](const Matrix& m) { return m.allFinite(); });
}

void Gradient::scale(double factor) {
  for (auto& t : tensors) t *= factor;
}

void Gradient::add_scaled(const Gradient& other, double factor) {
  for (std::size_t i = 0; i < tensors.size(); ++i) tensors[i] += factor * other.tensors[i];
}

double Gradient::max_abs_diff(const Gradient& other) const {
  double m = 0.0;
  for (std::size_t i = 0; i < tensors.size(); ++i) m = std::max(m, (tensors[i] - other.tensors[i]).cwiseAbs().maxCoeff());
  return m;
}

double sequence_log_prob(const PolicyParams& params, const TokenSeq& source, const TokenSeq& target) {
  const WeightedExample ex{&source, &target, 1.0};
  return batch_log_prob(params, std::span<const WeightedExample>(&ex, 1)).front();
}

double log_prob(const PolicyParams& params, const TokenSeq& source, const TokenSeq& target) {
  if (target.empty() || target.back() != kEosId) throw std::invalid_argument("log_prob: target must end with </s>");
  return sequence_log_prob(params, source, target);
}

std::vector<double> batch_log_prob(const PolicyParams& params, std::span<const WeightedExample> examples) {
  std::vector<TokenSeq> sources, targets;
  sources.reserve(examples.size());
  targets.reserve(examples.size());
  for (const auto& ex : examples) {
    check_tokens(params, *ex.source, "log_prob source");
    check_tokens(params, *ex.target, "log_prob target");
    sources.push_back(*ex.source);
    targets.push_back(*ex.target);
  }
  if (examples.empty()) return {};
  EagerOps ops;
  const auto w = eager_weights(params);
  const Matrix total = detail::score_targets(ops, w, std::span<const TokenSeq>(sources), targets);
  return std::vector<double>(total.data(), total.data() + total.size());
}

GradientResult weighted_nll_grad(const PolicyParams& params, std::span<const WeightedExample> examples,
                                 double normalizer, bool dropout, std::mt19937_64& rng) {
  if (!(normalizer > 0.0)) throw std::invalid_argument("weighted_nll_grad: normalizer must be > 0");
  GradientResult result;
  result.gradient = Gradient::zeros_like(params);
  if (examples.empty()) return result;
  std::vector<TokenSeq> sources, targets;
  std::vector<double> weights;
  for (const auto& ex : examples) {
    check_tokens(params, *ex.source, "weighted_nll_grad source");
    check_tokens(params, *ex.target, "weighted_nll_grad target");
    if (!std::isfinite(ex.weight)) throw std::invalid_argument("weighted_nll_grad: non-finite weight");
    sources.push_back(*ex.source);
    targets.push_back(*ex.target);
    weights.push_back(ex.weight / normalizer);
  }
  autograd::Tape tape;
  TapeOps ops{&tape, dropout ? params.config.dropout : 0.0, &rng};
  const auto w = tape_weights(tape, params, result.gradient);
  const auto per_row = detail::score_targets(ops, w, std::span<const TokenSeq>(sources), targets);
  const auto objective = tape.weighted_sum(per_row, weights);
  const Matrix& rows = tape.value(per_row);
  result.log_probs.assign(rows.data(), rows.data() + rows.size());
  result.objective = tape.value(objective)(0, 0);
  tape.backward(objective);
  return result;
}

std::unique_ptr<DecodeSession> open_session(const PolicyParams& params, std::span<const TokenSeq> sources) {
  return std::make_unique<PolicySession>(params, sources);
}

std::vector<SampledSequence> sample_temperatures(const PolicyParams& params, const TokenSeq& source,
                                                 std::span<const double> temperatures, std::mt19937_64& rng) {
  auto session = open_session(params, std::span<const TokenSeq>(&source, 1));
  std::vector<int> parents(temperatures.size(), 0);
  session->reorder(parents);
  return sample_search(*session, temperatures, params.config.max_decode_length(source.size()), rng);
}

TokenSeq sample(const PolicyParams& params, const TokenSeq& source, double temperature, std::mt19937_64& rng) {
  return sample_temperatures(params, source, std::span<const double>(&temperature, 1), rng).front().tokens;
}

TokenSeq greedy_decode(const PolicyParams& params, const TokenSeq& source, int max_len) {
  return greedy_decode_batch(params, std::span<const TokenSeq>(&source, 1), max_len).front();
}

std::vector<TokenSeq> greedy_decode_batch(const PolicyParams& params, std::span<const TokenSeq> sources,
                                          int max_len) {
  if (sources.empty()) return {};
  std::vector<int> limits;
  int longest = 0;
  for (const auto& s : sources) {
    limits.push_back(max_len > 0 ? max_len : params.config.max_decode_length(s.size()));
    longest = std::max(longest, limits.back());
  }
  auto session = open_session(params, sources);
  auto hyps = greedy_search(*session, longest);
  std::vector<TokenSeq> out;
  out.reserve(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    auto& toks = hyps[i].tokens;
    if (static_cast<int>(toks.size()) > limits[i]) toks.resize(static_cast<std::size_t>(limits[i]));
    out.push_back(std::move(toks));
  }
  return out;
}

TokenSeq beam_decode(const PolicyParams& params, const TokenSeq& source, const BeamConfig& cfg) {
  auto session = open_session(params, std::span<const TokenSeq>(&source, 1));
  return beam_search(*session, cfg).tokens;
}

}  // namespace madrl
