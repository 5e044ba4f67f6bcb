#pragma once

// Model math shared by the recording (Tape) and immediate (Eager) backends.

#include <functional>
#include <random>
#include <vector>

#include "madrl/autograd.hpp"
#include "madrl/policy.hpp"

namespace madrl::detail {

struct EagerOps {
  using Value = Matrix;
  using Param = std::reference_wrapper<const Matrix>;

  static Matrix matmul(const Matrix& a, const Matrix& b) { return a * b; }
  static Matrix matmul_nt(const Matrix& a, const Matrix& b) { return a * b.transpose(); }
  static Matrix add(const Matrix& a, const Matrix& b) { return a + b; }
  static Matrix sub(const Matrix& a, const Matrix& b) { return a - b; }
  static Matrix mul(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b); }
  static Matrix add_bias(const Matrix& a, const Matrix& row) { return a.rowwise() + row.row(0); }
  static Matrix tanh(const Matrix& a) { return a.array().tanh().matrix(); }
  static Matrix sigmoid(const Matrix& a) { return autograd::eager::sigmoid(a); }
  static Matrix slice_cols(const Matrix& a, int start, int width) { return a.middleCols(start, width); }
  static Matrix concat_cols(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
  }
  static Matrix gather_rows(const Matrix& table, std::span<const TokenId> ids) {
    Matrix out(static_cast<Eigen::Index>(ids.size()), table.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] < 0 || ids[i] >= table.rows()) throw std::out_of_range("token id outside vocabulary");
      out.row(static_cast<Eigen::Index>(i)) = table.row(ids[i]);
    }
    return out;
  }
  static Matrix select_rows(const Matrix& a, const Matrix& other, const std::vector<char>& keep_a) {
    Matrix out = other;
    for (Eigen::Index b = 0; b < a.rows(); ++b) {
      if (keep_a[static_cast<std::size_t>(b)]) out.row(b) = a.row(b);
    }
    return out;
  }
  static Matrix attention(const Matrix& q, const std::vector<Matrix>& keys, const std::vector<Matrix>& values,
                          const std::vector<int>& lengths) {
    return autograd::eager::attention(q, keys, values, lengths);
  }
  static Matrix log_softmax_pick(const Matrix& logits, std::span<const TokenId> targets) {
    return autograd::eager::log_softmax_pick(logits, targets);
  }
  static Matrix zeros(Eigen::Index rows, Eigen::Index cols) { return Matrix::Zero(rows, cols); }
  Matrix dropout(Matrix x) { return x; }
};

struct TapeOps {
  using Value = autograd::Var;
  using Param = autograd::Var;

  autograd::Tape* tape;
  double dropout_rate = 0.0;
  std::mt19937_64* rng = nullptr;

  Value matmul(Value a, Value b) { return tape->matmul(a, b); }
  Value matmul_nt(Value a, Value b) { return tape->matmul_nt(a, b); }
  Value add(Value a, Value b) { return tape->add(a, b); }
  Value sub(Value a, Value b) { return tape->sub(a, b); }
  Value mul(Value a, Value b) { return tape->mul(a, b); }
  Value add_bias(Value a, Value row) { return tape->add_bias(a, row); }
  Value tanh(Value a) { return tape->tanh(a); }
  Value sigmoid(Value a) { return tape->sigmoid(a); }
  Value slice_cols(Value a, int start, int width) { return tape->slice_cols(a, start, width); }
  Value concat_cols(Value a, Value b) { return tape->concat_cols(a, b); }
  Value gather_rows(Value table, std::span<const TokenId> ids) { return tape->gather_rows(table, ids); }
  Value select_rows(Value a, Value other, const std::vector<char>& keep_a) {
    return tape->select_rows(a, other, keep_a);
  }
  Value attention(Value q, const std::vector<Value>& keys, const std::vector<Value>& values,
                  const std::vector<int>& lengths) {
    return tape->attention(q, keys, values, lengths);
  }
  Value log_softmax_pick(Value logits, std::span<const TokenId> targets) {
    return tape->log_softmax_pick(logits, targets);
  }
  Value zeros(Eigen::Index rows, Eigen::Index cols) { return tape->constant(Matrix::Zero(rows, cols)); }
  Value dropout(Value x) {
    if (dropout_rate <= 0.0 || rng == nullptr) return x;
    const Matrix& v = tape->value(x);
    std::bernoulli_distribution keep(1.0 - dropout_rate);
    const double scale = 1.0 / (1.0 - dropout_rate);
    Matrix mask(v.rows(), v.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*rng) ? scale : 0.0;
    return tape->scale_by(x, std::move(mask));
  }
};

template <class Ops>
struct Weights {
  using P = typename Ops::Param;
  std::vector<P> all;  // storage order
  int layers = 1;
  int hidden = 0;
  bool tied = true;

  const P& embed() const { return all[0]; }
  const P& enc_w(int l) const { return all[1 + 3 * l]; }
  const P& enc_u(int l) const { return all[2 + 3 * l]; }
  const P& enc_b(int l) const { return all[3 + 3 * l]; }
  const P& dec_w(int l) const { return all[1 + 3 * layers + 3 * l]; }
  const P& dec_u(int l) const { return all[2 + 3 * layers + 3 * l]; }
  const P& dec_b(int l) const { return all[3 + 3 * layers + 3 * l]; }
  const P& bridge_w(int l) const { return all[1 + 6 * layers + 2 * l]; }
  const P& bridge_b(int l) const { return all[2 + 6 * layers + 2 * l]; }
  const P& att_w() const { return all[1 + 8 * layers]; }
  const P& out_w() const { return all[2 + 8 * layers]; }
  const P& out_b() const { return all[3 + 8 * layers]; }
  const P& proj_b() const { return all[4 + 8 * layers]; }
  const P& proj_w() const { return all[5 + 8 * layers]; }
};

template <class Ops>
struct Encoded {
  using V = typename Ops::Value;
  std::vector<V> keys;
  std::vector<V> values;
  std::vector<V> final_states;  // one per layer
  std::vector<int> lengths;
};

template <class Ops, class V = typename Ops::Value, class P = typename Ops::Param>
V gru_cell(Ops& ops, const V& x, const V& h, const P& w, const P& u, const P& b, int hidden) {
  const V xw = ops.add_bias(ops.matmul(x, w), b);
  const V hu = ops.matmul(h, u);
  const V z = ops.sigmoid(ops.add(ops.slice_cols(xw, 0, hidden), ops.slice_cols(hu, 0, hidden)));
  const V r = ops.sigmoid(ops.add(ops.slice_cols(xw, hidden, hidden), ops.slice_cols(hu, hidden, hidden)));
  const V n = ops.tanh(
      ops.add(ops.slice_cols(xw, 2 * hidden, hidden), ops.mul(r, ops.slice_cols(hu, 2 * hidden, hidden))));
  // (1 - z) * n + z * h
  return ops.add(n, ops.mul(z, ops.sub(h, n)));
}

// sources are padded internally; every source must be non-empty.
template <class Ops>
Encoded<Ops> encode(Ops& ops, const Weights<Ops>& w, std::span<const TokenSeq> sources) {
  using V = typename Ops::Value;
  Encoded<Ops> enc;
  const auto rows = static_cast<Eigen::Index>(sources.size());
  int max_len = 0;
  for (const auto& s : sources) {
    if (s.empty()) throw std::invalid_argument("policy: empty source sequence");
    enc.lengths.push_back(static_cast<int>(s.size()));
    max_len = std::max(max_len, static_cast<int>(s.size()));
  }
  std::vector<V> h;
  for (int l = 0; l < w.layers; ++l) h.push_back(ops.zeros(rows, w.hidden));
  std::vector<TokenId> ids(sources.size());
  std::vector<char> keep(sources.size());
  for (int j = 0; j < max_len; ++j) {
    bool all_keep = true;
    for (std::size_t b = 0; b < sources.size(); ++b) {
      const bool valid = j < static_cast<int>(sources[b].size());
      ids[b] = valid ? sources[b][static_cast<std::size_t>(j)] : kPadId;
      keep[b] = valid ? 1 : 0;
      all_keep = all_keep && valid;
    }
    V x = ops.dropout(ops.gather_rows(w.embed(), ids));
    for (int l = 0; l < w.layers; ++l) {
      V hn = gru_cell(ops, x, h[static_cast<std::size_t>(l)], w.enc_w(l), w.enc_u(l), w.enc_b(l), w.hidden);
      h[static_cast<std::size_t>(l)] = all_keep ? hn : ops.select_rows(hn, h[static_cast<std::size_t>(l)], keep);
      x = h[static_cast<std::size_t>(l)];
    }
    enc.values.push_back(x);
    enc.keys.push_back(ops.matmul(x, w.att_w()));
  }
  enc.final_states = h;
  return enc;
}

template <class Ops>
std::vector<typename Ops::Value> initial_decoder_state(Ops& ops, const Weights<Ops>& w, const Encoded<Ops>& enc) {
  std::vector<typename Ops::Value> s;
  for (int l = 0; l < w.layers; ++l) {
    s.push_back(ops.tanh(
        ops.add_bias(ops.matmul(enc.final_states[static_cast<std::size_t>(l)], w.bridge_w(l)), w.bridge_b(l))));
  }
  return s;
}

// Advances every layer state by one token and returns next-token logits.
template <class Ops>
typename Ops::Value decoder_step(Ops& ops, const Weights<Ops>& w, const Encoded<Ops>& enc,
                                 std::vector<typename Ops::Value>& state, std::span<const TokenId> prev) {
  using V = typename Ops::Value;
  V x = ops.dropout(ops.gather_rows(w.embed(), prev));
  for (int l = 0; l < w.layers; ++l) {
    auto& s = state[static_cast<std::size_t>(l)];
    s = gru_cell(ops, x, s, w.dec_w(l), w.dec_u(l), w.dec_b(l), w.hidden);
    x = s;
  }
  const V context = ops.attention(x, enc.keys, enc.values, enc.lengths);
  const V o = ops.dropout(ops.tanh(ops.add_bias(ops.matmul(ops.concat_cols(x, context), w.out_w()), w.out_b())));
  if (w.tied) return ops.add_bias(ops.matmul_nt(o, w.embed()), w.proj_b());
  return ops.add_bias(ops.matmul(o, w.proj_w()), w.proj_b());
}

// Per-row teacher-forced log-likelihood (rows x 1).
template <class Ops>
typename Ops::Value score_targets(Ops& ops, const Weights<Ops>& w, std::span<const TokenSeq> sources,
                                  std::span<const TokenSeq> targets) {
  using V = typename Ops::Value;
  const Encoded<Ops> enc = encode(ops, w, sources);
  auto state = initial_decoder_state(ops, w, enc);
  std::size_t max_len = 0;
  for (const auto& t : targets) max_len = std::max(max_len, t.size());
  std::vector<TokenId> prev(targets.size(), kBosId), gold(targets.size());
  V total = ops.zeros(static_cast<Eigen::Index>(targets.size()), 1);
  for (std::size_t t = 0; t < max_len; ++t) {
    for (std::size_t b = 0; b < targets.size(); ++b) {
      gold[b] = t < targets[b].size() ? targets[b][t] : -1;
      if (t > 0) prev[b] = t - 1 < targets[b].size() ? targets[b][t - 1] : kPadId;
    }
    const V logits = decoder_step(ops, w, enc, state, prev);
    total = ops.add(total, ops.log_softmax_pick(logits, gold));
  }
  return total;
}

}  // namespace madrl::detail
