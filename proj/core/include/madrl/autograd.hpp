#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <vector>

#include "madrl/tokens.hpp"

namespace madrl {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace autograd {

// Handle to a node on a Tape. Only meaningful for the tape that created it.
struct Var {
  int id = -1;
};

// Single-use reverse-mode tape over dense row-major matrices. Records a
// forward pass, then backward() propagates d(output)/d(node) to every
// parameter leaf and adds it into the caller-owned gradient buffer.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // The tape keeps a pointer to value; it must outlive the tape. grad_sink
  // must be shaped like value.
  Var parameter(const Matrix& value, Matrix* grad_sink);

  const Matrix& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);  // a * b^T
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var add_bias(Var a, Var row);  // broadcasts a 1xN row over a
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var scale_by(Var a, Matrix mask);  // elementwise product with a constant
  Var gather_rows(Var table, std::span<const TokenId> ids);
  Var concat_cols(Var a, Var b);
  Var slice_cols(Var a, int start, int width);
  // Row b of the result is a[b] when keep_a[b], else other[b].
  Var select_rows(Var a, Var other, std::vector<char> keep_a);
  // Dot-product attention with a per-row valid prefix of positions.
  // query: BxH; keys/values: one BxH node per position.
  Var attention(Var query, std::span<const Var> keys, std::span<const Var> values, std::span<const int> lengths);
  // Bx1: log_softmax(logits[b])[targets[b]], or 0 where targets[b] < 0.
  Var log_softmax_pick(Var logits, std::span<const TokenId> targets);
  // 1x1: sum_b weights[b] * a[b, 0].
  Var weighted_sum(Var a, std::span<const double> weights);

  // Seeds d(output)/d(output) = 1 for a 1x1 node and runs the reverse sweep.
  void backward(Var output);

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    Matrix* grad_sink = nullptr;
    std::function<void(Tape&, int)> backward;
  };

  Var push(Matrix value, std::function<void(Tape&, int)> backward);
  template <class Expr>
  void accumulate(int id, const Expr& g);
  const Matrix& val(int id) const;

  std::vector<Node> nodes_;
};

// Same semantics as the Tape ops, evaluated immediately without recording.
namespace eager {
Matrix sigmoid(const Matrix& a);
Matrix attention(const Matrix& query, std::span<const Matrix> keys, std::span<const Matrix> values,
                 std::span<const int> lengths);
Matrix log_softmax_rows(const Matrix& logits);
Matrix log_softmax_pick(const Matrix& logits, std::span<const TokenId> targets);
}  // namespace eager

}  // namespace autograd
}  // namespace madrl
