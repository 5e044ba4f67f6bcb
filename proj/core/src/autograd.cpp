#include "madrl/autograd.hpp"

#include <cmath>
#include <stdexcept>

namespace madrl::autograd {
namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

namespace eager {

Matrix sigmoid(const Matrix& a) {
  return a.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
}

Matrix attention(const Matrix& query, std::span<const Matrix> keys, std::span<const Matrix> values,
                 std::span<const int> lengths) {
  const auto rows = query.rows();
  Matrix context = Matrix::Zero(rows, values.empty() ? query.cols() : values[0].cols());
  std::vector<double> scores(keys.size());
  for (Eigen::Index b = 0; b < rows; ++b) {
    const int len = lengths[static_cast<std::size_t>(b)];
    double mx = -INFINITY;
    for (int j = 0; j < len; ++j) {
      scores[j] = query.row(b).dot(keys[j].row(b));
      mx = std::max(mx, scores[j]);
    }
    double z = 0.0;
    for (int j = 0; j < len; ++j) {
      scores[j] = std::exp(scores[j] - mx);
      z += scores[j];
    }
    for (int j = 0; j < len; ++j) context.row(b) += (scores[j] / z) * values[j].row(b);
  }
  return context;
}

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index b = 0; b < logits.rows(); ++b) {
    const double mx = logits.row(b).maxCoeff();
    const double lse = mx + std::log((logits.row(b).array() - mx).exp().sum());
    out.row(b) = logits.row(b).array() - lse;
  }
  return out;
}

Matrix log_softmax_pick(const Matrix& logits, std::span<const TokenId> targets) {
  Matrix out = Matrix::Zero(logits.rows(), 1);
  for (Eigen::Index b = 0; b < logits.rows(); ++b) {
    const TokenId t = targets[static_cast<std::size_t>(b)];
    if (t < 0) continue;
    const double mx = logits.row(b).maxCoeff();
    const double lse = mx + std::log((logits.row(b).array() - mx).exp().sum());
    out(b, 0) = logits(b, t) - lse;
  }
  return out;
}

}  // namespace eager

const Matrix& Tape::val(int id) const {
  const auto& n = nodes_[static_cast<std::size_t>(id)];
  return n.external ? *n.external : n.value;
}

const Matrix& Tape::value(Var v) const { return val(v.id); }

template <class Expr>
void Tape::accumulate(int id, const Expr& g) {
  auto& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Var Tape::push(Matrix value, std::function<void(Tape&, int)> backward) {
  nodes_.push_back(Node{std::move(value), nullptr, Matrix(), nullptr, std::move(backward)});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::parameter(const Matrix& value, Matrix* grad_sink) {
  nodes_.push_back(Node{Matrix(), &value, Matrix(), grad_sink, nullptr});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::matmul(Var a, Var b) {
  require(val(a.id).cols() == val(b.id).rows(), "matmul: shape mismatch");
  Matrix out = val(a.id) * val(b.id);
  return push(std::move(out), [a, b](Tape& t, int self) {
    const Matrix& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    t.accumulate(a.id, g * t.val(b.id).transpose());
    t.accumulate(b.id, t.val(a.id).transpose() * g);
  });
}

Var Tape::matmul_nt(Var a, Var b) {
  require(val(a.id).cols() == val(b.id).cols(), "matmul_nt: shape mismatch");
  Matrix out = val(a.id) * val(b.id).transpose();
  return push(std::move(out), [a, b](Tape& t, int self) {
    const Matrix& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    t.accumulate(a.id, g * t.val(b.id));
    t.accumulate(b.id, g.transpose() * t.val(a.id));
  });
}

Var Tape::add(Var a, Var b) {
  require(val(a.id).rows() == val(b.id).rows() && val(a.id).cols() == val(b.id).cols(), "add: shape mismatch");
  Matrix out = val(a.id) + val(b.id);
  return push(std::move(out), [a, b](Tape& t, int self) {
    const Matrix& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    t.accumulate(a.id, g);
    t.accumulate(b.id, g);
  });
}

Var Tape::sub(Var a, Var b) {
  require(val(a.id).rows() == val(b.id).rows() && val(a.id).cols() == val(b.id).cols(), "sub: shape mismatch");
  Matrix out = val(a.id) - val(b.id);
  return push(std::move(out), [a, b](Tape& t, int self) {
    const Matrix& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    t.accumulate(a.id, g);
    t.accumulate(b.id, -g);
  });
}

Var Tape::mul(Var a, Var b) {
  require(val(a.id).rows() == val(b.id).rows() && val(a.id).cols() == val(b.id).cols(), "mul: shape mismatch");
  Matrix out = val(a.id).cwiseProduct(val(b.id));
  return push(std::move(out), [a, b](Tape& t, int self) {
    const Matrix& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    t.accumulate(a.id, g.cwiseProduct(t.val(b.id)));
    t.accumulate(b.id, g.cwiseProduct(t.val(a.id)));
  });
}

Var Tape::add_bias(Var a, Var row) {
  require(val(row.id).rows() == 1 && val(row.id).cols() == val(a.id).cols(), "add_bias: shape mismatch");
  Matrix out = val(a.id).rowwise() + val(row.id).row(0);
  return push(std::move(out), [a, row](Tape& t, int self) {
    const Matrix& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    t.accumulate(a.id, g);
    t.accumulate(row.id, g.colwise().sum());
  });
}

Var Tape::tanh(Var a) {
  Matrix out = val(a.id).array().tanh().matrix();
  return push(std::move(out), [a](Tape& t, int self) {
    const auto& n = t.nodes_[static_cast<std::size_t>(self)];
    t.accumulate(a.id, n.grad.cwiseProduct((1.0 - n.value.array().square()).matrix()));
  });
}

Var Tape::sigmoid(Var a) {
  Matrix out = eager::sigmoid(val(a.id));
  return push(std::move(out), [a](Tape& t, int self) {
    const auto& n = t.nodes_[static_cast<std::size_t>(self)];
    t.accumulate(a.id, n.grad.cwiseProduct((n.value.array() * (1.0 - n.value.array())).matrix()));
  });
}

Var Tape::relu(Var a) {
  Matrix out = val(a.id).cwiseMax(0.0);
  return push(std::move(out), [a](Tape& t, int self) {
    const auto& n = t.nodes_[static_cast<std::size_t>(self)];
    t.accumulate(a.id, n.grad.cwiseProduct((n.value.array() > 0.0).cast<double>().matrix()));
  });
}

Var Tape::scale_by(Var a, Matrix mask) {
  require(mask.rows() == val(a.id).rows() && mask.cols() == val(a.id).cols(), "scale_by: shape mismatch");
  Matrix out = val(a.id).cwiseProduct(mask);
  return push(std::move(out), [a, mask = std::move(mask)](Tape& t, int self) {
    t.accumulate(a.id, t.nodes_[static_cast<std::size_t>(self)].grad.cwiseProduct(mask));
  });
}

Var Tape::gather_rows(Var table, std::span<const TokenId> ids) {
  const Matrix& tab = val(table.id);
  Matrix out(static_cast<Eigen::Index>(ids.size()), tab.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= tab.rows()) throw std::out_of_range("gather_rows: id outside table");
    out.row(static_cast<Eigen::Index>(i)) = tab.row(ids[i]);
  }
  std::vector<TokenId> idx(ids.begin(), ids.end());
  return push(std::move(out), [table, idx = std::move(idx)](Tape& t, int self) {
    const Matrix& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    auto& tn = t.nodes_[static_cast<std::size_t>(table.id)];
    if (tn.grad.size() == 0) tn.grad = Matrix::Zero(t.val(table.id).rows(), t.val(table.id).cols());
    for (std::size_t i = 0; i < idx.size(); ++i) tn.grad.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var Tape::concat_cols(Var a, Var b) {
  const Matrix& va = val(a.id);
  const Matrix& vb = val(b.id);
  require(va.rows() == vb.rows(), "concat_cols: row mismatch");
  Matrix out(va.rows(), va.cols() + vb.cols());
  out << va, vb;
  const auto wa = va.cols();
  const auto wb = vb.cols();
  return push(std::move(out), [a, b, wa, wb](Tape& t, int self) {
    const Matrix& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    t.accumulate(a.id, g.leftCols(wa));
    t.accumulate(b.id, g.rightCols(wb));
  });
}

Var Tape::slice_cols(Var a, int start, int width) {
  const Matrix& va = val(a.id);
  require(start >= 0 && width >= 0 && start + width <= va.cols(), "slice_cols: out of range");
  Matrix out = va.middleCols(start, width);
  const auto rows = va.rows();
  const auto cols = va.cols();
  return push(std::move(out), [a, start, width, rows, cols](Tape& t, int self) {
    const Matrix& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    auto& an = t.nodes_[static_cast<std::size_t>(a.id)];
    if (an.grad.size() == 0) an.grad = Matrix::Zero(rows, cols);
    an.grad.middleCols(start, width) += g;
  });
}

Var Tape::select_rows(Var a, Var other, std::vector<char> keep_a) {
  const Matrix& va = val(a.id);
  const Matrix& vo = val(other.id);
  require(va.rows() == vo.rows() && va.cols() == vo.cols(), "select_rows: shape mismatch");
  require(keep_a.size() == static_cast<std::size_t>(va.rows()), "select_rows: mask size");
  Matrix out = vo;
  for (Eigen::Index b = 0; b < va.rows(); ++b) {
    if (keep_a[static_cast<std::size_t>(b)]) out.row(b) = va.row(b);
  }
  return push(std::move(out), [a, other, keep = std::move(keep_a)](Tape& t, int self) {
    const Matrix& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    Matrix ga = Matrix::Zero(g.rows(), g.cols());
    Matrix go = g;
    for (Eigen::Index b = 0; b < g.rows(); ++b) {
      if (keep[static_cast<std::size_t>(b)]) {
        ga.row(b) = g.row(b);
        go.row(b).setZero();
      }
    }
    t.accumulate(a.id, ga);
    t.accumulate(other.id, go);
  });
}

Var Tape::attention(Var query, std::span<const Var> keys, std::span<const Var> values, std::span<const int> lengths) {
  require(keys.size() == values.size(), "attention: keys/values mismatch");
  const Matrix& q = val(query.id);
  const auto rows = q.rows();
  require(lengths.size() == static_cast<std::size_t>(rows), "attention: lengths size");
  const auto positions = static_cast<int>(keys.size());
  Matrix weights = Matrix::Zero(rows, positions);
  Matrix context = Matrix::Zero(rows, positions ? val(values[0].id).cols() : q.cols());
  for (Eigen::Index b = 0; b < rows; ++b) {
    const int len = lengths[static_cast<std::size_t>(b)];
    require(len >= 1 && len <= positions, "attention: row length out of range");
    double mx = -INFINITY;
    for (int j = 0; j < len; ++j) {
      weights(b, j) = q.row(b).dot(val(keys[j].id).row(b));
      mx = std::max(mx, weights(b, j));
    }
    double z = 0.0;
    for (int j = 0; j < len; ++j) {
      weights(b, j) = std::exp(weights(b, j) - mx);
      z += weights(b, j);
    }
    for (int j = 0; j < len; ++j) {
      weights(b, j) /= z;
      context.row(b) += weights(b, j) * val(values[j].id).row(b);
    }
  }
  std::vector<Var> ks(keys.begin(), keys.end()), vs(values.begin(), values.end());
  std::vector<int> lens(lengths.begin(), lengths.end());
  return push(std::move(context), [query, ks = std::move(ks), vs = std::move(vs), lens = std::move(lens),
                                   weights = std::move(weights)](Tape& t, int self) {
    const Matrix g = t.nodes_[static_cast<std::size_t>(self)].grad;
    const Matrix& q = t.val(query.id);
    const auto rows = q.rows();
    const auto positions = static_cast<int>(ks.size());
    Matrix gq = Matrix::Zero(rows, q.cols());
    std::vector<Matrix> gk(ks.size()), gv(vs.size());
    for (int j = 0; j < positions; ++j) {
      gk[j] = Matrix::Zero(rows, t.val(ks[j].id).cols());
      gv[j] = Matrix::Zero(rows, t.val(vs[j].id).cols());
    }
    std::vector<double> dscore(ks.size());
    for (Eigen::Index b = 0; b < rows; ++b) {
      const int len = lens[static_cast<std::size_t>(b)];
      double expect = 0.0;
      for (int j = 0; j < len; ++j) {
        dscore[j] = g.row(b).dot(t.val(vs[j].id).row(b));
        expect += weights(b, j) * dscore[j];
      }
      for (int j = 0; j < len; ++j) {
        const double a = weights(b, j);
        const double ds = a * (dscore[j] - expect);
        gv[j].row(b) += a * g.row(b);
        gq.row(b) += ds * t.val(ks[j].id).row(b);
        gk[j].row(b) += ds * q.row(b);
      }
    }
    t.accumulate(query.id, gq);
    for (int j = 0; j < positions; ++j) {
      t.accumulate(ks[j].id, gk[j]);
      t.accumulate(vs[j].id, gv[j]);
    }
  });
}

Var Tape::log_softmax_pick(Var logits, std::span<const TokenId> targets) {
  const Matrix& l = val(logits.id);
  require(targets.size() == static_cast<std::size_t>(l.rows()), "log_softmax_pick: targets size");
  for (TokenId tgt : targets) {
    if (tgt >= l.cols()) throw std::out_of_range("log_softmax_pick: target outside vocabulary");
  }
  Matrix out = eager::log_softmax_pick(l, targets);
  std::vector<TokenId> tg(targets.begin(), targets.end());
  return push(std::move(out), [logits, tg = std::move(tg)](Tape& t, int self) {
    const Matrix& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    const Matrix& l = t.val(logits.id);
    Matrix gl = Matrix::Zero(l.rows(), l.cols());
    for (Eigen::Index b = 0; b < l.rows(); ++b) {
      const TokenId target = tg[static_cast<std::size_t>(b)];
      if (target < 0 || g(b, 0) == 0.0) continue;
      const double mx = l.row(b).maxCoeff();
      auto probs = (l.row(b).array() - mx).exp();
      const double z = probs.sum();
      gl.row(b) = -g(b, 0) * (probs / z).matrix();
      gl(b, target) += g(b, 0);
    }
    t.accumulate(logits.id, gl);
  });
}

Var Tape::weighted_sum(Var a, std::span<const double> weights) {
  const Matrix& va = val(a.id);
  require(va.cols() == 1 && weights.size() == static_cast<std::size_t>(va.rows()), "weighted_sum: shape mismatch");
  Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  Matrix out(1, 1);
  out(0, 0) = va.col(0).dot(w);
  Eigen::VectorXd wc = w;
  return push(std::move(out), [a, wc = std::move(wc)](Tape& t, int self) {
    const double g = t.nodes_[static_cast<std::size_t>(self)].grad(0, 0);
    Matrix ga = g * wc;
    t.accumulate(a.id, ga);
  });
}

void Tape::backward(Var output) {
  auto& out = nodes_.at(static_cast<std::size_t>(output.id));
  require(val(output.id).size() == 1, "backward: output must be 1x1");
  out.grad = Matrix::Ones(1, 1);
  for (int i = output.id; i >= 0; --i) {
    auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, i);
    if (n.grad_sink) *n.grad_sink += n.grad;
  }
}

}  // namespace madrl::autograd
