#include "lattice/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lattice/errors.hpp"

namespace lattice::autodiff {

namespace {

std::string shape_of(const Tensor& t) {
  return std::to_string(t.rows) + "x" + std::to_string(t.cols);
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw InternalError(std::string(op) + ": operand shapes differ (" + shape_of(a) + " vs " +
                        shape_of(b) + ")");
  }
}

// C += A * B
void matmul_nn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const double* brow = &b.values[k * b.cols];
      double* crow = &c.values[i * c.cols];
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
}

// C += A * B^T
void matmul_nt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = &a.values[i * a.cols];
    double* crow = &c.values[i * c.cols];
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* brow = &b.values[j * b.cols];
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
      crow[j] += acc;
    }
  }
}

// C += A^T * B
void matmul_tn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* arow = &a.values[k * a.cols];
    const double* brow = &b.values[k * b.cols];
    for (std::size_t i = 0; i < a.cols; ++i) {
      double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = &c.values[i * c.cols];
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
    }
  }
}

}  // namespace

Var Tape::push(Node node) {
  node.grad = Tensor(node.value.rows, node.value.cols);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Tape::input(Tensor value) {
  Node node;
  node.op = Op::Input;
  node.value = std::move(value);
  return push(std::move(node));
}

const Tensor& Tape::value(Var v) const { return nodes_.at(v.id).value; }

const Tensor& Tape::grad(Var v) const { return nodes_.at(v.id).grad; }

Var Tape::matmul(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  if (ta.cols != tb.rows) {
    throw InternalError("matmul: inner dimensions differ (" + shape_of(ta) + " vs " +
                        shape_of(tb) + ")");
  }
  Node node;
  node.op = Op::MatMul;
  node.a = a.id;
  node.b = b.id;
  node.value = Tensor(ta.rows, tb.cols);
  matmul_nn_acc(ta, tb, node.value);
  return push(std::move(node));
}

Var Tape::add(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  require_same_shape("add", ta, tb);
  Node node;
  node.op = Op::Add;
  node.a = a.id;
  node.b = b.id;
  node.value = ta;
  for (std::size_t i = 0; i < tb.size(); ++i) node.value.values[i] += tb.values[i];
  return push(std::move(node));
}

Var Tape::add_broadcast_rows(Var a, Var bias) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(bias.id);
  if (tb.rows != 1 || tb.cols != ta.cols) {
    throw InternalError("add_broadcast_rows: bias shape " + shape_of(tb) +
                        " does not broadcast over " + shape_of(ta));
  }
  Node node;
  node.op = Op::AddBroadcastRows;
  node.a = a.id;
  node.b = bias.id;
  node.value = ta;
  for (std::size_t r = 0; r < ta.rows; ++r) {
    for (std::size_t c = 0; c < ta.cols; ++c) node.value.at(r, c) += tb.at(0, c);
  }
  return push(std::move(node));
}

Var Tape::elementwise_mul(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  require_same_shape("elementwise_mul", ta, tb);
  Node node;
  node.op = Op::Mul;
  node.a = a.id;
  node.b = b.id;
  node.value = ta;
  for (std::size_t i = 0; i < tb.size(); ++i) node.value.values[i] *= tb.values[i];
  return push(std::move(node));
}

Var Tape::tanh_op(Var a) {
  Node node;
  node.op = Op::Tanh;
  node.a = a.id;
  node.value = val(a.id);
  for (auto& x : node.value.values) x = std::tanh(x);
  return push(std::move(node));
}

Var Tape::sigmoid(Var a) {
  Node node;
  node.op = Op::Sigmoid;
  node.a = a.id;
  node.value = val(a.id);
  for (auto& x : node.value.values) x = 1.0 / (1.0 + std::exp(-x));
  return push(std::move(node));
}

Var Tape::relu(Var a) {
  Node node;
  node.op = Op::Relu;
  node.a = a.id;
  node.value = val(a.id);
  for (auto& x : node.value.values) x = x > 0.0 ? x : 0.0;
  return push(std::move(node));
}

Var Tape::abs_op(Var a) {
  Node node;
  node.op = Op::Abs;
  node.a = a.id;
  node.value = val(a.id);
  for (auto& x : node.value.values) x = std::fabs(x);
  return push(std::move(node));
}

Var Tape::softmax_rows(Var a) {
  Node node;
  node.op = Op::SoftmaxRows;
  node.a = a.id;
  node.value = val(a.id);
  for (std::size_t r = 0; r < node.value.rows; ++r) {
    double* row = &node.value.values[r * node.value.cols];
    double m = *std::max_element(row, row + node.value.cols);
    double sum = 0.0;
    for (std::size_t c = 0; c < node.value.cols; ++c) {
      row[c] = std::exp(row[c] - m);
      sum += row[c];
    }
    for (std::size_t c = 0; c < node.value.cols; ++c) row[c] /= sum;
  }
  return push(std::move(node));
}

Var Tape::row_normalize(Var a) {
  Node node;
  node.op = Op::RowNormalize;
  node.a = a.id;
  node.value = val(a.id);
  for (std::size_t r = 0; r < node.value.rows; ++r) {
    double* row = &node.value.values[r * node.value.cols];
    double sum = 0.0;
    for (std::size_t c = 0; c < node.value.cols; ++c) sum += row[c];
    if (!(sum > 0.0)) {
      throw InternalError("row_normalize: row " + std::to_string(r) +
                          " sums to a non-positive value");
    }
    for (std::size_t c = 0; c < node.value.cols; ++c) row[c] /= sum;
  }
  return push(std::move(node));
}

Var Tape::max_pool_rows(Var a) {
  const Tensor& ta = val(a.id);
  if (ta.rows == 0) throw InternalError("max_pool_rows: empty input");
  Node node;
  node.op = Op::MaxPoolRows;
  node.a = a.id;
  node.value = Tensor(1, ta.cols);
  node.arg_rows.assign(ta.cols, 0);
  for (std::size_t c = 0; c < ta.cols; ++c) {
    double best = ta.at(0, c);
    std::size_t best_row = 0;
    for (std::size_t r = 1; r < ta.rows; ++r) {
      if (ta.at(r, c) > best) {
        best = ta.at(r, c);
        best_row = r;
      }
    }
    node.value.at(0, c) = best;
    node.arg_rows[c] = best_row;
  }
  return push(std::move(node));
}

Var Tape::sum_all(Var a) {
  Node node;
  node.op = Op::SumAll;
  node.a = a.id;
  node.value = Tensor(1, 1);
  double acc = 0.0;
  for (double x : val(a.id).values) acc += x;
  node.value.at(0, 0) = acc;
  return push(std::move(node));
}

Var Tape::cross_entropy(Var logits, std::size_t target) {
  const Tensor& tl = val(logits.id);
  if (tl.rows != 1) {
    throw InternalError("cross_entropy: logits must be a single row, got " + shape_of(tl));
  }
  if (target >= tl.cols) {
    throw InternalError("cross_entropy: target class " + std::to_string(target) +
                        " out of range for " + std::to_string(tl.cols) + " logits");
  }
  Node node;
  node.op = Op::CrossEntropy;
  node.a = logits.id;
  node.target = target;
  node.value = Tensor(1, 1);
  double m = *std::max_element(tl.values.begin(), tl.values.end());
  double sum = 0.0;
  for (double x : tl.values) sum += std::exp(x - m);
  node.value.at(0, 0) = (m + std::log(sum)) - tl.at(0, target);
  return push(std::move(node));
}

void Tape::backward(Var output) {
  Node& out = nodes_.at(output.id);
  if (out.value.rows != 1 || out.value.cols != 1) {
    throw InternalError("backward: output must be a 1x1 scalar, got " + shape_of(out.value));
  }
  for (auto& node : nodes_) {
    std::fill(node.grad.values.begin(), node.grad.values.end(), 0.0);
  }
  out.grad.at(0, 0) = 1.0;

  for (std::size_t id = output.id + 1; id-- > 0;) {
    Node& node = nodes_[id];
    const Tensor& g = node.grad;
    switch (node.op) {
      case Op::Input:
        break;
      case Op::MatMul: {
        matmul_nt_acc(g, nodes_[node.b].value, nodes_[node.a].grad);
        matmul_tn_acc(nodes_[node.a].value, g, nodes_[node.b].grad);
        break;
      }
      case Op::Add: {
        Tensor& ga = nodes_[node.a].grad;
        Tensor& gb = nodes_[node.b].grad;
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga.values[i] += g.values[i];
          gb.values[i] += g.values[i];
        }
        break;
      }
      case Op::AddBroadcastRows: {
        Tensor& ga = nodes_[node.a].grad;
        Tensor& gb = nodes_[node.b].grad;
        for (std::size_t r = 0; r < g.rows; ++r) {
          for (std::size_t c = 0; c < g.cols; ++c) {
            ga.at(r, c) += g.at(r, c);
            gb.at(0, c) += g.at(r, c);
          }
        }
        break;
      }
      case Op::Mul: {
        Tensor& ga = nodes_[node.a].grad;
        Tensor& gb = nodes_[node.b].grad;
        const Tensor& va = nodes_[node.a].value;
        const Tensor& vb = nodes_[node.b].value;
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga.values[i] += g.values[i] * vb.values[i];
          gb.values[i] += g.values[i] * va.values[i];
        }
        break;
      }
      case Op::Tanh: {
        Tensor& ga = nodes_[node.a].grad;
        for (std::size_t i = 0; i < g.size(); ++i) {
          double y = node.value.values[i];
          ga.values[i] += g.values[i] * (1.0 - y * y);
        }
        break;
      }
      case Op::Sigmoid: {
        Tensor& ga = nodes_[node.a].grad;
        for (std::size_t i = 0; i < g.size(); ++i) {
          double y = node.value.values[i];
          ga.values[i] += g.values[i] * y * (1.0 - y);
        }
        break;
      }
      case Op::Relu: {
        Tensor& ga = nodes_[node.a].grad;
        const Tensor& va = nodes_[node.a].value;
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (va.values[i] > 0.0) ga.values[i] += g.values[i];
        }
        break;
      }
      case Op::Abs: {
        Tensor& ga = nodes_[node.a].grad;
        const Tensor& va = nodes_[node.a].value;
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (va.values[i] > 0.0) {
            ga.values[i] += g.values[i];
          } else if (va.values[i] < 0.0) {
            ga.values[i] -= g.values[i];
          }
        }
        break;
      }
      case Op::SoftmaxRows: {
        Tensor& ga = nodes_[node.a].grad;
        for (std::size_t r = 0; r < g.rows; ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < g.cols; ++c) dot += g.at(r, c) * node.value.at(r, c);
          for (std::size_t c = 0; c < g.cols; ++c) {
            ga.at(r, c) += node.value.at(r, c) * (g.at(r, c) - dot);
          }
        }
        break;
      }
      case Op::RowNormalize: {
        Tensor& ga = nodes_[node.a].grad;
        const Tensor& va = nodes_[node.a].value;
        for (std::size_t r = 0; r < g.rows; ++r) {
          double sum = 0.0;
          for (std::size_t c = 0; c < g.cols; ++c) sum += va.at(r, c);
          double dot = 0.0;
          for (std::size_t c = 0; c < g.cols; ++c) dot += g.at(r, c) * node.value.at(r, c);
          for (std::size_t c = 0; c < g.cols; ++c) {
            ga.at(r, c) += (g.at(r, c) - dot) / sum;
          }
        }
        break;
      }
      case Op::MaxPoolRows: {
        Tensor& ga = nodes_[node.a].grad;
        for (std::size_t c = 0; c < g.cols; ++c) {
          ga.at(node.arg_rows[c], c) += g.at(0, c);
        }
        break;
      }
      case Op::SumAll: {
        Tensor& ga = nodes_[node.a].grad;
        double seed = g.at(0, 0);
        for (auto& x : ga.values) x += seed;
        break;
      }
      case Op::CrossEntropy: {
        Tensor& ga = nodes_[node.a].grad;
        const Tensor& logits = nodes_[node.a].value;
        double seed = g.at(0, 0);
        double m = *std::max_element(logits.values.begin(), logits.values.end());
        double sum = 0.0;
        for (double x : logits.values) sum += std::exp(x - m);
        for (std::size_t c = 0; c < logits.cols; ++c) {
          double p = std::exp(logits.at(0, c) - m) / sum;
          double indicator = c == node.target ? 1.0 : 0.0;
          ga.at(0, c) += seed * (p - indicator);
        }
        break;
      }
    }
  }
}

}  // namespace lattice::autodiff
