#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lattice::autodiff {

/// Dense 2-D row-major matrix of doubles. 1x1 tensors carry scalars.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::size_t size() const { return values.size(); }
  bool same_shape(const Tensor& other) const {
    return rows == other.rows && cols == other.cols;
  }
  bool operator==(const Tensor& other) const = default;
};

/// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

/// Records a forward computation and replays it backwards once to produce
/// gradients for every reachable input. Nodes are created in topological
/// order, so the backward sweep is a single reverse walk.
class Tape {
 public:
  /// Register a leaf value (parameter or constant input).
  Var input(Tensor value);

  const Tensor& value(Var v) const;
  /// Gradient of the node, valid after backward().
  const Tensor& grad(Var v) const;

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  /// a (r x c) plus bias (1 x c) applied to every row.
  Var add_broadcast_rows(Var a, Var bias);
  Var elementwise_mul(Var a, Var b);
  Var tanh_op(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var abs_op(Var a);
  /// Softmax independently over each row, with max-subtraction.
  Var softmax_rows(Var a);
  /// Divide each row by its sum (rows must sum to a positive value).
  Var row_normalize(Var a);
  /// Column-wise maximum over rows -> 1 x cols; ties pick the first row.
  Var max_pool_rows(Var a);
  /// Sum of every element -> 1 x 1.
  Var sum_all(Var a);
  /// -log softmax(logits)[target] for a 1 x k logits row -> 1 x 1 scalar.
  Var cross_entropy(Var logits, std::size_t target);

  /// Seed the scalar output with gradient 1 and sweep the tape backwards.
  void backward(Var output);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op {
    Input,
    MatMul,
    Add,
    AddBroadcastRows,
    Mul,
    Tanh,
    Sigmoid,
    Relu,
    Abs,
    SoftmaxRows,
    RowNormalize,
    MaxPoolRows,
    SumAll,
    CrossEntropy,
  };

  struct Node {
    Op op = Op::Input;
    std::size_t a = 0;
    std::size_t b = 0;
    Tensor value;
    Tensor grad;
    std::size_t target = 0;              // CrossEntropy class index
    std::vector<std::size_t> arg_rows;   // MaxPoolRows winning row per column
  };

  Var push(Node node);
  const Tensor& val(std::size_t id) const { return nodes_[id].value; }

  std::vector<Node> nodes_;
};

}  // namespace lattice::autodiff
