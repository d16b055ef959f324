#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lakenet/tensor.hpp"

namespace lakenet::nn {

class Tape;
struct Parameter;

/// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const;
  std::size_t id() const { return id_; }

  const Tensor& value() const;
  /// Accumulated gradient after Tape::backward (zeros when none reached it).
  const Tensor& grad() const;
  bool requires_grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Sparse linear map over rows: output row r = sum_k weight_k * input[index_k].
/// Stored in compressed-row form.
struct SparseRows {
  std::size_t input_rows = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> index;
  std::vector<double> weight;

  std::size_t output_rows() const { return offsets.size() - 1; }
  void add_row(std::span<const std::size_t> idx, std::span<const double> w);
};

/// Reverse-mode computation tape.
///
/// Nodes are appended in evaluation order, so reverse iteration is a valid
/// topological order for backpropagation. A tape is single-threaded; distinct
/// tapes are independent.
class Tape {
 public:
  /// Receives the tape, the node's forward value and its incoming gradient,
  /// and adds into the grad_buffer() of each input that requires a gradient.
  using BackwardFn = std::function<void(Tape&, const Tensor& out, const Tensor& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  /// Leaf bound to a parameter. Gradients are added into `p.grad` by
  /// backward(); non-trainable parameters are recorded as constants.
  /// Repeated calls for the same parameter return the same node.
  Var param(Parameter& p);

  /// Appends an op node. Throws NumericalError naming `op` when the value
  /// holds a NaN or infinity.
  Var record(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn fn);

  /// Propagates d(loss)/d(node) for every node that requires a gradient and
  /// accumulates it into node grads and bound parameters. Calling twice
  /// without zero_grad() accumulates.
  void backward(Var loss);
  void zero_grad();

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Per-pass gradient buffer of an input; only meaningful inside a BackwardFn.
  Tensor& grad_buffer(std::size_t id);

 private:
  struct Node {
    Tensor value;
    mutable Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::vector<Tensor> pass_grads_;
  std::unordered_map<const Parameter*, std::size_t> param_ids_;
};

// Layer primitives. Every op checks shapes and throws ShapeError naming both
// operand shapes on mismatch.

Var matmul(Var a, Var b);
/// x W + 1 b with x (n x in), W (in x out), b (1 x out).
Var linear(Var x, Var w, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var relu(Var a);
/// axis 0 normalizes each column over rows, axis 1 each row over columns.
Var softmax(Var a, int axis);
/// Max over the set axis; axis 0 yields 1 x cols, axis 1 yields rows x 1.
/// The gradient flows to the first maximal element.
Var max_pool(Var a, int axis);
Var concat(std::span<const Var> parts, int axis);
Var sum(Var a);
Var mean(Var a);
Var squared_norm(Var a);
Var transpose(Var a);
Var reshape(Var a, std::size_t rows, std::size_t cols);
Var gather_rows(Var a, std::span<const std::size_t> indices);
/// Repeats a 1 x c row n times.
Var repeat_rows(Var a, std::size_t n);
Var combine_rows(Var a, const SparseRows& map);
/// Chamfer distance (squared L2, mean per direction) between (n x 3) and
/// (m x 3) point sets; subgradient through the nearest-neighbor choice.
Var chamfer(Var a, Var b);
/// -sum_i [t_i log p_i + (1 - t_i) log(1 - p_i)], p clamped to
/// [1e-12, 1 - 1e-12] for the logarithms.
Var binary_cross_entropy(Var probs, std::span<const double> targets);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }

}  // namespace lakenet::nn
