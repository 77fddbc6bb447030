#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adnet/tensor.hpp"

namespace adnet {

/// A learned tensor with its accumulated gradient. Gradients are never reset
/// implicitly; call zero_grad() between optimizer steps.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value)
      : name(std::move(name)), value(std::move(value)), grad(this->value.shape()) {}

  void zero_grad() { grad.fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// tape is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records primitive applications in execution order and replays their
/// backward rules in reverse.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Constant leaf that refers to `value` without copying; `value` must
  /// outlive the tape.
  Var view(const Tensor& value);
  /// Leaf bound to a parameter; backward() adds into `grad_sink`.
  Var parameter(const Tensor& value, Tensor& grad_sink);
  Var parameter(Parameter& p) { return parameter(p.value, p.grad); }

  /// Populates d(loss)/d(leaf) for every parameter leaf on this tape.
  void backward(Var loss);

  const Tensor& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of a node, zero-allocated on first access.
  Tensor& grad(std::size_t id);
  std::size_t size() const noexcept { return nodes_.size(); }

  // Used by primitive implementations.
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    BackwardFn backward;
    Tensor* sink = nullptr;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
};

// Primitives. All operate on rank-2 tensors unless stated otherwise; row
// vectors are [1 x n] and scalars are [1 x 1].

Var matmul(Var a, Var b);
/// Elementwise sum; `b` may also be a [1 x n] row broadcast over the rows of `a`.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// scale * a + shift
Var affine(Var a, double scale, double shift = 0.0);
Var concat(std::span<const Var> parts, std::size_t axis);
Var slice(Var a, std::size_t axis, std::size_t start, std::size_t length);
Var transpose(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var exp(Var a);
Var log(Var a);
Var clamp(Var a, double lo, double hi);
/// Softmax along `axis`. Positions with mask value 0 get weight exactly 0;
/// the mask length must match the softmax axis.
Var softmax(Var a, std::size_t axis, std::optional<std::span<const double>> mask = std::nullopt);
/// input [T x C], kernels [F x w x C] with odd w; zero "same" padding; output [T x F].
Var conv1d(Var input, Var kernels);
/// Non-overlapping max over windows of `width` rows: [T x C] -> [T/width x C].
Var max_pool1d(Var a, std::size_t width);
Var sum(Var a);
Var mean(Var a);

}  // namespace adnet
