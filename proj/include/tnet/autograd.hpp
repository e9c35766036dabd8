#pragma once

// Minimal reverse-mode differentiation over Tensor<T>.
//
// A Var is a shared handle to a graph node. Operations in ops.hpp build new
// nodes that remember their inputs and a closure propagating the output
// gradient back to them. Leaves created with requires_grad (parameters,
// probe inputs) accumulate gradients when backward() runs from a scalar
// root. Nothing is recorded while a NoGradGuard is alive.

#include <functional>
#include <memory>
#include <vector>

#include "tnet/tensor.hpp"

namespace tnet {

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // empty until the first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  /// Adds g into grad, allocating zeros on first use.
  void accumulate(const Tensor<T>& g);
  Tensor<T>& grad_buffer();
};

template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(Tensor<T> value, bool requires_grad = false)
      : node_(std::make_shared<Node<T>>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  [[nodiscard]] bool defined() const { return node_ != nullptr; }
  [[nodiscard]] const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  [[nodiscard]] const Tensor<T>& grad() const { return node_->grad; }
  [[nodiscard]] bool has_grad() const { return !node_->grad.empty(); }
  [[nodiscard]] bool requires_grad() const { return node_->requires_grad; }
  [[nodiscard]] const Shape& shape() const { return node_->value.shape(); }
  void zero_grad() { node_->grad = Tensor<T>(); }

  [[nodiscard]] Node<T>* node() const { return node_.get(); }
  [[nodiscard]] const std::shared_ptr<Node<T>>& ptr() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Disables graph recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Creates the output node of an operation. If recording is enabled and any
/// input requires a gradient, the node keeps its inputs and `fn`.
template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> inputs,
                   std::function<void(Node<T>&)> fn);

/// Runs reverse accumulation from a single-element root (seeded with 1).
template <typename T>
void backward(const Var<T>& root);

}  // namespace tnet
