#pragma once

// Reverse-mode automatic differentiation over rank-4 tensors.
//
// A Var is a handle to a Node holding a forward value. When a Var carries a
// Tape, operations on it are recorded in creation order (which is a valid
// topological order) together with a backward rule; Tape::backward walks the
// list in reverse and accumulates gradients. Vars without a tape form the
// no-grad path: results are computed but nothing is retained, so intermediate
// buffers are freed as soon as the last handle drops.
//
// A Tape is confined to one thread.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "saffn/tensor.hpp"

namespace saffn {

/// A named learnable tensor. `grad` always has the dims of `value` and is
/// accumulation state written by Tape::backward; callers zero it between steps.
template <typename T>
struct Parameter {
  std::string id;
  Tensor<T> value;
  mutable Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string name, Tensor<T> v)
      : id(std::move(name)), value(std::move(v)), grad(Tensor<T>::zeros(value.dims())) {}

  void zero_grad() const {
    if (grad.dims() != value.dims()) {
      grad = Tensor<T>::zeros(value.dims());
    } else {
      grad.fill(T(0));
    }
  }
};

template <typename T>
struct Node;

template <typename T>
using BackwardFn = std::function<void(Node<T>&)>;

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // empty until something flows into it
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn<T> backward;
  const Parameter<T>* param = nullptr;
  bool requires_grad = false;

  /// Zero-initialised gradient buffer matching `value`.
  Tensor<T>& grad_buffer() {
    if (grad.empty()) grad = Tensor<T>::zeros(value.dims());
    return grad;
  }
  [[nodiscard]] bool has_grad() const { return !grad.empty(); }
};

template <typename T>
class Tape;

template <typename T>
class Var {
 public:
  Var() = default;
  Var(std::shared_ptr<Node<T>> node, Tape<T>* tape) : node_(std::move(node)), tape_(tape) {}

  /// A value outside any tape (the no-grad path).
  static Var constant(Tensor<T> value) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    return Var(std::move(node), nullptr);
  }

  [[nodiscard]] bool defined() const { return node_ != nullptr; }
  [[nodiscard]] const Tensor<T>& value() const { return node_->value; }
  [[nodiscard]] const Dims& dims() const { return node_->value.dims(); }
  [[nodiscard]] Tape<T>* tape() const { return tape_; }
  [[nodiscard]] bool requires_grad() const { return node_ && node_->requires_grad; }
  [[nodiscard]] const std::shared_ptr<Node<T>>& node() const { return node_; }

  /// Gradient accumulated by the last backward pass (empty if none reached this node).
  [[nodiscard]] const Tensor<T>& grad() const { return node_->grad; }

 private:
  std::shared_ptr<Node<T>> node_;
  Tape<T>* tape_ = nullptr;
};

template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf bound to a Parameter; one node per parameter per tape.
  Var<T> param(const Parameter<T>& p) {
    auto it = params_.find(&p);
    if (it != params_.end()) return Var<T>(it->second, this);
    auto node = std::make_shared<Node<T>>();
    node->value = p.value;
    node->param = &p;
    node->requires_grad = true;
    nodes_.push_back(node);
    params_.emplace(&p, node);
    return Var<T>(std::move(node), this);
  }

  /// Leaf that participates in the recorded graph but receives no gradient.
  Var<T> constant(Tensor<T> value) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    return Var<T>(std::move(node), this);
  }

  /// Leaf that receives a gradient readable through Var::grad().
  Var<T> variable(Tensor<T> value) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->requires_grad = true;
    nodes_.push_back(node);
    return Var<T>(std::move(node), this);
  }

  /// Reverse sweep from a scalar loss. Parameter grads accumulate additively.
  void backward(const Var<T>& loss) {
    if (!loss.defined()) throw UsageError("backward: undefined loss");
    if (loss.dims() != Dims{1, 1, 1, 1}) {
      throw UsageError("backward: loss must be a 1x1x1x1 scalar, got " + loss.dims().str());
    }
    if (loss.tape() != this || !loss.requires_grad()) {
      throw UsageError("backward: loss is detached from this tape");
    }
    loss.node()->grad_buffer()[0] = T(1);
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      Node<T>& node = **it;
      if (!node.has_grad()) continue;
      if (node.backward) node.backward(node);
      if (node.param != nullptr) {
        const Tensor<T>& g = node.grad;
        Tensor<T>& dst = node.param->grad;
        if (dst.dims() != g.dims()) dst = Tensor<T>::zeros(g.dims());
        T* d = dst.data();
        const T* s = g.data();
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += s[i];
      }
    }
  }

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  void clear() {
    nodes_.clear();
    params_.clear();
  }

  void push(std::shared_ptr<Node<T>> node) { nodes_.push_back(std::move(node)); }

 private:
  std::vector<std::shared_ptr<Node<T>>> nodes_;
  std::unordered_map<const Parameter<T>*, std::shared_ptr<Node<T>>> params_;
};

/// Parameter as a Var in the context of `tape` (or a no-grad constant when null).
template <typename T>
Var<T> bind(Tape<T>* tape, const Parameter<T>& p) {
  return tape ? tape->param(p) : Var<T>::constant(p.value);
}

/// Wraps a freshly computed value as the output of an operation on `inputs`.
/// The backward rule is retained only when some input requires a gradient.
template <typename T>
Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs, BackwardFn<T> backward) {
  Tape<T>* tape = nullptr;
  bool needs_grad = false;
  for (const auto& in : inputs) {
    if (!in.defined()) continue;
    if (in.tape() != nullptr) {
      if (tape != nullptr && tape != in.tape()) {
        throw UsageError("operation mixes Vars from different tapes");
      }
      tape = in.tape();
    }
    needs_grad = needs_grad || in.requires_grad();
  }
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  if (tape != nullptr && needs_grad) {
    node->requires_grad = true;
    node->backward = std::move(backward);
    for (const auto& in : inputs) {
      node->inputs.push_back(in.defined() ? in.node() : nullptr);
    }
    tape->push(node);
  }
  return Var<T>(std::move(node), tape);
}

/// Gradient buffer of input `i` of `self`, or nullptr when that input takes no gradient.
template <typename T>
Tensor<T>* input_grad(Node<T>& self, std::size_t i) {
  auto& in = self.inputs[i];
  if (!in || !in->requires_grad) return nullptr;
  return &in->grad_buffer();
}

}  // namespace saffn
