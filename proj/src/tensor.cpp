// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#include "lineread/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace lineread {

size_t shape_numel(const Shape& s) {
  size_t n = 1;
  for (size_t e : s) n *= e;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << 'x';
    os << s[i];
  }
  os << ']';
  return os.str();
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape) {
  auto n = std::make_shared<TensorNode<T>>();
  n->value.assign(shape_numel(shape), T(0));
  n->shape = std::move(shape);
  return Tensor(std::move(n));
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T v) {
  auto n = std::make_shared<TensorNode<T>>();
  n->value.assign(shape_numel(shape), v);
  n->shape = std::move(shape);
  return Tensor(std::move(n));
}

template <typename T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values) {
  if (shape_numel(shape) != values.size())
    throw DimensionError("tensor: " + shape_str(shape) + " does not hold " +
                         std::to_string(values.size()) + " elements");
  auto n = std::make_shared<TensorNode<T>>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  return Tensor(std::move(n));
}

template <typename T>
Tensor<T> Tensor<T>::uniform(Shape shape, Rng& rng, T lo, T hi) {
  auto t = zeros(std::move(shape));
  for (T& v : t.values()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1)
    throw ContractError("item: tensor " + shape_str(shape()) + " is not a scalar");
  return node_->value[0];
}

template <typename T>
T& Tensor<T>::at(std::initializer_list<size_t> idx) {
  if (idx.size() != rank())
    throw DimensionError("at: rank mismatch for " + shape_str(shape()));
  size_t off = 0;
  size_t axis = 0;
  for (size_t i : idx) off = off * node_->shape[axis] + i, ++axis;
  return node_->value[off];
}

template <typename T>
T Tensor<T>::at(std::initializer_list<size_t> idx) const {
  return const_cast<Tensor<T>*>(this)->at(idx);
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool on) {
  node_->requires_grad = on;
  if (on)
    node_->ensure_grad();
  else
    node_->grad.clear();
  return *this;
}

template <typename T>
const std::vector<T>& Tensor<T>::grad() const {
  if (!node_->requires_grad) throw ContractError("grad: tensor does not track gradients");
  const_cast<TensorNode<T>*>(node_.get())->ensure_grad();
  return node_->grad;
}

template <typename T>
std::vector<T>& Tensor<T>::grad() {
  if (!node_->requires_grad) throw ContractError("grad: tensor does not track gradients");
  node_->ensure_grad();
  return node_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (node_->requires_grad) node_->grad.assign(node_->value.size(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::make_op(Shape shape, std::vector<T> value, std::vector<Tensor> inputs,
                             std::function<void(TensorNode<T>&)> backprop) {
  auto out = from(std::move(shape), std::move(value));
  if (!grad_enabled()) return out;
  bool needs = false;
  for (const auto& in : inputs)
    if (in.defined() && in.requires_grad()) needs = true;
  if (!needs) return out;
  auto n = out.node();
  n->requires_grad = true;
  n->parents.reserve(inputs.size());
  for (const auto& in : inputs) n->parents.push_back(in.node());
  n->backprop = std::move(backprop);
  return out;
}

template <typename T>
void Tensor<T>::backward(T seed) const {
  if (!defined() || numel() != 1)
    throw ContractError("backward: loss must be a defined scalar");
  if (!node_->requires_grad) return;

  // Topological order over the recorded graph (children before parents after
  // reversal). Iterative DFS; graphs can be deep on long sequences.
  std::vector<TensorNode<T>*> order;
  std::unordered_set<TensorNode<T>*> seen;
  struct Frame {
    TensorNode<T>* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({node_.get(), 0});
  seen.insert(node_.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      TensorNode<T>* p = f.node->parents[f.next_parent++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  // Interior gradients are scratch for this pass; leaf gradients accumulate.
  for (TensorNode<T>* n : order) {
    if (!n->is_leaf())
      n->grad.assign(n->value.size(), T(0));
    else
      n->ensure_grad();
  }
  node_->grad[0] += seed;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode<T>* n = *it;
    if (n->backprop) n->backprop(*n);
  }
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace lineread
