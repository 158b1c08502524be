// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "lineread/errors.hpp"
#include "lineread/rng.hpp"

namespace lineread {

using Shape = std::vector<size_t>;

size_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

// Thread-local autograd switch. Ops record backward closures only while
// enabled; inference runs under NoGradGuard and builds no graph.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // sized like value iff gradients are tracked
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backprop;  // accumulates this->grad into parents

  bool is_leaf() const { return !backprop; }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }
};

// Dense row-major tensor handle with reverse-mode gradient tracking.
// Copies share storage; values are treated as immutable once produced by an
// op, except gradient accumulation.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, T v);
  static Tensor ones(Shape shape) { return full(std::move(shape), T(1)); }
  static Tensor scalar(T v) { return full(Shape{}, v); }
  static Tensor from(Shape shape, std::vector<T> values);
  // Uniform in [lo, hi); draws consumed in row-major order.
  static Tensor uniform(Shape shape, Rng& rng, T lo, T hi);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  size_t rank() const { return node_->shape.size(); }
  size_t numel() const { return node_->value.size(); }
  size_t extent(size_t axis) const { return node_->shape.at(axis); }

  std::vector<T>& values() { return node_->value; }
  const std::vector<T>& values() const { return node_->value; }

  T item() const;
  T& at(std::initializer_list<size_t> idx);
  T at(std::initializer_list<size_t> idx) const;

  Tensor& set_requires_grad(bool on);
  bool requires_grad() const { return node_->requires_grad; }
  const std::vector<T>& grad() const;
  std::vector<T>& grad();
  void zero_grad();

  // Reverse pass from this scalar; leaf gradients accumulate across calls.
  void backward(T seed = T(1)) const;

  std::shared_ptr<TensorNode<T>> node() const { return node_; }

  // Wraps an op result. Attaches parents and the backward rule only when the
  // graph is being recorded and some input requires gradients.
  static Tensor make_op(Shape shape, std::vector<T> value,
                        std::vector<Tensor> inputs,
                        std::function<void(TensorNode<T>&)> backprop);

 private:
  explicit Tensor(std::shared_ptr<TensorNode<T>> n) : node_(std::move(n)) {}
  std::shared_ptr<TensorNode<T>> node_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace lineread
