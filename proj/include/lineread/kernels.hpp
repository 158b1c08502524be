// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace lineread::kernels {

// Global thread budget for the OpenMP kernels. n <= 1 disables parallel
// regions entirely. Every kernel computes each output element with a fixed
// serial reduction order and parallelizes only across independent outputs,
// so results are identical for every thread count.
void set_threads(int n);
int threads();
bool parallel();

// c[m x n] = a[m x k] * b[k x n]
template <typename T>
void matmul_nn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n);

// c[m x n] = a[m x k] * b^T, b stored [n x k]
template <typename T>
void matmul_nt(const T* a, const T* b, T* c, size_t m, size_t k, size_t n);

// c[m x n] = a^T * b, a stored [k x m], b stored [k x n]
template <typename T>
void matmul_tn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n);

// 2-D convolution, zero 'same' padding in ceil mode:
//   oh = ceil(h / sh), ow = ceil(w / sw), pad split evenly (extra at bottom/right).
// x: [ci x h x w], wt: [co x ci x kh x kw], bias: [co] (may be null), y: [co x oh x ow]
struct Conv2dShape {
  size_t ci, h, w;
  size_t co, kh, kw;
  size_t sh, sw;
  size_t oh() const { return (h + sh - 1) / sh; }
  size_t ow() const { return (w + sw - 1) / sw; }
  // top/left zero padding
  size_t pad_top() const {
    const size_t span = (oh() - 1) * sh + kh;
    return span > h ? (span - h) / 2 : 0;
  }
  size_t pad_left() const {
    const size_t span = (ow() - 1) * sw + kw;
    return span > w ? (span - w) / 2 : 0;
  }
};

template <typename T>
void conv2d_forward(const T* x, const T* wt, const T* bias, T* y, const Conv2dShape& s);

template <typename T>
void conv2d_backward_input(const T* dy, const T* wt, T* dx, const Conv2dShape& s);

template <typename T>
void conv2d_backward_weights(const T* dy, const T* x, T* dw, T* db, const Conv2dShape& s);

// Row-wise softmax with max subtraction. -inf entries map to exactly 0.
// Returns false if some row is entirely -inf (fully masked).
template <typename T>
bool softmax_rows(const T* x, T* y, size_t rows, size_t cols);

// dx = y .* (dy - rowdot(dy, y)) per row, given softmax output y.
template <typename T>
void softmax_rows_backward(const T* y, const T* dy, T* dx, size_t rows, size_t cols);

// Per-row normalization over the feature axis with affine gain/bias:
//   y[i][j] = gain[j] * (x[i][j] - mu_i) / sqrt(var_i + eps) + bias[j]
// mu/var are written out (length rows) for the backward pass.
template <typename T>
void layer_norm_rows(const T* x, const T* gain, const T* bias, T* y, T* mu, T* var,
                     size_t rows, size_t cols, T eps);

template <typename T>
void layer_norm_rows_backward(const T* x, const T* gain, const T* mu, const T* var,
                              const T* dy, T* dx, T* dgain, T* dbias,
                              size_t rows, size_t cols, T eps);

// Serial reference implementations, kept for correctness tests and the
// kernel benchmark. Same contracts as above.
namespace ref {

template <typename T>
void matmul_nn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n);
template <typename T>
void matmul_nt(const T* a, const T* b, T* c, size_t m, size_t k, size_t n);
template <typename T>
void matmul_tn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n);
template <typename T>
void conv2d_forward(const T* x, const T* wt, const T* bias, T* y, const Conv2dShape& s);
template <typename T>
bool softmax_rows(const T* x, T* y, size_t rows, size_t cols);
template <typename T>
void layer_norm_rows(const T* x, const T* gain, const T* bias, T* y, T* mu, T* var,
                     size_t rows, size_t cols, T eps);

}  // namespace ref

}  // namespace lineread::kernels
