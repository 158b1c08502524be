// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "lineread/tensor.hpp"

namespace lineread {

// Differentiable tensor operations. Layout convention across the project:
// sequence tensors are position-major, [positions x features]; convolution
// feature maps are [channels x height x width].

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> scalar_mul(const Tensor<T>& a, T c);

// m[i][j] + b[j]
template <typename T>
Tensor<T> add_row_bias(const Tensor<T>& m, const Tensor<T>& b);

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);
// a * b^T with b stored [n x k]
template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b);
// a^T * b with a stored [k x m]
template <typename T>
Tensor<T> matmul_tn(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> transpose(const Tensor<T>& x);
template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, size_t r0, size_t r1);
template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, size_t c0, size_t c1);
template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts);
template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);
template <typename T>
Tensor<T> gelu(const Tensor<T>& x);

// Inverted dropout: keep with probability 1-p, scale kept values by 1/(1-p).
// Identity when training is false or p == 0.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, bool training, Rng& rng);

// Max-subtracted softmax along `axis` of a rank-1 or rank-2 tensor.
// -inf inputs map to exactly 0; a fully masked slice raises NumericError.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, size_t axis);

// Per-row normalization over the feature axis (columns) with affine params.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                     T eps);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

// Row gather: out[i] = table[ids[i]].
template <typename T>
Tensor<T> embedding(const Tensor<T>& table, const std::vector<int>& ids);

// 2-D convolution with ceil-mode 'same' zero padding (see kernels.hpp).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                 size_t stride_h, size_t stride_w);

// Mean over mask-selected rows of -sum_j targets[i][j] * ln(probs[i][j]).
// `targets` is a constant distribution per row; `row_mask` selects the rows
// that contribute to the mean.
template <typename T>
Tensor<T> masked_cross_entropy(const Tensor<T>& probs, const Tensor<T>& targets,
                               const std::vector<uint8_t>& row_mask);

// One-hot rows -> smoothed rows: zeros become eps/|A|, ones become
// 1 - (|A|-1)/|A| * eps. Input must be exactly one-hot per row.
template <typename T>
Tensor<T> smooth_targets(const Tensor<T>& one_hot, T eps);

template <typename T>
Tensor<T> one_hot_rows(const std::vector<int>& ids, size_t width);

// Index of the largest element in row `row`; ties break to the lowest index.
template <typename T>
size_t argmax_row(const Tensor<T>& x, size_t row);

}  // namespace lineread
