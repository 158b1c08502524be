// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#include "lineread/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lineread/kernels.hpp"

namespace lineread {

namespace {

template <typename T>
void accumulate(const std::shared_ptr<TensorNode<T>>& p, const std::vector<T>& g) {
  if (!p->requires_grad) return;
  p->ensure_grad();
  for (size_t i = 0; i < g.size(); ++i) p->grad[i] += g[i];
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}

template <typename T>
void require_rank2(const Tensor<T>& x, const char* op) {
  if (x.rank() != 2)
    throw DimensionError(std::string(op) + ": expected rank-2 tensor, got " +
                         shape_str(x.shape()));
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  std::vector<T> out(a.numel());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return Tensor<T>::make_op(a.shape(), std::move(out), {a, b}, [](TensorNode<T>& self) {
    accumulate(self.parents[0], self.grad);
    accumulate(self.parents[1], self.grad);
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  std::vector<T> out(a.numel());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return Tensor<T>::make_op(a.shape(), std::move(out), {a, b}, [](TensorNode<T>& self) {
    accumulate(self.parents[0], self.grad);
    if (self.parents[1]->requires_grad) {
      auto& p = *self.parents[1];
      p.ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] -= self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  std::vector<T> out(a.numel());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return Tensor<T>::make_op(a.shape(), std::move(out), {a, b}, [](TensorNode<T>& self) {
    const auto& av = self.parents[0]->value;
    const auto& bv = self.parents[1]->value;
    if (self.parents[0]->requires_grad) {
      auto& p = *self.parents[0];
      p.ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * bv[i];
    }
    if (self.parents[1]->requires_grad) {
      auto& p = *self.parents[1];
      p.ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * av[i];
    }
  });
}

template <typename T>
Tensor<T> scalar_mul(const Tensor<T>& a, T c) {
  std::vector<T> out(a.numel());
  const auto& av = a.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] * c;
  return Tensor<T>::make_op(a.shape(), std::move(out), {a}, [c](TensorNode<T>& self) {
    if (self.parents[0]->requires_grad) {
      auto& p = *self.parents[0];
      p.ensure_grad();
      for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * c;
    }
  });
}

template <typename T>
Tensor<T> add_row_bias(const Tensor<T>& m, const Tensor<T>& b) {
  require_rank2(m, "add_row_bias");
  const size_t rows = m.extent(0), cols = m.extent(1);
  if (b.rank() != 1 || b.extent(0) != cols)
    throw DimensionError("add_row_bias: bias " + shape_str(b.shape()) +
                         " does not match matrix " + shape_str(m.shape()));
  std::vector<T> out(m.numel());
  const auto& mv = m.values();
  const auto& bv = b.values();
  for (size_t i = 0; i < rows; ++i)
    for (size_t j = 0; j < cols; ++j) out[i * cols + j] = mv[i * cols + j] + bv[j];
  return Tensor<T>::make_op(m.shape(), std::move(out), {m, b},
                            [rows, cols](TensorNode<T>& self) {
                              accumulate(self.parents[0], self.grad);
                              if (self.parents[1]->requires_grad) {
                                auto& p = *self.parents[1];
                                p.ensure_grad();
                                for (size_t i = 0; i < rows; ++i)
                                  for (size_t j = 0; j < cols; ++j)
                                    p.grad[j] += self.grad[i * cols + j];
                              }
                            });
}

namespace {

enum class MatKind { NN, NT, TN };

template <typename T>
Tensor<T> matmul_impl(const Tensor<T>& a, const Tensor<T>& b, MatKind kind, const char* op) {
  require_rank2(a, op);
  require_rank2(b, op);
  size_t m, k, n, bk;
  switch (kind) {
    case MatKind::NN: m = a.extent(0), k = a.extent(1), n = b.extent(1), bk = b.extent(0); break;
    case MatKind::NT: m = a.extent(0), k = a.extent(1), n = b.extent(0), bk = b.extent(1); break;
    case MatKind::TN: m = a.extent(1), k = a.extent(0), n = b.extent(1), bk = b.extent(0); break;
  }
  if (k != bk)
    throw DimensionError(std::string(op) + ": " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()) + " inner dimensions disagree");
  std::vector<T> out(m * n);
  switch (kind) {
    case MatKind::NN: kernels::matmul_nn(a.values().data(), b.values().data(), out.data(), m, k, n); break;
    case MatKind::NT: kernels::matmul_nt(a.values().data(), b.values().data(), out.data(), m, k, n); break;
    case MatKind::TN: kernels::matmul_tn(a.values().data(), b.values().data(), out.data(), m, k, n); break;
  }
  return Tensor<T>::make_op(
      Shape{m, n}, std::move(out), {a, b}, [m, k, n, kind](TensorNode<T>& self) {
        const auto& av = self.parents[0]->value;
        const auto& bv = self.parents[1]->value;
        const auto& g = self.grad;
        if (self.parents[0]->requires_grad) {
          auto& p = *self.parents[0];
          p.ensure_grad();
          std::vector<T> da(av.size());
          switch (kind) {
            case MatKind::NN: kernels::matmul_nt(g.data(), bv.data(), da.data(), m, n, k); break;
            case MatKind::NT: kernels::matmul_nn(g.data(), bv.data(), da.data(), m, n, k); break;
            case MatKind::TN: kernels::matmul_nt(bv.data(), g.data(), da.data(), k, n, m); break;
          }
          for (size_t i = 0; i < da.size(); ++i) p.grad[i] += da[i];
        }
        if (self.parents[1]->requires_grad) {
          auto& p = *self.parents[1];
          p.ensure_grad();
          std::vector<T> db(bv.size());
          switch (kind) {
            case MatKind::NN: kernels::matmul_tn(av.data(), g.data(), db.data(), k, m, n); break;
            case MatKind::NT: kernels::matmul_tn(g.data(), av.data(), db.data(), n, m, k); break;
            case MatKind::TN: kernels::matmul_nn(av.data(), g.data(), db.data(), k, m, n); break;
          }
          for (size_t i = 0; i < db.size(); ++i) p.grad[i] += db[i];
        }
      });
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  return matmul_impl(a, b, MatKind::NN, "matmul");
}
template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
  return matmul_impl(a, b, MatKind::NT, "matmul_nt");
}
template <typename T>
Tensor<T> matmul_tn(const Tensor<T>& a, const Tensor<T>& b) {
  return matmul_impl(a, b, MatKind::TN, "matmul_tn");
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
  require_rank2(x, "transpose");
  const size_t r = x.extent(0), c = x.extent(1);
  std::vector<T> out(x.numel());
  const auto& xv = x.values();
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) out[j * r + i] = xv[i * c + j];
  return Tensor<T>::make_op(Shape{c, r}, std::move(out), {x}, [r, c](TensorNode<T>& self) {
    if (!self.parents[0]->requires_grad) return;
    auto& p = *self.parents[0];
    p.ensure_grad();
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < c; ++j) p.grad[i * c + j] += self.grad[j * r + i];
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw DimensionError("reshape: " + shape_str(x.shape()) + " to " + shape_str(shape) +
                         " changes element count");
  return Tensor<T>::make_op(std::move(shape), x.values(), {x}, [](TensorNode<T>& self) {
    accumulate(self.parents[0], self.grad);
  });
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, size_t r0, size_t r1) {
  require_rank2(x, "slice_rows");
  const size_t rows = x.extent(0), cols = x.extent(1);
  if (r0 > r1 || r1 > rows)
    throw DimensionError("slice_rows: [" + std::to_string(r0) + "," + std::to_string(r1) +
                         ") out of " + shape_str(x.shape()));
  std::vector<T> out(x.values().begin() + r0 * cols, x.values().begin() + r1 * cols);
  return Tensor<T>::make_op(Shape{r1 - r0, cols}, std::move(out), {x},
                            [r0, cols](TensorNode<T>& self) {
                              if (!self.parents[0]->requires_grad) return;
                              auto& p = *self.parents[0];
                              p.ensure_grad();
                              for (size_t i = 0; i < self.grad.size(); ++i)
                                p.grad[r0 * cols + i] += self.grad[i];
                            });
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, size_t c0, size_t c1) {
  require_rank2(x, "slice_cols");
  const size_t rows = x.extent(0), cols = x.extent(1);
  if (c0 > c1 || c1 > cols)
    throw DimensionError("slice_cols: [" + std::to_string(c0) + "," + std::to_string(c1) +
                         ") out of " + shape_str(x.shape()));
  const size_t width = c1 - c0;
  std::vector<T> out(rows * width);
  const auto& xv = x.values();
  for (size_t i = 0; i < rows; ++i)
    std::copy(xv.begin() + i * cols + c0, xv.begin() + i * cols + c1, out.begin() + i * width);
  return Tensor<T>::make_op(Shape{rows, width}, std::move(out), {x},
                            [rows, cols, c0, width](TensorNode<T>& self) {
                              if (!self.parents[0]->requires_grad) return;
                              auto& p = *self.parents[0];
                              p.ensure_grad();
                              for (size_t i = 0; i < rows; ++i)
                                for (size_t j = 0; j < width; ++j)
                                  p.grad[i * cols + c0 + j] += self.grad[i * width + j];
                            });
}

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const size_t cols = parts[0].extent(1);
  size_t rows = 0;
  for (const auto& p : parts) {
    require_rank2(p, "concat_rows");
    if (p.extent(1) != cols)
      throw DimensionError("concat_rows: column mismatch " + shape_str(p.shape()));
    rows += p.extent(0);
  }
  std::vector<T> out;
  out.reserve(rows * cols);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return Tensor<T>::make_op(Shape{rows, cols}, std::move(out), parts,
                            [](TensorNode<T>& self) {
                              size_t off = 0;
                              for (auto& p : self.parents) {
                                const size_t n = p->value.size();
                                if (p->requires_grad) {
                                  p->ensure_grad();
                                  for (size_t i = 0; i < n; ++i) p->grad[i] += self.grad[off + i];
                                }
                                off += n;
                              }
                            });
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const size_t rows = parts[0].extent(0);
  size_t cols = 0;
  for (const auto& p : parts) {
    require_rank2(p, "concat_cols");
    if (p.extent(0) != rows)
      throw DimensionError("concat_cols: row mismatch " + shape_str(p.shape()));
    cols += p.extent(1);
  }
  std::vector<T> out(rows * cols);
  size_t off = 0;
  for (const auto& p : parts) {
    const size_t pc = p.extent(1);
    const auto& pv = p.values();
    for (size_t i = 0; i < rows; ++i)
      std::copy(pv.begin() + i * pc, pv.begin() + (i + 1) * pc, out.begin() + i * cols + off);
    off += pc;
  }
  return Tensor<T>::make_op(Shape{rows, cols}, std::move(out), parts,
                            [rows, cols](TensorNode<T>& self) {
                              size_t off = 0;
                              for (auto& p : self.parents) {
                                const size_t pc = p->shape[1];
                                if (p->requires_grad) {
                                  p->ensure_grad();
                                  for (size_t i = 0; i < rows; ++i)
                                    for (size_t j = 0; j < pc; ++j)
                                      p->grad[i * pc + j] += self.grad[i * cols + off + j];
                                }
                                off += pc;
                              }
                            });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> out(x.numel());
  const auto& xv = x.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] = xv[i] > T(0) ? xv[i] : T(0);
  return Tensor<T>::make_op(x.shape(), std::move(out), {x}, [](TensorNode<T>& self) {
    if (!self.parents[0]->requires_grad) return;
    auto& p = *self.parents[0];
    p.ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i)
      if (p.value[i] > T(0)) p.grad[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  constexpr double inv_sqrt2pi = 0.3989422804014326779;
  std::vector<T> out(x.numel());
  const auto& xv = x.values();
  for (size_t i = 0; i < out.size(); ++i) {
    const double v = static_cast<double>(xv[i]);
    out[i] = static_cast<T>(0.5 * v * (1.0 + std::erf(v * inv_sqrt2)));
  }
  return Tensor<T>::make_op(x.shape(), std::move(out), {x}, [=](TensorNode<T>& self) {
    if (!self.parents[0]->requires_grad) return;
    auto& p = *self.parents[0];
    p.ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) {
      const double v = static_cast<double>(p.value[i]);
      const double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
      const double pdf = inv_sqrt2pi * std::exp(-0.5 * v * v);
      p.grad[i] += self.grad[i] * static_cast<T>(cdf + v * pdf);
    }
  });
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0)
    throw ConfigError("dropout: rate " + std::to_string(p) + " outside [0,1)");
  if (!training || p == 0.0) return x;
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  auto mask = std::make_shared<std::vector<T>>(x.numel());
  std::vector<T> out(x.numel());
  const auto& xv = x.values();
  for (size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.uniform() >= p ? scale : T(0);
    out[i] = xv[i] * (*mask)[i];
  }
  return Tensor<T>::make_op(x.shape(), std::move(out), {x}, [mask](TensorNode<T>& self) {
    if (!self.parents[0]->requires_grad) return;
    auto& pn = *self.parents[0];
    pn.ensure_grad();
    for (size_t i = 0; i < self.grad.size(); ++i) pn.grad[i] += self.grad[i] * (*mask)[i];
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, size_t axis) {
  if (x.rank() == 0 || x.rank() > 2)
    throw DimensionError("softmax: expected rank 1 or 2, got " + shape_str(x.shape()));
  if (axis >= x.rank())
    throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for " +
                         shape_str(x.shape()));
  const bool along_cols = (x.rank() == 1) || axis == 1;
  const Tensor<T> input = along_cols ? x : transpose(x);
  const size_t rows = input.rank() == 1 ? 1 : input.extent(0);
  const size_t cols = input.rank() == 1 ? input.extent(0) : input.extent(1);
  std::vector<T> out(input.numel());
  if (!kernels::softmax_rows(input.values().data(), out.data(), rows, cols))
    throw NumericError("fully masked attention row");
  auto result = Tensor<T>::make_op(
      input.shape(), std::move(out), {input}, [rows, cols](TensorNode<T>& self) {
        if (!self.parents[0]->requires_grad) return;
        auto& p = *self.parents[0];
        p.ensure_grad();
        std::vector<T> dx(self.value.size());
        kernels::softmax_rows_backward(self.value.data(), self.grad.data(), dx.data(), rows,
                                       cols);
        for (size_t i = 0; i < dx.size(); ++i) p.grad[i] += dx[i];
      });
  return along_cols ? result : transpose(result);
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                     T eps) {
  if (!(eps > T(0))) throw ConfigError("layer_norm: eps must be positive");
  require_rank2(x, "layer_norm");
  const size_t rows = x.extent(0), cols = x.extent(1);
  if (gain.rank() != 1 || gain.extent(0) != cols || bias.rank() != 1 || bias.extent(0) != cols)
    throw DimensionError("layer_norm: affine params do not match feature axis of " +
                         shape_str(x.shape()));
  std::vector<T> out(x.numel());
  auto mu = std::make_shared<std::vector<T>>(rows);
  auto var = std::make_shared<std::vector<T>>(rows);
  kernels::layer_norm_rows(x.values().data(), gain.values().data(), bias.values().data(),
                           out.data(), mu->data(), var->data(), rows, cols, eps);
  return Tensor<T>::make_op(
      x.shape(), std::move(out), {x, gain, bias},
      [rows, cols, eps, mu, var](TensorNode<T>& self) {
        auto& px = *self.parents[0];
        auto& pg = *self.parents[1];
        auto& pb = *self.parents[2];
        std::vector<T> dx(px.value.size(), T(0));
        std::vector<T> dgain(cols, T(0)), dbias(cols, T(0));
        kernels::layer_norm_rows_backward(px.value.data(), pg.value.data(), mu->data(),
                                          var->data(), self.grad.data(), dx.data(),
                                          dgain.data(), dbias.data(), rows, cols, eps);
        if (px.requires_grad) {
          px.ensure_grad();
          for (size_t i = 0; i < dx.size(); ++i) px.grad[i] += dx[i];
        }
        if (pg.requires_grad) {
          pg.ensure_grad();
          for (size_t j = 0; j < cols; ++j) pg.grad[j] += dgain[j];
        }
        if (pb.requires_grad) {
          pb.ensure_grad();
          for (size_t j = 0; j < cols; ++j) pb.grad[j] += dbias[j];
        }
      });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc = T(0);
  for (T v : x.values()) acc += v;
  return Tensor<T>::make_op(Shape{}, {acc}, {x}, [](TensorNode<T>& self) {
    if (!self.parents[0]->requires_grad) return;
    auto& p = *self.parents[0];
    p.ensure_grad();
    const T g = self.grad[0];
    for (size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += g;
  });
}

template <typename T>
Tensor<T> embedding(const Tensor<T>& table, const std::vector<int>& ids) {
  require_rank2(table, "embedding");
  const size_t vocab = table.extent(0), f = table.extent(1);
  std::vector<T> out(ids.size() * f);
  const auto& tv = table.values();
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<size_t>(ids[i]) >= vocab)
      throw VocabularyError("embedding: index " + std::to_string(ids[i]) +
                            " outside table " + shape_str(table.shape()));
    std::copy(tv.begin() + ids[i] * f, tv.begin() + (ids[i] + 1) * f, out.begin() + i * f);
  }
  return Tensor<T>::make_op(Shape{ids.size(), f}, std::move(out), {table},
                            [ids, f](TensorNode<T>& self) {
                              if (!self.parents[0]->requires_grad) return;
                              auto& p = *self.parents[0];
                              p.ensure_grad();
                              for (size_t i = 0; i < ids.size(); ++i)
                                for (size_t j = 0; j < f; ++j)
                                  p.grad[ids[i] * f + j] += self.grad[i * f + j];
                            });
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                 size_t stride_h, size_t stride_w) {
  if (x.rank() != 3 || w.rank() != 4)
    throw DimensionError("conv2d: input " + shape_str(x.shape()) + " weight " +
                         shape_str(w.shape()));
  if (stride_h < 1 || stride_w < 1) throw ConfigError("conv2d: strides must be >= 1");
  kernels::Conv2dShape s{};
  s.ci = x.extent(0), s.h = x.extent(1), s.w = x.extent(2);
  s.co = w.extent(0), s.kh = w.extent(2), s.kw = w.extent(3);
  s.sh = stride_h, s.sw = stride_w;
  if (w.extent(1) != s.ci)
    throw DimensionError("conv2d: weight channels " + shape_str(w.shape()) +
                         " do not match input " + shape_str(x.shape()));
  if (b.defined() && (b.rank() != 1 || b.extent(0) != s.co))
    throw DimensionError("conv2d: bias " + shape_str(b.shape()) + " does not match " +
                         std::to_string(s.co) + " output channels");
  if (s.w == 0 || s.h == 0) throw DataError("conv2d: empty spatial extent");
  std::vector<T> out(s.co * s.oh() * s.ow());
  kernels::conv2d_forward(x.values().data(), w.values().data(),
                          b.defined() ? b.values().data() : nullptr, out.data(), s);
  std::vector<Tensor<T>> inputs = b.defined() ? std::vector<Tensor<T>>{x, w, b}
                                              : std::vector<Tensor<T>>{x, w};
  return Tensor<T>::make_op(
      Shape{s.co, s.oh(), s.ow()}, std::move(out), inputs, [s](TensorNode<T>& self) {
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        if (px.requires_grad) {
          px.ensure_grad();
          std::vector<T> dx(px.value.size());
          kernels::conv2d_backward_input(self.grad.data(), pw.value.data(), dx.data(), s);
          for (size_t i = 0; i < dx.size(); ++i) px.grad[i] += dx[i];
        }
        const bool has_bias = self.parents.size() == 3;
        const bool need_w = pw.requires_grad;
        const bool need_b = has_bias && self.parents[2]->requires_grad;
        if (need_w || need_b) {
          std::vector<T> dw(pw.value.size());
          std::vector<T> db(s.co);
          kernels::conv2d_backward_weights(self.grad.data(), px.value.data(), dw.data(),
                                           db.data(), s);
          if (need_w) {
            pw.ensure_grad();
            for (size_t i = 0; i < dw.size(); ++i) pw.grad[i] += dw[i];
          }
          if (need_b) {
            auto& pb = *self.parents[2];
            pb.ensure_grad();
            for (size_t i = 0; i < db.size(); ++i) pb.grad[i] += db[i];
          }
        }
      });
}

template <typename T>
Tensor<T> masked_cross_entropy(const Tensor<T>& probs, const Tensor<T>& targets,
                               const std::vector<uint8_t>& row_mask) {
  require_rank2(probs, "masked_cross_entropy");
  require_same_shape(probs, targets, "masked_cross_entropy");
  const size_t rows = probs.extent(0), cols = probs.extent(1);
  if (row_mask.size() != rows)
    throw DimensionError("masked_cross_entropy: mask length " +
                         std::to_string(row_mask.size()) + " vs " + std::to_string(rows) +
                         " rows");
  size_t active = 0;
  for (uint8_t m : row_mask) active += m ? 1 : 0;
  if (active == 0) throw ContractError("masked_cross_entropy: all positions padded");
  const T tiny = std::numeric_limits<T>::min();
  const auto& pv = probs.values();
  const auto& tv = targets.values();
  double loss = 0.0;
  for (size_t i = 0; i < rows; ++i) {
    if (!row_mask[i]) continue;
    for (size_t j = 0; j < cols; ++j) {
      const T t = tv[i * cols + j];
      if (t == T(0)) continue;
      loss -= static_cast<double>(t) *
              std::log(static_cast<double>(std::max(pv[i * cols + j], tiny)));
    }
  }
  loss /= static_cast<double>(active);
  const T inv_active = T(1) / static_cast<T>(active);
  return Tensor<T>::make_op(
      Shape{}, {static_cast<T>(loss)}, {probs, targets},
      [rows, cols, row_mask, inv_active, tiny](TensorNode<T>& self) {
        if (!self.parents[0]->requires_grad) return;
        auto& p = *self.parents[0];
        const auto& tv = self.parents[1]->value;
        p.ensure_grad();
        const T g = self.grad[0] * inv_active;
        for (size_t i = 0; i < rows; ++i) {
          if (!row_mask[i]) continue;
          for (size_t j = 0; j < cols; ++j) {
            const T t = tv[i * cols + j];
            if (t == T(0)) continue;
            p.grad[i * cols + j] -= g * t / std::max(p.value[i * cols + j], tiny);
          }
        }
      });
}

template <typename T>
Tensor<T> smooth_targets(const Tensor<T>& one_hot, T eps) {
  require_rank2(one_hot, "smooth_targets");
  if (eps < T(0) || eps >= T(1))
    throw ConfigError("smooth_targets: eps " + std::to_string(static_cast<double>(eps)) +
                      " outside [0,1)");
  const size_t rows = one_hot.extent(0), a = one_hot.extent(1);
  const T off = eps / static_cast<T>(a);
  const T on = T(1) - (static_cast<T>(a - 1) / static_cast<T>(a)) * eps;
  std::vector<T> out(one_hot.numel());
  const auto& xv = one_hot.values();
  for (size_t i = 0; i < rows; ++i) {
    size_t ones = 0;
    for (size_t j = 0; j < a; ++j) {
      const T v = xv[i * a + j];
      if (v == T(1))
        ++ones;
      else if (v != T(0))
        throw ContractError("smooth_targets: row " + std::to_string(i) + " is not one-hot");
      out[i * a + j] = v == T(1) ? on : off;
    }
    if (ones != 1)
      throw ContractError("smooth_targets: row " + std::to_string(i) + " is not one-hot");
  }
  return Tensor<T>::from(one_hot.shape(), std::move(out));
}

template <typename T>
Tensor<T> one_hot_rows(const std::vector<int>& ids, size_t width) {
  std::vector<T> out(ids.size() * width, T(0));
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<size_t>(ids[i]) >= width)
      throw VocabularyError("one_hot_rows: index " + std::to_string(ids[i]) +
                            " outside width " + std::to_string(width));
    out[i * width + ids[i]] = T(1);
  }
  return Tensor<T>::from(Shape{ids.size(), width}, std::move(out));
}

template <typename T>
size_t argmax_row(const Tensor<T>& x, size_t row) {
  const size_t cols = x.rank() == 1 ? x.extent(0) : x.extent(1);
  const T* base = x.values().data() + (x.rank() == 1 ? 0 : row * cols);
  size_t best = 0;
  for (size_t j = 1; j < cols; ++j)
    if (base[j] > base[best]) best = j;
  return best;
}

#define LINEREAD_INSTANTIATE_OPS(T)                                                       \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> scalar_mul(const Tensor<T>&, T);                                     \
  template Tensor<T> add_row_bias(const Tensor<T>&, const Tensor<T>&);                    \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> matmul_nt(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> matmul_tn(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> transpose(const Tensor<T>&);                                         \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                    \
  template Tensor<T> slice_rows(const Tensor<T>&, size_t, size_t);                        \
  template Tensor<T> slice_cols(const Tensor<T>&, size_t, size_t);                        \
  template Tensor<T> concat_rows(const std::vector<Tensor<T>>&);                          \
  template Tensor<T> concat_cols(const std::vector<Tensor<T>>&);                          \
  template Tensor<T> relu(const Tensor<T>&);                                              \
  template Tensor<T> gelu(const Tensor<T>&);                                              \
  template Tensor<T> dropout(const Tensor<T>&, double, bool, Rng&);                       \
  template Tensor<T> softmax(const Tensor<T>&, size_t);                                   \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T); \
  template Tensor<T> sum(const Tensor<T>&);                                               \
  template Tensor<T> embedding(const Tensor<T>&, const std::vector<int>&);                \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, size_t, \
                            size_t);                                                      \
  template Tensor<T> masked_cross_entropy(const Tensor<T>&, const Tensor<T>&,             \
                                          const std::vector<uint8_t>&);                   \
  template Tensor<T> smooth_targets(const Tensor<T>&, T);                                 \
  template Tensor<T> one_hot_rows<T>(const std::vector<int>&, size_t);                    \
  template size_t argmax_row(const Tensor<T>&, size_t);

LINEREAD_INSTANTIATE_OPS(float)
LINEREAD_INSTANTIATE_OPS(double)
#undef LINEREAD_INSTANTIATE_OPS

}  // namespace lineread
