// Copyright 2026 The lineread Authors
// SPDX-License-Identifier: Apache-2.0

#include "lineread/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lineread::kernels {

namespace {
int g_threads = 1;
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n <= 0) n = omp_get_num_procs();
  omp_set_num_threads(std::max(1, n));
#else
  if (n <= 0) n = 1;
#endif
  g_threads = std::max(1, n);
}

int threads() { return g_threads; }
bool parallel() { return g_threads > 1; }

// ---------------------------------------------------------------------------
// matmul: ikj order, output row i accumulated with k ascending. The parallel
// variants split over output rows only, so each element keeps the reference
// reduction order.
// ---------------------------------------------------------------------------

template <typename T>
void matmul_nn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  const bool par = parallel();
  const long lm = static_cast<long>(m);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < lm; ++i) {
    T* crow = c + static_cast<size_t>(i) * n;
    std::fill(crow, crow + n, T(0));
    const T* arow = a + static_cast<size_t>(i) * k;
    for (size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      const T* brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void matmul_nt(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  const bool par = parallel();
  const long lm = static_cast<long>(m);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < lm; ++i) {
    const T* arow = a + static_cast<size_t>(i) * k;
    T* crow = c + static_cast<size_t>(i) * n;
    for (size_t j = 0; j < n; ++j) {
      const T* brow = b + j * k;
      T acc = T(0);
      for (size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = acc;
    }
  }
}

template <typename T>
void matmul_tn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  const bool par = parallel();
  const long lm = static_cast<long>(m);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < lm; ++i) {
    T* crow = c + static_cast<size_t>(i) * n;
    std::fill(crow, crow + n, T(0));
    for (size_t p = 0; p < k; ++p) {
      const T av = a[p * m + static_cast<size_t>(i)];
      if (av == T(0)) continue;
      const T* brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// ---------------------------------------------------------------------------
// conv2d, ceil-mode 'same' zero padding
// ---------------------------------------------------------------------------

template <typename T>
void conv2d_forward(const T* x, const T* wt, const T* bias, T* y, const Conv2dShape& s) {
  const size_t oh = s.oh(), ow = s.ow();
  const size_t pt = s.pad_top(), pl = s.pad_left();
  const bool par = parallel();
  const long total = static_cast<long>(s.co * oh);
#pragma omp parallel for schedule(static) if (par)
  for (long idx = 0; idx < total; ++idx) {
    const size_t co = static_cast<size_t>(idx) / oh;
    const size_t oy = static_cast<size_t>(idx) % oh;
    T* yrow = y + (co * oh + oy) * ow;
    const T b = bias ? bias[co] : T(0);
    std::fill(yrow, yrow + ow, b);
    for (size_t ci = 0; ci < s.ci; ++ci) {
      for (size_t ky = 0; ky < s.kh; ++ky) {
        const long iy = static_cast<long>(oy * s.sh + ky) - static_cast<long>(pt);
        if (iy < 0 || iy >= static_cast<long>(s.h)) continue;
        const T* xrow = x + (ci * s.h + static_cast<size_t>(iy)) * s.w;
        const T* wrow = wt + ((co * s.ci + ci) * s.kh + ky) * s.kw;
        for (size_t kx = 0; kx < s.kw; ++kx) {
          const T wv = wrow[kx];
          if (wv == T(0)) continue;
          // valid output columns: 0 <= ox*sw + kx - pl < w
          for (size_t ox = 0; ox < ow; ++ox) {
            const long ix = static_cast<long>(ox * s.sw + kx) - static_cast<long>(pl);
            if (ix < 0 || ix >= static_cast<long>(s.w)) continue;
            yrow[ox] += wv * xrow[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_input(const T* dy, const T* wt, T* dx, const Conv2dShape& s) {
  const size_t oh = s.oh(), ow = s.ow();
  const size_t pt = s.pad_top(), pl = s.pad_left();
  const bool par = parallel();
  const long lci = static_cast<long>(s.ci);
#pragma omp parallel for schedule(static) if (par)
  for (long lc = 0; lc < lci; ++lc) {
    const size_t ci = static_cast<size_t>(lc);
    T* dxc = dx + ci * s.h * s.w;
    std::fill(dxc, dxc + s.h * s.w, T(0));
    for (size_t co = 0; co < s.co; ++co) {
      for (size_t ky = 0; ky < s.kh; ++ky) {
        const T* wrow = wt + ((co * s.ci + ci) * s.kh + ky) * s.kw;
        for (size_t oy = 0; oy < oh; ++oy) {
          const long iy = static_cast<long>(oy * s.sh + ky) - static_cast<long>(pt);
          if (iy < 0 || iy >= static_cast<long>(s.h)) continue;
          const T* dyrow = dy + (co * oh + oy) * ow;
          T* dxrow = dxc + static_cast<size_t>(iy) * s.w;
          for (size_t kx = 0; kx < s.kw; ++kx) {
            const T wv = wrow[kx];
            if (wv == T(0)) continue;
            for (size_t ox = 0; ox < ow; ++ox) {
              const long ix = static_cast<long>(ox * s.sw + kx) - static_cast<long>(pl);
              if (ix < 0 || ix >= static_cast<long>(s.w)) continue;
              dxrow[ix] += wv * dyrow[ox];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward_weights(const T* dy, const T* x, T* dw, T* db, const Conv2dShape& s) {
  const size_t oh = s.oh(), ow = s.ow();
  const size_t pt = s.pad_top(), pl = s.pad_left();
  const bool par = parallel();
  const long lco = static_cast<long>(s.co);
#pragma omp parallel for schedule(static) if (par)
  for (long lc = 0; lc < lco; ++lc) {
    const size_t co = static_cast<size_t>(lc);
    if (db) {
      T acc = T(0);
      const T* dyc = dy + co * oh * ow;
      for (size_t i = 0; i < oh * ow; ++i) acc += dyc[i];
      db[co] = acc;
    }
    for (size_t ci = 0; ci < s.ci; ++ci) {
      for (size_t ky = 0; ky < s.kh; ++ky) {
        T* dwrow = dw + ((co * s.ci + ci) * s.kh + ky) * s.kw;
        std::fill(dwrow, dwrow + s.kw, T(0));
        for (size_t kx = 0; kx < s.kw; ++kx) {
          T acc = T(0);
          for (size_t oy = 0; oy < oh; ++oy) {
            const long iy = static_cast<long>(oy * s.sh + ky) - static_cast<long>(pt);
            if (iy < 0 || iy >= static_cast<long>(s.h)) continue;
            const T* dyrow = dy + (co * oh + oy) * ow;
            const T* xrow = x + (ci * s.h + static_cast<size_t>(iy)) * s.w;
            for (size_t ox = 0; ox < ow; ++ox) {
              const long ix = static_cast<long>(ox * s.sw + kx) - static_cast<long>(pl);
              if (ix < 0 || ix >= static_cast<long>(s.w)) continue;
              acc += dyrow[ox] * xrow[ix];
            }
          }
          dwrow[kx] = acc;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// softmax / layer norm
// ---------------------------------------------------------------------------

template <typename T>
bool softmax_rows(const T* x, T* y, size_t rows, size_t cols) {
  const bool par = parallel();
  bool ok = true;
  const long lr = static_cast<long>(rows);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < lr; ++i) {
    const T* xr = x + static_cast<size_t>(i) * cols;
    T* yr = y + static_cast<size_t>(i) * cols;
    T mx = -std::numeric_limits<T>::infinity();
    for (size_t j = 0; j < cols; ++j) mx = std::max(mx, xr[j]);
    if (std::isinf(mx) && mx < T(0)) {
      ok = false;
      continue;
    }
    T sum = T(0);
    for (size_t j = 0; j < cols; ++j) {
      const T e = std::exp(xr[j] - mx);
      yr[j] = e;
      sum += e;
    }
    const T inv = T(1) / sum;
    for (size_t j = 0; j < cols; ++j) yr[j] *= inv;
  }
  return ok;
}

template <typename T>
void softmax_rows_backward(const T* y, const T* dy, T* dx, size_t rows, size_t cols) {
  const bool par = parallel();
  const long lr = static_cast<long>(rows);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < lr; ++i) {
    const T* yr = y + static_cast<size_t>(i) * cols;
    const T* gr = dy + static_cast<size_t>(i) * cols;
    T* dr = dx + static_cast<size_t>(i) * cols;
    T dot = T(0);
    for (size_t j = 0; j < cols; ++j) dot += gr[j] * yr[j];
    for (size_t j = 0; j < cols; ++j) dr[j] = yr[j] * (gr[j] - dot);
  }
}

template <typename T>
void layer_norm_rows(const T* x, const T* gain, const T* bias, T* y, T* mu, T* var,
                     size_t rows, size_t cols, T eps) {
  const bool par = parallel();
  const long lr = static_cast<long>(rows);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < lr; ++i) {
    const T* xr = x + static_cast<size_t>(i) * cols;
    T* yr = y + static_cast<size_t>(i) * cols;
    T m = T(0);
    for (size_t j = 0; j < cols; ++j) m += xr[j];
    m /= static_cast<T>(cols);
    T v = T(0);
    for (size_t j = 0; j < cols; ++j) {
      const T d = xr[j] - m;
      v += d * d;
    }
    v /= static_cast<T>(cols);
    mu[i] = m;
    var[i] = v;
    const T inv = T(1) / std::sqrt(v + eps);
    for (size_t j = 0; j < cols; ++j) yr[j] = gain[j] * (xr[j] - m) * inv + bias[j];
  }
}

template <typename T>
void layer_norm_rows_backward(const T* x, const T* gain, const T* mu, const T* var,
                              const T* dy, T* dx, T* dgain, T* dbias,
                              size_t rows, size_t cols, T eps) {
  // dgain/dbias accumulate across rows; keep that reduction serial so the
  // result does not depend on the thread count.
  for (size_t i = 0; i < rows; ++i) {
    const T* xr = x + i * cols;
    const T* gr = dy + i * cols;
    const T inv = T(1) / std::sqrt(var[i] + eps);
    for (size_t j = 0; j < cols; ++j) {
      dgain[j] += gr[j] * (xr[j] - mu[i]) * inv;
      dbias[j] += gr[j];
    }
  }
  const bool par = parallel();
  const long lr = static_cast<long>(rows);
#pragma omp parallel for schedule(static) if (par)
  for (long i = 0; i < lr; ++i) {
    const T* xr = x + static_cast<size_t>(i) * cols;
    const T* gr = dy + static_cast<size_t>(i) * cols;
    T* dr = dx + static_cast<size_t>(i) * cols;
    const T m = mu[i];
    const T inv = T(1) / std::sqrt(var[i] + eps);
    // dxhat = dy .* gain; dx = inv * (dxhat - mean(dxhat) - xhat * mean(dxhat .* xhat))
    T s1 = T(0), s2 = T(0);
    for (size_t j = 0; j < cols; ++j) {
      const T dxh = gr[j] * gain[j];
      const T xh = (xr[j] - m) * inv;
      s1 += dxh;
      s2 += dxh * xh;
    }
    s1 /= static_cast<T>(cols);
    s2 /= static_cast<T>(cols);
    for (size_t j = 0; j < cols; ++j) {
      const T dxh = gr[j] * gain[j];
      const T xh = (xr[j] - m) * inv;
      dr[j] = inv * (dxh - s1 - xh * s2);
    }
  }
}

// ---------------------------------------------------------------------------
// serial reference
// ---------------------------------------------------------------------------

namespace ref {

template <typename T>
void matmul_nn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

template <typename T>
void matmul_nt(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
      c[i * n + j] = acc;
    }
}

template <typename T>
void matmul_tn(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) {
      T acc = T(0);
      for (size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
      c[i * n + j] = acc;
    }
}

template <typename T>
void conv2d_forward(const T* x, const T* wt, const T* bias, T* y, const Conv2dShape& s) {
  const size_t oh = s.oh(), ow = s.ow();
  const size_t pt = s.pad_top(), pl = s.pad_left();
  for (size_t co = 0; co < s.co; ++co)
    for (size_t oy = 0; oy < oh; ++oy)
      for (size_t ox = 0; ox < ow; ++ox) {
        T acc = bias ? bias[co] : T(0);
        for (size_t ci = 0; ci < s.ci; ++ci)
          for (size_t ky = 0; ky < s.kh; ++ky)
            for (size_t kx = 0; kx < s.kw; ++kx) {
              const long iy = static_cast<long>(oy * s.sh + ky) - static_cast<long>(pt);
              const long ix = static_cast<long>(ox * s.sw + kx) - static_cast<long>(pl);
              if (iy < 0 || iy >= static_cast<long>(s.h)) continue;
              if (ix < 0 || ix >= static_cast<long>(s.w)) continue;
              acc += wt[((co * s.ci + ci) * s.kh + ky) * s.kw + kx] *
                     x[(ci * s.h + static_cast<size_t>(iy)) * s.w + static_cast<size_t>(ix)];
            }
        y[(co * oh + oy) * ow + ox] = acc;
      }
}

template <typename T>
bool softmax_rows(const T* x, T* y, size_t rows, size_t cols) {
  for (size_t i = 0; i < rows; ++i) {
    const T* xr = x + i * cols;
    T* yr = y + i * cols;
    T mx = -std::numeric_limits<T>::infinity();
    for (size_t j = 0; j < cols; ++j) mx = std::max(mx, xr[j]);
    if (std::isinf(mx) && mx < T(0)) return false;
    T sum = T(0);
    for (size_t j = 0; j < cols; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      sum += yr[j];
    }
    for (size_t j = 0; j < cols; ++j) yr[j] /= sum;
  }
  return true;
}

template <typename T>
void layer_norm_rows(const T* x, const T* gain, const T* bias, T* y, T* mu, T* var,
                     size_t rows, size_t cols, T eps) {
  for (size_t i = 0; i < rows; ++i) {
    T m = T(0), v = T(0);
    for (size_t j = 0; j < cols; ++j) m += x[i * cols + j];
    m /= static_cast<T>(cols);
    for (size_t j = 0; j < cols; ++j) {
      const T d = x[i * cols + j] - m;
      v += d * d;
    }
    v /= static_cast<T>(cols);
    mu[i] = m;
    var[i] = v;
    for (size_t j = 0; j < cols; ++j)
      y[i * cols + j] = gain[j] * (x[i * cols + j] - m) / std::sqrt(v + eps) + bias[j];
  }
}

#define LINEREAD_INSTANTIATE_REF(T)                                                        \
  template void matmul_nn<T>(const T*, const T*, T*, size_t, size_t, size_t);              \
  template void matmul_nt<T>(const T*, const T*, T*, size_t, size_t, size_t);              \
  template void matmul_tn<T>(const T*, const T*, T*, size_t, size_t, size_t);              \
  template void conv2d_forward<T>(const T*, const T*, const T*, T*, const Conv2dShape&);   \
  template bool softmax_rows<T>(const T*, T*, size_t, size_t);                             \
  template void layer_norm_rows<T>(const T*, const T*, const T*, T*, T*, T*, size_t,       \
                                   size_t, T);

LINEREAD_INSTANTIATE_REF(float)
LINEREAD_INSTANTIATE_REF(double)
#undef LINEREAD_INSTANTIATE_REF

}  // namespace ref

#define LINEREAD_INSTANTIATE_KERNELS(T)                                                    \
  template void matmul_nn<T>(const T*, const T*, T*, size_t, size_t, size_t);              \
  template void matmul_nt<T>(const T*, const T*, T*, size_t, size_t, size_t);              \
  template void matmul_tn<T>(const T*, const T*, T*, size_t, size_t, size_t);              \
  template void conv2d_forward<T>(const T*, const T*, const T*, T*, const Conv2dShape&);   \
  template void conv2d_backward_input<T>(const T*, const T*, T*, const Conv2dShape&);      \
  template void conv2d_backward_weights<T>(const T*, const T*, T*, T*, const Conv2dShape&);\
  template bool softmax_rows<T>(const T*, T*, size_t, size_t);                             \
  template void softmax_rows_backward<T>(const T*, const T*, T*, size_t, size_t);          \
  template void layer_norm_rows<T>(const T*, const T*, const T*, T*, T*, T*, size_t,       \
                                   size_t, T);                                             \
  template void layer_norm_rows_backward<T>(const T*, const T*, const T*, const T*,        \
                                            const T*, T*, T*, T*, size_t, size_t, T);

LINEREAD_INSTANTIATE_KERNELS(float)
LINEREAD_INSTANTIATE_KERNELS(double)
#undef LINEREAD_INSTANTIATE_KERNELS

}  // namespace lineread::kernels
