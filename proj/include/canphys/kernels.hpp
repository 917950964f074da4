// Copyright 2026 The canphys Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense-layer building blocks of the attention network, in two flavors:
//
//   kernels::serial   straight loop nests, kept as the reference for tests
//   kernels           OpenMP-parallel over channels, row-vectorized
//
// Tensors are channel-major [C][H][W]. Convolutions are 3x3, stride 1, zero
// "same" padding; weights are [Cout][Cin][3][3].

#include <algorithm>
#include <cstddef>

namespace canphys::kernels {

namespace serial {

template <class T>
void conv3x3_forward(const T* in, int cin, int h, int w, const T* weight, const T* bias, int cout,
                     T* out) {
  for (int co = 0; co < cout; ++co)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        T acc = bias[co];
        for (int ci = 0; ci < cin; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int sy = y + ky - 1;
              const int sx = x + kx - 1;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              acc += weight[((co * cin + ci) * 3 + ky) * 3 + kx] * in[(ci * h + sy) * w + sx];
            }
        out[(co * h + y) * w + x] = acc;
      }
}

/// grad_out [Cout][H][W] -> accumulates grad_weight, grad_bias; writes
/// grad_in (if non-null).
template <class T>
void conv3x3_backward(const T* in, int cin, int h, int w, const T* weight, int cout,
                      const T* grad_out, T* grad_in, T* grad_weight, T* grad_bias) {
  if (grad_in) std::fill(grad_in, grad_in + static_cast<std::size_t>(cin) * h * w, T(0));
  for (int co = 0; co < cout; ++co)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const T g = grad_out[(co * h + y) * w + x];
        grad_bias[co] += g;
        for (int ci = 0; ci < cin; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int sy = y + ky - 1;
              const int sx = x + kx - 1;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              const int wi = ((co * cin + ci) * 3 + ky) * 3 + kx;
              grad_weight[wi] += g * in[(ci * h + sy) * w + sx];
              if (grad_in) grad_in[(ci * h + sy) * w + sx] += g * weight[wi];
            }
      }
}

template <class T>
void avgpool2_forward(const T* in, int c, int h, int w, T* out) {
  const int oh = h / 2;
  const int ow = w / 2;
  for (int k = 0; k < c; ++k)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        const T* p = in + (k * h + 2 * y) * w + 2 * x;
        out[(k * oh + y) * ow + x] = (p[0] + p[1] + p[w] + p[w + 1]) * T(0.25);
      }
}

template <class T>
void avgpool2_backward(const T* grad_out, int c, int h, int w, T* grad_in) {
  const int oh = h / 2;
  const int ow = w / 2;
  for (int k = 0; k < c; ++k)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        grad_in[(k * h + y) * w + x] = grad_out[(k * oh + y / 2) * ow + x / 2] * T(0.25);
}

/// out[o] = bias[o] + sum_i weight[o][i] * in[i]
template <class T>
void dense_forward(const T* in, int n_in, const T* weight, const T* bias, int n_out, T* out) {
  for (int o = 0; o < n_out; ++o) {
    T acc = bias[o];
    for (int i = 0; i < n_in; ++i) acc += weight[static_cast<std::size_t>(o) * n_in + i] * in[i];
    out[o] = acc;
  }
}

template <class T>
void dense_backward(const T* in, int n_in, const T* weight, int n_out, const T* grad_out, T* grad_in,
                    T* grad_weight, T* grad_bias) {
  if (grad_in) std::fill(grad_in, grad_in + n_in, T(0));
  for (int o = 0; o < n_out; ++o) {
    const T g = grad_out[o];
    grad_bias[o] += g;
    for (int i = 0; i < n_in; ++i) {
      grad_weight[static_cast<std::size_t>(o) * n_in + i] += g * in[i];
      if (grad_in) grad_in[i] += g * weight[static_cast<std::size_t>(o) * n_in + i];
    }
  }
}

}  // namespace serial

// ---- parallel kernels ------------------------------------------------------

namespace detail {

// out_row[x] += k * in_row[x + dx] for the valid x range, in-row shift dx in {-1, 0, 1}.
template <class T>
inline void axpy_shifted(T* out_row, const T* in_row, int w, int dx, T k) {
  const int x0 = dx < 0 ? 1 : 0;
  const int x1 = dx > 0 ? w - 1 : w;
  const T* src = in_row + dx;
#pragma omp simd
  for (int x = x0; x < x1; ++x) out_row[x] += k * src[x];
}

}  // namespace detail

template <class T>
void conv3x3_forward(const T* in, int cin, int h, int w, const T* weight, const T* bias, int cout,
                     T* out) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    T* o = out + co * plane;
    std::fill(o, o + plane, bias[co]);
    for (int ci = 0; ci < cin; ++ci) {
      const T* src = in + ci * plane;
      const T* k = weight + (co * cin + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const int y0 = dy < 0 ? 1 : 0;
        const int y1 = dy > 0 ? h - 1 : h;
        for (int y = y0; y < y1; ++y) {
          T* orow = o + y * w;
          const T* irow = src + (y + dy) * w;
          detail::axpy_shifted(orow, irow, w, -1, k[ky * 3 + 0]);
          detail::axpy_shifted(orow, irow, w, 0, k[ky * 3 + 1]);
          detail::axpy_shifted(orow, irow, w, 1, k[ky * 3 + 2]);
        }
      }
    }
  }
}

template <class T>
void conv3x3_backward(const T* in, int cin, int h, int w, const T* weight, int cout,
                      const T* grad_out, T* grad_in, T* grad_weight, T* grad_bias) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  // Weight and bias gradients: one output channel per iteration.
#pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    const T* g = grad_out + co * plane;
    T bsum = 0;
    for (std::size_t i = 0; i < plane; ++i) bsum += g[i];
    grad_bias[co] += bsum;
    for (int ci = 0; ci < cin; ++ci) {
      const T* src = in + ci * plane;
      T* gk = grad_weight + (co * cin + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const int y0 = dy < 0 ? 1 : 0;
        const int y1 = dy > 0 ? h - 1 : h;
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const int x0 = dx < 0 ? 1 : 0;
          const int x1 = dx > 0 ? w - 1 : w;
          T acc = 0;
          for (int y = y0; y < y1; ++y) {
            const T* grow = g + y * w;
            const T* irow = src + (y + dy) * w + dx;
#pragma omp simd reduction(+ : acc)
            for (int x = x0; x < x1; ++x) acc += grow[x] * irow[x];
          }
          gk[ky * 3 + kx] += acc;
        }
      }
    }
  }
  if (!grad_in) return;
  // Input gradient: correlation with the flipped kernel, one input channel per iteration.
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < cin; ++ci) {
    T* gi = grad_in + ci * plane;
    std::fill(gi, gi + plane, T(0));
    for (int co = 0; co < cout; ++co) {
      const T* g = grad_out + co * plane;
      const T* k = weight + (co * cin + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = 1 - ky;
        const int y0 = dy < 0 ? 1 : 0;
        const int y1 = dy > 0 ? h - 1 : h;
        for (int y = y0; y < y1; ++y) {
          T* irow = gi + y * w;
          const T* grow = g + (y + dy) * w;
          detail::axpy_shifted(irow, grow, w, 1, k[ky * 3 + 0]);
          detail::axpy_shifted(irow, grow, w, 0, k[ky * 3 + 1]);
          detail::axpy_shifted(irow, grow, w, -1, k[ky * 3 + 2]);
        }
      }
    }
  }
}

template <class T>
void avgpool2_forward(const T* in, int c, int h, int w, T* out) {
  serial::avgpool2_forward(in, c, h, w, out);
}

template <class T>
void avgpool2_backward(const T* grad_out, int c, int h, int w, T* grad_in) {
  serial::avgpool2_backward(grad_out, c, h, w, grad_in);
}

template <class T>
void dense_forward(const T* in, int n_in, const T* weight, const T* bias, int n_out, T* out) {
#pragma omp parallel for schedule(static)
  for (int o = 0; o < n_out; ++o) {
    const T* row = weight + static_cast<std::size_t>(o) * n_in;
    T acc = 0;
#pragma omp simd reduction(+ : acc)
    for (int i = 0; i < n_in; ++i) acc += row[i] * in[i];
    out[o] = bias[o] + acc;
  }
}

template <class T>
void dense_backward(const T* in, int n_in, const T* weight, int n_out, const T* grad_out, T* grad_in,
                    T* grad_weight, T* grad_bias) {
#pragma omp parallel for schedule(static)
  for (int o = 0; o < n_out; ++o) {
    const T g = grad_out[o];
    grad_bias[o] += g;
    T* row = grad_weight + static_cast<std::size_t>(o) * n_in;
#pragma omp simd
    for (int i = 0; i < n_in; ++i) row[i] += g * in[i];
  }
  if (!grad_in) return;
  std::fill(grad_in, grad_in + n_in, T(0));
  for (int o = 0; o < n_out; ++o) {
    const T g = grad_out[o];
    const T* row = weight + static_cast<std::size_t>(o) * n_in;
#pragma omp simd
    for (int i = 0; i < n_in; ++i) grad_in[i] += g * row[i];
  }
}

}  // namespace canphys::kernels
