// Copyright 2026 The depthvis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "depthvis/nn/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

namespace depthvis::nn::kernels {

void gemm_nn(int M, int N, int K, const double* A, const double* B, double* C) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < M; ++i) {
    double* c = C + static_cast<std::size_t>(i) * N;
    const double* a = A + static_cast<std::size_t>(i) * K;
    for (int k = 0; k < K; ++k) {
      const double av = a[k];
      if (av == 0.0) continue;
      const double* b = B + static_cast<std::size_t>(k) * N;
      for (int j = 0; j < N; ++j) c[j] += av * b[j];
    }
  }
}

void gemm_nt(int M, int N, int K, const double* A, const double* B, double* C) {
  std::vector<double> bt(static_cast<std::size_t>(K) * N);
  for (int j = 0; j < N; ++j) {
    for (int k = 0; k < K; ++k) bt[static_cast<std::size_t>(k) * N + j] = B[static_cast<std::size_t>(j) * K + k];
  }
  gemm_nn(M, N, K, A, bt.data(), C);
}

void gemm_tn(int M, int N, int K, const double* A, const double* B, double* C) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < M; ++i) {
    double* c = C + static_cast<std::size_t>(i) * N;
    for (int k = 0; k < K; ++k) {
      const double av = A[static_cast<std::size_t>(k) * M + i];
      if (av == 0.0) continue;
      const double* b = B + static_cast<std::size_t>(k) * N;
      for (int j = 0; j < N; ++j) c[j] += av * b[j];
    }
  }
}

namespace {

void im2col(const ConvGeometry& g, const double* x, double* cols) {
  const int oh = g.out_h();
  const int ow = g.out_w();
  const int kk = g.kernel * g.kernel;
  const std::size_t P = static_cast<std::size_t>(oh) * ow;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < g.in_channels; ++c) {
    const double* plane = x + static_cast<std::size_t>(c) * g.in_h * g.in_w;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        double* row = cols + (static_cast<std::size_t>(c) * kk + ky * g.kernel + kx) * P;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          double* out = row + static_cast<std::size_t>(oy) * ow;
          if (iy < 0 || iy >= g.in_h) {
            std::fill(out, out + ow, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(iy) * g.in_w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            out[ox] = (ix >= 0 && ix < g.in_w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const ConvGeometry& g, const double* cols, double* dx) {
  const int oh = g.out_h();
  const int ow = g.out_w();
  const int kk = g.kernel * g.kernel;
  const std::size_t P = static_cast<std::size_t>(oh) * ow;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < g.in_channels; ++c) {
    double* plane = dx + static_cast<std::size_t>(c) * g.in_h * g.in_w;
    for (int ky = 0; ky < g.kernel; ++ky) {
      for (int kx = 0; kx < g.kernel; ++kx) {
        const double* row = cols + (static_cast<std::size_t>(c) * kk + ky * g.kernel + kx) * P;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.in_h) continue;
          double* dst = plane + static_cast<std::size_t>(iy) * g.in_w;
          const double* src = row + static_cast<std::size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.in_w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

struct BilinearTap {
  int i0;
  int i1;
  double w1;
};

std::vector<BilinearTap> bilinear_taps(int in, int out) {
  std::vector<BilinearTap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    src = std::max(src, 0.0);
    int i0 = static_cast<int>(src);
    i0 = std::min(i0, in - 1);
    const int i1 = std::min(i0 + 1, in - 1);
    taps[o] = {i0, i1, src - i0};
  }
  return taps;
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, const double* x, const double* w, const double* b,
                    double* y) {
  const int oh = g.out_h();
  const int ow = g.out_w();
  const std::size_t P = static_cast<std::size_t>(oh) * ow;
  const int ckk = g.in_channels * g.kernel * g.kernel;
  std::vector<double> cols(static_cast<std::size_t>(ckk) * P);
  for (int n = 0; n < g.batch; ++n) {
    const double* xb = x + static_cast<std::size_t>(n) * g.in_channels * g.in_h * g.in_w;
    double* yb = y + static_cast<std::size_t>(n) * g.out_channels * P;
    for (int o = 0; o < g.out_channels; ++o) {
      std::fill(yb + o * P, yb + (o + 1) * P, b != nullptr ? b[o] : 0.0);
    }
    im2col(g, xb, cols.data());
    gemm_nn(g.out_channels, static_cast<int>(P), ckk, w, cols.data(), yb);
  }
}

void conv2d_backward(const ConvGeometry& g, const double* x, const double* w, const double* dy,
                     double* dx, double* dw, double* db) {
  const int oh = g.out_h();
  const int ow = g.out_w();
  const std::size_t P = static_cast<std::size_t>(oh) * ow;
  const int ckk = g.in_channels * g.kernel * g.kernel;
  std::vector<double> cols(static_cast<std::size_t>(ckk) * P);
  for (int n = 0; n < g.batch; ++n) {
    const double* dyb = dy + static_cast<std::size_t>(n) * g.out_channels * P;
    if (db != nullptr) {
      for (int o = 0; o < g.out_channels; ++o) {
        double s = 0.0;
        for (std::size_t p = 0; p < P; ++p) s += dyb[o * P + p];
        db[o] += s;
      }
    }
    if (dw != nullptr) {
      im2col(g, x + static_cast<std::size_t>(n) * g.in_channels * g.in_h * g.in_w, cols.data());
      gemm_nt(g.out_channels, ckk, static_cast<int>(P), dyb, cols.data(), dw);
    }
    if (dx != nullptr) {
      std::fill(cols.begin(), cols.end(), 0.0);
      gemm_tn(ckk, static_cast<int>(P), g.out_channels, w, dyb, cols.data());
      col2im(g, cols.data(), dx + static_cast<std::size_t>(n) * g.in_channels * g.in_h * g.in_w);
    }
  }
}

void upsample_bilinear_forward(int planes, int ih, int iw, int oh, int ow, const double* x,
                               double* y) {
  const auto ty = bilinear_taps(ih, oh);
  const auto tx = bilinear_taps(iw, ow);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
    const double* src = x + static_cast<std::size_t>(p) * ih * iw;
    double* dst = y + static_cast<std::size_t>(p) * oh * ow;
    for (int oy = 0; oy < oh; ++oy) {
      const auto& a = ty[oy];
      const double* r0 = src + static_cast<std::size_t>(a.i0) * iw;
      const double* r1 = src + static_cast<std::size_t>(a.i1) * iw;
      for (int ox = 0; ox < ow; ++ox) {
        const auto& b = tx[ox];
        const double top = r0[b.i0] + (r0[b.i1] - r0[b.i0]) * b.w1;
        const double bot = r1[b.i0] + (r1[b.i1] - r1[b.i0]) * b.w1;
        dst[static_cast<std::size_t>(oy) * ow + ox] = top + (bot - top) * a.w1;
      }
    }
  }
}

void upsample_bilinear_backward(int planes, int ih, int iw, int oh, int ow, const double* dy,
                                double* dx) {
  const auto ty = bilinear_taps(ih, oh);
  const auto tx = bilinear_taps(iw, ow);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < planes; ++p) {
    const double* src = dy + static_cast<std::size_t>(p) * oh * ow;
    double* dst = dx + static_cast<std::size_t>(p) * ih * iw;
    for (int oy = 0; oy < oh; ++oy) {
      const auto& a = ty[oy];
      for (int ox = 0; ox < ow; ++ox) {
        const auto& b = tx[ox];
        const double g = src[static_cast<std::size_t>(oy) * ow + ox];
        const double gt = g * (1.0 - a.w1);
        const double gb = g * a.w1;
        dst[static_cast<std::size_t>(a.i0) * iw + b.i0] += gt * (1.0 - b.w1);
        dst[static_cast<std::size_t>(a.i0) * iw + b.i1] += gt * b.w1;
        dst[static_cast<std::size_t>(a.i1) * iw + b.i0] += gb * (1.0 - b.w1);
        dst[static_cast<std::size_t>(a.i1) * iw + b.i1] += gb * b.w1;
      }
    }
  }
}

}  // namespace depthvis::nn::kernels
