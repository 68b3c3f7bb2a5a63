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

#include <algorithm>
#include <cstddef>

#include "depthvis/nn/kernels.hpp"

namespace depthvis::nn::reference {

void gemm_nn(int M, int N, int K, const double* A, const double* B, double* C) {
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += A[i * K + k] * B[k * N + j];
      C[i * N + j] += s;
    }
  }
}

void gemm_nt(int M, int N, int K, const double* A, const double* B, double* C) {
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += A[i * K + k] * B[j * K + k];
      C[i * N + j] += s;
    }
  }
}

void gemm_tn(int M, int N, int K, const double* A, const double* B, double* C) {
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += A[k * M + i] * B[k * N + j];
      C[i * N + j] += s;
    }
  }
}

namespace {

std::size_t xi(const ConvGeometry& g, int n, int c, int y, int x) {
  return ((static_cast<std::size_t>(n) * g.in_channels + c) * g.in_h + y) * g.in_w + x;
}
std::size_t yi(const ConvGeometry& g, int n, int o, int y, int x) {
  return ((static_cast<std::size_t>(n) * g.out_channels + o) * g.out_h() + y) * g.out_w() + x;
}
std::size_t wi(const ConvGeometry& g, int o, int c, int ky, int kx) {
  return ((static_cast<std::size_t>(o) * g.in_channels + c) * g.kernel + ky) * g.kernel + kx;
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, const double* x, const double* w, const double* b,
                    double* y) {
  for (int n = 0; n < g.batch; ++n) {
    for (int o = 0; o < g.out_channels; ++o) {
      for (int oy = 0; oy < g.out_h(); ++oy) {
        for (int ox = 0; ox < g.out_w(); ++ox) {
          double s = b != nullptr ? b[o] : 0.0;
          for (int c = 0; c < g.in_channels; ++c) {
            for (int ky = 0; ky < g.kernel; ++ky) {
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int iy = oy * g.stride - g.pad + ky;
                const int ix = ox * g.stride - g.pad + kx;
                if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) continue;
                s += w[wi(g, o, c, ky, kx)] * x[xi(g, n, c, iy, ix)];
              }
            }
          }
          y[yi(g, n, o, oy, ox)] = s;
        }
      }
    }
  }
}

void conv2d_backward(const ConvGeometry& g, const double* x, const double* w, const double* dy,
                     double* dx, double* dw, double* db) {
  for (int n = 0; n < g.batch; ++n) {
    for (int o = 0; o < g.out_channels; ++o) {
      for (int oy = 0; oy < g.out_h(); ++oy) {
        for (int ox = 0; ox < g.out_w(); ++ox) {
          const double gy = dy[yi(g, n, o, oy, ox)];
          if (db != nullptr) db[o] += gy;
          for (int c = 0; c < g.in_channels; ++c) {
            for (int ky = 0; ky < g.kernel; ++ky) {
              for (int kx = 0; kx < g.kernel; ++kx) {
                const int iy = oy * g.stride - g.pad + ky;
                const int ix = ox * g.stride - g.pad + kx;
                if (iy < 0 || iy >= g.in_h || ix < 0 || ix >= g.in_w) continue;
                if (dw != nullptr) dw[wi(g, o, c, ky, kx)] += gy * x[xi(g, n, c, iy, ix)];
                if (dx != nullptr) dx[xi(g, n, c, iy, ix)] += gy * w[wi(g, o, c, ky, kx)];
              }
            }
          }
        }
      }
    }
  }
}

namespace {

void source_coord(int o, int in, int out, int* i0, int* i1, double* frac) {
  double src = (o + 0.5) * static_cast<double>(in) / out - 0.5;
  if (src < 0.0) src = 0.0;
  *i0 = std::min(static_cast<int>(src), in - 1);
  *i1 = std::min(*i0 + 1, in - 1);
  *frac = src - *i0;
}

}  // namespace

void upsample_bilinear_forward(int planes, int ih, int iw, int oh, int ow, const double* x,
                               double* y) {
  for (int p = 0; p < planes; ++p) {
    for (int oy = 0; oy < oh; ++oy) {
      int y0, y1;
      double fy;
      source_coord(oy, ih, oh, &y0, &y1, &fy);
      for (int ox = 0; ox < ow; ++ox) {
        int x0, x1;
        double fx;
        source_coord(ox, iw, ow, &x0, &x1, &fx);
        const double* src = x + static_cast<std::size_t>(p) * ih * iw;
        const double v = (1 - fy) * ((1 - fx) * src[y0 * iw + x0] + fx * src[y0 * iw + x1]) +
                         fy * ((1 - fx) * src[y1 * iw + x0] + fx * src[y1 * iw + x1]);
        y[(static_cast<std::size_t>(p) * oh + oy) * ow + ox] = v;
      }
    }
  }
}

void upsample_bilinear_backward(int planes, int ih, int iw, int oh, int ow, const double* dy,
                                double* dx) {
  for (int p = 0; p < planes; ++p) {
    for (int oy = 0; oy < oh; ++oy) {
      int y0, y1;
      double fy;
      source_coord(oy, ih, oh, &y0, &y1, &fy);
      for (int ox = 0; ox < ow; ++ox) {
        int x0, x1;
        double fx;
        source_coord(ox, iw, ow, &x0, &x1, &fx);
        const double g = dy[(static_cast<std::size_t>(p) * oh + oy) * ow + ox];
        double* dst = dx + static_cast<std::size_t>(p) * ih * iw;
        dst[y0 * iw + x0] += g * (1 - fy) * (1 - fx);
        dst[y0 * iw + x1] += g * (1 - fy) * fx;
        dst[y1 * iw + x0] += g * fy * (1 - fx);
        dst[y1 * iw + x1] += g * fy * fx;
      }
    }
  }
}

}  // namespace depthvis::nn::reference
