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

#pragma once

namespace depthvis::nn {

struct ConvGeometry {
  int batch = 1;
  int in_channels = 1;
  int in_h = 1;
  int in_w = 1;
  int out_channels = 1;
  int kernel = 3;
  int stride = 1;
  int pad = 1;

  int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
};

// OpenMP kernels used by the autograd ops. Every output element is produced by a
// single thread in a fixed order, so results do not depend on the thread count.
namespace kernels {

// C[M,N] += A[M,K] * B[K,N]
void gemm_nn(int M, int N, int K, const double* A, const double* B, double* C);
// C[M,N] += A[M,K] * B[N,K]^T
void gemm_nt(int M, int N, int K, const double* A, const double* B, double* C);
// C[M,N] += A[K,M]^T * B[K,N]
void gemm_tn(int M, int N, int K, const double* A, const double* B, double* C);

// y must hold batch*out_channels*out_h*out_w values; b may be null.
void conv2d_forward(const ConvGeometry& g, const double* x, const double* w, const double* b,
                    double* y);
// Accumulates into dx, dw, db; any of them may be null.
void conv2d_backward(const ConvGeometry& g, const double* x, const double* w, const double* dy,
                     double* dx, double* dw, double* db);

// Half-pixel-centred bilinear resize of `planes` independent HxW planes.
void upsample_bilinear_forward(int planes, int ih, int iw, int oh, int ow, const double* x,
                               double* y);
void upsample_bilinear_backward(int planes, int ih, int iw, int oh, int ow, const double* dy,
                                double* dx);

}  // namespace kernels

// Serial, direct-loop versions kept as the reference the kernels are tested against.
namespace reference {

void gemm_nn(int M, int N, int K, const double* A, const double* B, double* C);
void gemm_nt(int M, int N, int K, const double* A, const double* B, double* C);
void gemm_tn(int M, int N, int K, const double* A, const double* B, double* C);
void conv2d_forward(const ConvGeometry& g, const double* x, const double* w, const double* b,
                    double* y);
void conv2d_backward(const ConvGeometry& g, const double* x, const double* w, const double* dy,
                     double* dx, double* dw, double* db);
void upsample_bilinear_forward(int planes, int ih, int iw, int oh, int ow, const double* x,
                               double* y);
void upsample_bilinear_backward(int planes, int ih, int iw, int oh, int ow, const double* dy,
                                double* dx);

}  // namespace reference

}  // namespace depthvis::nn
