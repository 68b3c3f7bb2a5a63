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

#include "depthvis/nn/ops.hpp"

#include <cmath>
#include <string>

#include "depthvis/core/error.hpp"
#include "depthvis/nn/kernels.hpp"

namespace depthvis::nn {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorKind::kShapeMismatch, what);
}

Node& parent(Node& self, int i) { return *self.parents[i]; }
bool wants(Node& self, int i) { return self.parents[i]->requires_grad; }

}  // namespace

Var constant(Tensor t) { return Var(std::move(t), false); }

Var add(const Var& a, const Var& b) {
  require(a.shape() == b.shape(), "add: " + a.value().shape_string() + " vs " + b.value().shape_string());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    for (int k = 0; k < 2; ++k) {
      if (wants(self, k)) accumulate(parent(self, k), self.grad);
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require(a.shape() == b.shape(), "sub shape mismatch");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b.value()[i];
  return make_result(std::move(out), {a, b}, [](Node& self) {
    if (wants(self, 0)) accumulate(parent(self, 0), self.grad);
    if (wants(self, 1)) {
      Tensor& g = parent(self, 1).grad_buffer();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= self.grad[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (auto& v : out.values()) v *= s;
  return make_result(std::move(out), {a}, [s](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += s * self.grad[i];
  });
}

Var relu(const Var& a) {
  Tensor out = a.value();
  for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
  return make_result(std::move(out), {a}, [](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      if (self.value[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Var gelu(const Var& a) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2 / pi)
  Tensor out = a.value();
  for (auto& v : out.values()) {
    const double x = v;
    v = 0.5 * x * (1.0 + std::tanh(kC * (x + 0.044715 * x * x * x)));
  }
  return make_result(std::move(out), {a}, [](Node& self) {
    Node& p = parent(self, 0);
    Tensor& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      const double x = p.value[i];
      const double u = kC * (x + 0.044715 * x * x * x);
      const double t = std::tanh(u);
      const double du = kC * (1.0 + 3.0 * 0.044715 * x * x);
      g[i] += self.grad[i] * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du);
    }
  });
}

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  require(x.value().rank() == 4 && w.value().rank() == 4, "conv2d expects 4-D input and weight");
  require(x.dim(1) == w.dim(1), "conv2d: input has " + std::to_string(x.dim(1)) +
                                    " channels, weight expects " + std::to_string(w.dim(1)));
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), stride, pad};
  Tensor out({g.batch, g.out_channels, g.out_h(), g.out_w()});
  const bool has_bias = b.defined();
  kernels::conv2d_forward(g, x.value().data(), w.value().data(),
                          has_bias ? b.value().data() : nullptr, out.data());
  std::vector<Var> parents{x, w};
  if (has_bias) parents.push_back(b);
  return make_result(std::move(out), parents, [g, has_bias](Node& self) {
    Node& xn = parent(self, 0);
    Node& wn = parent(self, 1);
    double* dx = wants(self, 0) ? xn.grad_buffer().data() : nullptr;
    double* dw = wants(self, 1) ? wn.grad_buffer().data() : nullptr;
    double* db = (has_bias && wants(self, 2)) ? parent(self, 2).grad_buffer().data() : nullptr;
    kernels::conv2d_backward(g, xn.value.data(), wn.value.data(), self.grad.data(), dx, dw, db);
  });
}

Var upsample_bilinear(const Var& x, int out_h, int out_w) {
  require(x.value().rank() == 4, "upsample expects [B,C,H,W]");
  const int planes = x.dim(0) * x.dim(1);
  const int ih = x.dim(2);
  const int iw = x.dim(3);
  if (ih == out_h && iw == out_w) return x;
  Tensor out({x.dim(0), x.dim(1), out_h, out_w});
  kernels::upsample_bilinear_forward(planes, ih, iw, out_h, out_w, x.value().data(), out.data());
  return make_result(std::move(out), {x}, [planes, ih, iw, out_h, out_w](Node& self) {
    kernels::upsample_bilinear_backward(planes, ih, iw, out_h, out_w, self.grad.data(),
                                        parent(self, 0).grad_buffer().data());
  });
}

Var avg_pool2(const Var& x) {
  require(x.value().rank() == 4, "avg_pool2 expects [B,C,H,W]");
  const int planes = x.dim(0) * x.dim(1);
  const int ih = x.dim(2);
  const int iw = x.dim(3);
  const int oh = ih / 2;
  const int ow = iw / 2;
  require(oh > 0 && ow > 0, "avg_pool2 input too small");
  Tensor out({x.dim(0), x.dim(1), oh, ow});
  const double* src = x.value().data();
  for (int p = 0; p < planes; ++p) {
    for (int y = 0; y < oh; ++y) {
      for (int xx = 0; xx < ow; ++xx) {
        const double* s = src + (static_cast<std::size_t>(p) * ih + 2 * y) * iw + 2 * xx;
        out[(static_cast<std::size_t>(p) * oh + y) * ow + xx] = 0.25 * (s[0] + s[1] + s[iw] + s[iw + 1]);
      }
    }
  }
  return make_result(std::move(out), {x}, [planes, ih, iw, oh, ow](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (int p = 0; p < planes; ++p) {
      for (int y = 0; y < oh; ++y) {
        for (int xx = 0; xx < ow; ++xx) {
          const double v = 0.25 * self.grad[(static_cast<std::size_t>(p) * oh + y) * ow + xx];
          double* d = g.data() + (static_cast<std::size_t>(p) * ih + 2 * y) * iw + 2 * xx;
          d[0] += v;
          d[1] += v;
          d[iw] += v;
          d[iw + 1] += v;
        }
      }
    }
  });
}

Var concat_channels(const std::vector<Var>& xs) {
  require(!xs.empty(), "concat_channels needs inputs");
  const int B = xs[0].dim(0);
  const int H = xs[0].dim(2);
  const int W = xs[0].dim(3);
  std::vector<int> channels;
  int total = 0;
  for (const auto& x : xs) {
    require(x.value().rank() == 4 && x.dim(0) == B && x.dim(2) == H && x.dim(3) == W,
            "concat_channels shape mismatch");
    channels.push_back(x.dim(1));
    total += x.dim(1);
  }
  const std::size_t plane = static_cast<std::size_t>(H) * W;
  Tensor out({B, total, H, W});
  for (int n = 0; n < B; ++n) {
    int offset = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double* src = xs[k].value().data() + static_cast<std::size_t>(n) * channels[k] * plane;
      double* dst = out.data() + (static_cast<std::size_t>(n) * total + offset) * plane;
      std::copy(src, src + channels[k] * plane, dst);
      offset += channels[k];
    }
  }
  return make_result(std::move(out), xs, [channels, B, total, plane](Node& self) {
    for (int n = 0; n < B; ++n) {
      int offset = 0;
      for (std::size_t k = 0; k < channels.size(); ++k) {
        if (wants(self, static_cast<int>(k))) {
          double* dst = parent(self, static_cast<int>(k)).grad_buffer().data() +
                        static_cast<std::size_t>(n) * channels[k] * plane;
          const double* src = self.grad.data() + (static_cast<std::size_t>(n) * total + offset) * plane;
          for (std::size_t i = 0; i < channels[k] * plane; ++i) dst[i] += src[i];
        }
        offset += channels[k];
      }
    }
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  require(x.value().rank() == 2 && w.value().rank() == 2 && x.dim(1) == w.dim(1),
          "linear: " + x.value().shape_string() + " x " + w.value().shape_string());
  const int M = x.dim(0);
  const int K = x.dim(1);
  const int O = w.dim(0);
  Tensor out({M, O});
  const bool has_bias = b.defined();
  if (has_bias) {
    for (int i = 0; i < M; ++i) {
      for (int o = 0; o < O; ++o) out.at(i, o) = b.value()[o];
    }
  }
  kernels::gemm_nt(M, O, K, x.value().data(), w.value().data(), out.data());
  std::vector<Var> parents{x, w};
  if (has_bias) parents.push_back(b);
  return make_result(std::move(out), parents, [M, K, O, has_bias](Node& self) {
    Node& xn = parent(self, 0);
    Node& wn = parent(self, 1);
    if (wants(self, 0)) kernels::gemm_nn(M, K, O, self.grad.data(), wn.value.data(), xn.grad_buffer().data());
    if (wants(self, 1)) kernels::gemm_tn(O, K, M, self.grad.data(), xn.value.data(), wn.grad_buffer().data());
    if (has_bias && wants(self, 2)) {
      Tensor& db = parent(self, 2).grad_buffer();
      for (int i = 0; i < M; ++i) {
        for (int o = 0; o < O; ++o) db[o] += self.grad.at(i, o);
      }
    }
  });
}

Var matmul(const Var& a, const Var& b) {
  require(a.value().rank() == 2 && b.value().rank() == 2 && a.dim(1) == b.dim(0),
          "matmul: " + a.value().shape_string() + " x " + b.value().shape_string());
  const int M = a.dim(0);
  const int K = a.dim(1);
  const int N = b.dim(1);
  Tensor out({M, N});
  kernels::gemm_nn(M, N, K, a.value().data(), b.value().data(), out.data());
  return make_result(std::move(out), {a, b}, [M, K, N](Node& self) {
    Node& an = parent(self, 0);
    Node& bn = parent(self, 1);
    if (wants(self, 0)) kernels::gemm_nt(M, K, N, self.grad.data(), bn.value.data(), an.grad_buffer().data());
    if (wants(self, 1)) kernels::gemm_tn(K, N, M, an.value.data(), self.grad.data(), bn.grad_buffer().data());
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  require(a.value().rank() == 2 && b.value().rank() == 2 && a.dim(1) == b.dim(1),
          "matmul_nt: " + a.value().shape_string() + " x " + b.value().shape_string());
  const int M = a.dim(0);
  const int K = a.dim(1);
  const int N = b.dim(0);
  Tensor out({M, N});
  kernels::gemm_nt(M, N, K, a.value().data(), b.value().data(), out.data());
  return make_result(std::move(out), {a, b}, [M, K, N](Node& self) {
    Node& an = parent(self, 0);
    Node& bn = parent(self, 1);
    if (wants(self, 0)) kernels::gemm_nn(M, K, N, self.grad.data(), bn.value.data(), an.grad_buffer().data());
    if (wants(self, 1)) kernels::gemm_tn(N, K, M, self.grad.data(), an.value.data(), bn.grad_buffer().data());
  });
}

Var transpose(const Var& a) {
  require(a.value().rank() == 2, "transpose expects a matrix");
  const int M = a.dim(0);
  const int N = a.dim(1);
  Tensor out({N, M});
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < N; ++j) out.at(j, i) = a.value().at(i, j);
  }
  return make_result(std::move(out), {a}, [M, N](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < N; ++j) g.at(i, j) += self.grad.at(j, i);
    }
  });
}

Var softmax_rows(const Var& a) {
  require(a.value().rank() == 2, "softmax_rows expects a matrix");
  const int M = a.dim(0);
  const int N = a.dim(1);
  Tensor out({M, N});
  for (int i = 0; i < M; ++i) {
    double mx = a.value().at(i, 0);
    for (int j = 1; j < N; ++j) mx = std::max(mx, a.value().at(i, j));
    double s = 0.0;
    for (int j = 0; j < N; ++j) {
      out.at(i, j) = std::exp(a.value().at(i, j) - mx);
      s += out.at(i, j);
    }
    for (int j = 0; j < N; ++j) out.at(i, j) /= s;
  }
  return make_result(std::move(out), {a}, [M, N](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (int i = 0; i < M; ++i) {
      double dot = 0.0;
      for (int j = 0; j < N; ++j) dot += self.grad.at(i, j) * self.value.at(i, j);
      for (int j = 0; j < N; ++j) g.at(i, j) += self.value.at(i, j) * (self.grad.at(i, j) - dot);
    }
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta) {
  require(x.value().rank() == 2 && gamma.value().numel() == static_cast<std::size_t>(x.dim(1)),
          "layer_norm shape mismatch");
  constexpr double kEps = 1e-5;
  const int M = x.dim(0);
  const int D = x.dim(1);
  Tensor out({M, D});
  Tensor xhat({M, D});
  std::vector<double> inv_std(M);
  for (int i = 0; i < M; ++i) {
    double mean = 0.0;
    for (int j = 0; j < D; ++j) mean += x.value().at(i, j);
    mean /= D;
    double var = 0.0;
    for (int j = 0; j < D; ++j) {
      const double d = x.value().at(i, j) - mean;
      var += d * d;
    }
    var /= D;
    inv_std[i] = 1.0 / std::sqrt(var + kEps);
    for (int j = 0; j < D; ++j) {
      xhat.at(i, j) = (x.value().at(i, j) - mean) * inv_std[i];
      out.at(i, j) = xhat.at(i, j) * gamma.value()[j] + beta.value()[j];
    }
  }
  return make_result(std::move(out), {x, gamma, beta},
                     [M, D, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
    Node& gn = parent(self, 1);
    if (wants(self, 1) || wants(self, 2)) {
      for (int i = 0; i < M; ++i) {
        for (int j = 0; j < D; ++j) {
          if (wants(self, 1)) gn.grad_buffer()[j] += self.grad.at(i, j) * xhat.at(i, j);
          if (wants(self, 2)) parent(self, 2).grad_buffer()[j] += self.grad.at(i, j);
        }
      }
    }
    if (wants(self, 0)) {
      Tensor& g = parent(self, 0).grad_buffer();
      for (int i = 0; i < M; ++i) {
        double s1 = 0.0;
        double s2 = 0.0;
        for (int j = 0; j < D; ++j) {
          const double gy = self.grad.at(i, j) * gn.value[j];
          s1 += gy;
          s2 += gy * xhat.at(i, j);
        }
        for (int j = 0; j < D; ++j) {
          const double gy = self.grad.at(i, j) * gn.value[j];
          g.at(i, j) += inv_std[i] * (gy - s1 / D - xhat.at(i, j) * s2 / D);
        }
      }
    }
  });
}

Var l2_normalize_rows(const Var& x) {
  require(x.value().rank() == 2, "l2_normalize_rows expects a matrix");
  constexpr double kEps = 1e-12;
  const int M = x.dim(0);
  const int D = x.dim(1);
  Tensor out({M, D});
  std::vector<double> norms(M);
  for (int i = 0; i < M; ++i) {
    double s = 0.0;
    for (int j = 0; j < D; ++j) s += x.value().at(i, j) * x.value().at(i, j);
    norms[i] = std::sqrt(s) + kEps;
    for (int j = 0; j < D; ++j) out.at(i, j) = x.value().at(i, j) / norms[i];
  }
  return make_result(std::move(out), {x}, [M, D, norms = std::move(norms)](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (int i = 0; i < M; ++i) {
      double dot = 0.0;
      for (int j = 0; j < D; ++j) dot += self.grad.at(i, j) * self.value.at(i, j);
      for (int j = 0; j < D; ++j) {
        g.at(i, j) += (self.grad.at(i, j) - self.value.at(i, j) * dot) / norms[i];
      }
    }
  });
}

Var reshape(const Var& a, std::vector<int> shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return make_result(std::move(out), {a}, [](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
  });
}

Var concat_dim0(const std::vector<Var>& xs) {
  require(!xs.empty(), "concat_dim0 needs inputs");
  std::vector<int> shape = xs[0].shape();
  int rows = 0;
  std::vector<std::size_t> sizes;
  for (const auto& x : xs) {
    std::vector<int> s = x.shape();
    require(s.size() == shape.size(), "concat_dim0 rank mismatch");
    for (std::size_t d = 1; d < s.size(); ++d) require(s[d] == shape[d], "concat_dim0 shape mismatch");
    rows += s[0];
    sizes.push_back(x.value().numel());
  }
  shape[0] = rows;
  Tensor out(shape);
  std::size_t offset = 0;
  for (const auto& x : xs) {
    std::copy(x.value().data(), x.value().data() + x.value().numel(), out.data() + offset);
    offset += x.value().numel();
  }
  return make_result(std::move(out), xs, [sizes](Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (wants(self, static_cast<int>(k))) {
        Tensor& g = parent(self, static_cast<int>(k)).grad_buffer();
        for (std::size_t i = 0; i < sizes[k]; ++i) g[i] += self.grad[offset + i];
      }
      offset += sizes[k];
    }
  });
}

Var slice_dim0(const Var& a, int begin, int end) {
  require(begin >= 0 && end <= a.dim(0) && begin <= end, "slice_dim0 out of range");
  std::vector<int> shape = a.shape();
  const std::size_t row = a.value().numel() / static_cast<std::size_t>(shape[0]);
  shape[0] = end - begin;
  Tensor out(shape);
  std::copy(a.value().data() + row * begin, a.value().data() + row * end, out.data());
  return make_result(std::move(out), {a}, [row, begin](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < self.grad.numel(); ++i) g[row * begin + i] += self.grad[i];
  });
}

Var image_tokens(const Var& x, int b) {
  require(x.value().rank() == 4 && b < x.dim(0), "image_tokens expects [B,C,H,W]");
  const int C = x.dim(1);
  const int P = x.dim(2) * x.dim(3);
  Tensor out({P, C});
  const double* src = x.value().data() + static_cast<std::size_t>(b) * C * P;
  for (int c = 0; c < C; ++c) {
    for (int p = 0; p < P; ++p) out.at(p, c) = src[static_cast<std::size_t>(c) * P + p];
  }
  return make_result(std::move(out), {x}, [b, C, P](Node& self) {
    double* dst = parent(self, 0).grad_buffer().data() + static_cast<std::size_t>(b) * C * P;
    for (int c = 0; c < C; ++c) {
      for (int p = 0; p < P; ++p) dst[static_cast<std::size_t>(c) * P + p] += self.grad.at(p, c);
    }
  });
}

Var tokens_to_image(const Var& t, int h, int w) {
  require(t.value().rank() == 2 && t.dim(0) == h * w, "tokens_to_image shape mismatch");
  const int C = t.dim(1);
  const int P = h * w;
  Tensor out({1, C, h, w});
  for (int c = 0; c < C; ++c) {
    for (int p = 0; p < P; ++p) out[static_cast<std::size_t>(c) * P + p] = t.value().at(p, c);
  }
  return make_result(std::move(out), {t}, [C, P](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (int c = 0; c < C; ++c) {
      for (int p = 0; p < P; ++p) g.at(p, c) += self.grad[static_cast<std::size_t>(c) * P + p];
    }
  });
}

Var sum_all(const Var& a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return make_result(Tensor({1}, {s}), {a}, [](Node& self) {
    Tensor& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[0];
  });
}

Var mean_all(const Var& a) { return scale(sum_all(a), 1.0 / static_cast<double>(a.value().numel())); }

Var weighted_sum(const std::vector<Var>& scalars, const std::vector<double>& weights) {
  require(scalars.size() == weights.size(), "weighted_sum arity mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    require(scalars[i].value().numel() == 1, "weighted_sum expects scalars");
    s += weights[i] * scalars[i].value()[0];
  }
  return make_result(Tensor({1}, {s}), scalars, [weights](Node& self) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (wants(self, static_cast<int>(i))) {
        parent(self, static_cast<int>(i)).grad_buffer()[0] += weights[i] * self.grad[0];
      }
    }
  });
}

Var custom_op(const std::vector<Var>& inputs, Tensor value,
              std::function<void(const Tensor&, std::vector<Tensor*>&)> grad_fn) {
  return make_result(std::move(value), inputs, [grad_fn = std::move(grad_fn)](Node& self) {
    std::vector<Tensor> scratch(self.parents.size());
    std::vector<Tensor*> grads(self.parents.size());
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      scratch[i] = Tensor(self.parents[i]->value.shape(), 0.0);
      grads[i] = &scratch[i];
    }
    grad_fn(self.grad, grads);
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      if (self.parents[i]->requires_grad) accumulate(*self.parents[i], scratch[i]);
    }
  });
}

}  // namespace depthvis::nn
