// cada/graph.cc

// Copyright 2026 CADA-GAN Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "cada/graph.h"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

namespace cada {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapCM = Eigen::Map<const MatRM>;

std::atomic<int64_t> g_node_counter{0};

bool AnyRequiresGrad(const std::vector<Var>& parents) {
  for (const auto& p : parents)
    if (p->requires_grad) return true;
  return false;
}

int64_t ConvOutDim(int64_t in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Patch matrix [C*kh*kw, OH*OW] for one sample x [C,H,W]; column p holds the
// receptive field of output position p in (c, ki, kj) order.
void Im2Col(const double* x, int64_t c_in, int64_t h, int64_t w, int kh, int kw, int stride,
            int pad, int64_t oh, int64_t ow, double* col) {
  const int64_t p_total = oh * ow;
  int64_t row = 0;
  for (int64_t c = 0; c < c_in; ++c) {
    const double* xc = x + c * h * w;
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj, ++row) {
        double* out = col + row * p_total;
        for (int64_t oi = 0; oi < oh; ++oi) {
          int64_t ii = oi * stride - pad + ki;
          if (ii < 0 || ii >= h) {
            for (int64_t oj = 0; oj < ow; ++oj) out[oi * ow + oj] = 0.0;
            continue;
          }
          const double* xrow = xc + ii * w;
          for (int64_t oj = 0; oj < ow; ++oj) {
            int64_t jj = oj * stride - pad + kj;
            out[oi * ow + oj] = (jj < 0 || jj >= w) ? 0.0 : xrow[jj];
          }
        }
      }
    }
  }
}

// Scatter-add of a patch matrix back onto one sample's gradient.
void Col2ImAdd(const double* col, int64_t c_in, int64_t h, int64_t w, int kh, int kw, int stride,
               int pad, int64_t oh, int64_t ow, double* dx) {
  const int64_t p_total = oh * ow;
  int64_t row = 0;
  for (int64_t c = 0; c < c_in; ++c) {
    double* dxc = dx + c * h * w;
    for (int ki = 0; ki < kh; ++ki) {
      for (int kj = 0; kj < kw; ++kj, ++row) {
        const double* in = col + row * p_total;
        for (int64_t oi = 0; oi < oh; ++oi) {
          int64_t ii = oi * stride - pad + ki;
          if (ii < 0 || ii >= h) continue;
          double* dxrow = dxc + ii * w;
          for (int64_t oj = 0; oj < ow; ++oj) {
            int64_t jj = oj * stride - pad + kj;
            if (jj >= 0 && jj < w) dxrow[jj] += in[oi * ow + oj];
          }
        }
      }
    }
  }
}

}  // namespace

Var MakeNode(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = AnyRequiresGrad(parents);
  n->parents = std::move(parents);
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  n->id = ++g_node_counter;
  return n;
}

Var Tape::Input(const Tensor& t) {
  auto n = std::make_shared<Node>();
  n->value = t;
  n->requires_grad = false;
  n->id = ++g_node_counter;
  return n;
}

Var Tape::Leaf(Param* p) {
  auto it = bound_.find(p);
  if (it != bound_.end()) return it->second;
  auto n = std::make_shared<Node>();
  n->value = p->value;
  n->requires_grad = true;
  n->id = ++g_node_counter;
  bound_.emplace(p, n);
  return n;
}

Var Tape::Frozen(const Param* p) {
  auto n = std::make_shared<Node>();
  n->value = p->value;
  n->requires_grad = false;
  n->id = ++g_node_counter;
  return n;
}

void Tape::CollectGrads() {
  for (auto& [p, var] : bound_) {
    auto* param = const_cast<Param*>(p);
    param->ZeroGrad();
    if (!var->grad.empty()) param->grad = var->grad;
  }
}

void Backward(const Var& root) {
  CADA_CHECK(root->value.size() == 1, "Backward root must be scalar, got " << root->value.ShapeStr());
  if (!root->requires_grad) return;

  // Collect nodes reachable from the root.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{root.get()};
  seen.insert(root.get());
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (const auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(), [](Node* a, Node* b) { return a->id > b->id; });

  root->EnsureGrad().Fill(1.0);
  for (Node* n : order) {
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
}

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

Var Add(const Var& a, const Var& b) {
  CADA_CHECK(a->value.SameShape(b->value),
             "Add shape mismatch " << a->value.ShapeStr() << " vs " << b->value.ShapeStr());
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
  return MakeNode(std::move(out), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) {
      Tensor& ga = a->EnsureGrad();
      for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i];
    }
    if (b->requires_grad) {
      Tensor& gb = b->EnsureGrad();
      for (int64_t i = 0; i < n.grad.size(); ++i) gb[i] += n.grad[i];
    }
  });
}

Var Sub(const Var& a, const Var& b) {
  CADA_CHECK(a->value.SameShape(b->value),
             "Sub shape mismatch " << a->value.ShapeStr() << " vs " << b->value.ShapeStr());
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] - b->value[i];
  return MakeNode(std::move(out), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) {
      Tensor& ga = a->EnsureGrad();
      for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i];
    }
    if (b->requires_grad) {
      Tensor& gb = b->EnsureGrad();
      for (int64_t i = 0; i < n.grad.size(); ++i) gb[i] -= n.grad[i];
    }
  });
}

Var Mul(const Var& a, const Var& b) {
  CADA_CHECK(a->value.SameShape(b->value),
             "Mul shape mismatch " << a->value.ShapeStr() << " vs " << b->value.ShapeStr());
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
  return MakeNode(std::move(out), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) {
      Tensor& ga = a->EnsureGrad();
      for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * b->value[i];
    }
    if (b->requires_grad) {
      Tensor& gb = b->EnsureGrad();
      for (int64_t i = 0; i < n.grad.size(); ++i) gb[i] += n.grad[i] * a->value[i];
    }
  });
}

Var Scale(const Var& a, double s) {
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * s;
  return MakeNode(std::move(out), {a}, [a, s](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * s;
  });
}

Var AddScalar(const Var& a, double s) {
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + s;
  return MakeNode(std::move(out), {a}, [a](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i];
  });
}

Var Neg(const Var& a) { return Scale(a, -1.0); }

Var Abs(const Var& a) {
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::fabs(a->value[i]);
  return MakeNode(std::move(out), {a}, [a](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    for (int64_t i = 0; i < n.grad.size(); ++i) {
      double x = a->value[i];
      ga[i] += n.grad[i] * (x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0));
    }
  });
}

Var Tanh(const Var& a) {
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::tanh(a->value[i]);
  return MakeNode(std::move(out), {a}, [a](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    for (int64_t i = 0; i < n.grad.size(); ++i) {
      double y = n.value[i];
      ga[i] += n.grad[i] * (1.0 - y * y);
    }
  });
}

Var Relu(const Var& a) {
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = a->value[i] > 0 ? a->value[i] : 0.0;
  return MakeNode(std::move(out), {a}, [a](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    for (int64_t i = 0; i < n.grad.size(); ++i)
      if (a->value[i] > 0) ga[i] += n.grad[i];
  });
}

Var LeakyRelu(const Var& a, double slope) {
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) {
    double x = a->value[i];
    out[i] = x > 0 ? x : slope * x;
  }
  return MakeNode(std::move(out), {a}, [a, slope](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    for (int64_t i = 0; i < n.grad.size(); ++i)
      ga[i] += n.grad[i] * (a->value[i] > 0 ? 1.0 : slope);
  });
}

namespace {
double Softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::fabs(t))); }
double SigmoidStable(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double z = std::exp(x);
  return z / (1.0 + z);
}
}  // namespace

Var LogSigmoid(const Var& a) {
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = -Softplus(-a->value[i]);
  return MakeNode(std::move(out), {a}, [a](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    for (int64_t i = 0; i < n.grad.size(); ++i)
      ga[i] += n.grad[i] * SigmoidStable(-a->value[i]);  // d log sigma(x) = 1 - sigma(x)
  });
}

Var Exp(const Var& a) {
  Tensor out(a->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = std::exp(a->value[i]);
  return MakeNode(std::move(out), {a}, [a](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * n.value[i];
  });
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

Var Sum(const Var& a) {
  double s = 0.0;
  for (int64_t i = 0; i < a->value.size(); ++i) s += a->value[i];
  return MakeNode(Tensor::Scalar(s), {a}, [a](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    double g = n.grad[0];
    for (int64_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var Mean(const Var& a) {
  CADA_CHECK(a->value.size() > 0, "Mean of empty tensor");
  double s = 0.0;
  for (int64_t i = 0; i < a->value.size(); ++i) s += a->value[i];
  double inv = 1.0 / double(a->value.size());
  return MakeNode(Tensor::Scalar(s * inv), {a}, [a, inv](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    double g = n.grad[0] * inv;
    for (int64_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

// ---------------------------------------------------------------------------
// Linear algebra
// ---------------------------------------------------------------------------

Var Matmul(const Var& a, const Var& b) {
  CADA_CHECK(a->value.ndim() == 2 && b->value.ndim() == 2 && a->value.dim(1) == b->value.dim(0),
             "Matmul shape mismatch " << a->value.ShapeStr() << " x " << b->value.ShapeStr());
  int64_t m = a->value.dim(0), k = a->value.dim(1), n_cols = b->value.dim(1);
  Tensor out({m, n_cols});
  MapM(out.data(), m, n_cols).noalias() =
      MapCM(a->value.data(), m, k) * MapCM(b->value.data(), k, n_cols);
  return MakeNode(std::move(out), {a, b}, [a, b, m, k, n_cols](Node& n) {
    MapCM dz(n.grad.data(), m, n_cols);
    if (a->requires_grad)
      MapM(a->EnsureGrad().data(), m, k).noalias() += dz * MapCM(b->value.data(), k, n_cols).transpose();
    if (b->requires_grad)
      MapM(b->EnsureGrad().data(), k, n_cols).noalias() +=
          MapCM(a->value.data(), m, k).transpose() * dz;
  });
}

Var MatmulNT(const Var& a, const Var& b) {
  CADA_CHECK(a->value.ndim() == 2 && b->value.ndim() == 2 && a->value.dim(1) == b->value.dim(1),
             "MatmulNT shape mismatch " << a->value.ShapeStr() << " x " << b->value.ShapeStr());
  int64_t m = a->value.dim(0), k = a->value.dim(1), n_rows = b->value.dim(0);
  Tensor out({m, n_rows});
  MapM(out.data(), m, n_rows).noalias() =
      MapCM(a->value.data(), m, k) * MapCM(b->value.data(), n_rows, k).transpose();
  return MakeNode(std::move(out), {a, b}, [a, b, m, k, n_rows](Node& n) {
    MapCM dz(n.grad.data(), m, n_rows);
    if (a->requires_grad)
      MapM(a->EnsureGrad().data(), m, k).noalias() += dz * MapCM(b->value.data(), n_rows, k);
    if (b->requires_grad)
      MapM(b->EnsureGrad().data(), n_rows, k).noalias() +=
          dz.transpose() * MapCM(a->value.data(), m, k);
  });
}

Var Linear(const Var& x, const Var& w, const Var& b) {
  CADA_CHECK(x->value.ndim() == 2 && w->value.ndim() == 2 && x->value.dim(1) == w->value.dim(1),
             "Linear shape mismatch x=" << x->value.ShapeStr() << " w=" << w->value.ShapeStr());
  int64_t n_rows = x->value.dim(0), din = x->value.dim(1), dout = w->value.dim(0);
  CADA_CHECK(b->value.size() == dout, "Linear bias size mismatch");
  Tensor out({n_rows, dout});
  MapM o(out.data(), n_rows, dout);
  o.noalias() = MapCM(x->value.data(), n_rows, din) * MapCM(w->value.data(), dout, din).transpose();
  for (int64_t i = 0; i < n_rows; ++i)
    for (int64_t j = 0; j < dout; ++j) out[i * dout + j] += b->value[j];
  return MakeNode(std::move(out), {x, w, b}, [x, w, b, n_rows, din, dout](Node& n) {
    MapCM dz(n.grad.data(), n_rows, dout);
    if (x->requires_grad)
      MapM(x->EnsureGrad().data(), n_rows, din).noalias() += dz * MapCM(w->value.data(), dout, din);
    if (w->requires_grad)
      MapM(w->EnsureGrad().data(), dout, din).noalias() +=
          dz.transpose() * MapCM(x->value.data(), n_rows, din);
    if (b->requires_grad) {
      Tensor& gb = b->EnsureGrad();
      for (int64_t i = 0; i < n_rows; ++i)
        for (int64_t j = 0; j < dout; ++j) gb[j] += n.grad[i * dout + j];
    }
  });
}

Var RowDot(const Var& a, const Var& b) {
  CADA_CHECK(a->value.SameShape(b->value) && a->value.ndim() == 2, "RowDot expects matching [N,D]");
  int64_t n_rows = a->value.dim(0), d = a->value.dim(1);
  Tensor out({n_rows, 1});
  for (int64_t i = 0; i < n_rows; ++i) {
    double s = 0;
    for (int64_t j = 0; j < d; ++j) s += a->value[i * d + j] * b->value[i * d + j];
    out[i] = s;
  }
  return MakeNode(std::move(out), {a, b}, [a, b, n_rows, d](Node& n) {
    for (int64_t i = 0; i < n_rows; ++i) {
      double g = n.grad[i];
      if (a->requires_grad) {
        Tensor& ga = a->EnsureGrad();
        for (int64_t j = 0; j < d; ++j) ga[i * d + j] += g * b->value[i * d + j];
      }
      if (b->requires_grad) {
        Tensor& gb = b->EnsureGrad();
        for (int64_t j = 0; j < d; ++j) gb[i * d + j] += g * a->value[i * d + j];
      }
    }
  });
}

Var L2NormalizeRows(const Var& a, double eps) {
  CADA_CHECK(a->value.ndim() == 2, "L2NormalizeRows expects [N,D]");
  int64_t n_rows = a->value.dim(0), d = a->value.dim(1);
  Tensor out(a->value.shape());
  std::vector<double> inv_norm(n_rows);
  for (int64_t i = 0; i < n_rows; ++i) {
    double s = 0;
    for (int64_t j = 0; j < d; ++j) s += a->value[i * d + j] * a->value[i * d + j];
    inv_norm[i] = 1.0 / std::sqrt(s + eps);
    for (int64_t j = 0; j < d; ++j) out[i * d + j] = a->value[i * d + j] * inv_norm[i];
  }
  return MakeNode(std::move(out), {a}, [a, n_rows, d, inv_norm](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    for (int64_t i = 0; i < n_rows; ++i) {
      double dot = 0;  // x . dy
      for (int64_t j = 0; j < d; ++j) dot += a->value[i * d + j] * n.grad[i * d + j];
      double r2 = inv_norm[i] * inv_norm[i];
      for (int64_t j = 0; j < d; ++j)
        ga[i * d + j] += inv_norm[i] * (n.grad[i * d + j] - a->value[i * d + j] * dot * r2);
    }
  });
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

Var Reshape(const Var& a, std::vector<int64_t> shape) {
  Tensor out = a->value.Reshaped(std::move(shape));
  return MakeNode(std::move(out), {a}, [a](Node& n) {
    if (!a->requires_grad) return;
    Tensor& ga = a->EnsureGrad();
    for (int64_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i];
  });
}

Var ConcatCols(const std::vector<Var>& parts) {
  CADA_CHECK(!parts.empty(), "ConcatCols of nothing");
  int64_t n_rows = parts[0]->value.dim(0);
  int64_t total = 0;
  for (const auto& p : parts) {
    CADA_CHECK(p->value.ndim() == 2 && p->value.dim(0) == n_rows, "ConcatCols row mismatch");
    total += p->value.dim(1);
  }
  Tensor out({n_rows, total});
  int64_t off = 0;
  for (const auto& p : parts) {
    int64_t c = p->value.dim(1);
    for (int64_t i = 0; i < n_rows; ++i)
      for (int64_t j = 0; j < c; ++j) out[i * total + off + j] = p->value[i * c + j];
    off += c;
  }
  return MakeNode(std::move(out), parts, [parts, n_rows, total](Node& n) {
    int64_t off = 0;
    for (const auto& p : parts) {
      int64_t c = p->value.dim(1);
      if (p->requires_grad) {
        Tensor& gp = p->EnsureGrad();
        for (int64_t i = 0; i < n_rows; ++i)
          for (int64_t j = 0; j < c; ++j) gp[i * c + j] += n.grad[i * total + off + j];
      }
      off += c;
    }
  });
}

// ---------------------------------------------------------------------------
// Convolutions
// ---------------------------------------------------------------------------

Var Conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  CADA_CHECK(x->value.ndim() == 4 && w->value.ndim() == 4, "Conv2d expects 4D x and w");
  int64_t n_batch = x->value.dim(0), c_in = x->value.dim(1), h = x->value.dim(2),
          w_in = x->value.dim(3);
  int64_t f = w->value.dim(0);
  CADA_CHECK(w->value.dim(1) == c_in, "Conv2d channel mismatch: x has " << c_in << ", w expects "
                                                                        << w->value.dim(1));
  int kh = int(w->value.dim(2)), kw = int(w->value.dim(3));
  int64_t oh = ConvOutDim(h, kh, stride, pad), ow = ConvOutDim(w_in, kw, stride, pad);
  CADA_CHECK(oh > 0 && ow > 0, "Conv2d output would be empty for input " << x->value.ShapeStr());
  CADA_CHECK(b->value.size() == f, "Conv2d bias size mismatch");

  const int64_t k_dim = c_in * kh * kw, p_total = oh * ow;
  Tensor out({n_batch, f, oh, ow});
  std::vector<double> col(size_t(k_dim * p_total));
  for (int64_t nb = 0; nb < n_batch; ++nb) {
    Im2Col(x->value.data() + nb * c_in * h * w_in, c_in, h, w_in, kh, kw, stride, pad, oh, ow,
           col.data());
    MapM(out.data() + nb * f * p_total, f, p_total).noalias() =
        MapCM(w->value.data(), f, k_dim) * MapCM(col.data(), k_dim, p_total);
    for (int64_t fc = 0; fc < f; ++fc) {
      double bias = b->value[fc];
      double* o = out.data() + (nb * f + fc) * p_total;
      for (int64_t p = 0; p < p_total; ++p) o[p] += bias;
    }
  }

  auto backward = [x, w, b, stride, pad, n_batch, c_in, h, w_in, f, kh, kw, oh, ow, k_dim,
                   p_total](Node& n) {
    std::vector<double> col(size_t(k_dim * p_total));
    std::vector<double> dcol(size_t(k_dim * p_total));
    for (int64_t nb = 0; nb < n_batch; ++nb) {
      MapCM dz(n.grad.data() + nb * f * p_total, f, p_total);
      if (w->requires_grad) {
        Im2Col(x->value.data() + nb * c_in * h * w_in, c_in, h, w_in, kh, kw, stride, pad, oh, ow,
               col.data());
        MapM(w->EnsureGrad().data(), f, k_dim).noalias() +=
            dz * MapCM(col.data(), k_dim, p_total).transpose();
      }
      if (x->requires_grad) {
        MapM(dcol.data(), k_dim, p_total).noalias() =
            MapCM(w->value.data(), f, k_dim).transpose() * dz;
        Col2ImAdd(dcol.data(), c_in, h, w_in, kh, kw, stride, pad, oh, ow,
                  x->EnsureGrad().data() + nb * c_in * h * w_in);
      }
      if (b->requires_grad) {
        Tensor& gb = b->EnsureGrad();
        for (int64_t fc = 0; fc < f; ++fc) {
          const double* g = n.grad.data() + (nb * f + fc) * p_total;
          double s = 0;
          for (int64_t p = 0; p < p_total; ++p) s += g[p];
          gb[fc] += s;
        }
      }
    }
  };
  return MakeNode(std::move(out), {x, w, b}, std::move(backward));
}

Var ConvTranspose2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int64_t out_h,
                    int64_t out_w) {
  CADA_CHECK(x->value.ndim() == 4 && w->value.ndim() == 4, "ConvTranspose2d expects 4D x and w");
  int64_t n_batch = x->value.dim(0), c_in = x->value.dim(1), h = x->value.dim(2),
          w_in = x->value.dim(3);
  CADA_CHECK(w->value.dim(0) == c_in, "ConvTranspose2d channel mismatch");
  int64_t f = w->value.dim(1);
  int kh = int(w->value.dim(2)), kw = int(w->value.dim(3));
  int64_t base_h = (h - 1) * stride - 2 * pad + kh, base_w = (w_in - 1) * stride - 2 * pad + kw;
  CADA_CHECK(out_h >= base_h && out_h < base_h + stride && out_w >= base_w && out_w < base_w + stride,
             "ConvTranspose2d: requested output " << out_h << "x" << out_w
                                                  << " unreachable from input " << h << "x" << w_in);
  CADA_CHECK(b->value.size() == f, "ConvTranspose2d bias size mismatch");

  // The forward pass is the data-gradient of a conv whose input would have
  // size out_h x out_w: scatter W^T x through col2im.
  const int64_t k_dim = f * kh * kw, p_total = h * w_in;
  Tensor out({n_batch, f, out_h, out_w});
  std::vector<double> col(size_t(k_dim * p_total));
  for (int64_t nb = 0; nb < n_batch; ++nb) {
    MapM(col.data(), k_dim, p_total).noalias() =
        MapCM(w->value.data(), c_in, k_dim).transpose() *
        MapCM(x->value.data() + nb * c_in * p_total, c_in, p_total);
    Col2ImAdd(col.data(), f, out_h, out_w, kh, kw, stride, pad, h, w_in,
              out.data() + nb * f * out_h * out_w);
    for (int64_t fc = 0; fc < f; ++fc) {
      double bias = b->value[fc];
      double* o = out.data() + (nb * f + fc) * out_h * out_w;
      for (int64_t p = 0; p < out_h * out_w; ++p) o[p] += bias;
    }
  }

  auto backward = [x, w, b, stride, pad, n_batch, c_in, h, w_in, f, kh, kw, out_h, out_w, k_dim,
                   p_total](Node& n) {
    std::vector<double> dcol(size_t(k_dim * p_total));
    for (int64_t nb = 0; nb < n_batch; ++nb) {
      // dcol = im2col(dOut) with the same geometry as the forward scatter.
      Im2Col(n.grad.data() + nb * f * out_h * out_w, f, out_h, out_w, kh, kw, stride, pad, h, w_in,
             dcol.data());
      if (x->requires_grad) {
        MapM(x->EnsureGrad().data() + nb * c_in * p_total, c_in, p_total).noalias() +=
            MapCM(w->value.data(), c_in, k_dim) * MapCM(dcol.data(), k_dim, p_total);
      }
      if (w->requires_grad) {
        MapM(w->EnsureGrad().data(), c_in, k_dim).noalias() +=
            MapCM(x->value.data() + nb * c_in * p_total, c_in, p_total) *
            MapCM(dcol.data(), k_dim, p_total).transpose();
      }
      if (b->requires_grad) {
        Tensor& gb = b->EnsureGrad();
        for (int64_t fc = 0; fc < f; ++fc) {
          const double* g = n.grad.data() + (nb * f + fc) * out_h * out_w;
          double s = 0;
          for (int64_t p = 0; p < out_h * out_w; ++p) s += g[p];
          gb[fc] += s;
        }
      }
    }
  };
  return MakeNode(std::move(out), {x, w, b}, std::move(backward));
}

Var GlobalAvgPool(const Var& x) {
  CADA_CHECK(x->value.ndim() == 4, "GlobalAvgPool expects [N,C,H,W]");
  int64_t n_batch = x->value.dim(0), c = x->value.dim(1), hw = x->value.dim(2) * x->value.dim(3);
  Tensor out({n_batch, c});
  for (int64_t i = 0; i < n_batch * c; ++i) {
    const double* p = x->value.data() + i * hw;
    double s = 0;
    for (int64_t k = 0; k < hw; ++k) s += p[k];
    out[i] = s / double(hw);
  }
  return MakeNode(std::move(out), {x}, [x, n_batch, c, hw](Node& n) {
    if (!x->requires_grad) return;
    Tensor& gx = x->EnsureGrad();
    for (int64_t i = 0; i < n_batch * c; ++i) {
      double g = n.grad[i] / double(hw);
      double* p = gx.data() + i * hw;
      for (int64_t k = 0; k < hw; ++k) p[k] += g;
    }
  });
}

Var InstanceNorm(const Var& x, double eps) {
  CADA_CHECK(x->value.ndim() == 4, "InstanceNorm expects [N,C,H,W]");
  int64_t groups = x->value.dim(0) * x->value.dim(1), hw = x->value.dim(2) * x->value.dim(3);
  CADA_CHECK(hw > 0, "InstanceNorm over empty spatial dims");
  Tensor out(x->value.shape());
  std::vector<double> mean(groups), inv_std(groups);
  for (int64_t g = 0; g < groups; ++g) {
    const double* p = x->value.data() + g * hw;
    double m = 0;
    for (int64_t k = 0; k < hw; ++k) m += p[k];
    m /= double(hw);
    double v = 0;
    for (int64_t k = 0; k < hw; ++k) v += (p[k] - m) * (p[k] - m);
    v /= double(hw);
    mean[g] = m;
    inv_std[g] = 1.0 / std::sqrt(v + eps);
    double* o = out.data() + g * hw;
    for (int64_t k = 0; k < hw; ++k) o[k] = (p[k] - m) * inv_std[g];
  }
  return MakeNode(std::move(out), {x}, [x, groups, hw, mean, inv_std](Node& n) {
    if (!x->requires_grad) return;
    Tensor& gx = x->EnsureGrad();
    for (int64_t g = 0; g < groups; ++g) {
      const double* dy = n.grad.data() + g * hw;
      const double* xhat = n.value.data() + g * hw;
      double sum_dy = 0, sum_dy_xhat = 0;
      for (int64_t k = 0; k < hw; ++k) {
        sum_dy += dy[k];
        sum_dy_xhat += dy[k] * xhat[k];
      }
      double m_dy = sum_dy / double(hw), m_dy_xhat = sum_dy_xhat / double(hw);
      double* out_g = gx.data() + g * hw;
      for (int64_t k = 0; k < hw; ++k)
        out_g[k] += inv_std[g] * (dy[k] - m_dy - xhat[k] * m_dy_xhat);
    }
  });
}

Var BatchNorm(const Var& x, const Var& gamma, const Var& beta, Tensor* running_mean,
              Tensor* running_var, bool training, double momentum, double eps) {
  CADA_CHECK(x->value.ndim() == 4, "BatchNorm expects [N,C,H,W]");
  int64_t n_batch = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2), w = x->value.dim(3);
  int64_t m_count = n_batch * h * w;
  CADA_CHECK(gamma->value.size() == c && beta->value.size() == c, "BatchNorm affine size mismatch");
  CADA_CHECK(running_mean->size() == c && running_var->size() == c,
             "BatchNorm running stats size mismatch");

  std::vector<double> mean(c), inv_std(c);
  if (training) {
    CADA_CHECK(m_count > 1, "BatchNorm training needs more than one value per channel");
    for (int64_t ch = 0; ch < c; ++ch) {
      double m = 0;
      for (int64_t nb = 0; nb < n_batch; ++nb) {
        const double* p = x->value.data() + (nb * c + ch) * h * w;
        for (int64_t k = 0; k < h * w; ++k) m += p[k];
      }
      m /= double(m_count);
      double v = 0;
      for (int64_t nb = 0; nb < n_batch; ++nb) {
        const double* p = x->value.data() + (nb * c + ch) * h * w;
        for (int64_t k = 0; k < h * w; ++k) v += (p[k] - m) * (p[k] - m);
      }
      v /= double(m_count);
      mean[ch] = m;
      inv_std[ch] = 1.0 / std::sqrt(v + eps);
      (*running_mean)[ch] = (1.0 - momentum) * (*running_mean)[ch] + momentum * m;
      double v_unbiased = v * double(m_count) / double(m_count - 1);
      (*running_var)[ch] = (1.0 - momentum) * (*running_var)[ch] + momentum * v_unbiased;
    }
  } else {
    for (int64_t ch = 0; ch < c; ++ch) {
      mean[ch] = (*running_mean)[ch];
      inv_std[ch] = 1.0 / std::sqrt((*running_var)[ch] + eps);
    }
  }

  Tensor out(x->value.shape());
  for (int64_t nb = 0; nb < n_batch; ++nb) {
    for (int64_t ch = 0; ch < c; ++ch) {
      const double* p = x->value.data() + (nb * c + ch) * h * w;
      double* o = out.data() + (nb * c + ch) * h * w;
      double g = gamma->value[ch], bt = beta->value[ch];
      for (int64_t k = 0; k < h * w; ++k) o[k] = (p[k] - mean[ch]) * inv_std[ch] * g + bt;
    }
  }

  auto backward = [x, gamma, beta, n_batch, c, h, w, m_count, mean, inv_std, training](Node& n) {
    std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
    auto xhat_at = [&](int64_t nb, int64_t ch, int64_t k) {
      return (x->value[(nb * c + ch) * h * w + k] - mean[ch]) * inv_std[ch];
    };
    for (int64_t nb = 0; nb < n_batch; ++nb)
      for (int64_t ch = 0; ch < c; ++ch) {
        const double* dy = n.grad.data() + (nb * c + ch) * h * w;
        for (int64_t k = 0; k < h * w; ++k) {
          sum_dy[ch] += dy[k];
          sum_dy_xhat[ch] += dy[k] * xhat_at(nb, ch, k);
        }
      }
    if (gamma->requires_grad) {
      Tensor& gg = gamma->EnsureGrad();
      for (int64_t ch = 0; ch < c; ++ch) gg[ch] += sum_dy_xhat[ch];
    }
    if (beta->requires_grad) {
      Tensor& gb = beta->EnsureGrad();
      for (int64_t ch = 0; ch < c; ++ch) gb[ch] += sum_dy[ch];
    }
    if (x->requires_grad) {
      Tensor& gx = x->EnsureGrad();
      for (int64_t nb = 0; nb < n_batch; ++nb)
        for (int64_t ch = 0; ch < c; ++ch) {
          const double* dy = n.grad.data() + (nb * c + ch) * h * w;
          double* dxp = gx.data() + (nb * c + ch) * h * w;
          double g = gamma->value[ch];
          if (training) {
            double m_dy = sum_dy[ch] / double(m_count);
            double m_dy_xhat = sum_dy_xhat[ch] / double(m_count);
            for (int64_t k = 0; k < h * w; ++k)
              dxp[k] += g * inv_std[ch] * (dy[k] - m_dy - xhat_at(nb, ch, k) * m_dy_xhat);
          } else {
            for (int64_t k = 0; k < h * w; ++k) dxp[k] += g * inv_std[ch] * dy[k];
          }
        }
    }
  };
  return MakeNode(std::move(out), {x, gamma, beta}, std::move(backward));
}

Var Film(const Var& x, const Var& gamma, const Var& beta) {
  CADA_CHECK(x->value.ndim() == 4 && gamma->value.ndim() == 2 && beta->value.ndim() == 2,
             "Film expects x [N,C,H,W], gamma/beta [N,C]");
  int64_t n_batch = x->value.dim(0), c = x->value.dim(1), hw = x->value.dim(2) * x->value.dim(3);
  CADA_CHECK(gamma->value.dim(0) == n_batch && gamma->value.dim(1) == c &&
                 beta->value.SameShape(gamma->value),
             "Film conditioning shape mismatch");
  Tensor out(x->value.shape());
  for (int64_t i = 0; i < n_batch * c; ++i) {
    const double* p = x->value.data() + i * hw;
    double* o = out.data() + i * hw;
    double g = gamma->value[i], bt = beta->value[i];
    for (int64_t k = 0; k < hw; ++k) o[k] = p[k] * g + bt;
  }
  return MakeNode(std::move(out), {x, gamma, beta}, [x, gamma, beta, n_batch, c, hw](Node& n) {
    for (int64_t i = 0; i < n_batch * c; ++i) {
      const double* dy = n.grad.data() + i * hw;
      if (x->requires_grad) {
        double* dxp = x->EnsureGrad().data() + i * hw;
        double g = gamma->value[i];
        for (int64_t k = 0; k < hw; ++k) dxp[k] += dy[k] * g;
      }
      if (gamma->requires_grad) {
        const double* p = x->value.data() + i * hw;
        double s = 0;
        for (int64_t k = 0; k < hw; ++k) s += dy[k] * p[k];
        gamma->EnsureGrad()[i] += s;
      }
      if (beta->requires_grad) {
        double s = 0;
        for (int64_t k = 0; k < hw; ++k) s += dy[k];
        beta->EnsureGrad()[i] += s;
      }
    }
  });
}

Var Dropout(const Var& x, double p, Rng* rng, bool training) {
  CADA_CHECK(p >= 0.0 && p < 1.0, "Dropout probability must be in [0,1)");
  if (!training || p == 0.0) return x;
  Tensor mask(x->value.shape());
  double keep = 1.0 - p, scale = 1.0 / keep;
  for (int64_t i = 0; i < mask.size(); ++i) mask[i] = rng->NextDouble() < keep ? scale : 0.0;
  Tensor out(x->value.shape());
  for (int64_t i = 0; i < out.size(); ++i) out[i] = x->value[i] * mask[i];
  return MakeNode(std::move(out), {x}, [x, mask](Node& n) {
    if (!x->requires_grad) return;
    Tensor& gx = x->EnsureGrad();
    for (int64_t i = 0; i < n.grad.size(); ++i) gx[i] += n.grad[i] * mask[i];
  });
}

Var GatherSpatial(const Var& x, const std::vector<std::pair<int64_t, int64_t>>& picks) {
  CADA_CHECK(x->value.ndim() == 4, "GatherSpatial expects [N,C,H,W]");
  int64_t n_batch = x->value.dim(0), c = x->value.dim(1), hw = x->value.dim(2) * x->value.dim(3);
  Tensor out({int64_t(picks.size()), c});
  for (size_t r = 0; r < picks.size(); ++r) {
    auto [nb, pos] = picks[r];
    CADA_CHECK(nb >= 0 && nb < n_batch && pos >= 0 && pos < hw, "GatherSpatial pick out of range");
    for (int64_t ch = 0; ch < c; ++ch) out[r * c + ch] = x->value[(nb * c + ch) * hw + pos];
  }
  return MakeNode(std::move(out), {x}, [x, picks, c, hw](Node& n) {
    if (!x->requires_grad) return;
    Tensor& gx = x->EnsureGrad();
    for (size_t r = 0; r < picks.size(); ++r) {
      auto [nb, pos] = picks[r];
      for (int64_t ch = 0; ch < c; ++ch) gx[(nb * c + ch) * hw + pos] += n.grad[r * c + ch];
    }
  });
}

Var SoftmaxCrossEntropy(const Var& logits, const std::vector<int64_t>& labels) {
  CADA_CHECK(logits->value.ndim() == 2, "SoftmaxCrossEntropy expects [N,K]");
  int64_t n_rows = logits->value.dim(0), k = logits->value.dim(1);
  CADA_CHECK(int64_t(labels.size()) == n_rows, "label count mismatch");
  double total = 0;
  std::vector<double> probs(size_t(n_rows * k));
  for (int64_t i = 0; i < n_rows; ++i) {
    CADA_CHECK(labels[i] >= 0 && labels[i] < k, "label out of range");
    const double* row = logits->value.data() + i * k;
    double mx = row[0];
    for (int64_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double denom = 0;
    for (int64_t j = 0; j < k; ++j) denom += std::exp(row[j] - mx);
    double lse = mx + std::log(denom);
    total += lse - row[labels[i]];
    for (int64_t j = 0; j < k; ++j) probs[i * k + j] = std::exp(row[j] - lse);
  }
  double inv_n = 1.0 / double(n_rows);
  return MakeNode(Tensor::Scalar(total * inv_n), {logits},
                  [logits, labels, n_rows, k, probs, inv_n](Node& n) {
                    if (!logits->requires_grad) return;
                    Tensor& gl = logits->EnsureGrad();
                    double g = n.grad[0] * inv_n;
                    for (int64_t i = 0; i < n_rows; ++i)
                      for (int64_t j = 0; j < k; ++j)
                        gl[i * k + j] +=
                            g * (probs[i * k + j] - (j == labels[i] ? 1.0 : 0.0));
                  });
}

Tensor NumericGradient(const std::function<double(const Tensor&)>& f, const Tensor& x, double h) {
  Tensor grad(x.shape());
  Tensor probe = x;
  for (int64_t i = 0; i < x.size(); ++i) {
    double orig = probe[i];
    probe[i] = orig + h;
    double fp = f(probe);
    probe[i] = orig - h;
    double fm = f(probe);
    probe[i] = orig;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace cada
