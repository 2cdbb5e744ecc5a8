// cada/graph.h

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

#ifndef CADA_GRAPH_H_
#define CADA_GRAPH_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "cada/tensor.h"

namespace cada {

// Reverse-mode autodiff on a dynamically built tape. Every op evaluates its
// value eagerly at construction and stores a closure that scatters the output
// gradient back to its parents. Nodes whose ancestors contain no trainable
// leaf are skipped during the backward sweep.

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor value;
  Tensor grad;  // allocated on demand during backward
  bool requires_grad = false;
  int64_t id = 0;  // creation order; backward runs in descending id
  std::vector<Var> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& EnsureGrad() {
    if (grad.empty() && !value.empty()) grad = Tensor(value.shape());
    return grad;
  }
};

// Trainable parameter: value plus gradient and Adam moment buffers.
struct Param {
  Tensor value;
  Tensor grad;
  Tensor m, v;  // optimizer moments, lazily sized by the optimizer

  explicit Param(Tensor init = Tensor()) : value(std::move(init)) {}
  void ZeroGrad() {
    if (grad.empty()) grad = Tensor(value.shape());
    grad.Fill(0.0);
  }
};

// Per-step graph builder. Also maps Params to their leaf nodes so one Param
// used several times in a step accumulates all its gradient contributions.
class Tape {
 public:
  // Non-trainable input.
  Var Input(const Tensor& t);
  // Trainable leaf bound to a Param; repeated calls with the same Param
  // return the same node.
  Var Leaf(Param* p);
  // Param entered as a constant (frozen model): gradient flows through the
  // computation but never into the parameter.
  Var Frozen(const Param* p);

  // Copies node gradients back into every bound Param's grad buffer
  // (overwrites). Call after Backward().
  void CollectGrads();

 private:
  std::unordered_map<const Param*, Var> bound_;
};

// Runs the backward sweep from a scalar root (seed gradient 1).
void Backward(const Var& root);

Var MakeNode(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn);

// ---- elementwise / arithmetic ----
Var Add(const Var& a, const Var& b);           // same shape
Var Sub(const Var& a, const Var& b);           // same shape
Var Mul(const Var& a, const Var& b);           // same shape
Var Scale(const Var& a, double s);
Var AddScalar(const Var& a, double s);
Var Neg(const Var& a);
Var Abs(const Var& a);                          // d|x|/dx at 0 taken as 0
Var Tanh(const Var& a);
Var Relu(const Var& a);
Var LeakyRelu(const Var& a, double slope);
Var LogSigmoid(const Var& a);                   // log sigma(x), stable
Var Exp(const Var& a);

// ---- reductions ----
Var Sum(const Var& a);                          // -> [1]
Var Mean(const Var& a);                         // -> [1]

// ---- linear algebra ----
Var Matmul(const Var& a, const Var& b);         // [m,k]x[k,n] -> [m,n]
Var MatmulNT(const Var& a, const Var& b);       // [m,k]x[n,k]^T -> [m,n]
Var Linear(const Var& x, const Var& w, const Var& b);  // x[N,Din], w[Dout,Din], b[Dout]
Var RowDot(const Var& a, const Var& b);         // [N,D],[N,D] -> [N,1]
Var L2NormalizeRows(const Var& a, double eps = 1e-12);

// ---- shape ----
Var Reshape(const Var& a, std::vector<int64_t> shape);
Var ConcatCols(const std::vector<Var>& parts);  // list of [N,Ci] -> [N, sum Ci]

// ---- conv nets ----
// x [N,C,H,W], w [F,C,kh,kw], b [F]; zero padding.
Var Conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
// x [N,C,H,W], w [C,F,kh,kw], b [F]; output size given explicitly so the
// caller controls the per-axis inverse of a strided conv.
Var ConvTranspose2d(const Var& x, const Var& w, const Var& b, int stride, int pad,
                    int64_t out_h, int64_t out_w);
Var GlobalAvgPool(const Var& x);                // [N,C,H,W] -> [N,C]
// Per-channel normalization over H,W for each (n,c); no learned affine.
Var InstanceNorm(const Var& x, double eps = 1e-5);
// Batch norm over (N,H,W) per channel. In training mode uses batch statistics
// and updates the running buffers in place; in eval mode uses the buffers.
Var BatchNorm(const Var& x, const Var& gamma, const Var& beta, Tensor* running_mean,
              Tensor* running_var, bool training, double momentum = 0.1, double eps = 1e-5);
// FiLM: y[n,c,h,w] = x[n,c,h,w]*gamma[n,c] + beta[n,c].
Var Film(const Var& x, const Var& gamma, const Var& beta);
Var Dropout(const Var& x, double p, Rng* rng, bool training);
// Rows of x at flat spatial positions: x[N,C,H,W], picks (n, pos) -> [M,C].
Var GatherSpatial(const Var& x, const std::vector<std::pair<int64_t, int64_t>>& picks);

// ---- classification ----
// Mean softmax cross-entropy of logits [N,K] against integer labels.
Var SoftmaxCrossEntropy(const Var& logits, const std::vector<int64_t>& labels);

// Finite-difference helper used by the gradient-check tests: central
// differences of f around x with step h.
Tensor NumericGradient(const std::function<double(const Tensor&)>& f, const Tensor& x, double h);

}  // namespace cada

#endif  // CADA_GRAPH_H_
