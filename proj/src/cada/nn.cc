// cada/nn.cc

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

#include "cada/nn.h"

#include <cmath>

namespace cada {

Param* ParamRegistry::Find(const std::string& name) const {
  for (const auto& [n, p] : params_)
    if (n == name) return p;
  return nullptr;
}

int64_t ParamRegistry::TotalParamCount() const {
  int64_t n = 0;
  for (const auto& [name, p] : params_) n += p->value.size();
  return n;
}

void ParamRegistry::ZeroGrads() const {
  for (const auto& [name, p] : params_) p->ZeroGrad();
}

void Adam::Step(const ParamRegistry& registry, double lr_scale) {
  ++t_;
  double bias1 = 1.0 - std::pow(beta1_, double(t_));
  double bias2 = 1.0 - std::pow(beta2_, double(t_));
  double alpha = lr_ * lr_scale;
  for (const auto& [name, p] : registry.params()) {
    if (p->m.empty()) p->m = Tensor(p->value.shape());
    if (p->v.empty()) p->v = Tensor(p->value.shape());
    CADA_CHECK(!p->grad.empty(), "Adam step with no gradient for " << name);
    for (int64_t i = 0; i < p->value.size(); ++i) {
      double g = p->grad[i];
      p->m[i] = beta1_ * p->m[i] + (1.0 - beta1_) * g;
      p->v[i] = beta2_ * p->v[i] + (1.0 - beta2_) * g * g;
      double m_hat = p->m[i] / bias1;
      double v_hat = p->v[i] / bias2;
      p->value[i] -= alpha * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

Tensor ConvInit(std::vector<int64_t> shape, Rng* rng, double stddev) {
  Tensor t(std::move(shape));
  t.FillNormal(rng, 0.0, stddev);
  return t;
}

Tensor LinearInit(int64_t out_dim, int64_t in_dim, Rng* rng) {
  Tensor t({out_dim, in_dim});
  double bound = 1.0 / std::sqrt(double(in_dim));
  t.FillUniform(rng, -bound, bound);
  return t;
}

void Conv2dLayer::Init(int64_t in_ch, int64_t out_ch, int k, int stride_, int pad_, Rng* rng) {
  w = Param(ConvInit({out_ch, in_ch, k, k}, rng));
  b = Param(Tensor({out_ch}));
  stride = stride_;
  pad = pad_;
}

void Conv2dLayer::Register(const std::string& prefix, ParamRegistry* reg) {
  reg->Add(prefix + ".w", &w);
  reg->Add(prefix + ".b", &b);
}

Var Conv2dLayer::Forward(Tape* tape, const Var& x, bool trainable) {
  Var wv = trainable ? tape->Leaf(&w) : tape->Frozen(&w);
  Var bv = trainable ? tape->Leaf(&b) : tape->Frozen(&b);
  return Conv2d(x, wv, bv, stride, pad);
}

void ConvTranspose2dLayer::Init(int64_t in_ch, int64_t out_ch, int k, int stride_, int pad_,
                                Rng* rng) {
  w = Param(ConvInit({in_ch, out_ch, k, k}, rng));
  b = Param(Tensor({out_ch}));
  stride = stride_;
  pad = pad_;
}

void ConvTranspose2dLayer::Register(const std::string& prefix, ParamRegistry* reg) {
  reg->Add(prefix + ".w", &w);
  reg->Add(prefix + ".b", &b);
}

Var ConvTranspose2dLayer::Forward(Tape* tape, const Var& x, int64_t out_h, int64_t out_w,
                                  bool trainable) {
  Var wv = trainable ? tape->Leaf(&w) : tape->Frozen(&w);
  Var bv = trainable ? tape->Leaf(&b) : tape->Frozen(&b);
  return ConvTranspose2d(x, wv, bv, stride, pad, out_h, out_w);
}

void LinearLayer::Init(int64_t in_dim, int64_t out_dim, Rng* rng) {
  w = Param(LinearInit(out_dim, in_dim, rng));
  b = Param(Tensor({out_dim}));
}

void LinearLayer::Register(const std::string& prefix, ParamRegistry* reg) {
  reg->Add(prefix + ".w", &w);
  reg->Add(prefix + ".b", &b);
}

Var LinearLayer::Forward(Tape* tape, const Var& x, bool trainable) {
  Var wv = trainable ? tape->Leaf(&w) : tape->Frozen(&w);
  Var bv = trainable ? tape->Leaf(&b) : tape->Frozen(&b);
  return Linear(x, wv, bv);
}

void BatchNormLayer::Init(int64_t channels) {
  gamma = Param(Tensor::Full({channels}, 1.0));
  beta = Param(Tensor({channels}));
  running_mean = Tensor({channels});
  running_var = Tensor::Full({channels}, 1.0);
}

void BatchNormLayer::Register(const std::string& prefix, ParamRegistry* reg) {
  reg->Add(prefix + ".gamma", &gamma);
  reg->Add(prefix + ".beta", &beta);
  reg->AddBuffer(prefix + ".running_mean", &running_mean);
  reg->AddBuffer(prefix + ".running_var", &running_var);
}

Var BatchNormLayer::Forward(Tape* tape, const Var& x, bool training, bool trainable) {
  Var g = trainable ? tape->Leaf(&gamma) : tape->Frozen(&gamma);
  Var bt = trainable ? tape->Leaf(&beta) : tape->Frozen(&beta);
  return BatchNorm(x, g, bt, &running_mean, &running_var, training);
}

}  // namespace cada
