// cada/nn.h

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

#ifndef CADA_NN_H_
#define CADA_NN_H_

#include <string>
#include <utility>
#include <vector>

#include "cada/graph.h"

namespace cada {

// Flat view of a model's parameters and persistent buffers (running stats),
// used by the optimizer and the checkpoint container. Pointees are owned by
// the model; names are hierarchical ("g.down1.w").
class ParamRegistry {
 public:
  void Add(const std::string& name, Param* p) { params_.emplace_back(name, p); }
  void AddBuffer(const std::string& name, Tensor* t) { buffers_.emplace_back(name, t); }

  const std::vector<std::pair<std::string, Param*>>& params() const { return params_; }
  const std::vector<std::pair<std::string, Tensor*>>& buffers() const { return buffers_; }

  Param* Find(const std::string& name) const;
  int64_t TotalParamCount() const;
  void ZeroGrads() const;

 private:
  std::vector<std::pair<std::string, Param*>> params_;
  std::vector<std::pair<std::string, Tensor*>> buffers_;
};

// Adaptive-moment optimizer over one registry's parameters. Moments live in
// the Params themselves so checkpoints capture optimizer state with the model.
class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void Step(const ParamRegistry& registry, double lr_scale = 1.0);

  int64_t step_count() const { return t_; }
  void set_step_count(int64_t t) { t_ = t; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

// Weight initializers.
Tensor ConvInit(std::vector<int64_t> shape, Rng* rng, double stddev = 0.02);
Tensor LinearInit(int64_t out_dim, int64_t in_dim, Rng* rng);

// Layer building blocks; each owns its Params and registers them by prefix.

struct Conv2dLayer {
  Param w, b;
  int stride = 1, pad = 1;

  void Init(int64_t in_ch, int64_t out_ch, int k, int stride_, int pad_, Rng* rng);
  void Register(const std::string& prefix, ParamRegistry* reg);
  Var Forward(Tape* tape, const Var& x, bool trainable);
};

struct ConvTranspose2dLayer {
  Param w, b;
  int stride = 2, pad = 1;

  void Init(int64_t in_ch, int64_t out_ch, int k, int stride_, int pad_, Rng* rng);
  void Register(const std::string& prefix, ParamRegistry* reg);
  Var Forward(Tape* tape, const Var& x, int64_t out_h, int64_t out_w, bool trainable);
};

struct LinearLayer {
  Param w, b;

  void Init(int64_t in_dim, int64_t out_dim, Rng* rng);
  void Register(const std::string& prefix, ParamRegistry* reg);
  Var Forward(Tape* tape, const Var& x, bool trainable);
};

struct BatchNormLayer {
  Param gamma, beta;
  Tensor running_mean, running_var;

  void Init(int64_t channels);
  void Register(const std::string& prefix, ParamRegistry* reg);
  Var Forward(Tape* tape, const Var& x, bool training, bool trainable);
};

}  // namespace cada

#endif  // CADA_NN_H_
