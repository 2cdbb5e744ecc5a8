// cada/gan.h

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

#ifndef CADA_GAN_H_
#define CADA_GAN_H_

#include <string>
#include <vector>

#include "cada/config.h"
#include "cada/nn.h"

namespace cada {

constexpr int kNumFeatureTaps = 5;

// Generator: two stride-2 downsampling convs, a stack of FiLM-modulated
// residual blocks, two stride-2 transposed convs. The down pass records the
// size ladder so the up pass restores the input shape exactly. FiLM maps are
// zero-initialized (gamma = 1 + 0, beta = 0): conditioning is a strict no-op
// until training moves them.
class GeneratorModel {
 public:
  struct Forwarded {
    Var output;                // empty when taps_only
    std::vector<Var> taps;     // input, down1, down2, res block a, res block b
  };

  void Init(const GanArchConfig& cfg, int d_c, Rng* rng);

  // x [N,1,H,W], c [N,d_c]. Dropout draws come from rng in training mode.
  Forwarded Forward(Tape* tape, const Var& x, const Var& c, bool training, Rng* rng,
                    bool trainable, bool taps_only = false);

  int d_c() const { return d_c_; }
  const GanArchConfig& config() const { return cfg_; }
  ParamRegistry& registry() { return registry_; }
  const ParamRegistry& registry() const { return registry_; }
  // Channel count of each feature tap, for sizing projection heads.
  std::vector<int64_t> TapChannels() const;

  void Save(const std::string& path, uint64_t config_hash) const;
  static GeneratorModel Load(const std::string& path);

 private:
  struct ResBlock {
    Conv2dLayer conv1, conv2;
    LinearLayer film_gamma, film_beta;  // d_c -> block channels, zero-init
  };

  GanArchConfig cfg_;
  int d_c_ = 0;
  Conv2dLayer down1_, down2_;
  std::vector<ResBlock> blocks_;
  ConvTranspose2dLayer up1_, up2_;
  ParamRegistry registry_;
};

// PatchGAN discriminator: five 4x4 convs (strides 2,2,2,1,1), LeakyReLU 0.2,
// instance norm on the middle layers, raw patch logits out.
class DiscriminatorModel {
 public:
  void Init(int64_t base_width, Rng* rng);

  Var Forward(Tape* tape, const Var& x, bool trainable);

  int64_t base_width() const { return base_width_; }
  ParamRegistry& registry() { return registry_; }
  const ParamRegistry& registry() const { return registry_; }

  void Save(const std::string& path, uint64_t config_hash) const;
  static DiscriminatorModel Load(const std::string& path);

 private:
  int64_t base_width_ = 64;
  Conv2dLayer convs_[5];
  ParamRegistry registry_;
};

// Two affine maps with a rectifier between; outputs are unit-normalized so
// the contrastive logits are bounded dot products.
struct ProjectionHead {
  LinearLayer fc1, fc2;

  void Init(int64_t in_dim, int64_t proj_dim, Rng* rng);
  void Register(const std::string& prefix, ParamRegistry* reg);
  Var Forward(Tape* tape, const Var& patches, bool trainable);
};

// One head per generator tap.
struct ProjectionHeads {
  std::vector<ProjectionHead> heads;
  ParamRegistry registry;

  void Init(const std::vector<int64_t>& tap_channels, int64_t proj_dim, Rng* rng);
  void Save(const std::string& path, uint64_t config_hash) const;
  void LoadFrom(const std::string& path);
};

// Shared spatial locations sampled from a pair of equally-shaped maps:
// queries from the simulated map, positives from the source map. For query i
// the negatives are the other sampled vectors (source side by default).
struct PatchSample {
  std::vector<int64_t> locations;
  Tensor queries;    // [n, C]
  Tensor positives;  // [n, C]
  bool with_replacement = false;
};

PatchSample SamplePatches(const Tensor& feat_src, const Tensor& feat_sim, int64_t n,
                          uint64_t seed);
// Locations only (graph path); warns and samples with replacement when n
// exceeds the number of spatial positions.
std::vector<int64_t> SamplePatchLocations(int64_t n_positions, int64_t n, uint64_t seed,
                                          bool* with_replacement = nullptr);
// Test helper: the negative set for query i under the sampling contract.
Tensor NegativesFor(const PatchSample& sample, int64_t i, NegativesFrom mode);

// Evaluation-mode wrappers over single frames (dropout off, deterministic).
Tensor Generate(GeneratorModel* g, const Tensor& frame, const Tensor& c);
std::vector<Tensor> ExtractFeatures(GeneratorModel* g, const Tensor& frame, const Tensor& c);
Tensor Discriminate(DiscriminatorModel* d, const Tensor& frame);

}  // namespace cada

#endif  // CADA_GAN_H_
