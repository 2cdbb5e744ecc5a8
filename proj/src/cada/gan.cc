// cada/gan.cc

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

#include "cada/gan.h"

#include <cstring>

#include "cada/checkpoint.h"

namespace cada {

namespace {
int64_t DownDim(int64_t in) { return (in + 2 - 3) / 2 + 1; }  // k=3, s=2, p=1
}  // namespace

void GeneratorModel::Init(const GanArchConfig& cfg, int d_c, Rng* rng) {
  CADA_CHECK(cfg.g_widths.size() == 2, "generator takes exactly two down-conv widths, got "
                                           << cfg.g_widths.size());
  CADA_CHECK(cfg.n_res_blocks >= 1, "generator needs at least one residual block");
  cfg_ = cfg;
  d_c_ = d_c;
  registry_ = ParamRegistry();

  int64_t w0 = cfg.g_widths[0], w1 = cfg.g_widths[1];
  down1_.Init(1, w0, 3, 2, 1, rng);
  down1_.Register("down1", &registry_);
  down2_.Init(w0, w1, 3, 2, 1, rng);
  down2_.Register("down2", &registry_);

  blocks_.clear();
  blocks_.resize(size_t(cfg.n_res_blocks));
  for (int i = 0; i < cfg.n_res_blocks; ++i) {
    ResBlock& blk = blocks_[size_t(i)];
    std::string prefix = "res" + std::to_string(i);
    blk.conv1.Init(w1, w1, 3, 1, 1, rng);
    blk.conv1.Register(prefix + ".conv1", &registry_);
    blk.conv2.Init(w1, w1, 3, 1, 1, rng);
    blk.conv2.Register(prefix + ".conv2", &registry_);
    // Zero-initialized conditioning maps: gamma = 1 + W c, beta = W c.
    blk.film_gamma.w = Param(Tensor({w1, int64_t(d_c)}));
    blk.film_gamma.b = Param(Tensor({w1}));
    blk.film_gamma.Register(prefix + ".film_gamma", &registry_);
    blk.film_beta.w = Param(Tensor({w1, int64_t(d_c)}));
    blk.film_beta.b = Param(Tensor({w1}));
    blk.film_beta.Register(prefix + ".film_beta", &registry_);
  }

  up1_.Init(w1, w0, 3, 2, 1, rng);
  up1_.Register("up1", &registry_);
  up2_.Init(w0, 1, 3, 2, 1, rng);
  up2_.Register("up2", &registry_);
}

std::vector<int64_t> GeneratorModel::TapChannels() const {
  return {1, cfg_.g_widths[0], cfg_.g_widths[1], cfg_.g_widths[1], cfg_.g_widths[1]};
}

GeneratorModel::Forwarded GeneratorModel::Forward(Tape* tape, const Var& x, const Var& c,
                                                  bool training, Rng* rng, bool trainable,
                                                  bool taps_only) {
  CADA_CHECK(x->value.ndim() == 4 && x->value.dim(1) == 1,
             "generator expects [N,1,H,W], got " << x->value.ShapeStr());
  CADA_CHECK(c->value.ndim() == 2 && c->value.dim(1) == d_c_,
             "conditioning embedding must be [N," << d_c_ << "], got " << c->value.ShapeStr());
  CADA_CHECK(c->value.dim(0) == x->value.dim(0), "batch mismatch between x and c");
  CADA_CHECK(!training || rng != nullptr, "training-mode forward needs an rng for dropout");

  const int64_t h0 = x->value.dim(2), w0px = x->value.dim(3);
  const int64_t h1 = DownDim(h0), w1px = DownDim(w0px);

  Forwarded out;
  out.taps.reserve(kNumFeatureTaps);
  out.taps.push_back(x);

  Var h = Relu(InstanceNorm(down1_.Forward(tape, x, trainable)));
  out.taps.push_back(h);
  h = Relu(InstanceNorm(down2_.Forward(tape, h, trainable)));
  out.taps.push_back(h);

  // Taps inside the residual stack: thirds of the way through by default
  // (blocks 3 and 6 of 9).
  int tap_a = std::max(1, cfg_.n_res_blocks / 3);
  int tap_b = std::max(tap_a, 2 * cfg_.n_res_blocks / 3);
  int last_needed = taps_only ? tap_b : cfg_.n_res_blocks;

  Var gamma, beta;
  for (int i = 0; i < last_needed; ++i) {
    ResBlock& blk = blocks_[size_t(i)];
    Var r = Relu(InstanceNorm(blk.conv1.Forward(tape, h, trainable)));
    r = Dropout(r, cfg_.dropout, rng, training);
    r = InstanceNorm(blk.conv2.Forward(tape, r, trainable));
    gamma = AddScalar(blk.film_gamma.Forward(tape, c, trainable), 1.0);
    beta = blk.film_beta.Forward(tape, c, trainable);
    r = Film(r, gamma, beta);
    h = Add(h, r);
    if (i + 1 == tap_a) out.taps.push_back(h);
    if (i + 1 == tap_b) out.taps.push_back(h);
  }
  CADA_CHECK(int(out.taps.size()) == kNumFeatureTaps,
             "internal: expected " << kNumFeatureTaps << " taps, got " << out.taps.size());
  if (taps_only) return out;

  Var u = Relu(InstanceNorm(up1_.Forward(tape, h, h1, w1px, trainable)));
  out.output = Tanh(up2_.Forward(tape, u, h0, w0px, trainable));
  return out;
}

void GeneratorModel::Save(const std::string& path, uint64_t config_hash) const {
  nlohmann::json meta;
  meta["d_c"] = d_c_;
  meta["g_widths"] = cfg_.g_widths;
  meta["n_res_blocks"] = cfg_.n_res_blocks;
  meta["dropout"] = cfg_.dropout;
  meta["frame_t"] = cfg_.frame_t;
  meta["frame_m"] = cfg_.frame_m;
  meta["config_hash"] = config_hash;
  SaveCheckpoint(path, "generator", meta, RegistryTensors(registry_));
}

GeneratorModel GeneratorModel::Load(const std::string& path) {
  Checkpoint ckpt = LoadCheckpoint(path);
  CADA_CHECK(ckpt.kind == "generator", "expected a generator checkpoint, got kind '" << ckpt.kind
                                                                                     << "'");
  GanArchConfig cfg;
  cfg.g_widths = ckpt.meta.at("g_widths").get<std::vector<int64_t>>();
  cfg.n_res_blocks = ckpt.meta.at("n_res_blocks").get<int>();
  cfg.dropout = ckpt.meta.at("dropout").get<double>();
  cfg.frame_t = ckpt.meta.value("frame_t", 129);
  cfg.frame_m = ckpt.meta.value("frame_m", 128);
  GeneratorModel g;
  Rng rng = Rng::Keyed(0, 0);
  g.Init(cfg, ckpt.meta.at("d_c").get<int>(), &rng);
  LoadRegistry(ckpt, g.registry_);
  return g;
}

void DiscriminatorModel::Init(int64_t base_width, Rng* rng) {
  CADA_CHECK(base_width >= 1, "discriminator width must be positive");
  base_width_ = base_width;
  registry_ = ParamRegistry();
  int64_t widths[6] = {1, base_width, base_width * 2, base_width * 4, base_width * 8, 1};
  int strides[5] = {2, 2, 2, 1, 1};
  for (int i = 0; i < 5; ++i) {
    convs_[i].Init(widths[i], widths[i + 1], 4, strides[i], 1, rng);
    convs_[i].Register("conv" + std::to_string(i + 1), &registry_);
  }
}

Var DiscriminatorModel::Forward(Tape* tape, const Var& x, bool trainable) {
  CADA_CHECK(x->value.ndim() == 4 && x->value.dim(1) == 1,
             "discriminator expects [N,1,H,W], got " << x->value.ShapeStr());
  Var h = LeakyRelu(convs_[0].Forward(tape, x, trainable), 0.2);
  for (int i = 1; i < 4; ++i)
    h = LeakyRelu(InstanceNorm(convs_[i].Forward(tape, h, trainable)), 0.2);
  return convs_[4].Forward(tape, h, trainable);
}

void DiscriminatorModel::Save(const std::string& path, uint64_t config_hash) const {
  nlohmann::json meta;
  meta["base_width"] = base_width_;
  meta["config_hash"] = config_hash;
  SaveCheckpoint(path, "discriminator", meta, RegistryTensors(registry_));
}

DiscriminatorModel DiscriminatorModel::Load(const std::string& path) {
  Checkpoint ckpt = LoadCheckpoint(path);
  CADA_CHECK(ckpt.kind == "discriminator",
             "expected a discriminator checkpoint, got kind '" << ckpt.kind << "'");
  DiscriminatorModel d;
  Rng rng = Rng::Keyed(0, 0);
  d.Init(ckpt.meta.at("base_width").get<int64_t>(), &rng);
  LoadRegistry(ckpt, d.registry_);
  return d;
}

void ProjectionHead::Init(int64_t in_dim, int64_t proj_dim, Rng* rng) {
  fc1.Init(in_dim, proj_dim, rng);
  fc2.Init(proj_dim, proj_dim, rng);
}

void ProjectionHead::Register(const std::string& prefix, ParamRegistry* reg) {
  fc1.Register(prefix + ".fc1", reg);
  fc2.Register(prefix + ".fc2", reg);
}

Var ProjectionHead::Forward(Tape* tape, const Var& patches, bool trainable) {
  Var h = Relu(fc1.Forward(tape, patches, trainable));
  return L2NormalizeRows(fc2.Forward(tape, h, trainable));
}

void ProjectionHeads::Init(const std::vector<int64_t>& tap_channels, int64_t proj_dim, Rng* rng) {
  registry = ParamRegistry();
  heads.clear();
  heads.resize(tap_channels.size());
  for (size_t i = 0; i < tap_channels.size(); ++i) {
    heads[i].Init(tap_channels[i], proj_dim, rng);
    heads[i].Register("head" + std::to_string(i), &registry);
  }
}

void ProjectionHeads::Save(const std::string& path, uint64_t config_hash) const {
  nlohmann::json meta;
  meta["n_heads"] = heads.size();
  std::vector<int64_t> in_dims, proj_dims;
  for (const auto& h : heads) {
    in_dims.push_back(h.fc1.w.value.dim(1));
    proj_dims.push_back(h.fc2.w.value.dim(0));
  }
  meta["in_dims"] = in_dims;
  meta["proj_dims"] = proj_dims;
  meta["config_hash"] = config_hash;
  SaveCheckpoint(path, "projection", meta, RegistryTensors(registry));
}

void ProjectionHeads::LoadFrom(const std::string& path) {
  Checkpoint ckpt = LoadCheckpoint(path);
  CADA_CHECK(ckpt.kind == "projection", "expected a projection checkpoint, got kind '" << ckpt.kind
                                                                                       << "'");
  std::vector<int64_t> in_dims = ckpt.meta.at("in_dims").get<std::vector<int64_t>>();
  std::vector<int64_t> proj_dims = ckpt.meta.at("proj_dims").get<std::vector<int64_t>>();
  Rng rng = Rng::Keyed(0, 0);
  registry = ParamRegistry();
  heads.clear();
  heads.resize(in_dims.size());
  for (size_t i = 0; i < in_dims.size(); ++i) {
    heads[i].Init(in_dims[i], proj_dims[i], &rng);
    heads[i].Register("head" + std::to_string(i), &registry);
  }
  LoadRegistry(ckpt, registry);
}

std::vector<int64_t> SamplePatchLocations(int64_t n_positions, int64_t n, uint64_t seed,
                                          bool* with_replacement) {
  CADA_CHECK(n >= 1, "patch count must be >= 1");
  Rng rng = Rng::Keyed(seed, 0x9a7c);
  if (with_replacement) *with_replacement = false;
  if (n > n_positions) {
    Warn(CADA_MAKE_MSG("sample_patches: " << n << " patches requested from " << n_positions
                                          << " positions; sampling with replacement"));
    if (with_replacement) *with_replacement = true;
    std::vector<int64_t> out(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) out[size_t(i)] = int64_t(rng.NextBelow(uint64_t(n_positions)));
    return out;
  }
  return rng.SampleWithoutReplacement(n_positions, n);
}

PatchSample SamplePatches(const Tensor& feat_src, const Tensor& feat_sim, int64_t n,
                          uint64_t seed) {
  CADA_CHECK(feat_src.ndim() == 3 && feat_sim.ndim() == 3, "feature maps must be [C,H,W]");
  CADA_CHECK(feat_src.SameShape(feat_sim), "sample_patches: feature map shapes differ: "
                                               << feat_src.ShapeStr() << " vs "
                                               << feat_sim.ShapeStr());
  int64_t c = feat_src.dim(0), hw = feat_src.dim(1) * feat_src.dim(2);

  PatchSample out;
  out.locations = SamplePatchLocations(hw, n, seed, &out.with_replacement);
  out.queries = Tensor({n, c});
  out.positives = Tensor({n, c});
  for (int64_t i = 0; i < n; ++i) {
    int64_t pos = out.locations[size_t(i)];
    for (int64_t ch = 0; ch < c; ++ch) {
      out.queries[i * c + ch] = feat_sim[ch * hw + pos];
      out.positives[i * c + ch] = feat_src[ch * hw + pos];
    }
  }
  return out;
}

Tensor NegativesFor(const PatchSample& sample, int64_t i, NegativesFrom mode) {
  const Tensor& pool = mode == NegativesFrom::kSource ? sample.positives : sample.queries;
  int64_t n = pool.dim(0), c = pool.dim(1);
  CADA_CHECK(i >= 0 && i < n, "query index out of range");
  Tensor neg({n - 1, c});
  int64_t r = 0;
  for (int64_t j = 0; j < n; ++j) {
    if (j == i) continue;
    std::memcpy(neg.data() + r * c, pool.data() + j * c, size_t(c) * sizeof(double));
    ++r;
  }
  return neg;
}

namespace {
Tensor FrameToBatch(const Tensor& frame) {
  CADA_CHECK(frame.ndim() == 2, "expected a [T,M] frame, got " << frame.ShapeStr());
  return frame.Reshaped({1, 1, frame.dim(0), frame.dim(1)});
}
}  // namespace

Tensor Generate(GeneratorModel* g, const Tensor& frame, const Tensor& c) {
  const GanArchConfig& cfg = g->config();
  CADA_CHECK(frame.ndim() == 2 && frame.dim(0) == cfg.frame_t && frame.dim(1) == cfg.frame_m,
             "generate: frame must be " << cfg.frame_t << "x" << cfg.frame_m << ", got "
                                        << frame.ShapeStr());
  CADA_CHECK(c.size() == g->d_c(), "generate: conditioning dimension " << c.size()
                                                                       << " != d_c " << g->d_c());
  Tape tape;
  auto fwd = g->Forward(&tape, tape.Input(FrameToBatch(frame)),
                        tape.Input(c.Reshaped({1, int64_t(g->d_c())})),
                        /*training=*/false, nullptr, /*trainable=*/false);
  return fwd.output->value.Reshaped({frame.dim(0), frame.dim(1)});
}

std::vector<Tensor> ExtractFeatures(GeneratorModel* g, const Tensor& frame, const Tensor& c) {
  const GanArchConfig& cfg = g->config();
  CADA_CHECK(frame.ndim() == 2 && frame.dim(0) == cfg.frame_t && frame.dim(1) == cfg.frame_m,
             "extract_features: frame must be " << cfg.frame_t << "x" << cfg.frame_m << ", got "
                                                << frame.ShapeStr());
  CADA_CHECK(c.size() == g->d_c(), "extract_features: conditioning dimension mismatch");
  Tape tape;
  auto fwd = g->Forward(&tape, tape.Input(FrameToBatch(frame)),
                        tape.Input(c.Reshaped({1, int64_t(g->d_c())})),
                        /*training=*/false, nullptr, /*trainable=*/false, /*taps_only=*/true);
  std::vector<Tensor> maps;
  maps.reserve(fwd.taps.size());
  for (const Var& tap : fwd.taps) {
    const Tensor& v = tap->value;  // [1,C,H,W]
    maps.push_back(v.Reshaped({v.dim(1), v.dim(2), v.dim(3)}));
  }
  return maps;
}

Tensor Discriminate(DiscriminatorModel* d, const Tensor& frame) {
  CADA_CHECK(frame.ndim() == 2 && frame.dim(0) >= 16 && frame.dim(1) >= 16,
             "discriminate: frame too small or wrong rank: " << frame.ShapeStr());
  Tape tape;
  Var logits = d->Forward(&tape, tape.Input(FrameToBatch(frame)), /*trainable=*/false);
  const Tensor& v = logits->value;
  return v.Reshaped({v.dim(2), v.dim(3)});
}

}  // namespace cada
