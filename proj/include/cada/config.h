// cada/config.h

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

#ifndef CADA_CONFIG_H_
#define CADA_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "cada/channel_sim.h"
#include "cada/features.h"
#include "cada/train_options.h"

namespace cada {

struct CorpusConfig {
  int sample_rate = 16000;
  int n_clean = 200;
  uint64_t clean_seed = 11;
  double dur_s = 1.28;
  std::string out_dir = "work/corpus";
  std::vector<std::string> profiles;  // bank order; empty = all [profile:*] sections
};

struct EncoderConfig {
  int d_c = 64;
  std::vector<int64_t> widths = {16, 32, 64, 128};  // one conv stage per entry
  double lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int epochs = 30;
  int batch_size = 16;
  uint64_t seed = 1;
  double val_fraction = 0.1;  // fraction of sets held out for validation
  std::vector<std::string> exclude_channels;
  std::string arch = "cnn_mfa";  // reserved: "conformer" variant slot
  std::string manifest;
};

struct GanArchConfig {
  std::vector<int64_t> g_widths = {64, 128};  // down-conv output channels
  int64_t d_width = 64;                       // first discriminator width
  int n_res_blocks = 9;
  double dropout = 0.5;
  int64_t proj_dim = 256;
  int frame_t = 129, frame_m = 128;
};

struct TrainSettings {
  std::string manifest;
  std::string source_channel = "condenser-ish";
  std::string target_channel = "webcam-ish";
  int n_sample = 40;  // per-domain unpaired sample size
  uint64_t sample_seed = 17;

  int epochs = 400;
  double lr = 0.0002;
  double beta1 = 0.5, beta2 = 0.999, eps = 1e-8;
  double lambda_ch = 0.5;
  double tau = 0.07;
  int n_patches = 256;
  int batch_size = 4;
  uint64_t seed = 1;
  NegativesFrom negatives_from = NegativesFrom::kSource;
  AdvForm adv_form = AdvForm::kNonSaturating;
  bool lr_decay = true;
  int checkpoint_every = 50;

  void Validate() const {
    // lr == 0 is allowed as a diagnostic no-op step.
    CADA_CHECK(lr >= 0, "train.lr must be nonnegative");
    CADA_CHECK(epochs >= 1, "train.epochs must be >= 1");
    CADA_CHECK(n_patches >= 1, "train.n_patches must be >= 1");
    CADA_CHECK(batch_size >= 1, "train.batch_size must be >= 1");
    CADA_CHECK(tau > 0, "train.tau must be positive");
    CADA_CHECK(lambda_ch >= 0, "train.lambda_ch must be nonnegative");
    CADA_CHECK(checkpoint_every >= 1, "train.checkpoint_every must be >= 1");
  }
};

struct SimulateSettings {
  uint64_t seed = 1;
};

struct CadaConfig {
  CorpusConfig corpus;
  FeatureConfig features;
  EncoderConfig encoder;
  GanArchConfig gan;
  TrainSettings train;
  SimulateSettings simulate;
  std::vector<ChannelProfile> profile_bank;
  uint64_t config_hash = 0;
};

// Declarative key=value config with [corpus] [features] [encoder] [gan]
// [train] [simulate] and any number of [profile:NAME] sections. Unknown keys
// or sections are errors.
CadaConfig LoadConfig(const std::string& path);
CadaConfig DefaultConfig();

// The six shipped profile presets rendered as config text, plus defaults for
// every section (used by `synth-corpus --write-default`).
std::string DefaultConfigText();

}  // namespace cada

#endif  // CADA_CONFIG_H_
