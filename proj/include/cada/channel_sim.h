// cada/channel_sim.h

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

#ifndef CADA_CHANNEL_SIM_H_
#define CADA_CHANNEL_SIM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cada/manifest.h"

namespace cada {

struct EqBand {
  double center_hz = 1000;
  double gain_db = 0;
  double q = 1.0;
};

// Parametric recording-channel model: peaking-EQ cascade, band limits, gain
// and additive white noise at a fixed SNR. Applying a profile never changes
// the audio length.
struct ChannelProfile {
  std::string name;
  std::vector<EqBand> eq_bands;
  std::optional<double> lowpass_hz;
  std::optional<double> highpass_hz;
  double gain_db = 0;
  std::optional<double> noise_snr_db;
  uint64_t seed = 0;
};

void ValidateProfile(const ChannelProfile& p, int sample_rate);

// Deterministic given (profile.seed, noise_key); callers pass a per-file key
// (hash of the output utt_id) so corpora are reproducible file by file.
std::vector<double> ApplyChannel(const std::vector<double>& audio, const ChannelProfile& p,
                                 int sample_rate, uint64_t noise_key = 0);

// Fabricates the parallel multi-channel corpus: every clean utterance becomes
// one set spanning all profiles. Returns the manifest path.
std::string SynthCorpus(const std::vector<UtteranceRecord>& clean_records,
                        const std::vector<ChannelProfile>& profiles, const std::string& out_dir);

struct CorpusSplit {
  std::vector<UtteranceRecord> source_records;
  std::vector<UtteranceRecord> target_records;
  std::vector<UtteranceRecord> held_out;  // everything in other channels
};

CorpusSplit BuildSplit(const std::vector<UtteranceRecord>& records,
                       const std::string& source_channel, const std::string& target_channel);

// Equal-size unpaired draw from the two domains; no pairing by set_id.
std::pair<std::vector<UtteranceRecord>, std::vector<UtteranceRecord>> SampleUnpaired(
    const CorpusSplit& split, int64_t n, uint64_t seed);

// Shipped presets: four pretraining channels plus two reserved for the GAN
// source/target roles.
std::vector<ChannelProfile> DefaultProfileBank();

}  // namespace cada

#endif  // CADA_CHANNEL_SIM_H_
