// cada/channel_sim.cc

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

#include "cada/channel_sim.h"

#include <cmath>
#include <filesystem>
#include <unordered_set>

#include "cada/common.h"
#include "cada/dsp.h"
#include "cada/rng.h"
#include "cada/wav.h"

namespace cada {

void ValidateProfile(const ChannelProfile& p, int sample_rate) {
  double nyquist = double(sample_rate) / 2.0;
  if (p.lowpass_hz) CADA_CHECK(*p.lowpass_hz > 0 && *p.lowpass_hz < nyquist,
                               "profile " << p.name << ": lowpass_hz out of (0, nyquist)");
  if (p.highpass_hz) CADA_CHECK(*p.highpass_hz > 0 && *p.highpass_hz < nyquist,
                                "profile " << p.name << ": highpass_hz out of (0, nyquist)");
  if (p.lowpass_hz && p.highpass_hz)
    CADA_CHECK(*p.highpass_hz < *p.lowpass_hz,
               "profile " << p.name << ": highpass_hz must be below lowpass_hz");
  for (const EqBand& band : p.eq_bands) {
    CADA_CHECK(band.q > 0, "profile " << p.name << ": EQ band Q must be positive");
    CADA_CHECK(band.center_hz > 0 && band.center_hz < nyquist,
               "profile " << p.name << ": EQ band center out of range");
  }
}

std::vector<double> ApplyChannel(const std::vector<double>& audio, const ChannelProfile& p,
                                 int sample_rate, uint64_t noise_key) {
  ValidateProfile(p, sample_rate);
  for (double v : audio)
    CADA_CHECK(std::isfinite(v), "apply_channel: non-finite input sample");

  std::vector<double> y = audio;
  for (const EqBand& band : p.eq_bands) {
    Biquad f = Biquad::Peaking(double(sample_rate), band.center_hz, band.gain_db, band.q);
    f.Process(y.data(), y.data(), y.size());
  }
  if (p.highpass_hz) {
    Biquad f = Biquad::Highpass(double(sample_rate), *p.highpass_hz);
    f.Process(y.data(), y.data(), y.size());
  }
  if (p.lowpass_hz) {
    Biquad f = Biquad::Lowpass(double(sample_rate), *p.lowpass_hz);
    f.Process(y.data(), y.data(), y.size());
  }
  if (p.gain_db != 0.0) {
    double g = std::pow(10.0, p.gain_db / 20.0);
    for (double& v : y) v *= g;
  }
  if (p.noise_snr_db) {
    double sig_rms = Rms(y);
    double sigma = sig_rms * std::pow(10.0, -*p.noise_snr_db / 20.0);
    if (sigma > 0) {
      Rng rng = Rng::Keyed(p.seed, noise_key);
      for (double& v : y) v += sigma * rng.Normal();
    }
  }
  return y;
}

std::string SynthCorpus(const std::vector<UtteranceRecord>& clean_records,
                        const std::vector<ChannelProfile>& profiles, const std::string& out_dir) {
  CADA_CHECK(profiles.size() >= 2, "synth_corpus needs at least 2 profiles, got "
                                       << profiles.size());
  CADA_CHECK(!clean_records.empty(), "synth_corpus: no clean records");
  std::unordered_set<std::string> names;
  for (const auto& p : profiles)
    CADA_CHECK(names.insert(p.name).second, "duplicate profile name: " << p.name);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "wav", ec);
  if (ec) throw IoError("cannot create corpus directory " + out_dir + ": " + ec.message());

  std::vector<UtteranceRecord> records;
  records.reserve(clean_records.size() * profiles.size());
  for (const auto& clean : clean_records) {
    WavData wav = ReadWavMono(clean.audio_ref);
    for (const auto& profile : profiles) {
      UtteranceRecord rec;
      rec.utt_id = clean.utt_id + "__" + profile.name;
      rec.set_id = clean.utt_id;
      rec.speaker_id = clean.speaker_id;
      rec.channel_label = profile.name;
      rec.transcript = clean.transcript;
      rec.sample_rate = wav.sample_rate;
      std::vector<double> processed =
          ApplyChannel(wav.samples, profile, wav.sample_rate, Fnv1a64(rec.utt_id));
      std::string wav_path = (fs::path(out_dir) / "wav" / (rec.utt_id + ".wav")).string();
      WriteWavMono(wav_path, processed, wav.sample_rate);
      rec.audio_ref = wav_path;
      records.push_back(std::move(rec));
    }
  }
  std::string manifest_path = (fs::path(out_dir) / "corpus.jsonl").string();
  SaveManifest(manifest_path, records);
  return manifest_path;
}

CorpusSplit BuildSplit(const std::vector<UtteranceRecord>& records,
                       const std::string& source_channel, const std::string& target_channel) {
  CADA_CHECK(source_channel != target_channel, "source and target channels must differ");
  CorpusSplit split;
  for (const auto& r : records) {
    if (r.channel_label == source_channel) split.source_records.push_back(r);
    else if (r.channel_label == target_channel) split.target_records.push_back(r);
    else split.held_out.push_back(r);
  }
  return split;
}

std::pair<std::vector<UtteranceRecord>, std::vector<UtteranceRecord>> SampleUnpaired(
    const CorpusSplit& split, int64_t n, uint64_t seed) {
  CADA_CHECK(n >= 0, "sample size must be nonnegative");
  CADA_CHECK(n <= int64_t(split.source_records.size()) && n <= int64_t(split.target_records.size()),
             "sample_unpaired: n=" << n << " exceeds domain sizes " << split.source_records.size()
                                   << "/" << split.target_records.size());
  Rng src_rng = Rng::Keyed(seed, 0x50);
  Rng tgt_rng = Rng::Keyed(seed, 0x51);
  auto pick = [](const std::vector<UtteranceRecord>& pool, int64_t k, Rng* rng) {
    std::vector<int64_t> idx = rng->SampleWithoutReplacement(int64_t(pool.size()), k);
    std::vector<UtteranceRecord> out;
    out.reserve(size_t(k));
    for (int64_t i : idx) out.push_back(pool[size_t(i)]);
    return out;
  };
  return {pick(split.source_records, n, &src_rng), pick(split.target_records, n, &tgt_rng)};
}

std::vector<ChannelProfile> DefaultProfileBank() {
  std::vector<ChannelProfile> bank;

  ChannelProfile clean;
  clean.name = "clean";
  clean.noise_snr_db = 45;
  clean.seed = 101;
  bank.push_back(clean);

  ChannelProfile telephone;
  telephone.name = "telephone-ish";
  telephone.highpass_hz = 300;
  telephone.lowpass_hz = 3400;
  telephone.eq_bands = {{1500, 5, 1.0}};
  telephone.gain_db = -2;
  telephone.noise_snr_db = 24;
  telephone.seed = 102;
  bank.push_back(telephone);

  ChannelProfile laptop;
  laptop.name = "laptop-ish";
  laptop.highpass_hz = 150;
  laptop.eq_bands = {{400, -5, 1.2}, {4200, 6, 1.5}};
  laptop.gain_db = -1;
  laptop.noise_snr_db = 30;
  laptop.seed = 103;
  bank.push_back(laptop);

  ChannelProfile muffled;
  muffled.name = "muffled";
  muffled.lowpass_hz = 1200;
  muffled.eq_bands = {{250, 4, 0.8}};
  muffled.gain_db = -3;
  muffled.noise_snr_db = 34;
  muffled.seed = 104;
  bank.push_back(muffled);

  // Reserved for the adaptation experiment roles.
  ChannelProfile condenser;
  condenser.name = "condenser-ish";
  condenser.eq_bands = {{8000, 2, 1.0}};
  condenser.noise_snr_db = 48;
  condenser.seed = 105;
  bank.push_back(condenser);

  ChannelProfile webcam;
  webcam.name = "webcam-ish";
  webcam.highpass_hz = 250;
  webcam.lowpass_hz = 5200;
  webcam.eq_bands = {{2600, 5, 1.3}, {600, -3, 1.0}};
  webcam.gain_db = -4;
  webcam.noise_snr_db = 20;
  webcam.seed = 106;
  bank.push_back(webcam);

  return bank;
}

}  // namespace cada
