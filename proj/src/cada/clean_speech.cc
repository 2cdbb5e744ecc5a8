// cada/clean_speech.cc

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

#include "cada/clean_speech.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "cada/common.h"
#include "cada/manifest.h"
#include "cada/rng.h"
#include "cada/wav.h"

namespace cada {

namespace {

constexpr int kNumSpeakers = 10;

const char* kSyllables[] = {"ta", "ki", "lo", "ne", "su", "ma", "re", "vi",
                            "do", "pa", "ch", "fu", "ge", "no", "si", "ba"};

struct Syllable {
  bool voiced;
  double f0_start, f0_end;       // Hz
  double formants[3];            // Hz
  double bandwidths[3];          // Hz
  double noise_center;           // Hz, unvoiced only
  double start_s, end_s;
  int text_index;
};

// Formant-shaped amplitude for harmonic frequency f.
double FormantEnvelope(const Syllable& s, double f) {
  double env = 0.02;
  for (int k = 0; k < 3; ++k) {
    double d = (f - s.formants[k]) / s.bandwidths[k];
    env += std::exp(-0.5 * d * d);
  }
  return env;
}

}  // namespace

CleanUtterance SynthCleanUtterance(uint64_t seed, double dur_s, int sample_rate) {
  Rng rng = Rng::Keyed(seed, 0x5eec);
  const int n = int(std::lround(dur_s * sample_rate));

  // Speaker-ish base pitch so the pool has some talker variety.
  double base_f0 = rng.Uniform(95.0, 230.0);

  int n_syll = 4 + int(rng.NextBelow(4));
  std::vector<Syllable> sylls(static_cast<size_t>(n_syll));
  double t = 0.02;
  double prev_f0 = base_f0;
  for (int i = 0; i < n_syll; ++i) {
    Syllable& s = sylls[size_t(i)];
    s.voiced = rng.NextDouble() < 0.8;
    s.f0_start = std::clamp(prev_f0 * rng.Uniform(0.88, 1.12), 80.0, 300.0);
    s.f0_end = std::clamp(s.f0_start * rng.Uniform(0.85, 1.15), 80.0, 300.0);
    prev_f0 = s.f0_end;
    s.formants[0] = rng.Uniform(280.0, 900.0);
    s.formants[1] = s.formants[0] + rng.Uniform(350.0, 1500.0);
    s.formants[2] = rng.Uniform(2400.0, 3500.0);
    for (int k = 0; k < 3; ++k) s.bandwidths[k] = rng.Uniform(90.0, 220.0) * (k + 1);
    s.noise_center = rng.Uniform(2000.0, 6000.0);
    double len = rng.Uniform(0.12, 0.24);
    s.start_s = t;
    s.end_s = std::min(t + len, dur_s - 0.01);
    t = s.end_s + rng.Uniform(0.015, 0.05);
    s.text_index = int(rng.NextBelow(16));
    if (t >= dur_s - 0.03) {
      sylls.resize(size_t(i + 1));
      break;
    }
  }

  std::vector<double> x(size_t(n), 0.0);
  for (const Syllable& s : sylls) {
    int i0 = int(s.start_s * sample_rate), i1 = int(s.end_s * sample_rate);
    i1 = std::min(i1, n);
    if (i1 <= i0) continue;
    double seg = double(i1 - i0);
    double phase = rng.Uniform(0.0, 2.0 * M_PI);
    double noise_prev = 0.0;
    for (int i = i0; i < i1; ++i) {
      double u = double(i - i0) / seg;  // 0..1 inside the syllable
      // Raised-cosine attack and decay.
      double env = 1.0;
      if (u < 0.18) env = 0.5 - 0.5 * std::cos(M_PI * u / 0.18);
      else if (u > 0.8) env = 0.5 - 0.5 * std::cos(M_PI * (1.0 - u) / 0.2);
      double v = 0.0;
      if (s.voiced) {
        double f0 = s.f0_start + (s.f0_end - s.f0_start) * u;
        phase += 2.0 * M_PI * f0 / sample_rate;
        int max_h = std::min<int>(40, int(6500.0 / f0));
        for (int h = 1; h <= max_h; ++h) {
          double fh = h * f0;
          v += FormantEnvelope(s, fh) / std::pow(double(h), 0.5) * std::sin(h * phase);
        }
        v *= 0.12;
      } else {
        double w = rng.Uniform(-1.0, 1.0);
        // Crude spectral tilt toward noise_center: difference filter mix.
        double hp = w - noise_prev;
        noise_prev = w;
        double mix = std::clamp((s.noise_center - 2000.0) / 4000.0, 0.0, 1.0);
        v = 0.28 * ((1.0 - mix) * w + mix * hp);
      }
      x[size_t(i)] += env * v;
    }
  }

  // Low breath-noise floor keeps the log-mel gaps off the hard clip.
  for (int i = 0; i < n; ++i) x[size_t(i)] += 3e-5 * rng.Normal();

  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::fabs(v));
  if (peak > 0) {
    double g = 0.35 / peak;
    for (double& v : x) v *= g;
  }

  CleanUtterance out;
  out.samples = std::move(x);
  for (size_t i = 0; i < sylls.size(); ++i) {
    if (i) out.transcript += " ";
    out.transcript += kSyllables[sylls[i].text_index];
  }
  return out;
}

std::string GenerateCleanCorpus(const std::string& out_dir, int n, uint64_t seed, int sample_rate,
                                double dur_s) {
  CADA_CHECK(n > 0, "clean corpus needs at least one utterance");
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "wav");

  std::vector<UtteranceRecord> records;
  records.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "clean-%04d", i);
    CleanUtterance utt = SynthCleanUtterance(seed + uint64_t(i) * 0x9e37ull, dur_s, sample_rate);
    std::string wav_path = (fs::path(out_dir) / "wav" / (std::string(id) + ".wav")).string();
    WriteWavMono(wav_path, utt.samples, sample_rate);

    UtteranceRecord rec;
    rec.utt_id = id;
    rec.set_id = id;
    char spk[16];
    std::snprintf(spk, sizeof(spk), "spk-%02d", i % kNumSpeakers);
    rec.speaker_id = spk;
    rec.channel_label = "raw";
    rec.audio_ref = wav_path;
    rec.transcript = utt.transcript;
    rec.sample_rate = sample_rate;
    records.push_back(std::move(rec));
  }
  std::string manifest_path = (fs::path(out_dir) / "clean.jsonl").string();
  SaveManifest(manifest_path, records);
  return manifest_path;
}

}  // namespace cada
