// cada/simulate.cc

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

#include "cada/simulate.h"

#include <cmath>
#include <filesystem>
#include <map>

#include "cada/rng.h"

namespace cada {

Spectrogram ConvertUtterance(GeneratorModel* g, EncoderModel* encoder, const Spectrogram& src,
                             const std::vector<SpectrogramFrame>& target_frames) {
  CADA_CHECK(!target_frames.empty(), "convert_utterance: target utterance has no frames");
  Tensor c_target = encoder->EmbedUtterance(target_frames);

  std::vector<SpectrogramFrame> frames = FrameSpectrogram(src, g->config().frame_t);
  for (auto& f : frames) f.values = Generate(g, f.values, c_target);
  Spectrogram out = Unframe(frames, src.frames(), src.hop_s);
  out.utt_id = src.utt_id;
  return out;
}

std::string SimulateDataset(GeneratorModel* g, EncoderModel* encoder,
                            const std::string& source_manifest, const std::string& target_manifest,
                            const std::string& out_dir, uint64_t seed, const FeatureConfig& fcfg) {
  std::vector<UtteranceRecord> sources = LoadManifest(source_manifest);
  std::vector<UtteranceRecord> targets = LoadManifest(target_manifest);
  CADA_CHECK(!targets.empty(), "simulate_dataset: target manifest is empty");
  CADA_CHECK(!sources.empty(), "simulate_dataset: source manifest is empty");

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "feats", ec);
  if (ec) throw IoError("cannot create output dir " + out_dir + ": " + ec.message());

  // Target spectrogram frames are reused across draws; cache per target.
  std::map<int64_t, std::vector<SpectrogramFrame>> target_cache;
  auto target_frames = [&](int64_t idx) -> const std::vector<SpectrogramFrame>& {
    auto it = target_cache.find(idx);
    if (it == target_cache.end()) {
      Spectrogram spec = LoadRecordSpectrogram(targets[size_t(idx)], fcfg);
      it = target_cache.emplace(idx, FrameSpectrogram(spec, fcfg.frame_len)).first;
    }
    return it->second;
  };

  Rng rng = Rng::Keyed(seed, 0x5170);
  std::vector<UtteranceRecord> out_records;
  out_records.reserve(sources.size());
  std::string feats_dir = (fs::path(out_dir) / "feats").string();
  for (const auto& src_rec : sources) {
    int64_t t_idx = int64_t(rng.NextBelow(uint64_t(targets.size())));
    Spectrogram src = LoadRecordSpectrogram(src_rec, fcfg);
    Spectrogram sim = ConvertUtterance(g, encoder, src, target_frames(t_idx));
    sim.utt_id = src_rec.utt_id + "-sim";
    std::string f32_path = SaveSpectrogram(feats_dir, sim, fcfg);

    UtteranceRecord rec;
    rec.utt_id = sim.utt_id;
    rec.set_id = sim.utt_id;
    rec.speaker_id = src_rec.speaker_id;
    rec.channel_label = "simulated:" + targets[size_t(t_idx)].channel_label;
    rec.audio_ref = f32_path;
    rec.transcript = src_rec.transcript;
    rec.sample_rate = src_rec.sample_rate;
    rec.kind = "spectrogram";
    rec.source_utt_id = src_rec.utt_id;
    rec.target_utt_id = targets[size_t(t_idx)].utt_id;
    out_records.push_back(std::move(rec));
  }

  std::string manifest_path = (fs::path(out_dir) / "simulated.jsonl").string();
  SaveManifest(manifest_path, out_records);
  return manifest_path;
}

double MeanPerBinCorrelation(const Spectrogram& a, const Spectrogram& b) {
  CADA_CHECK(a.values.SameShape(b.values),
             "per-bin correlation needs equal shapes, got " << a.values.ShapeStr() << " vs "
                                                            << b.values.ShapeStr());
  int64_t t = a.frames(), m = a.mel_bins();
  CADA_CHECK(t >= 2, "per-bin correlation needs at least 2 time frames");
  double total = 0;
  int64_t used = 0;
  for (int64_t bin = 0; bin < m; ++bin) {
    double ma = 0, mb = 0;
    for (int64_t i = 0; i < t; ++i) {
      ma += a.values[i * m + bin];
      mb += b.values[i * m + bin];
    }
    ma /= double(t);
    mb /= double(t);
    double va = 0, vb = 0, cov = 0;
    for (int64_t i = 0; i < t; ++i) {
      double da = a.values[i * m + bin] - ma, db = b.values[i * m + bin] - mb;
      va += da * da;
      vb += db * db;
      cov += da * db;
    }
    if (va < 1e-12 || vb < 1e-12) continue;
    total += cov / std::sqrt(va * vb);
    ++used;
  }
  CADA_CHECK(used > 0, "per-bin correlation: no bin had variance on both sides");
  return total / double(used);
}

}  // namespace cada
