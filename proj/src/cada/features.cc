// cada/features.cc

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

#include "cada/features.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "cada/common.h"
#include "cada/dsp.h"
#include "cada/wav.h"

namespace cada {

namespace {

using nlohmann::json;

double HzToMel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double MelToHz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Triangular mel filterbank [n_mels, n_fft/2 + 1], HTK mel scale, 0..sr/2.
std::vector<double> MelFilterbank(int sample_rate, int n_fft, int n_mels) {
  int n_bins = n_fft / 2 + 1;
  std::vector<double> fb(size_t(n_mels) * size_t(n_bins), 0.0);
  double mel_max = HzToMel(double(sample_rate) / 2.0);
  std::vector<double> centers(size_t(n_mels) + 2);
  for (int m = 0; m < n_mels + 2; ++m)
    centers[size_t(m)] = MelToHz(mel_max * double(m) / double(n_mels + 1));
  for (int k = 0; k < n_bins; ++k) {
    double f = double(k) * double(sample_rate) / double(n_fft);
    for (int m = 0; m < n_mels; ++m) {
      double lo = centers[size_t(m)], mid = centers[size_t(m) + 1], hi = centers[size_t(m) + 2];
      double w = 0.0;
      if (f > lo && f < hi) w = (f <= mid) ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      fb[size_t(m) * size_t(n_bins) + size_t(k)] = w;
    }
  }
  return fb;
}

double ReflectSample(const std::vector<double>& x, int64_t i) {
  int64_t n = int64_t(x.size());
  if (i < 0) i = -i;
  if (i >= n) i = 2 * n - 2 - i;
  return x[size_t(std::clamp<int64_t>(i, 0, n - 1))];
}

}  // namespace

Spectrogram ComputeLogMel(const std::vector<double>& audio, int sample_rate,
                          const FeatureConfig& cfg, const std::string& utt_id) {
  const int win = int(std::lround(cfg.win_ms * sample_rate / 1000.0));
  const int hop = int(std::lround(cfg.hop_ms * sample_rate / 1000.0));
  CADA_CHECK(win > 0 && hop > 0 && cfg.n_fft >= win,
             "bad analysis config: win=" << win << " hop=" << hop << " n_fft=" << cfg.n_fft);
  CADA_CHECK(int64_t(audio.size()) >= win,
             "audio too short: " << audio.size() << " samples < one " << win << "-sample window");
  for (double v : audio) CADA_CHECK(std::isfinite(v), "compute_logmel: non-finite sample");

  const int64_t n = int64_t(audio.size());
  const int64_t n_frames = 1 + n / hop;
  const int n_bins = cfg.n_fft / 2 + 1;
  const std::vector<double> window = HannWindow(win);
  const std::vector<double> fb = MelFilterbank(sample_rate, cfg.n_fft, cfg.n_mels);
  const int wing = win / 2;

  Tensor values({n_frames, int64_t(cfg.n_mels)});
  std::vector<std::complex<double>> buf(size_t(cfg.n_fft));
  const double scale = 2.0 / (cfg.log_ceil - cfg.log_floor);
  for (int64_t t = 0; t < n_frames; ++t) {
    int64_t center = t * hop;
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    int off = (cfg.n_fft - win) / 2;
    for (int i = 0; i < win; ++i)
      buf[size_t(off + i)] = ReflectSample(audio, center - wing + i) * window[size_t(i)];
    Fft(&buf);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      const double* w = fb.data() + size_t(m) * size_t(n_bins);
      for (int k = 0; k < n_bins; ++k) e += w[k] * std::norm(buf[size_t(k)]);
      double l = std::log10(e + 1e-10);
      l = std::clamp(l, cfg.log_floor, cfg.log_ceil);
      values[t * cfg.n_mels + m] = (l - cfg.log_floor) * scale - 1.0;
    }
  }

  Spectrogram spec;
  spec.values = std::move(values);
  spec.hop_s = cfg.hop_ms / 1000.0;
  spec.utt_id = utt_id;
  return spec;
}

std::vector<SpectrogramFrame> FrameSpectrogram(const Spectrogram& spec, int frame_len) {
  CADA_CHECK(frame_len > 0, "frame_len must be positive");
  CADA_CHECK(spec.frames() > 0, "cannot frame an empty spectrogram");
  const int64_t t_total = spec.frames(), mels = spec.mel_bins();
  const int64_t n_out = (t_total + frame_len - 1) / frame_len;
  std::vector<SpectrogramFrame> out;
  out.reserve(size_t(n_out));
  for (int64_t f = 0; f < n_out; ++f) {
    SpectrogramFrame frame;
    frame.utt_id = spec.utt_id;
    frame.start_frame = f * frame_len;
    int64_t remain = t_total - frame.start_frame;
    int64_t copy = std::min<int64_t>(frame_len, remain);
    frame.pad_len = frame_len - copy;
    frame.values = Tensor({int64_t(frame_len), mels});
    std::memcpy(frame.values.data(), spec.values.data() + frame.start_frame * mels,
                size_t(copy * mels) * sizeof(double));
    out.push_back(std::move(frame));
  }
  return out;
}

Spectrogram Unframe(const std::vector<SpectrogramFrame>& frames, int64_t total_frames,
                    double hop_s) {
  CADA_CHECK(!frames.empty(), "unframe: no frames");
  std::vector<const SpectrogramFrame*> ordered;
  ordered.reserve(frames.size());
  for (const auto& f : frames) ordered.push_back(&f);
  std::sort(ordered.begin(), ordered.end(),
            [](const SpectrogramFrame* a, const SpectrogramFrame* b) {
              return a->start_frame < b->start_frame;
            });

  const int64_t frame_len = ordered[0]->values.dim(0);
  const int64_t mels = ordered[0]->values.dim(1);
  const std::string& utt = ordered[0]->utt_id;
  int64_t expect = 0;
  for (const auto* f : ordered) {
    CADA_CHECK(f->utt_id == utt, "unframe: frames from different utterances");
    CADA_CHECK(f->values.dim(0) == frame_len && f->values.dim(1) == mels,
               "unframe: inconsistent frame shapes");
    CADA_CHECK(f->start_frame == expect, "unframe: gap or overlap at start_frame "
                                             << f->start_frame << " (expected " << expect << ")");
    expect += frame_len;
  }
  CADA_CHECK(total_frames > expect - frame_len && total_frames <= expect,
             "unframe: total_frames " << total_frames << " inconsistent with " << ordered.size()
                                      << " windows of " << frame_len);

  Spectrogram spec;
  spec.utt_id = utt;
  spec.hop_s = hop_s;
  spec.values = Tensor({total_frames, mels});
  for (const auto* f : ordered) {
    int64_t copy = std::min<int64_t>(frame_len, total_frames - f->start_frame);
    if (copy <= 0) break;
    std::memcpy(spec.values.data() + f->start_frame * mels, f->values.data(),
                size_t(copy * mels) * sizeof(double));
  }
  return spec;
}

std::string SaveSpectrogram(const std::string& dir, const Spectrogram& spec,
                            const FeatureConfig& cfg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create feature directory " + dir + ": " + ec.message());
  CADA_CHECK(!spec.utt_id.empty(), "SaveSpectrogram needs a utt_id for the file name");

  std::string base = (fs::path(dir) / spec.utt_id).string();
  {
    std::ofstream out(base + ".f32", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + base + ".f32");
    std::vector<float> f32(size_t(spec.values.size()));
    for (int64_t i = 0; i < spec.values.size(); ++i) f32[size_t(i)] = float(spec.values[i]);
    out.write(reinterpret_cast<const char*>(f32.data()),
              std::streamsize(f32.size() * sizeof(float)));
    if (!out) throw IoError("short write to " + base + ".f32");
  }
  {
    json side;
    side["utt_id"] = spec.utt_id;
    side["shape"] = {spec.frames(), spec.mel_bins()};
    side["hop_s"] = spec.hop_s;
    side["norm_constants"] = {cfg.log_floor, cfg.log_ceil};
    std::ofstream out(base + ".json", std::ios::trunc);
    if (!out) throw IoError("cannot write " + base + ".json");
    out << side.dump(2) << "\n";
  }
  return base + ".f32";
}

Spectrogram LoadSpectrogramFile(const std::string& f32_path) {
  namespace fs = std::filesystem;
  std::string base = f32_path;
  if (base.size() > 4 && base.substr(base.size() - 4) == ".f32") base.resize(base.size() - 4);

  std::ifstream side_in(base + ".json");
  if (!side_in) throw IoError("missing spectrogram sidecar: " + base + ".json");
  json side;
  try {
    side_in >> side;
  } catch (const json::exception& e) {
    throw ParseError("bad spectrogram sidecar " + base + ".json: " + e.what());
  }
  int64_t t = side.at("shape")[0].get<int64_t>();
  int64_t mels = side.at("shape")[1].get<int64_t>();

  std::ifstream in(base + ".f32", std::ios::binary);
  if (!in) throw IoError("missing spectrogram data: " + base + ".f32");
  std::vector<float> f32(size_t(t * mels));
  in.read(reinterpret_cast<char*>(f32.data()), std::streamsize(f32.size() * sizeof(float)));
  if (in.gcount() != std::streamsize(f32.size() * sizeof(float)))
    throw IoError("truncated spectrogram data: " + base + ".f32");

  Spectrogram spec;
  spec.utt_id = side.at("utt_id").get<std::string>();
  spec.hop_s = side.at("hop_s").get<double>();
  spec.values = Tensor({t, mels});
  for (int64_t i = 0; i < t * mels; ++i) spec.values[i] = double(f32[size_t(i)]);
  return spec;
}

Spectrogram LoadRecordSpectrogram(const UtteranceRecord& rec, const FeatureConfig& cfg) {
  if (rec.kind == "spectrogram") {
    Spectrogram spec = LoadSpectrogramFile(rec.audio_ref);
    spec.utt_id = rec.utt_id;
    return spec;
  }
  WavData wav = ReadWavMono(rec.audio_ref);
  CADA_CHECK(wav.sample_rate == rec.sample_rate,
             "record " << rec.utt_id << ": manifest sample_rate " << rec.sample_rate
                       << " != wav sample_rate " << wav.sample_rate);
  return ComputeLogMel(wav.samples, wav.sample_rate, cfg, rec.utt_id);
}

}  // namespace cada
