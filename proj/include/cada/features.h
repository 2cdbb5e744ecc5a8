// cada/features.h

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

#ifndef CADA_FEATURES_H_
#define CADA_FEATURES_H_

#include <string>
#include <vector>

#include "cada/manifest.h"
#include "cada/tensor.h"

namespace cada {

struct FeatureConfig {
  double win_ms = 25.0;
  double hop_ms = 10.0;
  int n_fft = 512;
  int n_mels = 128;
  int frame_len = 129;      // time steps per training window
  double log_floor = -10.0;  // clip bounds on log10 mel power, mapped to [-1,1]
  double log_ceil = 2.0;
  bool mel_major = false;  // transpose flag: false = time on axis 0
};

// Normalized log-mel matrix, time on axis 0 (frame_len x n_mels windows feed
// the models).
struct Spectrogram {
  Tensor values;  // [T, n_mels], every entry in [-1, 1]
  double hop_s = 0.01;
  std::string utt_id;

  int64_t frames() const { return values.empty() ? 0 : values.dim(0); }
  int64_t mel_bins() const { return values.empty() ? 0 : values.dim(1); }
};

struct SpectrogramFrame {
  Tensor values;  // [frame_len, n_mels]
  std::string utt_id;
  int64_t start_frame = 0;
  int64_t pad_len = 0;  // trailing zero rows in the final window
};

// Magnitude STFT -> mel projection -> log10 -> clip -> affine map to [-1,1].
// Centered frames with reflect padding; T = 1 + floor(N / hop).
Spectrogram ComputeLogMel(const std::vector<double>& audio, int sample_rate,
                          const FeatureConfig& cfg = {}, const std::string& utt_id = "");

// Non-overlapping windows of frame_len steps; the final partial window is
// zero-padded with the pad length recorded. ceil(T/frame_len) frames.
std::vector<SpectrogramFrame> FrameSpectrogram(const Spectrogram& spec, int frame_len = 129);

// Exact inverse of FrameSpectrogram given the original frame count.
Spectrogram Unframe(const std::vector<SpectrogramFrame>& frames, int64_t total_frames,
                    double hop_s = 0.01);

// Portable array cache: <base>.f32 little-endian float32 row-major plus a
// <base>.json sidecar {utt_id, shape, hop_s, norm_constants}.
std::string SaveSpectrogram(const std::string& dir, const Spectrogram& spec,
                            const FeatureConfig& cfg = {});
Spectrogram LoadSpectrogramFile(const std::string& f32_path);

// Resolves a manifest record to its spectrogram: reads the cached array for
// kind == "spectrogram", otherwise computes log-mel from the wav.
Spectrogram LoadRecordSpectrogram(const UtteranceRecord& rec, const FeatureConfig& cfg = {});

}  // namespace cada

#endif  // CADA_FEATURES_H_
