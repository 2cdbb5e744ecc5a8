// cada/manifest.h

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

#ifndef CADA_MANIFEST_H_
#define CADA_MANIFEST_H_

#include <string>
#include <vector>

namespace cada {

// One recording. audio_ref points at a mono PCM wav, or at a cached
// spectrogram array file when kind == "spectrogram" (simulated data has no
// waveform).
struct UtteranceRecord {
  std::string utt_id;
  std::string set_id;         // groups identical content across channels
  std::string speaker_id;
  std::string channel_label;
  std::string audio_ref;
  std::string transcript;
  int sample_rate = 0;

  std::string kind = "audio";  // "audio" | "spectrogram"
  std::string source_utt_id;   // simulated records only
  std::string target_utt_id;   // simulated records only
};

// Manifests are UTF-8 JSONL: one record object per line. Loading preserves
// order, rejects malformed lines (with the 1-based line number), duplicate
// utt_ids and set-consistency violations.
std::vector<UtteranceRecord> LoadManifest(const std::string& path);
void SaveManifest(const std::string& path, const std::vector<UtteranceRecord>& records);

// Invariants: unique utt_id; within a set_id identical transcript and
// speaker_id and pairwise distinct channel_label.
void ValidateRecords(const std::vector<UtteranceRecord>& records);

std::string RecordToJsonLine(const UtteranceRecord& rec);
UtteranceRecord RecordFromJsonLine(const std::string& line, int line_number);

}  // namespace cada

#endif  // CADA_MANIFEST_H_
