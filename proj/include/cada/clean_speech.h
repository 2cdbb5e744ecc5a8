// cada/clean_speech.h

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

#ifndef CADA_CLEAN_SPEECH_H_
#define CADA_CLEAN_SPEECH_H_

#include <string>
#include <vector>

namespace cada {

// Deterministic speech-like signal: syllabic envelope, pitch glides,
// formant-shaped harmonics and noise-burst consonants. Stands in for real
// close-mic recordings so the corpus tooling can run self-contained.
struct CleanUtterance {
  std::vector<double> samples;
  std::string transcript;
};

CleanUtterance SynthCleanUtterance(uint64_t seed, double dur_s, int sample_rate);

// Writes n utterances (wav + manifest) under out_dir; returns the manifest
// path. Utterances are ~dur_s long, spread over a small speaker pool.
std::string GenerateCleanCorpus(const std::string& out_dir, int n, uint64_t seed,
                                int sample_rate = 16000, double dur_s = 1.28);

}  // namespace cada

#endif  // CADA_CLEAN_SPEECH_H_
