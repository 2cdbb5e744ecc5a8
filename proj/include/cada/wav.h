// cada/wav.h

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

#ifndef CADA_WAV_H_
#define CADA_WAV_H_

#include <string>
#include <vector>

namespace cada {

struct WavData {
  std::vector<double> samples;  // [-1, 1]
  int sample_rate = 0;
};

// 16-bit mono PCM only; anything else is an IoError.
WavData ReadWavMono(const std::string& path);
void WriteWavMono(const std::string& path, const std::vector<double>& samples, int sample_rate);

}  // namespace cada

#endif  // CADA_WAV_H_
