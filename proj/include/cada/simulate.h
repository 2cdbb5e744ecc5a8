// cada/simulate.h

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

#ifndef CADA_SIMULATE_H_
#define CADA_SIMULATE_H_

#include <string>
#include <vector>

#include "cada/encoder.h"
#include "cada/features.h"
#include "cada/gan.h"

namespace cada {

// Converts one source utterance into the target channel: the target
// utterance's mean frame embedding conditions every source frame, frames are
// reassembled exactly. Output shape equals the source shape.
Spectrogram ConvertUtterance(GeneratorModel* g, EncoderModel* encoder, const Spectrogram& src,
                             const std::vector<SpectrogramFrame>& target_frames);

// One simulated record per source record; the conditioning target utterance
// is drawn uniformly per source with the given seed; transcripts are copied
// verbatim from the source. Spectrograms land in out_dir/feats as portable
// arrays; returns the augmented manifest path.
std::string SimulateDataset(GeneratorModel* g, EncoderModel* encoder,
                            const std::string& source_manifest, const std::string& target_manifest,
                            const std::string& out_dir, uint64_t seed,
                            const FeatureConfig& fcfg = {});

// Content-preservation proxy: mean per-mel-bin Pearson correlation over time
// between two equal-shape spectrograms. Bins without variance on either side
// are skipped.
double MeanPerBinCorrelation(const Spectrogram& a, const Spectrogram& b);

}  // namespace cada

#endif  // CADA_SIMULATE_H_
