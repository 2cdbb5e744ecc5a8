// cada/trainer.h

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

#ifndef CADA_TRAINER_H_
#define CADA_TRAINER_H_

#include <memory>
#include <string>
#include <vector>

#include "cada/channel_sim.h"
#include "cada/config.h"
#include "cada/encoder.h"
#include "cada/gan.h"
#include "cada/losses.h"

namespace cada {

// Generator, discriminator and projection heads plus their registries; the
// unit the optimizer steps and checkpoints move around.
struct GanBundle {
  GeneratorModel g;
  DiscriminatorModel d;
  ProjectionHeads proj;
  ParamRegistry g_side;  // generator + projection heads (updated together)

  void Init(const GanArchConfig& cfg, int d_c, uint64_t seed);
};

struct TrainResult {
  std::string generator_ckpt;
  std::string metrics_csv;
  std::vector<LossBreakdown> history;
  int64_t steps = 0;
};

// Alternating D/G optimization against a frozen channel encoder on the
// unpaired sample. One epoch is one pass over all source frames. Fully
// deterministic given the config seed; resumable bit-for-bit from a
// train_state checkpoint.
class Trainer {
 public:
  Trainer(const CadaConfig& cfg, const std::vector<UtteranceRecord>& source_records,
          const std::vector<UtteranceRecord>& target_records, EncoderModel* encoder);

  // One D update then one G+projection update on the next batch.
  LossBreakdown Step();
  void RunEpoch();
  // Full run with per-epoch checkpointing and metrics; resume_path may name a
  // train_state checkpoint.
  TrainResult Run(const std::string& out_dir, const std::string& resume_path = "");

  GanBundle& bundle() { return *bundle_; }
  EncoderModel* encoder() { return encoder_; }
  int64_t step_count() const { return step_; }
  int epoch() const { return epoch_; }
  const std::vector<LossBreakdown>& history() const { return history_; }
  int64_t steps_per_epoch() const;

  void SaveState(const std::string& path) const;
  void LoadState(const std::string& path);

 private:
  double LrScale() const;
  void CheckFinite(const LossBreakdown& b) const;

  CadaConfig cfg_;
  EncoderModel* encoder_;
  std::unique_ptr<GanBundle> bundle_;
  std::unique_ptr<Adam> opt_g_, opt_d_;
  Rng rng_;

  // Frames and per-frame utterance indices.
  std::vector<Tensor> src_frames_, tgt_frames_;
  std::vector<int64_t> tgt_frame_utt_;
  std::vector<Tensor> tgt_utt_embeddings_;  // frozen-E per-utterance conditioning pool

  std::vector<int64_t> epoch_order_;  // shuffled source frame indices
  size_t epoch_pos_ = 0;
  int epoch_ = 0;
  int64_t step_ = 0;
  std::vector<LossBreakdown> history_;
};

void WriteGanMetricsCsv(const std::string& path, const std::vector<LossBreakdown>& rows);
std::vector<LossBreakdown> ReadGanMetricsCsv(const std::string& path);

}  // namespace cada

#endif  // CADA_TRAINER_H_
