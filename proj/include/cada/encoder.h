// cada/encoder.h

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

#ifndef CADA_ENCODER_H_
#define CADA_ENCODER_H_

#include <string>
#include <vector>

#include "cada/config.h"
#include "cada/features.h"
#include "cada/manifest.h"
#include "cada/nn.h"

namespace cada {

// Channel encoder E: a small multi-scale CNN. Each stride-2 conv stage is
// globally average-pooled and the per-stage summaries are concatenated before
// the embedding head, so the embedding sees every scale, not just the last
// layer. A classification head on top is used for channel pretraining and is
// detachable afterwards: the embedding path never reads it.
class EncoderModel {
 public:
  EncoderModel() = default;

  void Init(const EncoderConfig& cfg, int n_channels, std::vector<std::string> labels, Rng* rng,
            int frame_t = 129, int frame_m = 128);

  // x [N,1,H,W] -> embeddings [N,d_c].
  Var EmbedBatch(Tape* tape, const Var& x, bool training, bool trainable);
  // embeddings [N,d_c] -> logits [N,n_channels]. Pretraining only.
  Var ClassLogits(Tape* tape, const Var& emb, bool trainable);

  // Frozen-model extraction; deterministic, evaluation mode.
  Tensor EmbedFrame(const Tensor& frame);                       // [129,128] -> [d_c]
  Tensor EmbedFrameBatch(const std::vector<const Tensor*>& frames);  // -> [N,d_c]
  // Per-utterance embedding: mean of per-frame embeddings.
  Tensor EmbedUtterance(const std::vector<SpectrogramFrame>& frames);

  int d_c() const { return cfg_.d_c; }
  int n_channels() const { return n_channels_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const EncoderConfig& config() const { return cfg_; }
  ParamRegistry& registry() { return registry_; }
  const ParamRegistry& registry() const { return registry_; }
  int frame_t() const { return frame_t_; }
  int frame_m() const { return frame_m_; }

  void Save(const std::string& path, uint64_t config_hash) const;
  static EncoderModel Load(const std::string& path);

 private:
  struct Stage {
    Conv2dLayer conv;
    BatchNormLayer bn;
  };

  EncoderConfig cfg_;
  int n_channels_ = 0;
  int frame_t_ = 129, frame_m_ = 128;
  std::vector<std::string> labels_;
  std::vector<Stage> stages_;
  LinearLayer embed_head_;
  LinearLayer class_head_;
  ParamRegistry registry_;
};

// Mean over groups of the mean pairwise Euclidean distance inside each group.
// Groups with fewer than two members are rejected.
double MeanPairwiseDistance(const std::vector<std::vector<Tensor>>& groups);

// Spec surface: embeds records (grouped by set_id), keeps groups with >= 2
// channels, and averages pairwise distances within each utterance set.
double PairwiseSetDistance(EncoderModel* model, const std::vector<UtteranceRecord>& records,
                           const FeatureConfig& fcfg);

struct EncoderEpochMetrics {
  int epoch = 0;
  double val_loss = 0, val_acc = 0, mean_pairwise_distance = 0;
};

struct EncoderPretrainResult {
  std::vector<EncoderEpochMetrics> metrics;  // row 0 is the untrained model
  double final_val_acc = 0;
  std::string metrics_csv_path;
};

// Channel-classification pretraining on 129x128 frames. Records on the
// excluded channel list never enter the label set. Deterministic given
// cfg.seed. Writes per-epoch metrics to metrics_csv_path when nonempty.
EncoderPretrainResult PretrainEncoder(const std::vector<UtteranceRecord>& corpus,
                                      const FeatureConfig& fcfg, const EncoderConfig& cfg,
                                      EncoderModel* model,
                                      const std::string& metrics_csv_path = "");

void WriteEncoderMetricsCsv(const std::string& path, const std::vector<EncoderEpochMetrics>& rows);

}  // namespace cada

#endif  // CADA_ENCODER_H_
