// cada/encoder.cc

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

#include "cada/encoder.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include "cada/checkpoint.h"

namespace cada {

void EncoderModel::Init(const EncoderConfig& cfg, int n_channels, std::vector<std::string> labels,
                        Rng* rng, int frame_t, int frame_m) {
  CADA_CHECK(!cfg.widths.empty(), "encoder needs at least one conv stage");
  CADA_CHECK(cfg.d_c > 0, "encoder d_c must be positive");
  cfg_ = cfg;
  n_channels_ = n_channels;
  labels_ = std::move(labels);
  frame_t_ = frame_t;
  frame_m_ = frame_m;
  registry_ = ParamRegistry();

  stages_.clear();
  stages_.resize(cfg.widths.size());
  int64_t in_ch = 1, agg_dim = 0;
  for (size_t s = 0; s < cfg.widths.size(); ++s) {
    stages_[s].conv.Init(in_ch, cfg.widths[s], 3, 2, 1, rng);
    stages_[s].bn.Init(cfg.widths[s]);
    in_ch = cfg.widths[s];
    agg_dim += cfg.widths[s];
    std::string prefix = "stage" + std::to_string(s);
    stages_[s].conv.Register(prefix + ".conv", &registry_);
    stages_[s].bn.Register(prefix + ".bn", &registry_);
  }
  embed_head_.Init(agg_dim, cfg.d_c, rng);
  embed_head_.Register("embed", &registry_);
  class_head_.Init(cfg.d_c, n_channels, rng);
  class_head_.Register("class", &registry_);
}

Var EncoderModel::EmbedBatch(Tape* tape, const Var& x, bool training, bool trainable) {
  CADA_CHECK(x->value.ndim() == 4 && x->value.dim(1) == 1,
             "encoder expects [N,1,H,W], got " << x->value.ShapeStr());
  Var h = x;
  std::vector<Var> pooled;
  for (auto& stage : stages_) {
    h = stage.conv.Forward(tape, h, trainable);
    h = stage.bn.Forward(tape, h, training, trainable);
    h = Relu(h);
    pooled.push_back(GlobalAvgPool(h));
  }
  Var agg = ConcatCols(pooled);
  return embed_head_.Forward(tape, agg, trainable);
}

Var EncoderModel::ClassLogits(Tape* tape, const Var& emb, bool trainable) {
  return class_head_.Forward(tape, emb, trainable);
}

Tensor EncoderModel::EmbedFrame(const Tensor& frame) {
  return EmbedFrameBatch({&frame}).Reshaped({cfg_.d_c});
}

Tensor EncoderModel::EmbedFrameBatch(const std::vector<const Tensor*>& frames) {
  CADA_CHECK(!frames.empty(), "embed: no frames");
  int64_t n = int64_t(frames.size());
  Tensor batch({n, 1, int64_t(frame_t_), int64_t(frame_m_)});
  for (int64_t i = 0; i < n; ++i) {
    const Tensor& f = *frames[size_t(i)];
    CADA_CHECK(f.ndim() == 2 && f.dim(0) == frame_t_ && f.dim(1) == frame_m_,
               "embed: frame must be " << frame_t_ << "x" << frame_m_ << ", got " << f.ShapeStr());
    std::memcpy(batch.data() + i * frame_t_ * frame_m_, f.data(),
                size_t(frame_t_ * frame_m_) * sizeof(double));
  }
  Tape tape;
  Var emb = EmbedBatch(&tape, tape.Input(batch), /*training=*/false, /*trainable=*/false);
  return emb->value;
}

Tensor EncoderModel::EmbedUtterance(const std::vector<SpectrogramFrame>& frames) {
  CADA_CHECK(!frames.empty(), "embed_utterance: no frames");
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(frames.size());
  for (const auto& f : frames) ptrs.push_back(&f.values);
  Tensor all = EmbedFrameBatch(ptrs);
  Tensor mean({int64_t(cfg_.d_c)});
  for (int64_t i = 0; i < all.dim(0); ++i)
    for (int64_t j = 0; j < cfg_.d_c; ++j) mean[j] += all[i * cfg_.d_c + j];
  for (int64_t j = 0; j < cfg_.d_c; ++j) mean[j] /= double(all.dim(0));
  return mean;
}

void EncoderModel::Save(const std::string& path, uint64_t config_hash) const {
  nlohmann::json meta;
  meta["d_c"] = cfg_.d_c;
  meta["n_channels"] = n_channels_;
  meta["config_hash"] = config_hash;
  meta["widths"] = cfg_.widths;
  meta["labels"] = labels_;
  meta["arch"] = cfg_.arch;
  meta["frame_t"] = frame_t_;
  meta["frame_m"] = frame_m_;
  SaveCheckpoint(path, "encoder", meta, RegistryTensors(registry_));
}

EncoderModel EncoderModel::Load(const std::string& path) {
  Checkpoint ckpt = LoadCheckpoint(path);
  CADA_CHECK(ckpt.kind == "encoder", "expected an encoder checkpoint, got kind '" << ckpt.kind
                                                                                  << "'");
  EncoderConfig cfg;
  cfg.d_c = ckpt.meta.at("d_c").get<int>();
  cfg.widths = ckpt.meta.at("widths").get<std::vector<int64_t>>();
  cfg.arch = ckpt.meta.value("arch", "cnn_mfa");
  EncoderModel model;
  Rng rng = Rng::Keyed(0, 0);
  model.Init(cfg, ckpt.meta.at("n_channels").get<int>(),
             ckpt.meta.at("labels").get<std::vector<std::string>>(), &rng,
             ckpt.meta.value("frame_t", 129), ckpt.meta.value("frame_m", 128));
  LoadRegistry(ckpt, model.registry_);
  return model;
}

double MeanPairwiseDistance(const std::vector<std::vector<Tensor>>& groups) {
  CADA_CHECK(!groups.empty(), "pairwise distance over an empty grouping");
  double total = 0;
  for (const auto& group : groups) {
    CADA_CHECK(group.size() >= 2, "pairwise distance needs >= 2 members per group");
    double sum = 0;
    int64_t pairs = 0;
    for (size_t i = 0; i < group.size(); ++i)
      for (size_t j = i + 1; j < group.size(); ++j) {
        CADA_CHECK(group[i].size() == group[j].size(), "embedding dimension mismatch in group");
        double d2 = 0;
        for (int64_t k = 0; k < group[i].size(); ++k) {
          double d = group[i][k] - group[j][k];
          d2 += d * d;
        }
        sum += std::sqrt(d2);
        ++pairs;
      }
    total += sum / double(pairs);
  }
  return total / double(groups.size());
}

double PairwiseSetDistance(EncoderModel* model, const std::vector<UtteranceRecord>& records,
                           const FeatureConfig& fcfg) {
  std::map<std::string, std::vector<Tensor>> by_set;
  for (const auto& rec : records) {
    Spectrogram spec = LoadRecordSpectrogram(rec, fcfg);
    by_set[rec.set_id].push_back(model->EmbedUtterance(FrameSpectrogram(spec, fcfg.frame_len)));
  }
  std::vector<std::vector<Tensor>> groups;
  for (auto& [set_id, embs] : by_set)
    if (embs.size() >= 2) groups.push_back(std::move(embs));
  CADA_CHECK(!groups.empty(), "pairwise_set_distance: no set has >= 2 channels");
  return MeanPairwiseDistance(groups);
}

namespace {

struct LabeledFrame {
  Tensor values;  // [T, M]
  int64_t label;
  std::string set_id;
  size_t record_index;
};

Tensor BuildBatch(const std::vector<LabeledFrame>& frames, const std::vector<int64_t>& idx,
                  size_t begin, size_t end) {
  int64_t t = frames[0].values.dim(0), m = frames[0].values.dim(1);
  Tensor batch({int64_t(end - begin), 1, t, m});
  for (size_t i = begin; i < end; ++i)
    std::memcpy(batch.data() + int64_t(i - begin) * t * m,
                frames[size_t(idx[i])].values.data(), size_t(t * m) * sizeof(double));
  return batch;
}

}  // namespace

void WriteEncoderMetricsCsv(const std::string& path,
                            const std::vector<EncoderEpochMetrics>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write metrics csv: " + path);
  out << "epoch,val_loss,val_acc,mean_pairwise_distance\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", r.epoch, r.val_loss, r.val_acc,
                  r.mean_pairwise_distance);
    out << buf;
  }
}

EncoderPretrainResult PretrainEncoder(const std::vector<UtteranceRecord>& corpus,
                                      const FeatureConfig& fcfg, const EncoderConfig& cfg,
                                      EncoderModel* model, const std::string& metrics_csv_path) {
  // Drop the reserved adaptation channels from the label space.
  std::vector<UtteranceRecord> records;
  for (const auto& r : corpus) {
    bool excluded = std::find(cfg.exclude_channels.begin(), cfg.exclude_channels.end(),
                              r.channel_label) != cfg.exclude_channels.end();
    if (!excluded) records.push_back(r);
  }
  CADA_CHECK(!records.empty(), "pretrain_encoder: no records after channel exclusion");

  std::set<std::string> label_set;
  for (const auto& r : records) label_set.insert(r.channel_label);
  CADA_CHECK(label_set.size() >= 2, "pretrain_encoder needs >= 2 channel labels, got "
                                        << label_set.size());
  std::vector<std::string> labels(label_set.begin(), label_set.end());
  std::map<std::string, int64_t> label_index;
  for (size_t i = 0; i < labels.size(); ++i) label_index[labels[i]] = int64_t(i);

  // Parallel structure check: distance metrics need multi-channel sets.
  std::map<std::string, std::set<std::string>> set_channels;
  for (const auto& r : records) set_channels[r.set_id].insert(r.channel_label);
  bool parallel = false;
  for (const auto& [s, chans] : set_channels)
    if (chans.size() >= 2) parallel = true;
  if (!parallel)
    Warn("pretrain_encoder: corpus is not parallel (no set spans >= 2 channels); "
         "pairwise distance metric will be skipped");

  // Featurize every record up front.
  std::vector<LabeledFrame> frames;
  std::vector<std::vector<size_t>> record_frames(records.size());
  for (size_t ri = 0; ri < records.size(); ++ri) {
    Spectrogram spec = LoadRecordSpectrogram(records[ri], fcfg);
    for (auto& f : FrameSpectrogram(spec, fcfg.frame_len)) {
      record_frames[ri].push_back(frames.size());
      frames.push_back({std::move(f.values), label_index[records[ri].channel_label],
                        records[ri].set_id, ri});
    }
  }

  // Hold out a fraction of sets for validation.
  std::vector<std::string> set_ids;
  for (const auto& [s, chans] : set_channels) set_ids.push_back(s);
  std::sort(set_ids.begin(), set_ids.end());
  Rng split_rng = Rng::Keyed(cfg.seed, 0xa1);
  split_rng.Shuffle(&set_ids);
  size_t n_val_sets = std::max<size_t>(1, size_t(std::lround(cfg.val_fraction * double(set_ids.size()))));
  n_val_sets = std::min(n_val_sets, set_ids.size() - 1);
  std::set<std::string> val_sets(set_ids.begin(), set_ids.begin() + int64_t(n_val_sets));

  std::vector<int64_t> train_idx, val_idx;
  for (size_t i = 0; i < frames.size(); ++i)
    (val_sets.count(frames[i].set_id) ? val_idx : train_idx).push_back(int64_t(i));
  CADA_CHECK(!train_idx.empty() && !val_idx.empty(), "pretrain_encoder: empty train or val split");

  int frame_t = int(frames[0].values.dim(0)), frame_m = int(frames[0].values.dim(1));
  Rng init_rng = Rng::Keyed(cfg.seed, 0x1417);
  model->Init(cfg, int(labels.size()), labels, &init_rng, frame_t, frame_m);
  Adam opt(cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);

  // Validation records grouped by set for the distance metric.
  std::vector<size_t> val_records;
  for (size_t ri = 0; ri < records.size(); ++ri)
    if (val_sets.count(records[ri].set_id)) val_records.push_back(ri);

  auto evaluate = [&](int epoch) {
    EncoderEpochMetrics row;
    row.epoch = epoch;
    double loss_sum = 0;
    int64_t correct = 0;
    const size_t chunk = 64;
    for (size_t begin = 0; begin < val_idx.size(); begin += chunk) {
      size_t end = std::min(val_idx.size(), begin + chunk);
      Tensor batch = BuildBatch(frames, val_idx, begin, end);
      std::vector<int64_t> batch_labels;
      for (size_t i = begin; i < end; ++i) batch_labels.push_back(frames[size_t(val_idx[i])].label);
      Tape tape;
      Var emb = model->EmbedBatch(&tape, tape.Input(batch), /*training=*/false, /*trainable=*/false);
      Var logits = model->ClassLogits(&tape, emb, /*trainable=*/false);
      Var loss = SoftmaxCrossEntropy(logits, batch_labels);
      loss_sum += loss->value[0] * double(end - begin);
      int64_t k = logits->value.dim(1);
      for (size_t i = begin; i < end; ++i) {
        const double* row_logits = logits->value.data() + int64_t(i - begin) * k;
        int64_t arg = 0;
        for (int64_t j = 1; j < k; ++j)
          if (row_logits[j] > row_logits[arg]) arg = j;
        if (arg == batch_labels[i - begin]) ++correct;
      }
    }
    row.val_loss = loss_sum / double(val_idx.size());
    row.val_acc = double(correct) / double(val_idx.size());

    if (parallel) {
      std::map<std::string, std::vector<Tensor>> by_set;
      for (size_t ri : val_records) {
        std::vector<const Tensor*> ptrs;
        for (size_t fi : record_frames[ri]) ptrs.push_back(&frames[fi].values);
        if (ptrs.empty()) continue;
        Tensor all = model->EmbedFrameBatch(ptrs);
        Tensor mean({int64_t(cfg.d_c)});
        for (int64_t i = 0; i < all.dim(0); ++i)
          for (int64_t j = 0; j < cfg.d_c; ++j) mean[j] += all[i * cfg.d_c + j];
        for (int64_t j = 0; j < cfg.d_c; ++j) mean[j] /= double(all.dim(0));
        by_set[records[ri].set_id].push_back(std::move(mean));
      }
      std::vector<std::vector<Tensor>> groups;
      for (auto& [s, embs] : by_set)
        if (embs.size() >= 2) groups.push_back(std::move(embs));
      row.mean_pairwise_distance = groups.empty() ? 0.0 : MeanPairwiseDistance(groups);
    }
    return row;
  };

  EncoderPretrainResult result;
  result.metrics.push_back(evaluate(0));

  Rng shuffle_rng = Rng::Keyed(cfg.seed, 0x5482);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.Shuffle(&train_idx);
    for (size_t begin = 0; begin < train_idx.size(); begin += size_t(cfg.batch_size)) {
      size_t end = std::min(train_idx.size(), begin + size_t(cfg.batch_size));
      Tensor batch = BuildBatch(frames, train_idx, begin, end);
      std::vector<int64_t> batch_labels;
      for (size_t i = begin; i < end; ++i)
        batch_labels.push_back(frames[size_t(train_idx[i])].label);
      Tape tape;
      Var emb = model->EmbedBatch(&tape, tape.Input(batch), /*training=*/true, /*trainable=*/true);
      Var logits = model->ClassLogits(&tape, emb, /*trainable=*/true);
      Var loss = SoftmaxCrossEntropy(logits, batch_labels);
      if (!std::isfinite(loss->value[0]))
        throw NumericError(CADA_MAKE_MSG("pretrain_encoder: non-finite loss at epoch " << epoch));
      Backward(loss);
      tape.CollectGrads();
      opt.Step(model->registry());
    }
    result.metrics.push_back(evaluate(epoch));
  }

  result.final_val_acc = result.metrics.back().val_acc;
  if (!metrics_csv_path.empty()) {
    WriteEncoderMetricsCsv(metrics_csv_path, result.metrics);
    result.metrics_csv_path = metrics_csv_path;
  }
  return result;
}

}  // namespace cada
