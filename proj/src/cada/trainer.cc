// cada/trainer.cc

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

#include "cada/trainer.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "cada/checkpoint.h"

namespace cada {

namespace fs = std::filesystem;

void GanBundle::Init(const GanArchConfig& cfg, int d_c, uint64_t seed) {
  Rng g_rng = Rng::Keyed(seed, 0x6001);
  g.Init(cfg, d_c, &g_rng);
  Rng d_rng = Rng::Keyed(seed, 0x6002);
  d.Init(cfg.d_width, &d_rng);
  Rng p_rng = Rng::Keyed(seed, 0x6003);
  proj.Init(g.TapChannels(), cfg.proj_dim, &p_rng);

  g_side = ParamRegistry();
  for (const auto& [name, p] : g.registry().params()) g_side.Add("g." + name, p);
  for (const auto& [name, p] : proj.registry.params()) g_side.Add("proj." + name, p);
}

Trainer::Trainer(const CadaConfig& cfg, const std::vector<UtteranceRecord>& source_records,
                 const std::vector<UtteranceRecord>& target_records, EncoderModel* encoder)
    : cfg_(cfg), encoder_(encoder), rng_(Rng::Keyed(cfg.train.seed, 0x7a11)) {
  CADA_CHECK(!source_records.empty() && !target_records.empty(),
             "trainer needs nonempty source and target record sets");
  cfg_.train.Validate();

  for (const auto& rec : source_records)
    for (const auto& rec_t : target_records)
      CADA_CHECK(rec.channel_label != rec_t.channel_label,
                 "trainer: source and target domains share channel '" << rec.channel_label << "'");

  // Frames. Desk corpora are small enough to hold in memory.
  for (const auto& rec : source_records) {
    Spectrogram spec = LoadRecordSpectrogram(rec, cfg_.features);
    for (auto& f : FrameSpectrogram(spec, cfg_.features.frame_len))
      src_frames_.push_back(std::move(f.values));
  }
  int64_t utt_index = 0;
  for (const auto& rec : target_records) {
    Spectrogram spec = LoadRecordSpectrogram(rec, cfg_.features);
    std::vector<SpectrogramFrame> frames = FrameSpectrogram(spec, cfg_.features.frame_len);
    tgt_utt_embeddings_.push_back(encoder_->EmbedUtterance(frames));
    for (auto& f : frames) {
      tgt_frames_.push_back(std::move(f.values));
      tgt_frame_utt_.push_back(utt_index);
    }
    ++utt_index;
  }

  bundle_ = std::make_unique<GanBundle>();
  bundle_->Init(cfg_.gan, encoder_->d_c(), cfg_.train.seed);
  opt_g_ = std::make_unique<Adam>(cfg_.train.lr, cfg_.train.beta1, cfg_.train.beta2,
                                  cfg_.train.eps);
  opt_d_ = std::make_unique<Adam>(cfg_.train.lr, cfg_.train.beta1, cfg_.train.beta2,
                                  cfg_.train.eps);
}

int64_t Trainer::steps_per_epoch() const {
  int64_t n = int64_t(src_frames_.size());
  int64_t b = cfg_.train.batch_size;
  return (n + b - 1) / b;
}

double Trainer::LrScale() const {
  if (!cfg_.train.lr_decay) return 1.0;
  int e = cfg_.train.epochs;
  int half = e / 2;
  if (epoch_ < half || e == half) return 1.0;
  return double(e - epoch_) / double(e - half);
}

void Trainer::CheckFinite(const LossBreakdown& b) const {
  auto check = [&](double v, const char* name) {
    if (!std::isfinite(v))
      throw NumericError(CADA_MAKE_MSG(
          "train_step " << step_ << ": loss component '" << name << "' is non-finite. Dump: adv_d="
                        << b.adv_d << " adv=" << b.adv << " pcl_src=" << b.pcl_src
                        << " pcl_tgt=" << b.pcl_tgt << " ch=" << b.ch));
  };
  check(b.adv_d, "adv_d");
  check(b.adv, "adv");
  check(b.pcl_src, "pcl_src");
  check(b.pcl_tgt, "pcl_tgt");
  check(b.ch, "ch");
}

namespace {

Tensor StackFrames(const std::vector<Tensor>& pool, const std::vector<int64_t>& idx) {
  const Tensor& first = pool[size_t(idx[0])];
  int64_t t = first.dim(0), m = first.dim(1);
  Tensor batch({int64_t(idx.size()), 1, t, m});
  for (size_t i = 0; i < idx.size(); ++i)
    std::memcpy(batch.data() + int64_t(i) * t * m, pool[size_t(idx[i])].data(),
                size_t(t * m) * sizeof(double));
  return batch;
}

Tensor StackEmbeddings(const std::vector<Tensor>& pool, const std::vector<int64_t>& idx) {
  int64_t d = pool[size_t(idx[0])].size();
  Tensor out({int64_t(idx.size()), d});
  for (size_t i = 0; i < idx.size(); ++i)
    std::memcpy(out.data() + int64_t(i) * d, pool[size_t(idx[i])].data(),
                size_t(d) * sizeof(double));
  return out;
}

}  // namespace

LossBreakdown Trainer::Step() {
  const TrainSettings& ts = cfg_.train;
  if (epoch_order_.empty() || epoch_pos_ >= epoch_order_.size()) {
    epoch_order_.resize(src_frames_.size());
    for (size_t i = 0; i < src_frames_.size(); ++i) epoch_order_[i] = int64_t(i);
    rng_.Shuffle(&epoch_order_);
    epoch_pos_ = 0;
  }

  // Batch of source frames from the epoch order, plus their conditioning
  // embeddings: one uniformly drawn target utterance per source frame.
  size_t end = std::min(epoch_order_.size(), epoch_pos_ + size_t(ts.batch_size));
  std::vector<int64_t> src_idx(epoch_order_.begin() + int64_t(epoch_pos_),
                               epoch_order_.begin() + int64_t(end));
  epoch_pos_ = end;
  int64_t n_src = int64_t(src_idx.size());

  std::vector<int64_t> cond_utt(static_cast<size_t>(n_src));
  for (auto& u : cond_utt) u = int64_t(rng_.NextBelow(uint64_t(tgt_utt_embeddings_.size())));

  // Target frames for the real half of the D update and the identity-pass
  // contrastive term.
  std::vector<int64_t> tgt_idx(size_t(ts.batch_size));
  for (auto& t : tgt_idx) t = int64_t(rng_.NextBelow(uint64_t(tgt_frames_.size())));
  std::vector<int64_t> tgt_cond_utt(tgt_idx.size());
  for (size_t i = 0; i < tgt_idx.size(); ++i)
    tgt_cond_utt[i] = tgt_frame_utt_[size_t(tgt_idx[i])];

  Tensor src_batch_t = StackFrames(src_frames_, src_idx);
  Tensor tgt_batch_t = StackFrames(tgt_frames_, tgt_idx);
  Tensor cond_t = StackEmbeddings(tgt_utt_embeddings_, cond_utt);
  Tensor tgt_cond_t = StackEmbeddings(tgt_utt_embeddings_, tgt_cond_utt);

  GanBundle& b = *bundle_;
  double lr_scale = LrScale();
  LossBreakdown out;

  // Generator pass (trainable); its output serves the D update detached and
  // the G update attached.
  Tape tape;
  Var src_x = tape.Input(src_batch_t);
  Var cond = tape.Input(cond_t);
  auto g_fwd = b.g.Forward(&tape, src_x, cond, /*training=*/true, &rng_, /*trainable=*/true);

  {  // D update: ascend Eq-style objective on real vs detached fake.
    Tape d_tape;
    Var d_real = b.d.Forward(&d_tape, d_tape.Input(tgt_batch_t), /*trainable=*/true);
    Var d_fake = b.d.Forward(&d_tape, d_tape.Input(g_fwd.output->value), /*trainable=*/true);
    Var d_obj = DiscObjective(d_real, d_fake);
    out.adv_d = d_obj->value[0];
    if (!std::isfinite(out.adv_d))
      throw NumericError(CADA_MAKE_MSG("train_step " << step_
                                                     << ": loss component 'adv_d' is non-finite"));
    Var d_loss = Neg(d_obj);
    Backward(d_loss);
    d_tape.CollectGrads();
    opt_d_->Step(b.d.registry(), lr_scale);
  }

  // G update against the refreshed discriminator.
  Var d_fake_for_g = b.d.Forward(&tape, g_fwd.output, /*trainable=*/false);
  Var adv_g = GenAdvLoss(d_fake_for_g, ts.adv_form);

  auto sim_fwd = b.g.Forward(&tape, g_fwd.output, cond, /*training=*/true, &rng_,
                             /*trainable=*/true, /*taps_only=*/true);

  Var tgt_x = tape.Input(tgt_batch_t);
  Var tgt_cond = tape.Input(tgt_cond_t);
  auto idt_fwd = b.g.Forward(&tape, tgt_x, tgt_cond, /*training=*/true, &rng_, /*trainable=*/true);
  auto idt_sim_fwd = b.g.Forward(&tape, idt_fwd.output, tgt_cond, /*training=*/true, &rng_,
                                 /*trainable=*/true, /*taps_only=*/true);

  // Patch-wise contrastive terms, mean over taps x batch x patches.
  auto pcl_term = [&](const std::vector<Var>& src_taps, const std::vector<Var>& sim_taps,
                      int64_t batch_n) {
    Var acc;
    for (int l = 0; l < kNumFeatureTaps; ++l) {
      const Var& fs = src_taps[size_t(l)];
      const Var& fm = sim_taps[size_t(l)];
      int64_t hw = fs->value.dim(2) * fs->value.dim(3);
      for (int64_t n = 0; n < batch_n; ++n) {
        std::vector<int64_t> locs =
            SamplePatchLocations(hw, ts.n_patches, rng_.NextU64(), nullptr);
        std::vector<std::pair<int64_t, int64_t>> picks;
        picks.reserve(locs.size());
        for (int64_t pos : locs) picks.emplace_back(n, pos);
        Var q = b.proj.heads[size_t(l)].Forward(&tape, GatherSpatial(fm, picks),
                                                /*trainable=*/true);
        Var z = b.proj.heads[size_t(l)].Forward(&tape, GatherSpatial(fs, picks),
                                                /*trainable=*/true);
        Var nce = PatchNcePaired(&tape, q, z, ts.tau, ts.negatives_from);
        acc = acc ? Add(acc, nce) : nce;
      }
    }
    return Scale(acc, 1.0 / double(kNumFeatureTaps * batch_n));
  };

  Var pcl_src = pcl_term(g_fwd.taps, sim_fwd.taps, n_src);
  Var pcl_tgt = pcl_term(idt_fwd.taps, idt_sim_fwd.taps, int64_t(tgt_idx.size()));
  Var ch = ChannelReconLoss(&tape, encoder_, g_fwd.output, cond);

  Var total = Add(Add(Add(adv_g, pcl_src), pcl_tgt), Scale(ch, ts.lambda_ch));

  out.adv = adv_g->value[0];
  out.pcl_src = pcl_src->value[0];
  out.pcl_tgt = pcl_tgt->value[0];
  out.ch = ch->value[0];
  out.lambda_ch = ts.lambda_ch;
  out.total = total->value[0];
  CheckFinite(out);

  Backward(total);
  tape.CollectGrads();
  opt_g_->Step(b.g_side, lr_scale);

  ++step_;
  if (epoch_pos_ >= epoch_order_.size()) ++epoch_;
  history_.push_back(out);
  return out;
}

void Trainer::RunEpoch() {
  int64_t n = steps_per_epoch();
  for (int64_t i = 0; i < n; ++i) Step();
}

void Trainer::SaveState(const std::string& path) const {
  nlohmann::json meta;
  meta["epoch"] = epoch_;
  meta["step"] = step_;
  meta["epoch_pos"] = epoch_pos_;
  meta["epoch_order"] = epoch_order_;
  meta["rng_key"] = rng_.key();
  meta["rng_counter"] = rng_.counter();
  meta["opt_g_t"] = opt_g_->step_count();
  meta["opt_d_t"] = opt_d_->step_count();
  meta["config_hash"] = cfg_.config_hash;
  meta["d_c"] = encoder_->d_c();
  meta["g_widths"] = cfg_.gan.g_widths;
  meta["n_res_blocks"] = cfg_.gan.n_res_blocks;

  auto tensors = RegistryTensors(bundle_->g.registry(), "g.", /*include_opt_state=*/true);
  auto d_tensors = RegistryTensors(bundle_->d.registry(), "d.", /*include_opt_state=*/true);
  auto p_tensors = RegistryTensors(bundle_->proj.registry, "proj.", /*include_opt_state=*/true);
  tensors.insert(tensors.end(), d_tensors.begin(), d_tensors.end());
  tensors.insert(tensors.end(), p_tensors.begin(), p_tensors.end());
  SaveCheckpoint(path, "train_state", meta, tensors);
}

void Trainer::LoadState(const std::string& path) {
  Checkpoint ckpt = LoadCheckpoint(path);
  CADA_CHECK(ckpt.kind == "train_state",
             "expected a train_state checkpoint, got kind '" << ckpt.kind << "'");
  if (ckpt.meta.value("config_hash", uint64_t(0)) != cfg_.config_hash)
    Warn("resuming from a checkpoint written under a different config");

  LoadRegistry(ckpt, bundle_->g.registry(), "g.", /*include_opt_state=*/true);
  LoadRegistry(ckpt, bundle_->d.registry(), "d.", /*include_opt_state=*/true);
  LoadRegistry(ckpt, bundle_->proj.registry, "proj.", /*include_opt_state=*/true);

  epoch_ = ckpt.meta.at("epoch").get<int>();
  step_ = ckpt.meta.at("step").get<int64_t>();
  epoch_pos_ = ckpt.meta.at("epoch_pos").get<size_t>();
  epoch_order_ = ckpt.meta.at("epoch_order").get<std::vector<int64_t>>();
  rng_.set_state(ckpt.meta.at("rng_key").get<uint64_t>(),
                 ckpt.meta.at("rng_counter").get<uint64_t>());
  opt_g_->set_step_count(ckpt.meta.at("opt_g_t").get<int64_t>());
  opt_d_->set_step_count(ckpt.meta.at("opt_d_t").get<int64_t>());
}

TrainResult Trainer::Run(const std::string& out_dir, const std::string& resume_path) {
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "checkpoints", ec);
  if (ec) throw IoError("cannot create training output dir " + out_dir + ": " + ec.message());

  if (!resume_path.empty()) LoadState(resume_path);

  // Encoder parameters must come out bit-identical; remember them.
  std::vector<Tensor> encoder_before;
  for (const auto& [name, p] : encoder_->registry().params()) encoder_before.push_back(p->value);

  while (epoch_ < cfg_.train.epochs) {
    int start_epoch = epoch_;
    RunEpoch();
    if ((epoch_ % cfg_.train.checkpoint_every == 0 && epoch_ != start_epoch) ||
        epoch_ >= cfg_.train.epochs) {
      char name[64];
      std::snprintf(name, sizeof(name), "state_epoch%04d.ckpt", epoch_);
      SaveState((fs::path(out_dir) / "checkpoints" / name).string());
    }
  }

  size_t i = 0;
  for (const auto& [name, p] : encoder_->registry().params()) {
    CADA_CHECK(p->value.vec() == encoder_before[i].vec(),
               "frozen-encoder contract violated: parameter " << name << " changed during training");
    ++i;
  }

  TrainResult result;
  result.steps = step_;
  result.history = history_;
  result.generator_ckpt = (fs::path(out_dir) / "generator.ckpt").string();
  bundle_->g.Save(result.generator_ckpt, cfg_.config_hash);
  bundle_->d.Save((fs::path(out_dir) / "discriminator.ckpt").string(), cfg_.config_hash);
  bundle_->proj.Save((fs::path(out_dir) / "projection.ckpt").string(), cfg_.config_hash);
  SaveState((fs::path(out_dir) / "state_final.ckpt").string());
  result.metrics_csv = (fs::path(out_dir) / "metrics.csv").string();
  WriteGanMetricsCsv(result.metrics_csv, history_);
  return result;
}

void WriteGanMetricsCsv(const std::string& path, const std::vector<LossBreakdown>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write metrics csv: " + path);
  out << "step,adv_d,adv_g,pcl_src,pcl_tgt,ch,total\n";
  char buf[320];
  for (size_t i = 0; i < rows.size(); ++i) {
    const LossBreakdown& r = rows[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i + 1, r.adv_d,
                  r.adv, r.pcl_src, r.pcl_tgt, r.ch, r.total);
    out << buf;
  }
}

std::vector<LossBreakdown> ReadGanMetricsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics csv: " + path);
  std::string header;
  std::getline(in, header);
  CADA_CHECK(header == "step,adv_d,adv_g,pcl_src,pcl_tgt,ch,total",
             "unexpected metrics csv header: " << header);
  std::vector<LossBreakdown> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    LossBreakdown r;
    size_t step = 0;
    if (std::sscanf(line.c_str(), "%zu,%lg,%lg,%lg,%lg,%lg,%lg", &step, &r.adv_d, &r.adv,
                    &r.pcl_src, &r.pcl_tgt, &r.ch, &r.total) != 7)
      throw ParseError("bad metrics csv row: " + line);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace cada
