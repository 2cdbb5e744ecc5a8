// cada/losses.cc

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

#include "cada/losses.h"

#include <cmath>

namespace cada {

LossBreakdown TotalLoss(double adv_d, double adv, double pcl_src, double pcl_tgt, double ch,
                        double lambda_ch) {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v))
      throw NumericError(CADA_MAKE_MSG("total_loss: component '" << name << "' is non-finite ("
                                                                 << v << ")"));
  };
  check(adv, "adv");
  check(pcl_src, "pcl_src");
  check(pcl_tgt, "pcl_tgt");
  check(ch, "ch");
  check(lambda_ch, "lambda_ch");
  LossBreakdown out;
  out.adv_d = adv_d;
  out.adv = adv;
  out.pcl_src = pcl_src;
  out.pcl_tgt = pcl_tgt;
  out.ch = ch;
  out.lambda_ch = lambda_ch;
  out.total = TotalOf(adv, pcl_src, pcl_tgt, ch, lambda_ch);
  return out;
}

Var DiscObjective(const Var& d_real_logits, const Var& d_fake_logits) {
  CADA_CHECK(d_real_logits->value.SameShape(d_fake_logits->value),
             "adv_loss: logit map shapes differ: " << d_real_logits->value.ShapeStr() << " vs "
                                                   << d_fake_logits->value.ShapeStr());
  CADA_CHECK(d_real_logits->value.AllFinite() && d_fake_logits->value.AllFinite(),
             "adv_loss: non-finite logits");
  // log(1 - sigma(x)) == log sigma(-x).
  Var real_term = Mean(LogSigmoid(d_real_logits));
  Var fake_term = Mean(LogSigmoid(Neg(d_fake_logits)));
  return Add(real_term, fake_term);
}

Var GenAdvLoss(const Var& d_fake_logits, AdvForm form) {
  CADA_CHECK(d_fake_logits->value.AllFinite(), "adv_loss: non-finite logits");
  if (form == AdvForm::kLiteral) return Mean(LogSigmoid(Neg(d_fake_logits)));
  return Neg(Mean(LogSigmoid(d_fake_logits)));
}

std::pair<double, double> AdvLossValues(const Tensor& d_real_logits, const Tensor& d_fake_logits,
                                        AdvForm g_form) {
  Tape tape;
  Var real = tape.Input(d_real_logits);
  Var fake = tape.Input(d_fake_logits);
  double d_obj = DiscObjective(real, fake)->value[0];
  double g_obj = GenAdvLoss(fake, g_form)->value[0];
  return {d_obj, g_obj};
}

Var ChannelReconLoss(Tape* tape, EncoderModel* frozen_encoder, const Var& x_sim,
                     const Var& c_target) {
  CADA_CHECK(x_sim->value.ndim() == 4, "channel_recon_loss expects x_sim [N,1,H,W]");
  CADA_CHECK(c_target->value.ndim() == 2 && c_target->value.dim(1) == frozen_encoder->d_c(),
             "channel_recon_loss: embedding dimension " << c_target->value.ShapeStr()
                                                        << " does not match encoder d_c "
                                                        << frozen_encoder->d_c());
  CADA_CHECK(c_target->value.dim(0) == x_sim->value.dim(0),
             "channel_recon_loss: batch size mismatch");
  // trainable=false freezes E; evaluation mode keeps extraction deterministic.
  Var emb = frozen_encoder->EmbedBatch(tape, x_sim, /*training=*/false, /*trainable=*/false);
  Var l1 = Sum(Abs(Sub(c_target, emb)));
  return Scale(l1, 1.0 / double(x_sim->value.dim(0)));
}

double ChannelReconLossValue(EncoderModel* frozen_encoder, const Tensor& x_sim_frame,
                             const Tensor& c_target) {
  Tape tape;
  Tensor batch = x_sim_frame.ndim() == 2
                     ? x_sim_frame.Reshaped({1, 1, x_sim_frame.dim(0), x_sim_frame.dim(1)})
                     : x_sim_frame;
  Var loss = ChannelReconLoss(&tape, frozen_encoder, tape.Input(batch),
                              tape.Input(c_target.Reshaped({1, c_target.size()})));
  return loss->value[0];
}

Var PatchNceLoss(Tape* tape, const Var& queries, const Var& positives, const Var& negatives,
                 double tau) {
  CADA_CHECK(tau > 0, "patchnce_loss: tau must be positive, got " << tau);
  CADA_CHECK(queries->value.ndim() == 2 && queries->value.SameShape(positives->value),
             "patchnce_loss: queries/positives must be matching [P,D]");
  int64_t p = queries->value.dim(0);
  bool has_neg = !negatives->value.empty() && negatives->value.dim(0) > 0;
  if (has_neg)
    CADA_CHECK(negatives->value.ndim() == 2 && negatives->value.dim(1) == queries->value.dim(1),
               "patchnce_loss: negatives dimension mismatch");

  Var pos_logit = RowDot(queries, positives);  // [P,1]
  Var logits = has_neg ? ConcatCols({pos_logit, MatmulNT(queries, negatives)}) : pos_logit;
  logits = Scale(logits, 1.0 / tau);
  return SoftmaxCrossEntropy(logits, std::vector<int64_t>(size_t(p), 0));
}

double PatchNceLossValue(const Tensor& queries, const Tensor& positives, const Tensor& negatives,
                         double tau) {
  Tape tape;
  return PatchNceLoss(&tape, tape.Input(queries), tape.Input(positives), tape.Input(negatives),
                      tau)
      ->value[0];
}

namespace {

// [P,P] similarity logits where the diagonal is the query-positive dot and
// off-diagonals are query-negative dots against `pool` rows.
Var PairLogits(const Var& queries, const Var& z, NegativesFrom mode) {
  if (mode == NegativesFrom::kSource) return MatmulNT(queries, z);

  // Simulated negatives: off-diagonal q_i . q_j, diagonal q_i . z_i.
  const Tensor& q = queries->value;
  const Tensor& zt = z->value;
  int64_t p = q.dim(0), d = q.dim(1);
  Tensor out({p, p});
  for (int64_t i = 0; i < p; ++i)
    for (int64_t j = 0; j < p; ++j) {
      const double* a = q.data() + i * d;
      const double* b = (i == j ? zt.data() + i * d : q.data() + j * d);
      double s = 0;
      for (int64_t k = 0; k < d; ++k) s += a[k] * b[k];
      out[i * p + j] = s;
    }
  return MakeNode(std::move(out), {queries, z}, [queries, z, p, d](Node& n) {
    const Tensor& q = queries->value;
    const Tensor& zt = z->value;
    if (queries->requires_grad) {
      Tensor& gq = queries->EnsureGrad();
      for (int64_t i = 0; i < p; ++i)
        for (int64_t j = 0; j < p; ++j) {
          double g = n.grad[i * p + j];
          if (g == 0) continue;
          if (i == j) {
            for (int64_t k = 0; k < d; ++k) gq[i * d + k] += g * zt[i * d + k];
          } else {
            for (int64_t k = 0; k < d; ++k) {
              gq[i * d + k] += g * q[j * d + k];
              gq[j * d + k] += g * q[i * d + k];
            }
          }
        }
    }
    if (z->requires_grad) {
      Tensor& gz = z->EnsureGrad();
      for (int64_t i = 0; i < p; ++i) {
        double g = n.grad[i * p + i];
        for (int64_t k = 0; k < d; ++k) gz[i * d + k] += g * q[i * d + k];
      }
    }
  });
}

}  // namespace

Var PatchNcePaired(Tape* tape, const Var& queries, const Var& z, double tau, NegativesFrom mode) {
  (void)tape;
  CADA_CHECK(tau > 0, "patchnce_loss: tau must be positive, got " << tau);
  CADA_CHECK(queries->value.ndim() == 2 && queries->value.SameShape(z->value),
             "patchnce_paired: shapes must match");
  int64_t p = queries->value.dim(0);
  Var logits = Scale(PairLogits(queries, z, mode), 1.0 / tau);
  std::vector<int64_t> labels(static_cast<size_t>(p));
  for (int64_t i = 0; i < p; ++i) labels[size_t(i)] = i;
  return SoftmaxCrossEntropy(logits, labels);
}

}  // namespace cada
