// cada/losses.h

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

#ifndef CADA_LOSSES_H_
#define CADA_LOSSES_H_

#include "cada/encoder.h"
#include "cada/graph.h"
#include "cada/train_options.h"

namespace cada {

// Per-step loss values. The identity total == adv + pcl_src + pcl_tgt +
// lambda_ch * ch holds exactly (same floating-point association everywhere:
// ((adv + pcl_src) + pcl_tgt) + lambda_ch * ch).
struct LossBreakdown {
  double adv_d = 0;     // discriminator objective (ascended)
  double adv = 0;       // generator adversarial term (descended; enters total)
  double pcl_src = 0;
  double pcl_tgt = 0;
  double ch = 0;
  double lambda_ch = 0.5;
  double total = 0;
};

// Exact shared association for the Eq-style weighted sum.
inline double TotalOf(double adv, double pcl_src, double pcl_tgt, double ch, double lambda_ch) {
  return ((adv + pcl_src) + pcl_tgt) + lambda_ch * ch;
}

// Combines finite parts into a breakdown; a non-finite component raises
// NumericError naming it. lambda_ch defaults to 0.5.
LossBreakdown TotalLoss(double adv_d, double adv, double pcl_src, double pcl_tgt, double ch,
                        double lambda_ch = 0.5);

// ---- adversarial (patch logits in, nats out) ----

// mean log sigma(real) + mean log(1 - sigma(fake)); the discriminator ascends
// this, so its training loss is the negation.
Var DiscObjective(const Var& d_real_logits, const Var& d_fake_logits);
// Generator term to descend: literal mean log(1 - sigma(fake)) or
// non-saturating -mean log sigma(fake).
Var GenAdvLoss(const Var& d_fake_logits, AdvForm form);
// Value-level surface: (d_objective, g_objective).
std::pair<double, double> AdvLossValues(const Tensor& d_real_logits, const Tensor& d_fake_logits,
                                        AdvForm g_form = AdvForm::kNonSaturating);

// ---- channel reconstruction ----

// mean over the batch of || c - E(G(x,c)) ||_1. Gradient flows through the
// encoder graph into x_sim but never into encoder parameters.
Var ChannelReconLoss(Tape* tape, EncoderModel* frozen_encoder, const Var& x_sim,
                     const Var& c_target);
double ChannelReconLossValue(EncoderModel* frozen_encoder, const Tensor& x_sim_frame,
                             const Tensor& c_target);

// ---- patch-wise contrastive ----

// Explicit-negative form: queries/positives [P,D], negatives [J,D] shared
// across queries (J may be 0), all rows unit-normalized by the caller.
// Log-sum-exp stable; mean over the P patches.
Var PatchNceLoss(Tape* tape, const Var& queries, const Var& positives, const Var& negatives,
                 double tau);
double PatchNceLossValue(const Tensor& queries, const Tensor& positives, const Tensor& negatives,
                         double tau);

// Paired form used in training: for query i the positive is row i of z and
// the negatives are the other rows (of z for kSource, of the queries for
// kSimulated). Equals softmax cross-entropy on the similarity matrix with
// diagonal labels.
Var PatchNcePaired(Tape* tape, const Var& queries, const Var& z, double tau, NegativesFrom mode);

}  // namespace cada

#endif  // CADA_LOSSES_H_
