// cada/train_options.h

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

#ifndef CADA_TRAIN_OPTIONS_H_
#define CADA_TRAIN_OPTIONS_H_

#include <string>

#include "cada/common.h"

namespace cada {

// Which side supplies the negative patches for the contrastive loss.
enum class NegativesFrom { kSource, kSimulated };

// Generator adversarial term: the literal minimax log(1-D(G)) or the
// non-saturating -log D(G) swap.
enum class AdvForm { kLiteral, kNonSaturating };

inline NegativesFrom ParseNegativesFrom(const std::string& s) {
  if (s == "source") return NegativesFrom::kSource;
  if (s == "simulated") return NegativesFrom::kSimulated;
  throw ParseError("negatives_from must be 'source' or 'simulated', got '" + s + "'");
}

inline AdvForm ParseAdvForm(const std::string& s) {
  if (s == "literal") return AdvForm::kLiteral;
  if (s == "non_saturating") return AdvForm::kNonSaturating;
  throw ParseError("adv_form must be 'literal' or 'non_saturating', got '" + s + "'");
}

inline std::string ToString(NegativesFrom v) {
  return v == NegativesFrom::kSource ? "source" : "simulated";
}
inline std::string ToString(AdvForm v) {
  return v == AdvForm::kLiteral ? "literal" : "non_saturating";
}

}  // namespace cada

#endif  // CADA_TRAIN_OPTIONS_H_
