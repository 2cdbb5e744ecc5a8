// cada/checkpoint.h

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

#ifndef CADA_CHECKPOINT_H_
#define CADA_CHECKPOINT_H_

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cada/nn.h"
#include "cada/tensor.h"

namespace cada {

// Single-file container: magic, JSON header (kind + metadata + tensor table),
// then raw little-endian float64 payloads in table order.
struct Checkpoint {
  std::string kind;  // "encoder" | "generator" | "discriminator" | "projection" | "train_state"
  nlohmann::json meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* Find(const std::string& name) const;
  const Tensor& Require(const std::string& name) const;
};

void SaveCheckpoint(const std::string& path, const std::string& kind, const nlohmann::json& meta,
                    const std::vector<std::pair<std::string, const Tensor*>>& tensors);
Checkpoint LoadCheckpoint(const std::string& path);

// Registry helpers. include_opt_state adds Adam moments ("opt.m." / "opt.v."
// prefixed); prefix namespaces all names.
std::vector<std::pair<std::string, const Tensor*>> RegistryTensors(const ParamRegistry& reg,
                                                                   const std::string& prefix = "",
                                                                   bool include_opt_state = false);
void LoadRegistry(const Checkpoint& ckpt, const ParamRegistry& reg, const std::string& prefix = "",
                  bool include_opt_state = false);

}  // namespace cada

#endif  // CADA_CHECKPOINT_H_
