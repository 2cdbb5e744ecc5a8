// cada/checkpoint.cc

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

#include "cada/checkpoint.h"

#include <cstring>
#include <fstream>

namespace cada {

using nlohmann::json;

namespace {
constexpr char kMagic[8] = {'C', 'A', 'D', 'A', 'C', 'K', 'P', '1'};
}

const Tensor* Checkpoint::Find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

const Tensor& Checkpoint::Require(const std::string& name) const {
  const Tensor* t = Find(name);
  if (!t) throw ValidationError("checkpoint is missing tensor '" + name + "'");
  return *t;
}

void SaveCheckpoint(const std::string& path, const std::string& kind, const json& meta,
                    const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
  json header;
  header["kind"] = kind;
  header["meta"] = meta;
  header["tensors"] = json::array();
  for (const auto& [name, t] : tensors) {
    json entry;
    entry["name"] = name;
    entry["shape"] = t->shape();
    header["tensors"].push_back(entry);
  }
  std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, 8);
  uint64_t hlen = header_str.size();
  out.write(reinterpret_cast<const char*>(&hlen), 8);
  out.write(header_str.data(), std::streamsize(header_str.size()));
  for (const auto& [name, t] : tensors)
    out.write(reinterpret_cast<const char*>(t->data()),
              std::streamsize(size_t(t->size()) * sizeof(double)));
  if (!out) throw IoError("short write to checkpoint: " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("not a checkpoint file: " + path);
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 8);
  std::string header_str(hlen, '\0');
  in.read(header_str.data(), std::streamsize(hlen));
  if (uint64_t(in.gcount()) != hlen) throw IoError("truncated checkpoint header: " + path);
  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::exception& e) {
    throw ParseError("bad checkpoint header in " + path + ": " + e.what());
  }

  Checkpoint ckpt;
  ckpt.kind = header.at("kind").get<std::string>();
  ckpt.meta = header.value("meta", json::object());
  for (const auto& entry : header.at("tensors")) {
    std::vector<int64_t> shape = entry.at("shape").get<std::vector<int64_t>>();
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data()), std::streamsize(size_t(t.size()) * sizeof(double)));
    if (in.gcount() != std::streamsize(size_t(t.size()) * sizeof(double)))
      throw IoError("truncated checkpoint payload in " + path);
    ckpt.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
  }
  return ckpt;
}

std::vector<std::pair<std::string, const Tensor*>> RegistryTensors(const ParamRegistry& reg,
                                                                   const std::string& prefix,
                                                                   bool include_opt_state) {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (const auto& [name, p] : reg.params()) out.emplace_back(prefix + name, &p->value);
  for (const auto& [name, t] : reg.buffers()) out.emplace_back(prefix + name, t);
  if (include_opt_state) {
    for (const auto& [name, p] : reg.params()) {
      if (p->m.empty()) p->m = Tensor(p->value.shape());
      if (p->v.empty()) p->v = Tensor(p->value.shape());
      out.emplace_back(prefix + "opt.m." + name, &p->m);
      out.emplace_back(prefix + "opt.v." + name, &p->v);
    }
  }
  return out;
}

void LoadRegistry(const Checkpoint& ckpt, const ParamRegistry& reg, const std::string& prefix,
                  bool include_opt_state) {
  auto fetch = [&](const std::string& name, Tensor* dst) {
    const Tensor& src = ckpt.Require(name);
    CADA_CHECK(src.shape() == dst->shape(), "checkpoint tensor " << name << " has shape "
                                                                 << src.ShapeStr() << ", expected "
                                                                 << dst->ShapeStr());
    *dst = src;
  };
  for (const auto& [name, p] : reg.params()) fetch(prefix + name, &p->value);
  for (const auto& [name, t] : reg.buffers()) fetch(prefix + name, t);
  if (include_opt_state) {
    for (const auto& [name, p] : reg.params()) {
      if (p->m.empty()) p->m = Tensor(p->value.shape());
      if (p->v.empty()) p->v = Tensor(p->value.shape());
      fetch(prefix + "opt.m." + name, &p->m);
      fetch(prefix + "opt.v." + name, &p->v);
    }
  }
}

}  // namespace cada
