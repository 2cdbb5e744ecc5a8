// cada/wav.cc

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

#include "cada/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cada/common.h"

namespace cada {

namespace {

uint32_t ReadU32(const unsigned char* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}
uint16_t ReadU16(const unsigned char* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }

void PutU32(std::string* s, uint32_t v) {
  s->push_back(char(v & 0xff));
  s->push_back(char((v >> 8) & 0xff));
  s->push_back(char((v >> 16) & 0xff));
  s->push_back(char((v >> 24) & 0xff));
}
void PutU16(std::string* s, uint16_t v) {
  s->push_back(char(v & 0xff));
  s->push_back(char((v >> 8) & 0xff));
}

}  // namespace

WavData ReadWavMono(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open wav file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw IoError("not a RIFF/WAVE file: " + path);

  int channels = 0, bits = 0, sample_rate = 0;
  size_t data_off = 0, data_len = 0;
  size_t off = 12;
  while (off + 8 <= n) {
    uint32_t chunk_len = ReadU32(p + off + 4);
    if (std::memcmp(p + off, "fmt ", 4) == 0) {
      if (off + 8 + 16 > n) throw IoError("truncated fmt chunk: " + path);
      uint16_t format = ReadU16(p + off + 8);
      channels = ReadU16(p + off + 10);
      sample_rate = int(ReadU32(p + off + 12));
      bits = ReadU16(p + off + 22);
      if (format != 1) throw IoError("unsupported wav encoding (want PCM): " + path);
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      data_off = off + 8;
      data_len = std::min<size_t>(chunk_len, n - data_off);
    }
    off += 8 + chunk_len + (chunk_len & 1);
  }
  if (channels != 1) throw IoError("expected mono wav, got " + std::to_string(channels) +
                                   " channels: " + path);
  if (bits != 16) throw IoError("expected 16-bit wav, got " + std::to_string(bits) + ": " + path);
  if (data_off == 0) throw IoError("wav has no data chunk: " + path);

  WavData out;
  out.sample_rate = sample_rate;
  size_t count = data_len / 2;
  out.samples.resize(count);
  for (size_t i = 0; i < count; ++i) {
    int16_t v = int16_t(uint16_t(p[data_off + 2 * i]) | uint16_t(p[data_off + 2 * i + 1]) << 8);
    out.samples[i] = double(v) / 32768.0;
  }
  return out;
}

void WriteWavMono(const std::string& path, const std::vector<double>& samples, int sample_rate) {
  std::string body;
  body.reserve(44 + samples.size() * 2);
  body += "RIFF";
  PutU32(&body, uint32_t(36 + samples.size() * 2));
  body += "WAVE";
  body += "fmt ";
  PutU32(&body, 16);
  PutU16(&body, 1);  // PCM
  PutU16(&body, 1);  // mono
  PutU32(&body, uint32_t(sample_rate));
  PutU32(&body, uint32_t(sample_rate * 2));  // byte rate
  PutU16(&body, 2);                          // block align
  PutU16(&body, 16);                         // bits
  body += "data";
  PutU32(&body, uint32_t(samples.size() * 2));
  for (double s : samples) {
    double clamped = std::clamp(s, -1.0, 1.0);
    auto v = int16_t(std::lrint(clamped * 32767.0));
    PutU16(&body, uint16_t(v));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write wav file: " + path);
  out.write(body.data(), std::streamsize(body.size()));
  if (!out) throw IoError("short write to wav file: " + path);
}

}  // namespace cada
