// cada/manifest.cc

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

#include "cada/manifest.h"

#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "cada/common.h"

namespace cada {

using nlohmann::json;

std::string RecordToJsonLine(const UtteranceRecord& rec) {
  json j;
  j["utt_id"] = rec.utt_id;
  j["set_id"] = rec.set_id;
  j["speaker_id"] = rec.speaker_id;
  j["channel_label"] = rec.channel_label;
  j["audio_ref"] = rec.audio_ref;
  j["transcript"] = rec.transcript;
  j["sample_rate"] = rec.sample_rate;
  if (rec.kind != "audio") j["kind"] = rec.kind;
  if (!rec.source_utt_id.empty()) j["source_utt_id"] = rec.source_utt_id;
  if (!rec.target_utt_id.empty()) j["target_utt_id"] = rec.target_utt_id;
  return j.dump();
}

UtteranceRecord RecordFromJsonLine(const std::string& line, int line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(CADA_MAKE_MSG("manifest line " << line_number << ": invalid JSON: "
                                                    << e.what()));
  }
  if (!j.is_object())
    throw ParseError(CADA_MAKE_MSG("manifest line " << line_number << ": expected an object"));

  auto need_string = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string())
      throw ParseError(CADA_MAKE_MSG("manifest line " << line_number << ": missing or non-string field '"
                                                      << key << "'"));
    return j[key].get<std::string>();
  };

  UtteranceRecord rec;
  rec.utt_id = need_string("utt_id");
  rec.set_id = need_string("set_id");
  rec.speaker_id = need_string("speaker_id");
  rec.channel_label = need_string("channel_label");
  rec.audio_ref = need_string("audio_ref");
  rec.transcript = need_string("transcript");
  if (!j.contains("sample_rate") || !j["sample_rate"].is_number_integer())
    throw ParseError(CADA_MAKE_MSG("manifest line " << line_number
                                                    << ": missing or non-integer field 'sample_rate'"));
  rec.sample_rate = j["sample_rate"].get<int>();
  if (rec.sample_rate <= 0)
    throw ParseError(CADA_MAKE_MSG("manifest line " << line_number << ": sample_rate must be positive"));

  if (j.contains("kind")) rec.kind = j["kind"].get<std::string>();
  if (rec.kind != "audio" && rec.kind != "spectrogram")
    throw ParseError(CADA_MAKE_MSG("manifest line " << line_number << ": unknown kind '" << rec.kind
                                                    << "'"));
  if (j.contains("source_utt_id")) rec.source_utt_id = j["source_utt_id"].get<std::string>();
  if (j.contains("target_utt_id")) rec.target_utt_id = j["target_utt_id"].get<std::string>();

  static const std::unordered_set<std::string> known = {
      "utt_id",     "set_id",     "speaker_id",    "channel_label", "audio_ref",
      "transcript", "sample_rate", "kind",         "source_utt_id", "target_utt_id"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key()))
      throw ParseError(CADA_MAKE_MSG("manifest line " << line_number << ": unknown field '"
                                                      << it.key() << "'"));
  }
  return rec;
}

void ValidateRecords(const std::vector<UtteranceRecord>& records) {
  std::unordered_set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.utt_id).second)
      throw ValidationError("duplicate utt_id in manifest: " + r.utt_id);
  }
  struct SetInfo {
    const UtteranceRecord* first;
    std::unordered_set<std::string> channels;
  };
  std::unordered_map<std::string, SetInfo> sets;
  for (const auto& r : records) {
    auto [it, inserted] = sets.try_emplace(r.set_id, SetInfo{&r, {}});
    SetInfo& info = it->second;
    if (!inserted) {
      if (r.transcript != info.first->transcript)
        throw ValidationError("set " + r.set_id + ": transcripts differ across channels");
      if (r.speaker_id != info.first->speaker_id)
        throw ValidationError("set " + r.set_id + ": speaker_id differs across channels");
    }
    if (!info.channels.insert(r.channel_label).second)
      throw ValidationError("set " + r.set_id + ": duplicate channel_label '" + r.channel_label +
                            "'");
  }
}

std::vector<UtteranceRecord> LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  std::vector<UtteranceRecord> records;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    records.push_back(RecordFromJsonLine(line, line_number));
  }
  ValidateRecords(records);
  return records;
}

void SaveManifest(const std::string& path, const std::vector<UtteranceRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path);
  for (const auto& r : records) out << RecordToJsonLine(r) << "\n";
  if (!out) throw IoError("short write to manifest: " + path);
}

}  // namespace cada
