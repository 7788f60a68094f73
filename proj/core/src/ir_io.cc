// Copyright 2026 The NLUForge Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nluforge/ir_io.h"

#include "nluforge/error.h"

namespace nluforge {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json UtteranceToJson(const Utterance& u) {
  ordered_json out;
  out["id"] = u.id;
  out["text"] = u.text;
  ordered_json tokens = ordered_json::array();
  for (const Token& t : u.tokens) {
    ordered_json tok;
    tok["text"] = t.text;
    tok["start"] = t.char_start;
    tok["end"] = t.char_end;
    tokens.push_back(std::move(tok));
  }
  out["tokens"] = std::move(tokens);
  out["intent"] = u.intent ? ordered_json(*u.intent) : ordered_json(nullptr);
  ordered_json slots = ordered_json::array();
  for (const SlotSpan& s : u.slots) {
    ordered_json span;
    span["start"] = s.start;
    span["end"] = s.end;
    span["label"] = s.label;
    slots.push_back(std::move(span));
  }
  out["slots"] = std::move(slots);
  out["split"] = SplitName(u.split);
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : u.meta) meta[k] = v;
  out["meta"] = std::move(meta);
  return out;
}

Utterance UtteranceFromJson(const json& obj) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kParse, "utterance record is not an object");
  }
  try {
    Utterance u;
    u.id = obj.at("id").get<std::string>();
    u.text = obj.at("text").get<std::string>();
    for (const auto& tok : obj.at("tokens")) {
      u.tokens.push_back(Token{tok.at("text").get<std::string>(),
                               tok.at("start").get<std::size_t>(),
                               tok.at("end").get<std::size_t>()});
    }
    const auto& intent = obj.at("intent");
    if (!intent.is_null()) u.intent = intent.get<std::string>();
    for (const auto& span : obj.at("slots")) {
      u.slots.push_back(SlotSpan{span.at("start").get<std::size_t>(),
                                 span.at("end").get<std::size_t>(),
                                 span.at("label").get<std::string>()});
    }
    u.split = ParseSplit(obj.at("split").get<std::string>());
    if (auto it = obj.find("meta"); it != obj.end()) {
      for (const auto& [k, v] : it->items()) u.meta[k] = v.get<std::string>();
    }
    return u;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad utterance record: ") + e.what());
  }
}

std::string WriteIrJsonl(const Corpus& corpus) {
  ordered_json manifest;
  manifest["ir_version"] = kIrFormatVersion;
  manifest["corpus_id"] = corpus.id;
  manifest["name"] = corpus.name;
  manifest["intents"] = corpus.intents;
  manifest["slot_types"] = corpus.slot_types;
  std::string out = manifest.dump();
  out += '\n';
  for (const Utterance& u : corpus.utterances) {
    out += UtteranceToJson(u).dump();
    out += '\n';
  }
  return out;
}

Corpus ReadIrJsonl(std::string_view data, std::int64_t version) {
  Corpus corpus;
  corpus.version = version;
  bool have_manifest = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    std::size_t nl = data.find('\n', pos);
    if (nl == std::string_view::npos) nl = data.size();
    std::string_view line = data.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse,
                  "IR line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_manifest) {
      try {
        if (obj.at("ir_version").get<int>() != kIrFormatVersion) {
          throw Error(ErrorCode::kParse, "unsupported ir_version");
        }
        corpus.id = obj.at("corpus_id").get<std::string>();
        corpus.name = obj.at("name").get<std::string>();
        for (const auto& i : obj.at("intents")) corpus.intents.insert(i.get<std::string>());
        for (const auto& t : obj.at("slot_types")) {
          corpus.slot_types.insert(t.get<std::string>());
        }
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("bad IR manifest: ") + e.what());
      }
      have_manifest = true;
      continue;
    }
    corpus.utterances.push_back(UtteranceFromJson(obj));
  }
  if (!have_manifest) throw Error(ErrorCode::kParse, "IR file has no manifest line");
  return corpus;
}

}  // namespace nluforge
