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

#include "nluforge/converters.h"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "json.hpp"
#include "nluforge/error.h"
#include "nluforge/ir_io.h"

namespace nluforge {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool IsValidUtf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      extra = 1;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      extra = 2;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10ffff ||
        (cp >= 0xd800 && cp <= 0xdfff)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

void RequireUtf8(std::string_view bytes) {
  if (!IsValidUtf8(bytes)) {
    throw Error(ErrorCode::kParse, "input is not valid UTF-8");
  }
}

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string AsciiLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> SplitLines(std::string_view bytes) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

// Shared tail of every importer: de-duplicates ids, enforces the
// intent-labeled-corpus rule, derives label sets and validates.
ImportResult Finalize(std::vector<Utterance> candidates, std::size_t n_in,
                      ConversionReport report, const ImportOptions& options) {
  ImportResult result;
  result.corpus.id = options.corpus_id;
  result.corpus.name = options.name;
  result.corpus.version = 1;

  const bool intent_labeled = std::any_of(
      candidates.begin(), candidates.end(),
      [](const Utterance& u) { return u.intent.has_value(); });

  std::unordered_set<std::string> seen;
  for (Utterance& u : candidates) {
    if (!seen.insert(u.id).second) {
      report.dropped.emplace_back(u.id, "duplicate utterance id");
      continue;
    }
    if (intent_labeled && !u.intent) {
      report.dropped.emplace_back(u.id, "missing intent in an intent-labeled corpus");
      continue;
    }
    std::set<std::string> intents;
    std::set<std::string> types;
    if (u.intent) intents.insert(*u.intent);
    for (const auto& s : u.slots) types.insert(s.label);
    auto issues = ValidateUtterance(u, intents, types);
    if (HasErrors(issues)) {
      report.dropped.emplace_back(u.id, issues.front().code + ": " +
                                            issues.front().message);
      continue;
    }
    if (u.intent) result.corpus.intents.insert(*u.intent);
    result.corpus.slot_types.insert(types.begin(), types.end());
    result.corpus.utterances.push_back(std::move(u));
  }
  report.utterances_in = n_in;
  report.utterances_out = result.corpus.utterances.size();
  for (const auto& [id, reason] : report.dropped) {
    report.issues.push_back(ValidationIssue{id, Severity::kWarning,
                                            std::string(issue::kRecordDropped),
                                            reason, std::nullopt});
  }
  result.report = std::move(report);
  return result;
}

std::string ComposeText(std::vector<Token>& tokens,
                        const std::vector<std::string>& words) {
  std::string text;
  tokens.clear();
  for (const auto& w : words) {
    if (!text.empty()) text += ' ';
    tokens.push_back(Token{w, text.size(), text.size() + w.size()});
    text += w;
  }
  return text;
}

}  // namespace

DatasetFormat ParseDatasetFormat(std::string_view name) {
  if (name == "ir") return DatasetFormat::kIr;
  if (name == "conll") return DatasetFormat::kConll;
  if (name == "intent_json") return DatasetFormat::kIntentJson;
  if (name == "keyphrase_jsonl" || name == "keyphrase") {
    return DatasetFormat::kKeyphraseJsonl;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown dataset format '" + std::string(name) + "'");
}

std::string_view DatasetFormatName(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::kIr: return "ir";
    case DatasetFormat::kConll: return "conll";
    case DatasetFormat::kIntentJson: return "intent_json";
    case DatasetFormat::kKeyphraseJsonl: return "keyphrase_jsonl";
  }
  return "ir";
}

ImportResult ImportConll(std::string_view bytes, const ImportOptions& options) {
  RequireUtf8(bytes);
  const auto lines = SplitLines(bytes);

  ConversionReport report;
  std::vector<Utterance> candidates;
  std::size_t n_blocks = 0;

  std::size_t i = 0;
  while (i < lines.size()) {
    if (Trim(lines[i]).empty()) {
      ++i;
      continue;
    }
    const std::size_t block_first_line = i + 1;
    std::vector<std::string_view> block;
    while (i < lines.size() && !Trim(lines[i]).empty()) block.push_back(lines[i++]);

    Utterance u;
    std::vector<std::string> words;
    std::vector<BioLabel> tags;
    std::optional<std::string> explicit_id;
    std::string error;
    bool has_token_lines = false;
    for (std::size_t k = 0; k < block.size() && error.empty(); ++k) {
      std::string_view line = block[k];
      const std::size_t line_no = block_first_line + k;
      if (line.front() == '#') {
        const std::string body = Trim(line.substr(1));
        const auto eq = body.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = Trim(std::string_view(body).substr(0, eq));
        const std::string value = Trim(std::string_view(body).substr(eq + 1));
        if (key == "intent") {
          u.intent = value;
        } else if (key == "id") {
          explicit_id = value;
        } else if (key == "split") {
          try {
            u.split = ParseSplit(value);
          } catch (const Error&) {
            error = "line " + std::to_string(line_no) + ": unknown split '" + value + "'";
          }
        }
        continue;
      }
      has_token_lines = true;
      const auto tab = line.find('\t');
      if (tab == std::string_view::npos ||
          line.find('\t', tab + 1) != std::string_view::npos) {
        error = "line " + std::to_string(line_no) + ": expected token<TAB>tag";
        break;
      }
      std::string_view word = line.substr(0, tab);
      std::string_view tag = line.substr(tab + 1);
      if (word.empty() || Trim(word) != word ||
          word.find_first_of(" \t\f\v") != std::string_view::npos) {
        error = "line " + std::to_string(line_no) + ": empty or whitespace token";
        break;
      }
      try {
        tags.push_back(BioLabel::Parse(Trim(tag)));
      } catch (const Error&) {
        error = "line " + std::to_string(line_no) + ": malformed tag '" +
                std::string(tag) + "'";
        break;
      }
      words.emplace_back(word);
    }
    if (!has_token_lines && error.empty()) continue;  // comment-only block

    ++n_blocks;
    u.id = explicit_id.value_or("u" + std::to_string(n_blocks));
    if (!error.empty()) {
      report.dropped.emplace_back(u.id, error);
      continue;
    }
    u.text = ComposeText(u.tokens, words);
    if (!ValidateBio(tags).empty()) {
      report.issues.push_back(ValidationIssue{
          u.id, Severity::kWarning, std::string(issue::kBioRepaired),
          "invalid BIO sequence repaired", std::nullopt});
      tags = RepairBio(tags);
    }
    u.slots = SpansFromBio(tags);
    candidates.push_back(std::move(u));
  }
  return Finalize(std::move(candidates), n_blocks, std::move(report), options);
}

std::string ExportConll(const Corpus& corpus) {
  std::string out;
  std::size_t position = 0;
  for (const Utterance& u : corpus.utterances) {
    if (position++ > 0) out += '\n';
    // Import names unlabeled blocks u1, u2, ...; only other ids need a line.
    if (u.id != "u" + std::to_string(position)) out += "# id = " + u.id + "\n";
    if (u.intent) out += "# intent = " + *u.intent + "\n";
    if (u.split != Split::kTrain) {
      out += "# split = ";
      out += SplitName(u.split);
      out += '\n';
    }
    const auto tags = UtteranceTags(u);
    for (std::size_t t = 0; t < u.tokens.size(); ++t) {
      out += u.tokens[t].text;
      out += '\t';
      out += tags[t].ToString();
      out += '\n';
    }
  }
  return out;
}

ImportResult ImportIntentJson(std::string_view bytes,
                              const ImportOptions& options) {
  RequireUtf8(bytes);
  json root;
  try {
    root = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("intent JSON: ") + e.what());
  }
  if (!root.is_array()) {
    throw Error(ErrorCode::kParse, "intent JSON: top level must be an array");
  }

  ConversionReport report;
  std::vector<Utterance> candidates;
  std::size_t index = 0;
  for (const json& rec : root) {
    ++index;
    Utterance u;
    u.id = "u" + std::to_string(index);
    if (rec.is_object()) {
      if (auto it = rec.find("id"); it != rec.end() && it->is_string()) {
        u.id = it->get<std::string>();
      }
    }
    if (!rec.is_object() || !rec.contains("text") || !rec["text"].is_string()) {
      report.dropped.emplace_back(u.id, "record has no string 'text'");
      continue;
    }
    u.text = rec["text"].get<std::string>();
    u.tokens = Tokenize(u.text);
    if (auto it = rec.find("intent"); it != rec.end() && !it->is_null()) {
      if (!it->is_string()) {
        report.dropped.emplace_back(u.id, "'intent' is not a string");
        continue;
      }
      u.intent = it->get<std::string>();
    }
    if (auto it = rec.find("split"); it != rec.end() && it->is_string()) {
      try {
        u.split = ParseSplit(it->get<std::string>());
      } catch (const Error& e) {
        report.dropped.emplace_back(u.id, e.what());
        continue;
      }
    }

    std::vector<SlotSpan> spans;
    if (auto it = rec.find("entities"); it != rec.end() && it->is_array()) {
      for (const json& ent : *it) {
        if (!ent.is_object() || !ent.contains("start") || !ent.contains("end") ||
            !ent.contains("label") || !ent["start"].is_number_unsigned() ||
            !ent["end"].is_number_unsigned() || !ent["label"].is_string()) {
          report.issues.push_back(ValidationIssue{
              u.id, Severity::kWarning, std::string(issue::kEntityMisaligned),
              "malformed entity dropped", std::nullopt});
          continue;
        }
        const auto cs = ent["start"].get<std::size_t>();
        const auto ce = ent["end"].get<std::size_t>();
        const auto label = ent["label"].get<std::string>();
        std::optional<std::size_t> ts;
        std::optional<std::size_t> te;
        for (std::size_t t = 0; t < u.tokens.size(); ++t) {
          if (u.tokens[t].char_start == cs) ts = t;
          if (u.tokens[t].char_end == ce) te = t + 1;
        }
        if (!ts || !te || *ts >= *te || label.empty()) {
          report.issues.push_back(ValidationIssue{
              u.id, Severity::kWarning, std::string(issue::kEntityMisaligned),
              "entity [" + std::to_string(cs) + "," + std::to_string(ce) +
                  ") '" + label + "' is not aligned to token boundaries",
              std::nullopt});
          continue;
        }
        spans.push_back(SlotSpan{*ts, *te, label});
      }
    }
    std::stable_sort(spans.begin(), spans.end(),
                     [](const SlotSpan& a, const SlotSpan& b) { return a.start < b.start; });
    std::size_t prev_end = 0;
    for (auto& span : spans) {
      if (span.start < prev_end) {
        report.issues.push_back(ValidationIssue{
            u.id, Severity::kWarning, std::string(issue::kEntityOverlap),
            "overlapping entity '" + span.label + "' dropped", span.start});
        continue;
      }
      prev_end = span.end;
      u.slots.push_back(std::move(span));
    }
    candidates.push_back(std::move(u));
  }
  return Finalize(std::move(candidates), index, std::move(report), options);
}

std::string ExportIntentJson(const Corpus& corpus) {
  ordered_json root = ordered_json::array();
  for (const Utterance& u : corpus.utterances) {
    ordered_json rec;
    rec["text"] = u.text;
    rec["intent"] = u.intent ? ordered_json(*u.intent) : ordered_json(nullptr);
    ordered_json entities = ordered_json::array();
    for (const SlotSpan& s : u.slots) {
      ordered_json ent;
      ent["start"] = u.tokens[s.start].char_start;
      ent["end"] = u.tokens[s.end - 1].char_end;
      ent["label"] = s.label;
      entities.push_back(std::move(ent));
    }
    rec["entities"] = std::move(entities);
    if (u.split != Split::kTrain) rec["split"] = SplitName(u.split);
    root.push_back(std::move(rec));
  }
  return root.dump(2) + "\n";
}

Utterance KeyphrasesToBio(const KeyphraseDocument& doc) {
  if (doc.text.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "keyphrase document '" + doc.id + "' has empty text");
  }
  Utterance u;
  u.id = doc.id;
  u.text = doc.text;
  u.tokens = Tokenize(doc.text);
  std::vector<std::string> folded;
  folded.reserve(u.tokens.size());
  for (const Token& t : u.tokens) folded.push_back(AsciiLower(t.text));

  struct Match {
    std::size_t start;
    std::size_t length;
    std::size_t phrase;
  };
  std::vector<std::string> phrases;
  std::set<std::string> seen_folded;
  std::vector<Match> matches;
  for (const std::string& phrase : doc.keyphrases) {
    if (!seen_folded.insert(AsciiLower(phrase)).second) continue;
    const std::size_t phrase_index = phrases.size();
    phrases.push_back(phrase);
    std::vector<std::string> needle;
    for (const Token& t : Tokenize(phrase)) needle.push_back(AsciiLower(t.text));
    if (needle.empty() || needle.size() > folded.size()) continue;
    for (std::size_t s = 0; s + needle.size() <= folded.size(); ++s) {
      if (std::equal(needle.begin(), needle.end(), folded.begin() + s)) {
        matches.push_back(Match{s, needle.size(), phrase_index});
      }
    }
  }
  std::stable_sort(matches.begin(), matches.end(),
                   [](const Match& a, const Match& b) {
                     if (a.length != b.length) return a.length > b.length;
                     return a.start < b.start;
                   });
  std::vector<bool> taken(u.tokens.size(), false);
  std::vector<bool> placed(phrases.size(), false);
  for (const Match& m : matches) {
    if (std::any_of(taken.begin() + m.start, taken.begin() + m.start + m.length,
                    [](bool b) { return b; })) {
      continue;
    }
    std::fill(taken.begin() + m.start, taken.begin() + m.start + m.length, true);
    u.slots.push_back(SlotSpan{m.start, m.start + m.length, std::string(kKeyphraseLabel)});
    placed[m.phrase] = true;
  }
  std::sort(u.slots.begin(), u.slots.end());

  json unmatched = json::array();
  for (std::size_t p = 0; p < phrases.size(); ++p) {
    if (!placed[p]) unmatched.push_back(phrases[p]);
  }
  if (!unmatched.empty()) u.meta["unmatched"] = unmatched.dump();
  return u;
}

ImportResult ImportKeyphraseJsonl(std::string_view bytes,
                                  const ImportOptions& options) {
  RequireUtf8(bytes);
  ConversionReport report;
  std::vector<Utterance> candidates;
  std::size_t n_in = 0;
  for (std::string_view line : SplitLines(bytes)) {
    if (Trim(line).empty()) continue;
    ++n_in;
    std::string id = "d" + std::to_string(n_in);
    try {
      const json rec = json::parse(line);
      if (auto it = rec.find("id"); it != rec.end() && it->is_string()) {
        id = it->get<std::string>();
      }
      KeyphraseDocument doc;
      doc.id = id;
      doc.text = rec.at("text").get<std::string>();
      for (const auto& kp : rec.at("keyphrases")) {
        const auto s = kp.get<std::string>();
        if (!s.empty()) doc.keyphrases.insert(s);
      }
      if (doc.text.empty()) {
        report.dropped.emplace_back(id, "empty text");
        continue;
      }
      Utterance u = KeyphrasesToBio(doc);
      if (auto it = rec.find("split"); it != rec.end()) {
        u.split = ParseSplit(it->get<std::string>());
      }
      candidates.push_back(std::move(u));
    } catch (const json::exception& e) {
      report.dropped.emplace_back(id, std::string("malformed record: ") + e.what());
    } catch (const Error& e) {
      report.dropped.emplace_back(id, e.what());
    }
  }
  ImportResult result =
      Finalize(std::move(candidates), n_in, std::move(report), options);
  result.corpus.slot_types.insert(std::string(kKeyphraseLabel));
  return result;
}

ImportResult ImportDataset(DatasetFormat format, std::string_view bytes,
                           const ImportOptions& options) {
  switch (format) {
    case DatasetFormat::kConll:
      return ImportConll(bytes, options);
    case DatasetFormat::kIntentJson:
      return ImportIntentJson(bytes, options);
    case DatasetFormat::kKeyphraseJsonl:
      return ImportKeyphraseJsonl(bytes, options);
    case DatasetFormat::kIr: {
      RequireUtf8(bytes);
      Corpus parsed = ReadIrJsonl(bytes);
      ConversionReport report;
      const std::size_t n_in = parsed.utterances.size();
      // Declared label sets survive even when some of their labels are unused.
      std::vector<Utterance> keep;
      for (auto& u : parsed.utterances) {
        auto issues = ValidateUtterance(u, parsed.intents, parsed.slot_types);
        if (HasErrors(issues)) {
          report.dropped.emplace_back(u.id, issues.front().code + ": " +
                                                issues.front().message);
        } else {
          keep.push_back(std::move(u));
        }
      }
      ImportResult result = Finalize(std::move(keep), n_in, std::move(report), options);
      result.corpus.intents.insert(parsed.intents.begin(), parsed.intents.end());
      result.corpus.slot_types.insert(parsed.slot_types.begin(),
                                      parsed.slot_types.end());
      return result;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unsupported format");
}

std::string ExportDataset(DatasetFormat format, const Corpus& corpus) {
  switch (format) {
    case DatasetFormat::kIr: return WriteIrJsonl(corpus);
    case DatasetFormat::kConll: return ExportConll(corpus);
    case DatasetFormat::kIntentJson: return ExportIntentJson(corpus);
    case DatasetFormat::kKeyphraseJsonl: break;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "export is not supported for format keyphrase_jsonl");
}

}  // namespace nluforge
