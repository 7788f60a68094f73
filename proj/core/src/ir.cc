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

#include "nluforge/ir.h"

#include <algorithm>
#include <unordered_set>

#include "nluforge/error.h"

namespace nluforge {
namespace {

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsAsciiPunct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x21 && u <= 0x2f) || (u >= 0x3a && u <= 0x40) ||
         (u >= 0x5b && u <= 0x60) || (u >= 0x7b && u <= 0x7e);
}

ValidationIssue MakeIssue(const std::optional<std::string>& utterance_id,
                          Severity severity, std::string_view code,
                          std::string message,
                          std::optional<std::size_t> position = std::nullopt) {
  return ValidationIssue{utterance_id, severity, std::string(code),
                         std::move(message), position};
}

std::string JoinIssues(std::span<const ValidationIssue> issues) {
  std::string out;
  for (const auto& issue : issues) {
    if (issue.severity != Severity::kError) continue;
    if (!out.empty()) out += "; ";
    if (issue.utterance_id) out += *issue.utterance_id + ": ";
    out += issue.code + " (" + issue.message + ")";
  }
  return out;
}

}  // namespace

std::string BioLabel::ToString() const {
  switch (kind) {
    case BioKind::kO: return "O";
    case BioKind::kB: return "B-" + slot_type;
    case BioKind::kI: return "I-" + slot_type;
  }
  return "O";
}

BioLabel BioLabel::Parse(std::string_view tag) {
  if (tag == "O") return Outside();
  if (tag.size() > 2 && tag[1] == '-' && (tag[0] == 'B' || tag[0] == 'I')) {
    std::string type(tag.substr(2));
    return tag[0] == 'B' ? Begin(std::move(type)) : Inside(std::move(type));
  }
  throw Error(ErrorCode::kParse, "malformed BIO tag '" + std::string(tag) + "'");
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kParse, "unknown split '" + std::string(name) + "'");
}

const Utterance* Corpus::Find(std::string_view utterance_id) const {
  for (const auto& u : utterances) {
    if (u.id == utterance_id) return &u;
  }
  return nullptr;
}

std::vector<const Utterance*> Corpus::InSplit(Split split) const {
  std::vector<const Utterance*> out;
  for (const auto& u : utterances) {
    if (u.split == split) out.push_back(&u);
  }
  return out;
}

bool HasErrors(std::span<const ValidationIssue> issues) {
  return std::any_of(issues.begin(), issues.end(), [](const auto& issue) {
    return issue.severity == Severity::kError;
  });
}

std::vector<Token> Tokenize(std::string_view text) {
  std::vector<Token> tokens;
  auto emit = [&](std::size_t begin, std::size_t end) {
    tokens.push_back(
        Token{std::string(text.substr(begin, end - begin)), begin, end});
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (IsAsciiSpace(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && !IsAsciiSpace(text[end])) ++end;

    std::size_t core_begin = i;
    while (core_begin < end && IsAsciiPunct(text[core_begin])) ++core_begin;
    std::size_t core_end = end;
    while (core_end > core_begin && IsAsciiPunct(text[core_end - 1])) {
      --core_end;
    }
    for (std::size_t p = i; p < core_begin; ++p) emit(p, p + 1);
    if (core_begin < core_end) emit(core_begin, core_end);
    for (std::size_t p = core_end; p < end; ++p) emit(p, p + 1);
    i = end;
  }
  return tokens;
}

std::vector<ValidationIssue> ValidateBio(std::span<const BioLabel> labels) {
  std::vector<ValidationIssue> issues;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const BioLabel& label = labels[p];
    if (label.kind != BioKind::kI) continue;
    if (p == 0 || labels[p - 1].kind == BioKind::kO) {
      issues.push_back(MakeIssue(std::nullopt, Severity::kError,
                                 issue::kOrphanInside,
                                 label.ToString() + " does not continue a span",
                                 p));
    } else if (labels[p - 1].slot_type != label.slot_type) {
      issues.push_back(MakeIssue(
          std::nullopt, Severity::kError, issue::kTypeMismatchInside,
          label.ToString() + " follows " + labels[p - 1].ToString(), p));
    }
  }
  return issues;
}

std::vector<BioLabel> RepairBio(std::span<const BioLabel> labels) {
  std::vector<BioLabel> out(labels.begin(), labels.end());
  for (std::size_t p = 0; p < out.size(); ++p) {
    if (out[p].kind != BioKind::kI) continue;
    const bool continues = p > 0 && out[p - 1].kind != BioKind::kO &&
                           out[p - 1].slot_type == out[p].slot_type;
    if (!continues) out[p].kind = BioKind::kB;
  }
  return out;
}

std::vector<SlotSpan> SpansFromBio(std::span<const BioLabel> labels) {
  if (auto issues = ValidateBio(labels); !issues.empty()) {
    throw Error(ErrorCode::kValidation,
                "invalid BIO sequence: " + issues.front().code + " at " +
                    std::to_string(*issues.front().position));
  }
  std::vector<SlotSpan> spans;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    switch (labels[p].kind) {
      case BioKind::kB:
        spans.push_back(SlotSpan{p, p + 1, labels[p].slot_type});
        break;
      case BioKind::kI:
        spans.back().end = p + 1;
        break;
      case BioKind::kO:
        break;
    }
  }
  return spans;
}

std::vector<BioLabel> BioFromSpans(std::size_t n_tokens,
                                   std::span<const SlotSpan> spans) {
  std::vector<BioLabel> labels(n_tokens);
  std::size_t prev_end = 0;
  for (const SlotSpan& span : spans) {
    if (span.start >= span.end) {
      throw Error(ErrorCode::kValidation, "empty slot span");
    }
    if (span.end > n_tokens) {
      throw Error(ErrorCode::kValidation,
                  "slot span [" + std::to_string(span.start) + "," +
                      std::to_string(span.end) + ") exceeds " +
                      std::to_string(n_tokens) + " tokens");
    }
    if (span.start < prev_end) {
      throw Error(ErrorCode::kValidation, "slot spans overlap or are unsorted");
    }
    labels[span.start] = BioLabel::Begin(span.label);
    for (std::size_t p = span.start + 1; p < span.end; ++p) {
      labels[p] = BioLabel::Inside(span.label);
    }
    prev_end = span.end;
  }
  return labels;
}

std::vector<ValidationIssue> ValidateUtterance(
    const Utterance& u, const std::set<std::string>& intents,
    const std::set<std::string>& slot_types) {
  std::vector<ValidationIssue> issues;
  const std::optional<std::string> uid = u.id;
  if (u.id.empty()) {
    issues.push_back(MakeIssue(uid, Severity::kError, issue::kEmptyId,
                               "utterance id is empty"));
  }

  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < u.tokens.size(); ++i) {
    const Token& t = u.tokens[i];
    if (t.text.empty()) {
      issues.push_back(MakeIssue(uid, Severity::kError, issue::kTokenEmpty,
                                 "empty token", i));
      continue;
    }
    if (t.char_start >= t.char_end || t.char_end > u.text.size() ||
        u.text.compare(t.char_start, t.char_end - t.char_start, t.text) != 0) {
      issues.push_back(MakeIssue(uid, Severity::kError, issue::kTokenOffsets,
                                 "token '" + t.text +
                                     "' does not match its text offsets",
                                 i));
      continue;
    }
    if (t.char_start < prev_end) {
      issues.push_back(MakeIssue(uid, Severity::kError, issue::kTokenOrder,
                                 "token overlaps its predecessor", i));
    }
    prev_end = t.char_end;
  }

  std::size_t prev_span_start = 0;
  std::size_t prev_span_end = 0;
  for (std::size_t s = 0; s < u.slots.size(); ++s) {
    const SlotSpan& span = u.slots[s];
    if (span.start >= span.end) {
      issues.push_back(MakeIssue(uid, Severity::kError, issue::kSpanEmpty,
                                 "empty span", span.start));
    } else if (span.end > u.tokens.size()) {
      issues.push_back(MakeIssue(uid, Severity::kError, issue::kSpanOutOfRange,
                                 "span end " + std::to_string(span.end) +
                                     " exceeds token count",
                                 span.start));
    }
    if (s > 0) {
      if (span.start < prev_span_start) {
        issues.push_back(MakeIssue(uid, Severity::kError, issue::kSpanUnsorted,
                                   "spans not sorted by start", span.start));
      } else if (span.start < prev_span_end) {
        issues.push_back(MakeIssue(uid, Severity::kError, issue::kSpanOverlap,
                                   "span overlaps its predecessor",
                                   span.start));
      }
    }
    if (!slot_types.contains(span.label)) {
      issues.push_back(MakeIssue(uid, Severity::kError,
                                 issue::kUnknownSlotType,
                                 "slot type '" + span.label + "' not declared",
                                 span.start));
    }
    prev_span_start = span.start;
    prev_span_end = std::max(prev_span_end, span.end);
  }

  if (u.intent) {
    if (!intents.contains(*u.intent)) {
      issues.push_back(MakeIssue(uid, Severity::kError, issue::kUnknownIntent,
                                 "intent '" + *u.intent + "' not declared"));
    }
  } else if (!intents.empty()) {
    issues.push_back(MakeIssue(uid, Severity::kError, issue::kMissingIntent,
                               "corpus declares intents but utterance has none"));
  }
  return issues;
}

std::vector<ValidationIssue> ValidateCorpus(const Corpus& corpus) {
  std::vector<ValidationIssue> issues;
  std::unordered_set<std::string> seen;
  std::set<std::string> used_intents;
  std::set<std::string> used_types;
  bool has_train = false;
  for (const Utterance& u : corpus.utterances) {
    if (!seen.insert(u.id).second) {
      issues.push_back(MakeIssue(u.id, Severity::kError, issue::kDuplicateId,
                                 "utterance id '" + u.id + "' is not unique"));
    }
    auto own = ValidateUtterance(u, corpus.intents, corpus.slot_types);
    issues.insert(issues.end(), own.begin(), own.end());
    if (u.intent) used_intents.insert(*u.intent);
    for (const auto& span : u.slots) used_types.insert(span.label);
    has_train = has_train || u.split == Split::kTrain;
  }
  if (!has_train) {
    issues.push_back(MakeIssue(std::nullopt, Severity::kWarning,
                               issue::kEmptySplit, "train split is empty"));
  }
  for (const auto& intent : corpus.intents) {
    if (!used_intents.contains(intent)) {
      issues.push_back(MakeIssue(std::nullopt, Severity::kWarning,
                                 issue::kLabelSetMismatch,
                                 "declared intent '" + intent + "' is unused"));
    }
  }
  for (const auto& type : corpus.slot_types) {
    if (!used_types.contains(type)) {
      issues.push_back(MakeIssue(std::nullopt, Severity::kWarning,
                                 issue::kLabelSetMismatch,
                                 "declared slot type '" + type + "' is unused"));
    }
  }
  return issues;
}

Corpus EditUtterance(const Corpus& corpus, std::string_view utterance_id,
                     const UtterancePatch& patch,
                     std::int64_t expected_version) {
  if (expected_version != corpus.version) {
    throw Error(ErrorCode::kConflict,
                "corpus '" + corpus.id + "' is at version " +
                    std::to_string(corpus.version) + ", expected " +
                    std::to_string(expected_version));
  }
  Corpus next = corpus;
  auto it = std::find_if(
      next.utterances.begin(), next.utterances.end(),
      [&](const Utterance& u) { return u.id == utterance_id; });
  if (it == next.utterances.end()) {
    throw Error(ErrorCode::kNotFound,
                "utterance '" + std::string(utterance_id) + "' not found");
  }
  if (patch.text) {
    it->text = *patch.text;
    it->tokens = Tokenize(it->text);
  }
  if (patch.intent) it->intent = *patch.intent;
  if (patch.slots) it->slots = *patch.slots;
  if (patch.split) it->split = *patch.split;
  if (patch.meta) it->meta = *patch.meta;

  auto issues = ValidateCorpus(next);
  if (HasErrors(issues)) {
    throw Error(ErrorCode::kValidation, JoinIssues(issues));
  }
  next.version = corpus.version + 1;
  return next;
}

Corpus AddUtterance(const Corpus& corpus, Utterance utterance,
                    std::int64_t expected_version) {
  if (expected_version != corpus.version) {
    throw Error(ErrorCode::kConflict,
                "corpus '" + corpus.id + "' is at version " +
                    std::to_string(corpus.version) + ", expected " +
                    std::to_string(expected_version));
  }
  if (utterance.tokens.empty() && !utterance.text.empty()) {
    utterance.tokens = Tokenize(utterance.text);
  }
  Corpus next = corpus;
  next.utterances.push_back(std::move(utterance));
  auto issues = ValidateCorpus(next);
  if (HasErrors(issues)) {
    throw Error(ErrorCode::kValidation, JoinIssues(issues));
  }
  next.version = corpus.version + 1;
  return next;
}

std::vector<BioLabel> UtteranceTags(const Utterance& utterance) {
  return BioFromSpans(utterance.tokens.size(), utterance.slots);
}

}  // namespace nluforge
