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

#ifndef NLUFORGE_IR_H_
#define NLUFORGE_IR_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nluforge {

// A token of the source text. Offsets are UTF-8 byte offsets, end-exclusive.
struct Token {
  std::string text;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  bool operator==(const Token&) const = default;
};

// A labeled run of tokens [start, end). `label` carries no B-/I- prefix.
struct SlotSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  bool operator==(const SlotSpan&) const = default;
  auto operator<=>(const SlotSpan&) const = default;
};

enum class BioKind { kO, kB, kI };

struct BioLabel {
  BioKind kind = BioKind::kO;
  std::string slot_type;  // empty iff kind == kO

  static BioLabel Outside() { return {}; }
  static BioLabel Begin(std::string type) { return {BioKind::kB, std::move(type)}; }
  static BioLabel Inside(std::string type) { return {BioKind::kI, std::move(type)}; }

  // "O", "B-type" or "I-type".
  std::string ToString() const;
  // Inverse of ToString. Throws Error(kParse) on anything else.
  static BioLabel Parse(std::string_view tag);

  bool operator==(const BioLabel&) const = default;
};

enum class Split { kTrain, kDev, kTest };

std::string_view SplitName(Split split);
// Throws Error(kParse) for unknown names.
Split ParseSplit(std::string_view name);

struct Utterance {
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  std::optional<std::string> intent;
  std::vector<SlotSpan> slots;
  Split split = Split::kTrain;
  std::map<std::string, std::string> meta;

  bool operator==(const Utterance&) const = default;
};

struct Corpus {
  std::string id;
  std::string name;
  std::int64_t version = 1;
  std::set<std::string> intents;
  std::set<std::string> slot_types;
  std::vector<Utterance> utterances;

  // Returns nullptr when absent.
  const Utterance* Find(std::string_view utterance_id) const;
  std::vector<const Utterance*> InSplit(Split split) const;

  bool operator==(const Corpus&) const = default;
};

enum class Severity { kError, kWarning };

// Issue codes. The full enumeration:
//   orphan_inside, type_mismatch_inside      BIO continuity
//   span_empty, span_out_of_range,
//   span_unsorted, span_overlap              slot span invariants
//   token_empty, token_offsets, token_order  token tiling
//   unknown_intent, unknown_slot_type,
//   missing_intent, duplicate_id, empty_id   label sets and identity
//   empty_split, label_set_mismatch          corpus-level warnings
//   bio_repaired, entity_misaligned,
//   entity_overlap, record_dropped           converter warnings
namespace issue {
inline constexpr std::string_view kOrphanInside = "orphan_inside";
inline constexpr std::string_view kTypeMismatchInside = "type_mismatch_inside";
inline constexpr std::string_view kSpanEmpty = "span_empty";
inline constexpr std::string_view kSpanOutOfRange = "span_out_of_range";
inline constexpr std::string_view kSpanUnsorted = "span_unsorted";
inline constexpr std::string_view kSpanOverlap = "span_overlap";
inline constexpr std::string_view kTokenEmpty = "token_empty";
inline constexpr std::string_view kTokenOffsets = "token_offsets";
inline constexpr std::string_view kTokenOrder = "token_order";
inline constexpr std::string_view kUnknownIntent = "unknown_intent";
inline constexpr std::string_view kUnknownSlotType = "unknown_slot_type";
inline constexpr std::string_view kMissingIntent = "missing_intent";
inline constexpr std::string_view kDuplicateId = "duplicate_id";
inline constexpr std::string_view kEmptyId = "empty_id";
inline constexpr std::string_view kEmptySplit = "empty_split";
inline constexpr std::string_view kLabelSetMismatch = "label_set_mismatch";
inline constexpr std::string_view kBioRepaired = "bio_repaired";
inline constexpr std::string_view kEntityMisaligned = "entity_misaligned";
inline constexpr std::string_view kEntityOverlap = "entity_overlap";
inline constexpr std::string_view kRecordDropped = "record_dropped";
}  // namespace issue

struct ValidationIssue {
  std::optional<std::string> utterance_id;  // absent for corpus-level issues
  Severity severity = Severity::kError;
  std::string code;
  std::string message;
  std::optional<std::size_t> position;  // token position, when relevant

  bool operator==(const ValidationIssue&) const = default;
};

bool HasErrors(std::span<const ValidationIssue> issues);

// Whitespace split, then leading and trailing ASCII punctuation characters
// are split off one character per token. No case folding.
std::vector<Token> Tokenize(std::string_view text);

std::vector<ValidationIssue> ValidateBio(std::span<const BioLabel> labels);

// Every orphan or type-mismatched I-x becomes B-x; all else is kept.
std::vector<BioLabel> RepairBio(std::span<const BioLabel> labels);

// Requires valid BIO (throws Error(kValidation) otherwise).
std::vector<SlotSpan> SpansFromBio(std::span<const BioLabel> labels);

// Throws Error(kValidation) on empty, unsorted, overlapping or out-of-range
// spans.
std::vector<BioLabel> BioFromSpans(std::size_t n_tokens,
                                   std::span<const SlotSpan> spans);

// Span/token/label checks for one utterance against a corpus label set.
std::vector<ValidationIssue> ValidateUtterance(
    const Utterance& utterance, const std::set<std::string>& intents,
    const std::set<std::string>& slot_types);

std::vector<ValidationIssue> ValidateCorpus(const Corpus& corpus);

// Fields left empty are not touched. Setting `text` re-tokenizes the
// utterance; callers that change the text normally also supply `slots`.
struct UtterancePatch {
  std::optional<std::string> text;
  std::optional<std::optional<std::string>> intent;
  std::optional<std::vector<SlotSpan>> slots;
  std::optional<Split> split;
  std::optional<std::map<std::string, std::string>> meta;

  bool empty() const {
    return !text && !intent && !slots && !split && !meta;
  }
};

// Optimistic-concurrency edit. Returns a new snapshot at version + 1, or
// throws Error(kConflict) on a stale expected_version, Error(kNotFound) for an
// unknown utterance and Error(kValidation) when the result would not validate.
// The input corpus is never modified.
Corpus EditUtterance(const Corpus& corpus, std::string_view utterance_id,
                     const UtterancePatch& patch,
                     std::int64_t expected_version);

// Appends a datapoint under the same concurrency and validation rules.
Corpus AddUtterance(const Corpus& corpus, Utterance utterance,
                    std::int64_t expected_version);

// Tag sequence of an utterance, derived from its spans.
std::vector<BioLabel> UtteranceTags(const Utterance& utterance);

}  // namespace nluforge

#endif  // NLUFORGE_IR_H_
