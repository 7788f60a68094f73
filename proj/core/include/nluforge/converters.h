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

#ifndef NLUFORGE_CONVERTERS_H_
#define NLUFORGE_CONVERTERS_H_

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nluforge/ir.h"

namespace nluforge {

struct ConversionReport {
  std::size_t utterances_in = 0;
  std::size_t utterances_out = 0;
  std::vector<std::pair<std::string, std::string>> dropped;  // (id, reason)
  std::vector<ValidationIssue> issues;
};

struct ImportResult {
  Corpus corpus;
  ConversionReport report;
};

struct ImportOptions {
  std::string corpus_id = "imported";
  std::string name = "imported";
};

// Formats understood by ImportDataset / ExportDataset.
enum class DatasetFormat { kIr, kConll, kIntentJson, kKeyphraseJsonl };

DatasetFormat ParseDatasetFormat(std::string_view name);
std::string_view DatasetFormatName(DatasetFormat format);

// Blank-line separated blocks of "token<TAB>tag" lines. Comment lines
// "# intent = NAME", "# split = NAME" and "# id = NAME" annotate the block
// that follows; other '#' lines are ignored. Malformed blocks are dropped and
// reported; invalid BIO is repaired with a warning. Throws Error(kParse) only
// when the input is not UTF-8.
ImportResult ImportConll(std::string_view bytes, const ImportOptions& options = {});
std::string ExportConll(const Corpus& corpus);

// JSON array of {"text", "intent", "entities": [{"start", "end", "label"}]}
// with character offsets. Optional "id" and "split" members are honored.
// Throws Error(kParse) when the input is not a JSON array.
ImportResult ImportIntentJson(std::string_view bytes,
                              const ImportOptions& options = {});
std::string ExportIntentJson(const Corpus& corpus);

inline constexpr std::string_view kKeyphraseLabel = "KP";

struct KeyphraseDocument {
  std::string id;
  std::string text;
  std::set<std::string> keyphrases;
};

// Case-insensitive token-sequence matching; longest match first, then
// leftmost. Keyphrases without a placed span are listed in meta["unmatched"]
// as a JSON array. Throws Error(kInvalidArgument) on empty text.
Utterance KeyphrasesToBio(const KeyphraseDocument& doc);

// One JSON object per line: {"id", "text", "keyphrases": [...], "split"?}.
ImportResult ImportKeyphraseJsonl(std::string_view bytes,
                                  const ImportOptions& options = {});

ImportResult ImportDataset(DatasetFormat format, std::string_view bytes,
                           const ImportOptions& options = {});
// kKeyphraseJsonl is import-only.
std::string ExportDataset(DatasetFormat format, const Corpus& corpus);

}  // namespace nluforge

#endif  // NLUFORGE_CONVERTERS_H_
