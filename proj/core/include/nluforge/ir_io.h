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

#ifndef NLUFORGE_IR_IO_H_
#define NLUFORGE_IR_IO_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nluforge/ir.h"

namespace nluforge {

inline constexpr int kIrFormatVersion = 1;

// JSON Lines: a manifest line followed by one line per utterance, keys in the
// fixed documented order, LF endings, one trailing LF.
std::string WriteIrJsonl(const Corpus& corpus);

// The file does not carry the corpus version; the caller supplies it (the
// artifact store version counter). Throws Error(kParse) on malformed input.
Corpus ReadIrJsonl(std::string_view data, std::int64_t version = 1);

nlohmann::ordered_json UtteranceToJson(const Utterance& utterance);
Utterance UtteranceFromJson(const nlohmann::json& object);

}  // namespace nluforge

#endif  // NLUFORGE_IR_IO_H_
