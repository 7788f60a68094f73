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

#ifndef NLUFORGE_MODEL_IO_H_
#define NLUFORGE_MODEL_IO_H_

#include <string>
#include <string_view>

#include "nluforge/models.h"

namespace nluforge {

inline constexpr std::string_view kModelFormat = "nluforge-model";
inline constexpr int kModelFormatVersion = 1;

// Single-document archive: a metadata header (model_version, trained_on,
// hyper, class and label orders) followed by every weight table as sorted
// (key, value) triples. Byte output is a pure function of the model.
std::string SerializeModel(const JointModel& model);

// Throws Error(kParse) on malformed or incompatible archives.
JointModel DeserializeModel(std::string_view archive);

}  // namespace nluforge

#endif  // NLUFORGE_MODEL_IO_H_
