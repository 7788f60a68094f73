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

#ifndef NLUFORGE_FEATURES_H_
#define NLUFORGE_FEATURES_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nluforge/ir.h"

namespace nluforge {

struct Hyperparams {
  int epochs = 10;
  std::uint64_t seed = 0;
  int feature_window = 1;  // context tokens on each side
  bool use_prefix_suffix = true;

  bool operator==(const Hyperparams&) const = default;
};

// The "fast" preset: bag-of-words intent features, no context window.
Hyperparams FastPreset();

// Throws Error(kInvalidArgument) when epochs < 1 or feature_window < 0.
void ValidateHyperparams(const Hyperparams& hyper);

nlohmann::ordered_json HyperparamsToJson(const Hyperparams& hyper);
// Missing members keep their defaults.
Hyperparams HyperparamsFromJson(const nlohmann::json& object);

// Sparse features, sorted by identifier; zero values are never stored.
using FeatureVector = std::map<std::string, double>;

inline constexpr std::string_view kBeginSentinel = "<BOS>";
inline constexpr std::string_view kEndSentinel = "<EOS>";

// Token shape class: lower, upper, title, digit, punct, alnum or mixed.
std::string_view TokenShape(std::string_view token);

// Feature templates, each with value 1.0:
//   w0=<lowercased token>
//   w-k=, w+k=  for k in 1..feature_window (<BOS>/<EOS> past the edges)
//   shape0=<TokenShape>
//   pre1..pre3=, suf1..suf3=  when use_prefix_suffix (lowercased)
FeatureVector ExtractFeatures(std::span<const Token> tokens,
                              std::size_t position, const Hyperparams& hyper);

// Sum of ExtractFeatures over every position; the intent classifier input.
FeatureVector AggregateFeatures(std::span<const Token> tokens,
                                const Hyperparams& hyper);

}  // namespace nluforge

#endif  // NLUFORGE_FEATURES_H_
