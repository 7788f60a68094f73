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

#include "nluforge/features.h"

#include <algorithm>
#include <cctype>

#include "nluforge/error.h"

namespace nluforge {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void Add(FeatureVector& features, std::string key, double value) {
  if (value == 0.0) return;
  auto [it, inserted] = features.try_emplace(std::move(key), 0.0);
  it->second += value;
  if (it->second == 0.0) features.erase(it);
}

}  // namespace

Hyperparams FastPreset() {
  Hyperparams hyper;
  hyper.epochs = 5;
  hyper.feature_window = 0;
  hyper.use_prefix_suffix = false;
  return hyper;
}

void ValidateHyperparams(const Hyperparams& hyper) {
  if (hyper.epochs < 1) {
    throw Error(ErrorCode::kInvalidArgument, "epochs must be positive");
  }
  if (hyper.feature_window < 0) {
    throw Error(ErrorCode::kInvalidArgument, "feature_window must be >= 0");
  }
}

nlohmann::ordered_json HyperparamsToJson(const Hyperparams& hyper) {
  nlohmann::ordered_json out;
  out["epochs"] = hyper.epochs;
  out["seed"] = hyper.seed;
  out["feature_window"] = hyper.feature_window;
  out["use_prefix_suffix"] = hyper.use_prefix_suffix;
  return out;
}

Hyperparams HyperparamsFromJson(const nlohmann::json& object) {
  Hyperparams hyper;
  if (!object.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "hyper must be an object");
  }
  try {
    hyper.epochs = object.value("epochs", hyper.epochs);
    hyper.seed = object.value("seed", hyper.seed);
    hyper.feature_window = object.value("feature_window", hyper.feature_window);
    hyper.use_prefix_suffix =
        object.value("use_prefix_suffix", hyper.use_prefix_suffix);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("bad hyper: ") + e.what());
  }
  ValidateHyperparams(hyper);
  return hyper;
}

std::string_view TokenShape(std::string_view token) {
  bool any_upper = false;
  bool any_lower = false;
  bool any_digit = false;
  bool any_punct = false;
  bool any_other = false;
  for (char c : token) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x80) {
      any_other = true;
    } else if (std::isupper(u)) {
      any_upper = true;
    } else if (std::islower(u)) {
      any_lower = true;
    } else if (std::isdigit(u)) {
      any_digit = true;
    } else if (std::ispunct(u)) {
      any_punct = true;
    } else {
      any_other = true;
    }
  }
  const bool any_alpha = any_upper || any_lower;
  if (any_other || token.empty()) return "mixed";
  if (any_punct) return (any_alpha || any_digit) ? "mixed" : "punct";
  if (!any_alpha) return "digit";
  if (any_digit) return "alnum";
  if (!any_upper) return "lower";
  if (!any_lower) return "upper";
  const bool tail_lower = std::none_of(
      token.begin() + 1, token.end(),
      [](char c) { return std::isupper(static_cast<unsigned char>(c)); });
  if (std::isupper(static_cast<unsigned char>(token.front())) && tail_lower) {
    return "title";
  }
  return "mixed";
}

FeatureVector ExtractFeatures(std::span<const Token> tokens,
                              std::size_t position, const Hyperparams& hyper) {
  if (position >= tokens.size()) {
    throw Error(ErrorCode::kInvalidArgument, "feature position out of range");
  }
  FeatureVector features;
  const std::string word = Lower(tokens[position].text);
  Add(features, "w0=" + word, 1.0);
  for (int k = 1; k <= hyper.feature_window; ++k) {
    const auto offset = static_cast<std::size_t>(k);
    const std::string left = position >= offset
                                 ? Lower(tokens[position - offset].text)
                                 : std::string(kBeginSentinel);
    const std::string right = position + offset < tokens.size()
                                  ? Lower(tokens[position + offset].text)
                                  : std::string(kEndSentinel);
    Add(features, "w-" + std::to_string(k) + "=" + left, 1.0);
    Add(features, "w+" + std::to_string(k) + "=" + right, 1.0);
  }
  Add(features, "shape0=" + std::string(TokenShape(tokens[position].text)), 1.0);
  if (hyper.use_prefix_suffix) {
    for (std::size_t n = 1; n <= 3 && n <= word.size(); ++n) {
      Add(features, "pre" + std::to_string(n) + "=" + word.substr(0, n), 1.0);
      Add(features, "suf" + std::to_string(n) + "=" + word.substr(word.size() - n),
          1.0);
    }
  }
  return features;
}

FeatureVector AggregateFeatures(std::span<const Token> tokens,
                                const Hyperparams& hyper) {
  FeatureVector total;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& [key, value] : ExtractFeatures(tokens, i, hyper)) {
      Add(total, key, value);
    }
  }
  return total;
}

}  // namespace nluforge
