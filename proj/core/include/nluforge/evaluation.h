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

#ifndef NLUFORGE_EVALUATION_H_
#define NLUFORGE_EVALUATION_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nluforge/ir.h"

namespace nluforge {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Fraction of exact matches. Throws Error(kInvalidArgument) on a length
// mismatch or empty input.
double IntentAccuracy(std::span<const std::string> gold,
                      std::span<const std::string> predicted);

// Micro-averaged exact (start, end, label) span matching. Conventions:
// nothing predicted and nothing gold => 1/1/1; an empty side otherwise gives
// 0 for the ratio whose denominator is empty.
Prf SlotPrf(std::span<const std::vector<SlotSpan>> gold,
            std::span<const std::vector<SlotSpan>> predicted);

// SlotPrf for single-label (KP) keyphrase tagging.
Prf KeyphraseF1(std::span<const std::vector<SlotSpan>> gold,
                std::span<const std::vector<SlotSpan>> predicted);

// Harmonic mean, 0 when both are 0.
double F1Score(double precision, double recall);

// A model output for one utterance of the evaluated corpus.
struct Prediction {
  std::string utterance_id;
  std::optional<std::string> intent;
  std::vector<BioLabel> tags;
};

struct LabelScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

inline constexpr std::string_view kSlotMatching = "exact_span_micro";

struct EvaluationReport {
  std::optional<double> intent_accuracy;
  double slot_precision = 0.0;
  double slot_recall = 0.0;
  double slot_f1 = 0.0;
  std::map<std::string, LabelScore> per_label;
  std::size_t n_utterances = 0;
  std::string model_version;
  std::string corpus_id;
  std::int64_t corpus_version = 0;
  std::string split;
  bool keyphrase = false;  // single KP slot type: slot metrics are keyphrase F1
};

enum class ConfusionLevel { kIntent, kTokenLabel };

std::string_view ConfusionLevelName(ConfusionLevel level);
ConfusionLevel ParseConfusionLevel(std::string_view name);

inline constexpr std::string_view kNoIntent = "<none>";

struct InstanceRef {
  std::string utterance_id;
  std::optional<std::size_t> token_index;  // absent at intent level
  std::string gold;
  std::string predicted;
  std::string rendered_text;  // token-level refs mark the token as [[token]]

  bool operator==(const InstanceRef&) const = default;
};

using LabelPair = std::pair<std::string, std::string>;  // (gold, predicted)

struct ConfusionMatrix {
  ConfusionLevel level = ConfusionLevel::kIntent;
  std::vector<std::string> labels;
  std::map<LabelPair, std::size_t> cells;
  std::map<LabelPair, std::vector<InstanceRef>> instances;

  std::size_t Mass() const;
  std::size_t Trace() const;
};

// Evaluated units are the utterances of `split` (every utterance when
// absent). Throws Error(kInvalidArgument) when one lacks a prediction, a
// prediction names an unknown utterance, or tag lengths disagree with tokens.
ConfusionMatrix BuildConfusionMatrix(const Corpus& corpus,
                                     std::span<const Prediction> predictions,
                                     ConfusionLevel level,
                                     std::optional<Split> split = std::nullopt);

// Instances behind one cell, ordered by (utterance id, token index). Known
// labels with no cell give an empty list; unknown labels throw
// Error(kNotFound).
std::vector<InstanceRef> DrillDown(const ConfusionMatrix& matrix,
                                   std::string_view gold,
                                   std::string_view predicted);

EvaluationReport Evaluate(const Corpus& corpus,
                          std::span<const Prediction> predictions,
                          std::string model_version,
                          std::optional<Split> split = std::nullopt);

nlohmann::ordered_json ReportToJson(const EvaluationReport& report);
EvaluationReport ReportFromJson(const nlohmann::json& object);

// Matrix payload without instances: {"level", "labels", "cells": [{gold,
// pred, count}], "mass"}.
nlohmann::ordered_json ConfusionToJson(const ConfusionMatrix& matrix);
nlohmann::ordered_json InstanceToJson(const InstanceRef& ref);
// Full round-trippable form including instance lists.
nlohmann::ordered_json ConfusionToStorageJson(const ConfusionMatrix& matrix);
ConfusionMatrix ConfusionFromStorageJson(const nlohmann::json& object);

nlohmann::ordered_json PredictionToJson(const Prediction& prediction);
Prediction PredictionFromJson(const nlohmann::json& object);

}  // namespace nluforge

#endif  // NLUFORGE_EVALUATION_H_
