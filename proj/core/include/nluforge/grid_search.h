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

#ifndef NLUFORGE_GRID_SEARCH_H_
#define NLUFORGE_GRID_SEARCH_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nluforge/features.h"
#include "nluforge/ir.h"
#include "nluforge/models.h"

namespace nluforge {

enum class SelectionMetric { kIntentAccuracy, kSlotF1, kMean };

std::string_view SelectionMetricName(SelectionMetric metric);
SelectionMetric ParseSelectionMetric(std::string_view name);

// Parameter name -> candidate values. Names: epochs, seed, feature_window
// (alias window), use_prefix_suffix (alias prefix_suffix; values 0/1).
using HyperGrid = std::map<std::string, std::vector<std::int64_t>>;

// Parses "name=v1,v2,..." into `grid`. Throws Error(kInvalidArgument).
void AddGridAxis(HyperGrid& grid, std::string_view spec);

// Cartesian product in canonical parameter order (epochs, seed,
// feature_window, use_prefix_suffix); the first parameter varies slowest.
// Parameters absent from the grid keep their value from `base`.
std::vector<Hyperparams> EnumerateGrid(const HyperGrid& grid,
                                       const Hyperparams& base = {});

struct DevMetrics {
  std::optional<double> intent_accuracy;
  double slot_f1 = 0.0;
};

// Metric used for model selection. kIntentAccuracy falls back to slot F1 on
// corpora without intents; kMean averages whichever metrics exist.
double SelectionScore(const DevMetrics& metrics, SelectionMetric metric);

// Decodes every utterance of `split` with `model` and scores it.
DevMetrics EvaluateOnSplit(const JointModel& model, const Corpus& corpus,
                           Split split);

struct GridPoint {
  Hyperparams hyper;
  DevMetrics metrics;
  double score = 0.0;
};

struct GridSearchResult {
  Hyperparams best;
  std::size_t best_index = 0;
  std::vector<GridPoint> leaderboard;  // enumeration order
};

// Throws Error(kFailedPrecondition) on an empty dev split and
// Error(kInvalidArgument) on an empty grid. Points train concurrently on up to
// `parallelism` threads; the result does not depend on it.
GridSearchResult GridSearch(const Corpus& corpus, const HyperGrid& grid,
                            SelectionMetric metric, const Hyperparams& base = {},
                            unsigned parallelism = 0);

nlohmann::ordered_json GridResultToJson(const GridSearchResult& result);

}  // namespace nluforge

#endif  // NLUFORGE_GRID_SEARCH_H_
