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

#include "nluforge/grid_search.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <exception>
#include <mutex>
#include <thread>

#include "nluforge/error.h"
#include "nluforge/evaluation.h"

namespace nluforge {
namespace {

constexpr std::array<std::string_view, 4> kCanonicalParams = {
    "epochs", "seed", "feature_window", "use_prefix_suffix"};

std::string CanonicalName(std::string_view name) {
  if (name == "window") return "feature_window";
  if (name == "prefix_suffix") return "use_prefix_suffix";
  for (auto known : kCanonicalParams) {
    if (known == name) return std::string(name);
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown grid parameter '" + std::string(name) + "'");
}

void Apply(Hyperparams& hyper, std::string_view name, std::int64_t value) {
  if (name == "epochs") {
    hyper.epochs = static_cast<int>(value);
  } else if (name == "seed") {
    if (value < 0) throw Error(ErrorCode::kInvalidArgument, "seed must be >= 0");
    hyper.seed = static_cast<std::uint64_t>(value);
  } else if (name == "feature_window") {
    hyper.feature_window = static_cast<int>(value);
  } else {
    if (value != 0 && value != 1) {
      throw Error(ErrorCode::kInvalidArgument, "use_prefix_suffix takes 0 or 1");
    }
    hyper.use_prefix_suffix = value == 1;
  }
}

}  // namespace

std::string_view SelectionMetricName(SelectionMetric metric) {
  switch (metric) {
    case SelectionMetric::kIntentAccuracy: return "intent_accuracy";
    case SelectionMetric::kSlotF1: return "slot_f1";
    case SelectionMetric::kMean: return "mean";
  }
  return "mean";
}

SelectionMetric ParseSelectionMetric(std::string_view name) {
  if (name == "intent_accuracy") return SelectionMetric::kIntentAccuracy;
  if (name == "slot_f1") return SelectionMetric::kSlotF1;
  if (name == "mean") return SelectionMetric::kMean;
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(name) + "'");
}

void AddGridAxis(HyperGrid& grid, std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos || eq == 0 || eq + 1 == spec.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "grid axis must look like name=v1,v2: '" + std::string(spec) + "'");
  }
  const std::string name = CanonicalName(spec.substr(0, eq));
  std::vector<std::int64_t> values;
  std::string_view rest = spec.substr(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    std::int64_t value = 0;
    if (item == "true") {
      value = 1;
    } else if (item == "false") {
      value = 0;
    } else {
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "bad grid value '" + std::string(item) + "'");
      }
    }
    Hyperparams probe;
    Apply(probe, name, value);
    ValidateHyperparams(probe);
    values.push_back(value);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  grid[name] = std::move(values);
}

std::vector<Hyperparams> EnumerateGrid(const HyperGrid& grid,
                                       const Hyperparams& base) {
  std::vector<std::pair<std::string, std::vector<std::int64_t>>> axes;
  for (const auto& [name, values] : grid) {
    if (values.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "grid parameter '" + name + "' has no values");
    }
    CanonicalName(name);
  }
  for (auto param : kCanonicalParams) {
    for (const auto& [name, values] : grid) {
      if (CanonicalName(name) == param) axes.emplace_back(std::string(param), values);
    }
  }
  std::vector<Hyperparams> points;
  if (axes.empty()) return points;
  std::vector<std::size_t> cursor(axes.size(), 0);
  while (true) {
    Hyperparams hyper = base;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      Apply(hyper, axes[a].first, axes[a].second[cursor[a]]);
    }
    ValidateHyperparams(hyper);
    points.push_back(hyper);
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++cursor[a] < axes[a].second.size()) break;
      cursor[a] = 0;
      if (a == 0) return points;
    }
  }
}

double SelectionScore(const DevMetrics& metrics, SelectionMetric metric) {
  switch (metric) {
    case SelectionMetric::kIntentAccuracy:
      return metrics.intent_accuracy.value_or(metrics.slot_f1);
    case SelectionMetric::kSlotF1:
      return metrics.slot_f1;
    case SelectionMetric::kMean:
      if (metrics.intent_accuracy) return (*metrics.intent_accuracy + metrics.slot_f1) / 2.0;
      return metrics.slot_f1;
  }
  return metrics.slot_f1;
}

DevMetrics EvaluateOnSplit(const JointModel& model, const Corpus& corpus,
                           Split split) {
  std::vector<Prediction> predictions;
  for (const Utterance* u : corpus.InSplit(split)) {
    JointPrediction p = PredictJoint(model, u->tokens);
    predictions.push_back(Prediction{u->id, std::move(p.intent), std::move(p.tags)});
  }
  const EvaluationReport report = Evaluate(corpus, predictions, model.model_version, split);
  return DevMetrics{report.intent_accuracy, report.slot_f1};
}

GridSearchResult GridSearch(const Corpus& corpus, const HyperGrid& grid,
                            SelectionMetric metric, const Hyperparams& base,
                            unsigned parallelism) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty grid");
  if (corpus.InSplit(Split::kDev).empty()) {
    throw Error(ErrorCode::kFailedPrecondition,
                "grid search needs a non-empty dev split");
  }
  const auto points = EnumerateGrid(grid, base);

  GridSearchResult result;
  result.leaderboard.resize(points.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto run = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        const JointModel model = TrainJoint(corpus, points[i]);
        GridPoint& point = result.leaderboard[i];
        point.hyper = points[i];
        point.metrics = EvaluateOnSplit(model, corpus, Split::kDev);
        point.score = SelectionScore(point.metrics, metric);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (parallelism == 0) parallelism = std::max(1u, std::thread::hardware_concurrency());
  parallelism = std::min<unsigned>(parallelism, static_cast<unsigned>(points.size()));
  {
    std::vector<std::jthread> threads;
    for (unsigned t = 1; t < parallelism; ++t) threads.emplace_back(run);
    run();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 1; i < result.leaderboard.size(); ++i) {
    if (result.leaderboard[i].score > result.leaderboard[result.best_index].score) {
      result.best_index = i;
    }
  }
  result.best = result.leaderboard[result.best_index].hyper;
  return result;
}

nlohmann::ordered_json GridResultToJson(const GridSearchResult& result) {
  nlohmann::ordered_json out;
  out["best"] = HyperparamsToJson(result.best);
  out["best_index"] = result.best_index;
  nlohmann::ordered_json board = nlohmann::ordered_json::array();
  for (const GridPoint& point : result.leaderboard) {
    nlohmann::ordered_json entry;
    entry["hyper"] = HyperparamsToJson(point.hyper);
    entry["intent_accuracy"] = point.metrics.intent_accuracy
                                   ? nlohmann::ordered_json(*point.metrics.intent_accuracy)
                                   : nlohmann::ordered_json(nullptr);
    entry["slot_f1"] = point.metrics.slot_f1;
    entry["score"] = point.score;
    board.push_back(std::move(entry));
  }
  out["leaderboard"] = std::move(board);
  return out;
}

}  // namespace nluforge
