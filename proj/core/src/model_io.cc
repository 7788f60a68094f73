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

#include "nluforge/model_io.h"

#include <algorithm>

#include "json.hpp"
#include "nluforge/error.h"

namespace nluforge {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json TableToJson(const WeightTable& table,
                         const std::vector<std::string>& columns) {
  ordered_json out = ordered_json::array();
  for (const auto& [feature, row] : table) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] == 0.0) continue;
      out.push_back(ordered_json::array({feature, columns[k], row[k]}));
    }
  }
  return out;
}

WeightTable TableFromJson(const json& triples,
                          const std::vector<std::string>& columns) {
  WeightTable table;
  for (const auto& triple : triples) {
    const auto feature = triple.at(0).get<std::string>();
    const auto column = triple.at(1).get<std::string>();
    auto it = std::find(columns.begin(), columns.end(), column);
    if (it == columns.end()) {
      throw Error(ErrorCode::kParse, "weight column '" + column + "' is unknown");
    }
    auto [row, inserted] =
        table.try_emplace(feature, std::vector<double>(columns.size(), 0.0));
    (*row).second[static_cast<std::size_t>(it - columns.begin())] =
        triple.at(2).get<double>();
  }
  return table;
}

std::vector<std::string> LabelNames(const std::vector<BioLabel>& labels) {
  std::vector<std::string> names;
  for (const auto& label : labels) names.push_back(label.ToString());
  return names;
}

ordered_json ProvenanceToJson(const ModelProvenance& p) {
  ordered_json out;
  out["corpus_id"] = p.corpus_id;
  out["corpus_version"] = p.corpus_version;
  return out;
}

}  // namespace

std::string SerializeModel(const JointModel& model) {
  ordered_json out;
  out["format"] = kModelFormat;
  out["format_version"] = kModelFormatVersion;
  out["model_version"] = model.model_version;
  out["trained_on"] = ProvenanceToJson(model.slots.trained_on);
  out["hyper"] = HyperparamsToJson(model.slots.hyper);

  if (model.intent) {
    ordered_json intent;
    intent["classes"] = model.intent->classes;
    intent["weights"] = TableToJson(model.intent->weights, model.intent->classes);
    out["intent"] = std::move(intent);
  } else {
    out["intent"] = nullptr;
  }

  const auto names = LabelNames(model.slots.labels);
  ordered_json slots;
  slots["labels"] = names;
  slots["start"] = ordered_json::array();
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (model.slots.start[k] != 0.0) {
      slots["start"].push_back(ordered_json::array({names[k], model.slots.start[k]}));
    }
  }
  slots["transition"] = ordered_json::array();
  for (std::size_t p = 0; p < names.size(); ++p) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      const double w = model.slots.transition[p][c];
      if (w != 0.0) slots["transition"].push_back(ordered_json::array({names[p], names[c], w}));
    }
  }
  slots["emission"] = TableToJson(model.slots.emission, names);
  out["slots"] = std::move(slots);
  return out.dump() + "\n";
}

JointModel DeserializeModel(std::string_view archive) {
  json in;
  try {
    in = json::parse(archive);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("model archive: ") + e.what());
  }
  try {
    if (in.at("format").get<std::string>() != kModelFormat ||
        in.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::kParse, "unsupported model archive format");
    }
    JointModel model;
    model.model_version = in.at("model_version").get<std::string>();
    const ModelProvenance trained_on{
        in.at("trained_on").at("corpus_id").get<std::string>(),
        in.at("trained_on").at("corpus_version").get<std::int64_t>()};
    const Hyperparams hyper = HyperparamsFromJson(in.at("hyper"));

    if (const auto& intent = in.at("intent"); !intent.is_null()) {
      IntentModel im;
      im.classes = intent.at("classes").get<std::vector<std::string>>();
      im.weights = TableFromJson(intent.at("weights"), im.classes);
      im.trained_on = trained_on;
      im.hyper = hyper;
      model.intent = std::move(im);
    }

    const auto& slots = in.at("slots");
    const auto names = slots.at("labels").get<std::vector<std::string>>();
    auto index_of = [&](const std::string& name) {
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) {
        throw Error(ErrorCode::kParse, "label '" + name + "' is unknown");
      }
      return static_cast<std::size_t>(it - names.begin());
    };
    SlotModel& sm = model.slots;
    for (const auto& name : names) sm.labels.push_back(BioLabel::Parse(name));
    sm.start.assign(names.size(), 0.0);
    sm.transition.assign(names.size(), std::vector<double>(names.size(), 0.0));
    for (const auto& pair : slots.at("start")) {
      sm.start[index_of(pair.at(0).get<std::string>())] = pair.at(1).get<double>();
    }
    for (const auto& triple : slots.at("transition")) {
      sm.transition[index_of(triple.at(0).get<std::string>())]
                   [index_of(triple.at(1).get<std::string>())] =
          triple.at(2).get<double>();
    }
    sm.emission = TableFromJson(slots.at("emission"), names);
    sm.trained_on = trained_on;
    sm.hyper = hyper;
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model archive: ") + e.what());
  }
}

}  // namespace nluforge
