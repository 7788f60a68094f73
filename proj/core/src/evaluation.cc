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

#include "nluforge/evaluation.h"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "nluforge/converters.h"
#include "nluforge/error.h"
#include "nluforge/models.h"

namespace nluforge {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct Counts {
  std::size_t tp = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

Prf FromCounts(const Counts& c) {
  Prf out;
  if (c.predicted > 0) {
    out.precision = static_cast<double>(c.tp) / static_cast<double>(c.predicted);
  } else {
    out.precision = c.gold == 0 ? 1.0 : 0.0;
  }
  if (c.gold > 0) {
    out.recall = static_cast<double>(c.tp) / static_cast<double>(c.gold);
  } else {
    out.recall = c.predicted == 0 ? 1.0 : 0.0;
  }
  out.f1 = F1Score(out.precision, out.recall);
  return out;
}

std::size_t CountMatches(std::vector<SlotSpan> gold, std::vector<SlotSpan> predicted) {
  std::sort(gold.begin(), gold.end());
  std::sort(predicted.begin(), predicted.end());
  std::vector<SlotSpan> common;
  std::set_intersection(gold.begin(), gold.end(), predicted.begin(), predicted.end(),
                        std::back_inserter(common));
  return common.size();
}

// (utterance, prediction) pairs for the evaluated units.
std::vector<std::pair<const Utterance*, const Prediction*>> Align(
    const Corpus& corpus, std::span<const Prediction> predictions,
    std::optional<Split> split) {
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const Prediction& p : predictions) {
    if (corpus.Find(p.utterance_id) == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "prediction for unknown utterance '" + p.utterance_id + "'");
    }
    by_id[p.utterance_id] = &p;
  }
  std::vector<std::pair<const Utterance*, const Prediction*>> out;
  for (const Utterance& u : corpus.utterances) {
    if (split && u.split != *split) continue;
    auto it = by_id.find(u.id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "missing prediction for utterance '" + u.id + "'");
    }
    if (it->second->tags.size() != u.tokens.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "prediction for '" + u.id + "' has " +
                      std::to_string(it->second->tags.size()) + " tags for " +
                      std::to_string(u.tokens.size()) + " tokens");
    }
    out.emplace_back(&u, it->second);
  }
  return out;
}

std::string MarkToken(const Utterance& u, std::size_t index) {
  const Token& t = u.tokens[index];
  return u.text.substr(0, t.char_start) + "[[" + t.text + "]]" +
         u.text.substr(t.char_end);
}

}  // namespace

double F1Score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double IntentAccuracy(std::span<const std::string> gold,
                      std::span<const std::string> predicted) {
  if (gold.size() != predicted.size()) {
    throw Error(ErrorCode::kInvalidArgument, "intent lists differ in length");
  }
  if (gold.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "intent accuracy of an empty list");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += gold[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

Prf SlotPrf(std::span<const std::vector<SlotSpan>> gold,
            std::span<const std::vector<SlotSpan>> predicted) {
  if (gold.size() != predicted.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "gold and predicted span lists are not aligned");
  }
  Counts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    c.gold += gold[i].size();
    c.predicted += predicted[i].size();
    c.tp += CountMatches(gold[i], predicted[i]);
  }
  return FromCounts(c);
}

Prf KeyphraseF1(std::span<const std::vector<SlotSpan>> gold,
                std::span<const std::vector<SlotSpan>> predicted) {
  return SlotPrf(gold, predicted);
}

std::string_view ConfusionLevelName(ConfusionLevel level) {
  return level == ConfusionLevel::kIntent ? "intent" : "token_label";
}

ConfusionLevel ParseConfusionLevel(std::string_view name) {
  if (name == "intent") return ConfusionLevel::kIntent;
  if (name == "token_label" || name == "token") return ConfusionLevel::kTokenLabel;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown confusion level '" + std::string(name) + "'");
}

std::size_t ConfusionMatrix::Mass() const {
  std::size_t total = 0;
  for (const auto& [pair, count] : cells) total += count;
  return total;
}

std::size_t ConfusionMatrix::Trace() const {
  std::size_t total = 0;
  for (const auto& [pair, count] : cells) {
    if (pair.first == pair.second) total += count;
  }
  return total;
}

ConfusionMatrix BuildConfusionMatrix(const Corpus& corpus,
                                     std::span<const Prediction> predictions,
                                     ConfusionLevel level,
                                     std::optional<Split> split) {
  const auto aligned = Align(corpus, predictions, split);
  ConfusionMatrix m;
  m.level = level;
  auto record = [&](std::string gold, std::string predicted, InstanceRef ref) {
    LabelPair key{std::move(gold), std::move(predicted)};
    ++m.cells[key];
    m.instances[key].push_back(std::move(ref));
  };

  if (level == ConfusionLevel::kIntent) {
    std::set<std::string> axis(corpus.intents.begin(), corpus.intents.end());
    for (const auto& [u, p] : aligned) {
      if (!u->intent) continue;
      const std::string predicted = p->intent.value_or(std::string(kNoIntent));
      axis.insert(*u->intent);
      axis.insert(predicted);
      record(*u->intent, predicted,
             InstanceRef{u->id, std::nullopt, *u->intent, predicted, u->text});
    }
    m.labels.assign(axis.begin(), axis.end());
  } else {
    std::set<std::string> types = corpus.slot_types;
    for (const auto& [u, p] : aligned) {
      const auto gold = UtteranceTags(*u);
      for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i].kind != BioKind::kO) types.insert(gold[i].slot_type);
        if (p->tags[i].kind != BioKind::kO) types.insert(p->tags[i].slot_type);
        const std::string g = gold[i].ToString();
        const std::string pr = p->tags[i].ToString();
        record(g, pr, InstanceRef{u->id, i, g, pr, MarkToken(*u, i)});
      }
    }
    for (const auto& label : TagAlphabet(types)) m.labels.push_back(label.ToString());
  }
  for (auto& [key, refs] : m.instances) {
    std::stable_sort(refs.begin(), refs.end(),
                     [](const InstanceRef& a, const InstanceRef& b) {
                       if (a.utterance_id != b.utterance_id) {
                         return a.utterance_id < b.utterance_id;
                       }
                       return a.token_index.value_or(0) < b.token_index.value_or(0);
                     });
  }
  return m;
}

std::vector<InstanceRef> DrillDown(const ConfusionMatrix& matrix,
                                   std::string_view gold,
                                   std::string_view predicted) {
  auto known = [&](std::string_view label) {
    return std::find(matrix.labels.begin(), matrix.labels.end(), label) !=
           matrix.labels.end();
  };
  if (!known(gold) || !known(predicted)) {
    throw Error(ErrorCode::kNotFound, "no label pair (" + std::string(gold) +
                                          ", " + std::string(predicted) +
                                          ") in this matrix");
  }
  auto it = matrix.instances.find(LabelPair{std::string(gold), std::string(predicted)});
  if (it == matrix.instances.end()) return {};
  return it->second;
}

EvaluationReport Evaluate(const Corpus& corpus,
                          std::span<const Prediction> predictions,
                          std::string model_version, std::optional<Split> split) {
  const auto aligned = Align(corpus, predictions, split);
  EvaluationReport report;
  report.model_version = std::move(model_version);
  report.corpus_id = corpus.id;
  report.corpus_version = corpus.version;
  report.split = split ? std::string(SplitName(*split)) : "all";
  report.n_utterances = aligned.size();
  report.keyphrase = corpus.slot_types.size() == 1 &&
                     *corpus.slot_types.begin() == std::string(kKeyphraseLabel);

  std::vector<std::string> gold_intents;
  std::vector<std::string> predicted_intents;
  std::vector<std::vector<SlotSpan>> gold_spans;
  std::vector<std::vector<SlotSpan>> predicted_spans;
  for (const auto& [u, p] : aligned) {
    if (u->intent) {
      gold_intents.push_back(*u->intent);
      predicted_intents.push_back(p->intent.value_or(std::string(kNoIntent)));
    }
    gold_spans.push_back(u->slots);
    predicted_spans.push_back(SpansFromBio(RepairBio(p->tags)));
  }
  if (!gold_intents.empty()) {
    report.intent_accuracy = IntentAccuracy(gold_intents, predicted_intents);
  }
  const Prf overall = SlotPrf(gold_spans, predicted_spans);
  report.slot_precision = overall.precision;
  report.slot_recall = overall.recall;
  report.slot_f1 = overall.f1;

  std::map<std::string, Counts> per_label;
  for (const auto& type : corpus.slot_types) per_label[type];
  for (std::size_t i = 0; i < gold_spans.size(); ++i) {
    for (const auto& s : gold_spans[i]) ++per_label[s.label].gold;
    for (const auto& s : predicted_spans[i]) ++per_label[s.label].predicted;
    std::vector<SlotSpan> g = gold_spans[i];
    std::vector<SlotSpan> pr = predicted_spans[i];
    std::sort(g.begin(), g.end());
    std::sort(pr.begin(), pr.end());
    std::vector<SlotSpan> common;
    std::set_intersection(g.begin(), g.end(), pr.begin(), pr.end(),
                          std::back_inserter(common));
    for (const auto& s : common) ++per_label[s.label].tp;
  }
  for (const auto& [label, counts] : per_label) {
    const Prf prf = FromCounts(counts);
    report.per_label[label] = LabelScore{prf.precision, prf.recall, prf.f1, counts.gold};
  }
  return report;
}

ordered_json ReportToJson(const EvaluationReport& r) {
  ordered_json out;
  out["intent_accuracy"] = r.intent_accuracy ? ordered_json(*r.intent_accuracy)
                                             : ordered_json(nullptr);
  out["slot_precision"] = r.slot_precision;
  out["slot_recall"] = r.slot_recall;
  out["slot_f1"] = r.slot_f1;
  ordered_json per_label = ordered_json::object();
  for (const auto& [label, s] : r.per_label) {
    ordered_json entry;
    entry["precision"] = s.precision;
    entry["recall"] = s.recall;
    entry["f1"] = s.f1;
    entry["support"] = s.support;
    per_label[label] = std::move(entry);
  }
  out["per_label"] = std::move(per_label);
  out["n_utterances"] = r.n_utterances;
  out["model_version"] = r.model_version;
  out["corpus_id"] = r.corpus_id;
  out["corpus_version"] = r.corpus_version;
  out["split"] = r.split;
  out["slot_matching"] = kSlotMatching;
  if (r.keyphrase) {
    ordered_json kp;
    kp["precision"] = r.slot_precision;
    kp["recall"] = r.slot_recall;
    kp["f1"] = r.slot_f1;
    kp["averaging"] = "micro";
    out["keyphrase_f1"] = std::move(kp);
  }
  return out;
}

EvaluationReport ReportFromJson(const json& in) {
  try {
    EvaluationReport r;
    if (!in.at("intent_accuracy").is_null()) {
      r.intent_accuracy = in.at("intent_accuracy").get<double>();
    }
    r.slot_precision = in.at("slot_precision").get<double>();
    r.slot_recall = in.at("slot_recall").get<double>();
    r.slot_f1 = in.at("slot_f1").get<double>();
    for (const auto& [label, s] : in.at("per_label").items()) {
      r.per_label[label] = LabelScore{s.at("precision").get<double>(),
                                      s.at("recall").get<double>(),
                                      s.at("f1").get<double>(),
                                      s.at("support").get<std::size_t>()};
    }
    r.n_utterances = in.at("n_utterances").get<std::size_t>();
    r.model_version = in.at("model_version").get<std::string>();
    r.corpus_id = in.at("corpus_id").get<std::string>();
    r.corpus_version = in.at("corpus_version").get<std::int64_t>();
    r.split = in.at("split").get<std::string>();
    r.keyphrase = in.contains("keyphrase_f1");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("evaluation report: ") + e.what());
  }
}

ordered_json InstanceToJson(const InstanceRef& ref) {
  ordered_json out;
  out["utterance_id"] = ref.utterance_id;
  out["token_index"] = ref.token_index ? ordered_json(*ref.token_index)
                                       : ordered_json(nullptr);
  out["gold"] = ref.gold;
  out["pred"] = ref.predicted;
  out["rendered_text"] = ref.rendered_text;
  return out;
}

ordered_json ConfusionToJson(const ConfusionMatrix& m) {
  ordered_json out;
  out["level"] = ConfusionLevelName(m.level);
  out["labels"] = m.labels;
  ordered_json cells = ordered_json::array();
  for (const auto& [pair, count] : m.cells) {
    ordered_json cell;
    cell["gold"] = pair.first;
    cell["pred"] = pair.second;
    cell["count"] = count;
    cells.push_back(std::move(cell));
  }
  out["cells"] = std::move(cells);
  out["mass"] = m.Mass();
  return out;
}

ordered_json ConfusionToStorageJson(const ConfusionMatrix& m) {
  ordered_json out = ConfusionToJson(m);
  ordered_json instances = ordered_json::array();
  for (const auto& [pair, refs] : m.instances) {
    for (const auto& ref : refs) instances.push_back(InstanceToJson(ref));
  }
  out["instances"] = std::move(instances);
  return out;
}

ConfusionMatrix ConfusionFromStorageJson(const json& in) {
  try {
    ConfusionMatrix m;
    m.level = ParseConfusionLevel(in.at("level").get<std::string>());
    m.labels = in.at("labels").get<std::vector<std::string>>();
    for (const auto& cell : in.at("cells")) {
      m.cells[{cell.at("gold").get<std::string>(), cell.at("pred").get<std::string>()}] =
          cell.at("count").get<std::size_t>();
    }
    for (const auto& item : in.at("instances")) {
      InstanceRef ref;
      ref.utterance_id = item.at("utterance_id").get<std::string>();
      if (!item.at("token_index").is_null()) {
        ref.token_index = item.at("token_index").get<std::size_t>();
      }
      ref.gold = item.at("gold").get<std::string>();
      ref.predicted = item.at("pred").get<std::string>();
      ref.rendered_text = item.at("rendered_text").get<std::string>();
      m.instances[{ref.gold, ref.predicted}].push_back(std::move(ref));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("confusion matrix: ") + e.what());
  }
}

ordered_json PredictionToJson(const Prediction& p) {
  ordered_json out;
  out["utterance_id"] = p.utterance_id;
  out["intent"] = p.intent ? ordered_json(*p.intent) : ordered_json(nullptr);
  ordered_json tags = ordered_json::array();
  for (const auto& t : p.tags) tags.push_back(t.ToString());
  out["tags"] = std::move(tags);
  return out;
}

Prediction PredictionFromJson(const json& in) {
  try {
    Prediction p;
    p.utterance_id = in.at("utterance_id").get<std::string>();
    if (!in.at("intent").is_null()) p.intent = in.at("intent").get<std::string>();
    for (const auto& t : in.at("tags")) p.tags.push_back(BioLabel::Parse(t.get<std::string>()));
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("prediction: ") + e.what());
  }
}

}  // namespace nluforge
