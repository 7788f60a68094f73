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

#include <gtest/gtest.h>

#include <random>

#include "nluforge/converters.h"
#include "nluforge/error.h"
#include "nluforge/evaluation.h"
#include "nluforge/job.h"
#include "nluforge/models.h"
#include "fixtures.h"
#include "oracles.h"

namespace nluforge {
namespace {

using Spans = std::vector<std::vector<SlotSpan>>;

Corpus Confusable() {
  return ImportConll(testing::ReadFixture("confusable.conll"), {"confusable", "confusable"}).corpus;
}

std::vector<Prediction> Predict(const JointModel& m, const Corpus& c) {
  std::vector<Prediction> out;
  for (const auto& u : c.utterances) {
    const auto p = PredictJoint(m, u.tokens);
    out.push_back({u.id, p.intent, p.tags});
  }
  return out;
}

TEST(IntentAccuracy, Examples) {
  std::vector<std::string> gold = {"a", "b", "c", "d"};
  std::vector<std::string> pred = {"a", "b", "c", "x"};
  EXPECT_DOUBLE_EQ(IntentAccuracy(gold, pred), 0.75);
  EXPECT_DOUBLE_EQ(IntentAccuracy(gold, gold), 1.0);
  std::vector<std::string> empty;
  EXPECT_THROW(IntentAccuracy(empty, empty), Error);
  EXPECT_THROW(IntentAccuracy(gold, std::vector<std::string>{"a"}), Error);
}

TEST(SlotPrf, Examples) {
  Spans gold = {{{0, 1, "A"}}};
  Spans pred = {{{0, 1, "A"}, {2, 3, "B"}}};
  const Prf p = SlotPrf(gold, pred);
  EXPECT_DOUBLE_EQ(p.precision, 0.5);
  EXPECT_DOUBLE_EQ(p.recall, 1.0);
  EXPECT_NEAR(p.f1, 2.0 / 3.0, 1e-12);

  const Prf same = SlotPrf(gold, gold);
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.recall, 1.0);
  EXPECT_EQ(same.f1, 1.0);

  Spans wrong = {{{0, 1, "B"}}};
  const Prf zero = SlotPrf(gold, wrong);
  EXPECT_EQ(zero.precision, 0.0);
  EXPECT_EQ(zero.recall, 0.0);
  EXPECT_EQ(zero.f1, 0.0);

  Spans none = {{}};
  const Prf both_empty = KeyphraseF1(none, none);
  EXPECT_EQ(both_empty.f1, 1.0);
  const Prf missed = SlotPrf(gold, none);
  EXPECT_EQ(missed.precision, 0.0);
  EXPECT_EQ(missed.recall, 0.0);
  EXPECT_THROW(SlotPrf(gold, Spans{}), Error);
}

TEST(SlotPrf, MatchesSetIntersectionOracleAndProperties) {
  std::mt19937_64 rng(99);
  const std::vector<std::string> types = {"A", "B", "C"};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n_utts = 1 + rng() % 5;
    Spans gold, pred;
    for (std::size_t u = 0; u < n_utts; ++u) {
      const std::size_t n = rng() % 7;
      gold.push_back(testing::RandomSpans(rng, n, types));
      pred.push_back(testing::RandomSpans(rng, n, types));
    }
    const Prf got = SlotPrf(gold, pred);
    const auto want = testing::SetIntersectionPrf(gold, pred);
    ASSERT_DOUBLE_EQ(got.precision, want.precision);
    ASSERT_DOUBLE_EQ(got.recall, want.recall);
    ASSERT_DOUBLE_EQ(got.f1, want.f1);
    const Prf swapped = SlotPrf(pred, gold);
    ASSERT_DOUBLE_EQ(swapped.precision, got.recall);
    ASSERT_DOUBLE_EQ(swapped.recall, got.precision);
    if (got.precision + got.recall > 0) {
      ASSERT_LE(std::min(got.precision, got.recall), got.f1 + 1e-15);
      ASSERT_LE(got.f1, std::max(got.precision, got.recall) + 1e-15);
    }
  }
  EXPECT_EQ(F1Score(0, 0), 0.0);
}

TEST(Confusion, PerfectPredictionsAreDiagonal) {
  const Corpus c = Confusable();
  std::vector<Prediction> perfect;
  for (const auto& u : c.utterances) perfect.push_back({u.id, u.intent, UtteranceTags(u)});
  for (auto level : {ConfusionLevel::kIntent, ConfusionLevel::kTokenLabel}) {
    const auto m = BuildConfusionMatrix(c, perfect, level);
    for (const auto& [cell, count] : m.cells) EXPECT_EQ(cell.first, cell.second);
    EXPECT_EQ(m.Trace(), m.Mass());
  }
  const auto report = Evaluate(c, perfect, "v");
  EXPECT_EQ(report.intent_accuracy, 1.0);
  EXPECT_EQ(report.slot_f1, 1.0);
}

TEST(Confusion, FigureCellOnConfusableFixture) {
  const Corpus c = Confusable();
  const JointModel m = TrainJoint(c, {});
  const auto preds = Predict(m, c);
  const auto matrix = BuildConfusionMatrix(c, preds, ConfusionLevel::kTokenLabel, Split::kTest);
  const LabelPair cell{"B-adjust_brightness", "B-adjust_color"};
  ASSERT_TRUE(matrix.cells.count(cell));
  const auto refs = DrillDown(matrix, cell.first, cell.second);
  EXPECT_EQ(refs.size(), matrix.cells.at(cell));
  bool found = false;
  for (const auto& r : refs) {
    const Utterance* u = c.Find(r.utterance_id);
    ASSERT_NE(u, nullptr);
    if (u->text == "lighten the vegetables") {
      found = true;
      EXPECT_EQ(r.token_index, 0u);
      EXPECT_EQ(r.rendered_text, "[[lighten]] the vegetables");
    }
  }
  EXPECT_TRUE(found);
}

TEST(Confusion, MassDrillDownAndTraceInvariants) {
  const Corpus c = Confusable();
  Hyperparams h;
  h.epochs = 2;
  const auto preds = Predict(TrainJoint(c, h), c);
  for (std::optional<Split> split : {std::optional<Split>{}, std::optional<Split>{Split::kTest}}) {
    const auto intent = BuildConfusionMatrix(c, preds, ConfusionLevel::kIntent, split);
    const auto tokens = BuildConfusionMatrix(c, preds, ConfusionLevel::kTokenLabel, split);
    std::size_t n_utts = 0, n_tokens = 0;
    std::map<std::string, std::size_t> per_gold;
    for (const auto& u : c.utterances) {
      if (split && u.split != *split) continue;
      ++n_utts;
      n_tokens += u.tokens.size();
      ++per_gold[*u.intent];
    }
    EXPECT_EQ(intent.Mass(), n_utts);
    EXPECT_EQ(tokens.Mass(), n_tokens);
    std::map<std::string, std::size_t> rows;
    for (const auto& [cell, count] : intent.cells) rows[cell.first] += count;
    EXPECT_EQ(rows, per_gold);
    for (const auto* m : {&intent, &tokens}) {
      for (const auto& [cell, count] : m->cells) {
        const auto refs = DrillDown(*m, cell.first, cell.second);
        ASSERT_EQ(refs.size(), count);
        for (const auto& r : refs) {
          const Utterance* u = c.Find(r.utterance_id);
          ASSERT_NE(u, nullptr);
          EXPECT_EQ(r.gold, cell.first);
          EXPECT_EQ(r.predicted, cell.second);
          if (r.token_index) EXPECT_EQ(UtteranceTags(*u)[*r.token_index].ToString(), cell.first);
        }
        EXPECT_TRUE(std::is_sorted(refs.begin(), refs.end(), [](const auto& a, const auto& b) {
          return std::tie(a.utterance_id, a.token_index) < std::tie(b.utterance_id, b.token_index);
        }));
      }
    }
    const auto report = Evaluate(c, preds, "v", split);
    ASSERT_TRUE(report.intent_accuracy.has_value());
    EXPECT_DOUBLE_EQ(*report.intent_accuracy,
                     static_cast<double>(intent.Trace()) / static_cast<double>(intent.Mass()));
  }
}

TEST(Confusion, DrillDownContract) {
  const Corpus c = Confusable();
  std::vector<Prediction> perfect;
  for (const auto& u : c.utterances) perfect.push_back({u.id, u.intent, UtteranceTags(u)});
  const auto m = BuildConfusionMatrix(c, perfect, ConfusionLevel::kIntent);
  EXPECT_TRUE(DrillDown(m, "adjust", "select").empty());
  EXPECT_THROW(DrillDown(m, "nope", "adjust"), Error);
  EXPECT_EQ(DrillDown(m, "adjust", "adjust").size(), m.cells.at({"adjust", "adjust"}));
}

TEST(Confusion, MissingOrMalformedPredictions) {
  const Corpus c = Confusable();
  std::vector<Prediction> preds;
  for (const auto& u : c.utterances) preds.push_back({u.id, u.intent, UtteranceTags(u)});
  auto missing = preds;
  missing.pop_back();
  EXPECT_THROW(BuildConfusionMatrix(c, missing, ConfusionLevel::kIntent), Error);
  auto unknown = preds;
  unknown[0].utterance_id = "ghost";
  EXPECT_THROW(BuildConfusionMatrix(c, unknown, ConfusionLevel::kIntent), Error);
  auto short_tags = preds;
  short_tags[0].tags.pop_back();
  EXPECT_THROW(BuildConfusionMatrix(c, short_tags, ConfusionLevel::kTokenLabel), Error);
}

TEST(Report, PerLabelSupportsSumToGoldSpansAndJsonRoundTrips) {
  const Corpus c = Confusable();
  const auto preds = Predict(TrainJoint(c, {}), c);
  const auto r = Evaluate(c, preds, "jm-x");
  std::size_t support = 0, gold_spans = 0;
  for (const auto& [label, s] : r.per_label) support += s.support;
  for (const auto& u : c.utterances) gold_spans += u.slots.size();
  EXPECT_EQ(support, gold_spans);
  EXPECT_DOUBLE_EQ(r.slot_f1, F1Score(r.slot_precision, r.slot_recall));
  EXPECT_EQ(ReportToJson(ReportFromJson(ReportToJson(r))), ReportToJson(r));
  EXPECT_EQ(ReportToJson(r)["slot_matching"], std::string(kSlotMatching));

  const auto matrix = BuildConfusionMatrix(c, preds, ConfusionLevel::kTokenLabel);
  const auto back = ConfusionFromStorageJson(ConfusionToStorageJson(matrix));
  EXPECT_EQ(back.cells, matrix.cells);
  EXPECT_EQ(back.instances, matrix.instances);
  EXPECT_EQ(ConfusionToJson(matrix)["mass"], matrix.Mass());
}

TEST(Report, KeyphraseReportsAreFlagged) {
  const Corpus kp = ImportKeyphraseJsonl(testing::ReadFixture("keyphrases.jsonl")).corpus;
  const auto preds = Predict(TrainJoint(kp, {}), kp);
  const auto r = Evaluate(kp, preds, "v", Split::kTest);
  EXPECT_TRUE(r.keyphrase);
  EXPECT_FALSE(r.intent_accuracy.has_value());
  std::vector<std::vector<BioLabel>> gold, pred;
  for (const auto& p : preds) {
    const Utterance* u = kp.Find(p.utterance_id);
    if (u->split != Split::kTest) continue;
    gold.push_back(UtteranceTags(*u));
    pred.push_back(p.tags);
  }
  EXPECT_NEAR(r.slot_f1, testing::HandCountedKeyphraseF1(gold, pred).f1, 1e-9);
}

}  // namespace
}  // namespace nluforge
