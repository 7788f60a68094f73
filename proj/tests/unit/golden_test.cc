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

// Frozen outputs. Regenerate with NLUFORGE_UPDATE_GOLDEN=1 only after an
// intentional format or training change, and review the diff.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fixtures.h"
#include "nluforge/converters.h"
#include "nluforge/evaluation.h"
#include "nluforge/job.h"
#include "nluforge/models.h"

namespace nluforge {
namespace {

using testing::ReadFixture;

void ExpectGolden(const std::string& name, const std::string& actual) {
  const std::filesystem::path path = std::filesystem::path(NLUFORGE_GOLDEN_DIR) / name;
  if (std::getenv("NLUFORGE_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  ASSERT_TRUE(std::filesystem::exists(path)) << "missing golden file " << path;
  EXPECT_EQ(actual, testing::ReadFile(path)) << "golden mismatch for " << name;
}

Corpus Import(DatasetFormat format, const std::string& fixture) {
  return ImportDataset(format, ReadFixture(fixture), ImportOptions{fixture, fixture}).corpus;
}

TEST(GoldenTest, ToyCorpusAsIr) {
  ExpectGolden("toy_separable.ir.jsonl",
               ExportDataset(DatasetFormat::kIr, Import(DatasetFormat::kConll, "toy_separable.conll")));
}

TEST(GoldenTest, IntentJsonAsConll) {
  ExpectGolden("five_intents.conll",
               ExportConll(Import(DatasetFormat::kIntentJson, "five_intents.json")));
}

TEST(GoldenTest, KeyphrasesAsConll) {
  ExpectGolden("keyphrases.conll",
               ExportConll(Import(DatasetFormat::kKeyphraseJsonl, "keyphrases.jsonl")));
}

TEST(GoldenTest, ToyModelPredictions) {
  const Corpus corpus = Import(DatasetFormat::kConll, "toy_separable.conll");
  Hyperparams hyper;
  hyper.epochs = 10;
  const JointModel model = TrainJoint(corpus, hyper);
  std::ostringstream out;
  out << model.model_version << "\n";
  for (const auto& u : corpus.utterances) {
    const JointPrediction p = PredictJoint(model, u.tokens);
    out << u.id << "\t" << p.intent.value_or("-");
    for (const auto& label : p.tags) out << "\t" << label.ToString();
    out << "\n";
  }
  ExpectGolden("toy_predictions.tsv", out.str());
}

TEST(GoldenTest, ConfusableReport) {
  const Corpus corpus = Import(DatasetFormat::kConll, "confusable.conll");
  Hyperparams hyper;
  hyper.epochs = 10;
  const ReportDocument doc = EvaluateModel(TrainJoint(corpus, hyper), corpus, Split::kTest);
  nlohmann::ordered_json out;
  out["report"] = ReportToJson(doc.report);
  out["token_label"] = ConfusionToJson(doc.token_label);
  out["intent"] = ConfusionToJson(doc.intent);
  ExpectGolden("confusable_report.json", out.dump(2) + "\n");
}

}  // namespace
}  // namespace nluforge
