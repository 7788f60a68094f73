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

#ifndef NLUFORGE_MODELS_H_
#define NLUFORGE_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "nluforge/features.h"
#include "nluforge/ir.h"

namespace nluforge {

// Weight rows keyed by feature identifier; row[k] is the weight of that
// feature for class (or label) k.
using WeightTable = std::map<std::string, std::vector<double>>;

struct ModelProvenance {
  std::string corpus_id;
  std::int64_t corpus_version = 0;

  bool operator==(const ModelProvenance&) const = default;
};

// Multiclass averaged perceptron over aggregated utterance features.
struct IntentModel {
  std::vector<std::string> classes;
  WeightTable weights;
  ModelProvenance trained_on;
  Hyperparams hyper;

  bool operator==(const IntentModel&) const = default;
};

struct IntentPrediction {
  std::string intent;
  std::map<std::string, double> scores;
};

// Requires a non-empty train split in which every utterance has an intent.
IntentModel TrainIntent(const Corpus& corpus, const Hyperparams& hyper);

// Argmax over class scores; ties go to the earliest class in model.classes.
IntentPrediction PredictIntent(const IntentModel& model,
                               std::span<const Token> tokens);

// Linear-chain model decoded with Viterbi under a hard BIO mask.
struct SlotModel {
  std::vector<BioLabel> labels;
  WeightTable emission;
  std::vector<std::vector<double>> transition;  // [previous][current]
  std::vector<double> start;
  ModelProvenance trained_on;
  Hyperparams hyper;

  bool operator==(const SlotModel&) const = default;
};

// {O} then B-t, I-t for each slot type in lexicographic order.
std::vector<BioLabel> TagAlphabet(const std::set<std::string>& slot_types);

bool StartAllowed(const BioLabel& label);
bool TransitionAllowed(const BioLabel& previous, const BioLabel& current);

// emissions[i][k]: score of label k at position i under the model.
std::vector<std::vector<double>> EmissionScores(const SlotModel& model,
                                                std::span<const Token> tokens);

struct DecodeResult {
  std::vector<BioLabel> labels;
  double score = 0.0;
};

// score(y) = start(y1) + sum_i emission(yi, i) + sum_i transition(y{i-1}, yi),
// maximized over BIO-valid sequences. Ties are broken toward the lowest label
// index, first at the final position and then at each backpointer.
DecodeResult ViterbiDecodeScored(const SlotModel& model,
                                 std::span<const Token> tokens);
std::vector<BioLabel> ViterbiDecode(const SlotModel& model,
                                    std::span<const Token> tokens);

// Same lattice, precomputed emissions. Exposed for training and tests.
DecodeResult DecodeLattice(std::span<const BioLabel> labels,
                           const std::vector<std::vector<double>>& emissions,
                           std::span<const double> start,
                           const std::vector<std::vector<double>>& transition);

// score(y) for a given sequence, accumulated in decoder order.
double SequenceScore(const SlotModel& model, std::span<const Token> tokens,
                     std::span<const BioLabel> labels);

// Averaged structured perceptron. Requires a non-empty train split.
SlotModel TrainSlots(const Corpus& corpus, const Hyperparams& hyper);

struct JointModel {
  std::optional<IntentModel> intent;  // absent for corpora without intents
  SlotModel slots;
  std::string model_version;

  bool operator==(const JointModel&) const = default;
};

struct JointPrediction {
  std::optional<std::string> intent;
  std::vector<BioLabel> tags;
};

JointModel TrainJoint(const Corpus& corpus, const Hyperparams& hyper);
JointPrediction PredictJoint(const JointModel& model,
                             std::span<const Token> tokens);

// Deterministic identifier of (corpus snapshot, hyperparameters).
std::string ComputeModelVersion(const ModelProvenance& trained_on,
                                const Hyperparams& hyper);

}  // namespace nluforge

#endif  // NLUFORGE_MODELS_H_
