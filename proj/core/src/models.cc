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

#include "nluforge/models.h"

#include <algorithm>
#include <limits>
#include <random>
#include <unordered_map>

#include "nluforge/error.h"
#include "nluforge/hash.h"

namespace nluforge {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using SparseRow = std::vector<std::pair<std::size_t, double>>;

class FeatureIndex {
 public:
  SparseRow Intern(const FeatureVector& features) {
    SparseRow row;
    row.reserve(features.size());
    for (const auto& [name, value] : features) {
      auto [it, inserted] = ids_.try_emplace(name, names_.size());
      if (inserted) names_.push_back(name);
      row.emplace_back(it->second, value);
    }
    return row;
  }
  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t id) const { return names_[id]; }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> names_;
};

// Perceptron weights with the running-sum trick for averaging: the averaged
// vector is w - u / c, where every update at step c adds c * delta to u.
class AveragedWeights {
 public:
  explicit AveragedWeights(std::size_t n) : w_(n, 0.0), u_(n, 0.0) {}

  void Update(std::size_t i, double delta, double step) {
    w_[i] += delta;
    u_[i] += step * delta;
  }
  double operator[](std::size_t i) const { return w_[i]; }
  double Averaged(std::size_t i, double step) const { return w_[i] - u_[i] / step; }

 private:
  std::vector<double> w_;
  std::vector<double> u_;
};

// Fisher-Yates driven directly by mt19937_64 output so that orderings do not
// depend on the standard library's distribution implementation.
void SeededShuffle(std::vector<std::size_t>& order, std::mt19937_64& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
}

std::vector<const Utterance*> RequireTrainSplit(const Corpus& corpus) {
  auto train = corpus.InSplit(Split::kTrain);
  if (train.empty()) {
    throw Error(ErrorCode::kFailedPrecondition,
                "corpus '" + corpus.id + "' has an empty train split");
  }
  return train;
}

std::size_t ArgmaxFirst(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return best;
}

}  // namespace

IntentModel TrainIntent(const Corpus& corpus, const Hyperparams& hyper) {
  ValidateHyperparams(hyper);
  const auto train = RequireTrainSplit(corpus);

  std::set<std::string> class_set = corpus.intents;
  for (const Utterance* u : train) {
    if (!u->intent) {
      throw Error(ErrorCode::kFailedPrecondition,
                  "train utterance '" + u->id + "' has no intent");
    }
    class_set.insert(*u->intent);
  }
  IntentModel model;
  model.classes.assign(class_set.begin(), class_set.end());
  model.trained_on = {corpus.id, corpus.version};
  model.hyper = hyper;
  const std::size_t n_classes = model.classes.size();

  FeatureIndex index;
  std::vector<SparseRow> rows;
  std::vector<std::size_t> gold;
  for (const Utterance* u : train) {
    rows.push_back(index.Intern(AggregateFeatures(u->tokens, hyper)));
    gold.push_back(static_cast<std::size_t>(
        std::lower_bound(model.classes.begin(), model.classes.end(), *u->intent) -
        model.classes.begin()));
  }

  AveragedWeights weights(index.size() * n_classes);
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(hyper.seed);
  double step = 1.0;
  std::vector<double> scores(n_classes);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    SeededShuffle(order, rng);
    for (std::size_t idx : order) {
      std::fill(scores.begin(), scores.end(), 0.0);
      for (const auto& [f, v] : rows[idx]) {
        for (std::size_t k = 0; k < n_classes; ++k) {
          scores[k] += v * weights[f * n_classes + k];
        }
      }
      const std::size_t predicted = ArgmaxFirst(scores);
      if (predicted != gold[idx]) {
        for (const auto& [f, v] : rows[idx]) {
          weights.Update(f * n_classes + gold[idx], v, step);
          weights.Update(f * n_classes + predicted, -v, step);
        }
      }
      step += 1.0;
    }
  }

  for (std::size_t f = 0; f < index.size(); ++f) {
    std::vector<double> row(n_classes);
    bool nonzero = false;
    for (std::size_t k = 0; k < n_classes; ++k) {
      row[k] = weights.Averaged(f * n_classes + k, step);
      nonzero = nonzero || row[k] != 0.0;
    }
    if (nonzero) model.weights.emplace(index.name(f), std::move(row));
  }
  return model;
}

IntentPrediction PredictIntent(const IntentModel& model,
                               std::span<const Token> tokens) {
  if (model.classes.empty()) {
    throw Error(ErrorCode::kFailedPrecondition, "intent model has no classes");
  }
  std::vector<double> scores(model.classes.size(), 0.0);
  for (const auto& [name, value] : AggregateFeatures(tokens, model.hyper)) {
    auto it = model.weights.find(name);
    if (it == model.weights.end()) continue;
    for (std::size_t k = 0; k < scores.size(); ++k) scores[k] += value * it->second[k];
  }
  IntentPrediction out;
  out.intent = model.classes[ArgmaxFirst(scores)];
  for (std::size_t k = 0; k < scores.size(); ++k) {
    out.scores[model.classes[k]] = scores[k];
  }
  return out;
}

std::vector<BioLabel> TagAlphabet(const std::set<std::string>& slot_types) {
  std::vector<BioLabel> labels{BioLabel::Outside()};
  for (const auto& type : slot_types) {
    labels.push_back(BioLabel::Begin(type));
    labels.push_back(BioLabel::Inside(type));
  }
  return labels;
}

bool StartAllowed(const BioLabel& label) { return label.kind != BioKind::kI; }

bool TransitionAllowed(const BioLabel& previous, const BioLabel& current) {
  if (current.kind != BioKind::kI) return true;
  return previous.kind != BioKind::kO && previous.slot_type == current.slot_type;
}

std::vector<std::vector<double>> EmissionScores(const SlotModel& model,
                                                std::span<const Token> tokens) {
  const std::size_t n_labels = model.labels.size();
  std::vector<std::vector<double>> emissions(tokens.size(),
                                             std::vector<double>(n_labels, 0.0));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& [name, value] : ExtractFeatures(tokens, i, model.hyper)) {
      auto it = model.emission.find(name);
      if (it == model.emission.end()) continue;
      for (std::size_t k = 0; k < n_labels; ++k) {
        emissions[i][k] += value * it->second[k];
      }
    }
  }
  return emissions;
}

DecodeResult DecodeLattice(std::span<const BioLabel> labels,
                           const std::vector<std::vector<double>>& emissions,
                           std::span<const double> start,
                           const std::vector<std::vector<double>>& transition) {
  DecodeResult result;
  const std::size_t n = emissions.size();
  const std::size_t n_labels = labels.size();
  if (n == 0) return result;
  if (n_labels == 0) {
    throw Error(ErrorCode::kFailedPrecondition, "empty tag alphabet");
  }

  std::vector<std::vector<char>> allowed(n_labels, std::vector<char>(n_labels));
  for (std::size_t p = 0; p < n_labels; ++p) {
    for (std::size_t c = 0; c < n_labels; ++c) {
      allowed[p][c] = TransitionAllowed(labels[p], labels[c]);
    }
  }

  std::vector<double> delta(n_labels, kNegInf);
  std::vector<double> next(n_labels);
  std::vector<std::vector<std::size_t>> backpointer(
      n, std::vector<std::size_t>(n_labels, 0));
  for (std::size_t k = 0; k < n_labels; ++k) {
    if (StartAllowed(labels[k])) delta[k] = start[k] + emissions[0][k];
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t c = 0; c < n_labels; ++c) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t p = 0; p < n_labels; ++p) {
        if (!allowed[p][c] || delta[p] == kNegInf) continue;
        const double candidate = delta[p] + transition[p][c];
        if (best == kNegInf || candidate > best) {
          best = candidate;
          arg = p;
        }
      }
      next[c] = best == kNegInf ? kNegInf : best + emissions[i][c];
      backpointer[i][c] = arg;
    }
    delta.swap(next);
  }

  std::size_t last = 0;
  for (std::size_t k = 1; k < n_labels; ++k) {
    if (delta[k] > delta[last]) last = k;
  }
  result.score = delta[last];
  std::vector<std::size_t> path(n);
  path[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) path[i - 1] = backpointer[i][path[i]];
  result.labels.reserve(n);
  for (std::size_t k : path) result.labels.push_back(labels[k]);
  return result;
}

DecodeResult ViterbiDecodeScored(const SlotModel& model,
                                 std::span<const Token> tokens) {
  return DecodeLattice(model.labels, EmissionScores(model, tokens), model.start,
                       model.transition);
}

std::vector<BioLabel> ViterbiDecode(const SlotModel& model,
                                    std::span<const Token> tokens) {
  return ViterbiDecodeScored(model, tokens).labels;
}

double SequenceScore(const SlotModel& model, std::span<const Token> tokens,
                     std::span<const BioLabel> labels) {
  if (labels.size() != tokens.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label/token length mismatch");
  }
  if (labels.empty()) return 0.0;
  auto index_of = [&](const BioLabel& label) {
    auto it = std::find(model.labels.begin(), model.labels.end(), label);
    if (it == model.labels.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label " + label.ToString() + " is not in the tag alphabet");
    }
    return static_cast<std::size_t>(it - model.labels.begin());
  };
  const auto emissions = EmissionScores(model, tokens);
  std::size_t prev = index_of(labels[0]);
  double score = model.start[prev] + emissions[0][prev];
  for (std::size_t i = 1; i < labels.size(); ++i) {
    const std::size_t cur = index_of(labels[i]);
    score = score + model.transition[prev][cur];
    score = score + emissions[i][cur];
    prev = cur;
  }
  return score;
}

SlotModel TrainSlots(const Corpus& corpus, const Hyperparams& hyper) {
  ValidateHyperparams(hyper);
  const auto train = RequireTrainSplit(corpus);

  std::set<std::string> types = corpus.slot_types;
  for (const Utterance* u : train) {
    for (const auto& span : u->slots) types.insert(span.label);
  }
  SlotModel model;
  model.labels = TagAlphabet(types);
  model.trained_on = {corpus.id, corpus.version};
  model.hyper = hyper;
  const std::size_t n_labels = model.labels.size();
  auto label_index = [&](const BioLabel& label) {
    return static_cast<std::size_t>(
        std::find(model.labels.begin(), model.labels.end(), label) -
        model.labels.begin());
  };

  FeatureIndex index;
  std::vector<std::vector<SparseRow>> features;  // [utterance][position]
  std::vector<std::vector<std::size_t>> gold;
  for (const Utterance* u : train) {
    std::vector<SparseRow> positions;
    for (std::size_t i = 0; i < u->tokens.size(); ++i) {
      positions.push_back(index.Intern(ExtractFeatures(u->tokens, i, hyper)));
    }
    features.push_back(std::move(positions));
    std::vector<std::size_t> tags;
    for (const BioLabel& label : UtteranceTags(*u)) tags.push_back(label_index(label));
    gold.push_back(std::move(tags));
  }

  AveragedWeights emission(index.size() * n_labels);
  AveragedWeights transition(n_labels * n_labels);
  AveragedWeights start(n_labels);

  std::vector<std::size_t> order(features.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(hyper.seed);
  double step = 1.0;

  std::vector<double> start_now(n_labels);
  std::vector<std::vector<double>> transition_now(n_labels,
                                                  std::vector<double>(n_labels));
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    SeededShuffle(order, rng);
    for (std::size_t idx : order) {
      const auto& positions = features[idx];
      const auto& gold_tags = gold[idx];
      if (positions.empty()) {
        step += 1.0;
        continue;
      }
      for (std::size_t k = 0; k < n_labels; ++k) {
        start_now[k] = start[k];
        for (std::size_t c = 0; c < n_labels; ++c) {
          transition_now[k][c] = transition[k * n_labels + c];
        }
      }
      std::vector<std::vector<double>> emissions(positions.size(),
                                                 std::vector<double>(n_labels, 0.0));
      for (std::size_t i = 0; i < positions.size(); ++i) {
        for (const auto& [f, v] : positions[i]) {
          for (std::size_t k = 0; k < n_labels; ++k) {
            emissions[i][k] += v * emission[f * n_labels + k];
          }
        }
      }
      const DecodeResult decoded =
          DecodeLattice(model.labels, emissions, start_now, transition_now);
      std::vector<std::size_t> predicted;
      for (const BioLabel& label : decoded.labels) predicted.push_back(label_index(label));

      if (predicted != gold_tags) {
        for (std::size_t i = 0; i < positions.size(); ++i) {
          if (predicted[i] == gold_tags[i]) continue;
          for (const auto& [f, v] : positions[i]) {
            emission.Update(f * n_labels + gold_tags[i], v, step);
            emission.Update(f * n_labels + predicted[i], -v, step);
          }
        }
        if (predicted[0] != gold_tags[0]) {
          start.Update(gold_tags[0], 1.0, step);
          start.Update(predicted[0], -1.0, step);
        }
        for (std::size_t i = 1; i < positions.size(); ++i) {
          const std::size_t g = gold_tags[i - 1] * n_labels + gold_tags[i];
          const std::size_t p = predicted[i - 1] * n_labels + predicted[i];
          if (g == p) continue;
          transition.Update(g, 1.0, step);
          transition.Update(p, -1.0, step);
        }
      }
      step += 1.0;
    }
  }

  for (std::size_t f = 0; f < index.size(); ++f) {
    std::vector<double> row(n_labels);
    bool nonzero = false;
    for (std::size_t k = 0; k < n_labels; ++k) {
      row[k] = emission.Averaged(f * n_labels + k, step);
      nonzero = nonzero || row[k] != 0.0;
    }
    if (nonzero) model.emission.emplace(index.name(f), std::move(row));
  }
  model.start.resize(n_labels);
  model.transition.assign(n_labels, std::vector<double>(n_labels));
  for (std::size_t k = 0; k < n_labels; ++k) {
    model.start[k] = start.Averaged(k, step);
    for (std::size_t c = 0; c < n_labels; ++c) {
      model.transition[k][c] = transition.Averaged(k * n_labels + c, step);
    }
  }
  return model;
}

std::string ComputeModelVersion(const ModelProvenance& trained_on,
                                const Hyperparams& hyper) {
  const std::string material = trained_on.corpus_id + "\n" +
                               std::to_string(trained_on.corpus_version) + "\n" +
                               HyperparamsToJson(hyper).dump();
  return "jm-" + Sha256Hex(material).substr(0, 16);
}

JointModel TrainJoint(const Corpus& corpus, const Hyperparams& hyper) {
  JointModel model;
  if (!corpus.intents.empty()) model.intent = TrainIntent(corpus, hyper);
  model.slots = TrainSlots(corpus, hyper);
  model.model_version = ComputeModelVersion({corpus.id, corpus.version}, hyper);
  return model;
}

JointPrediction PredictJoint(const JointModel& model,
                             std::span<const Token> tokens) {
  JointPrediction out;
  if (model.intent) out.intent = PredictIntent(*model.intent, tokens).intent;
  out.tags = ViterbiDecode(model.slots, tokens);
  return out;
}

}  // namespace nluforge
