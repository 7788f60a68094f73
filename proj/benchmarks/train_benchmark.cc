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

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>
#include <string>

#include "nluforge/converters.h"
#include "nluforge/features.h"
#include "nluforge/ir.h"
#include "nluforge/models.h"

namespace nluforge {
namespace {

Corpus LoadConll(const std::string& name) {
  std::ifstream in(std::string(NLUFORGE_FIXTURE_DIR) + "/" + name, std::ios::binary);
  std::stringstream bytes;
  bytes << in.rdbuf();
  return ImportConll(bytes.str()).corpus;
}

// Arg 0 is the epoch count; arg 1 selects the fast preset.
Hyperparams BenchHyper(const benchmark::State& state) {
  Hyperparams hyper = state.range(1) != 0 ? FastPreset() : Hyperparams{};
  hyper.epochs = static_cast<int>(state.range(0));
  return hyper;
}

void BM_TrainJoint(benchmark::State& state) {
  const Corpus corpus = LoadConll("confusable.conll");
  const Hyperparams hyper = BenchHyper(state);
  for (auto _ : state) benchmark::DoNotOptimize(TrainJoint(corpus, hyper));
  state.SetItemsProcessed(state.iterations() * state.range(0) *
                          static_cast<std::int64_t>(corpus.utterances.size()));
}
BENCHMARK(BM_TrainJoint)->ArgsProduct({{1, 10}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_TrainIntent(benchmark::State& state) {
  const Corpus corpus = LoadConll("toy_separable.conll");
  const Hyperparams hyper = BenchHyper(state);
  for (auto _ : state) benchmark::DoNotOptimize(TrainIntent(corpus, hyper));
  state.SetItemsProcessed(state.iterations() * state.range(0) *
                          static_cast<std::int64_t>(corpus.utterances.size()));
}
BENCHMARK(BM_TrainIntent)->ArgsProduct({{1, 10}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_PredictJoint(benchmark::State& state) {
  const Corpus corpus = LoadConll("confusable.conll");
  const JointModel model = TrainJoint(corpus, Hyperparams{});
  for (auto _ : state) {
    for (const Utterance& u : corpus.utterances) benchmark::DoNotOptimize(PredictJoint(model, u.tokens));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.utterances.size()));
}
BENCHMARK(BM_PredictJoint);

}  // namespace
}  // namespace nluforge
