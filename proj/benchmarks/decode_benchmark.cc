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

#include <random>
#include <set>
#include <string>
#include <vector>

#include "nluforge/features.h"
#include "nluforge/ir.h"
#include "nluforge/models.h"

namespace nluforge {
namespace {

// Slot model with `types` slot types and random emission weights for the
// words of a small vocabulary.
SlotModel RandomModel(int types, std::mt19937_64& rng) {
  std::set<std::string> names;
  for (int t = 0; t < types; ++t) names.insert("t" + std::to_string(t));
  SlotModel model;
  model.labels = TagAlphabet(names);
  const std::size_t k = model.labels.size();
  std::normal_distribution<double> weight(0.0, 1.0);
  model.start.assign(k, 0.0);
  model.transition.assign(k, std::vector<double>(k, 0.0));
  for (auto& w : model.start) w = weight(rng);
  for (auto& row : model.transition) {
    for (auto& w : row) w = weight(rng);
  }
  for (int v = 0; v < 200; ++v) {
    auto& row = model.emission["w0=w" + std::to_string(v)];
    row.resize(k);
    for (auto& w : row) w = weight(rng);
  }
  return model;
}

std::vector<Token> RandomTokens(int n, std::mt19937_64& rng) {
  std::string text;
  for (int i = 0; i < n; ++i) text += (i ? " w" : "w") + std::to_string(rng() % 200);
  return Tokenize(text);
}

void BM_ViterbiDecode(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const SlotModel model = RandomModel(static_cast<int>(state.range(1)), rng);
  const auto tokens = RandomTokens(static_cast<int>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(ViterbiDecode(model, tokens));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ViterbiDecode)->ArgsProduct({{8, 32, 128}, {3, 10, 30}});

void BM_ExtractFeatures(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto tokens = RandomTokens(32, rng);
  Hyperparams hyper;
  hyper.feature_window = static_cast<int>(state.range(0));
  hyper.use_prefix_suffix = state.range(1) != 0;
  for (auto _ : state) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      benchmark::DoNotOptimize(ExtractFeatures(tokens, i, hyper));
    }
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tokens.size()));
}
BENCHMARK(BM_ExtractFeatures)->ArgsProduct({{0, 1, 2}, {0, 1}});

}  // namespace
}  // namespace nluforge
