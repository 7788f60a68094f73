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

#include "oracles.h"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <stdexcept>

namespace nluforge::testing {

bool OracleBioValid(const std::vector<BioLabel>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].kind != BioKind::kI) continue;
    if (i == 0) return false;
    const BioLabel& prev = labels[i - 1];
    if (prev.kind == BioKind::kO || prev.slot_type != labels[i].slot_type) return false;
  }
  return true;
}

OracleDecode BruteForceDecode(const SlotModel& model, const std::vector<Token>& tokens) {
  const std::size_t n = tokens.size();
  if (n > kMaxBruteForceTokens) throw std::invalid_argument("sequence too long for brute force");
  const std::size_t k = model.labels.size();
  const auto emissions = EmissionScores(model, tokens);
  OracleDecode best;
  bool have = false;
  std::vector<std::size_t> seq(n);
  std::vector<BioLabel> labels(n);

  std::function<void(std::size_t)> walk = [&](std::size_t pos) {
    if (pos == n) {
      if (!OracleBioValid(labels)) return;
      ++best.valid_sequences;
      double score = model.start[seq[0]] + emissions[0][seq[0]];
      for (std::size_t i = 1; i < n; ++i) {
        score += model.transition[seq[i - 1]][seq[i]] + emissions[i][seq[i]];
      }
      bool better = !have || score > best.score;
      if (have && score == best.score) {
        better = std::lexicographical_compare(seq.rbegin(), seq.rend(), best.indices.rbegin(),
                                              best.indices.rend());
      }
      if (better) {
        have = true;
        best.score = score;
        best.indices = seq;
      }
      return;
    }
    for (std::size_t y = 0; y < k; ++y) {
      seq[pos] = y;
      labels[pos] = model.labels[y];
      // Prune prefixes that are already invalid.
      if (labels[pos].kind == BioKind::kI) {
        if (pos == 0) continue;
        if (labels[pos - 1].kind == BioKind::kO ||
            labels[pos - 1].slot_type != labels[pos].slot_type) {
          continue;
        }
      }
      walk(pos + 1);
    }
  };
  if (n > 0) walk(0);
  return best;
}

std::size_t CountValidSequences(const std::vector<BioLabel>& labels, std::size_t n) {
  std::size_t count = 0;
  std::vector<BioLabel> seq(n);
  std::function<void(std::size_t)> walk = [&](std::size_t pos) {
    if (pos == n) {
      if (OracleBioValid(seq)) ++count;
      return;
    }
    for (const auto& l : labels) {
      seq[pos] = l;
      walk(pos + 1);
    }
  };
  walk(0);
  return count;
}

namespace {

OraclePrf FromCounts(std::size_t tp, std::size_t n_pred, std::size_t n_gold) {
  OraclePrf out;
  if (n_pred == 0 && n_gold == 0) return {1.0, 1.0, 1.0};
  out.precision = n_pred == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_pred);
  out.recall = n_gold == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_gold);
  out.f1 = out.precision + out.recall == 0.0
               ? 0.0
               : 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

}  // namespace

OraclePrf SetIntersectionPrf(const std::vector<std::vector<SlotSpan>>& gold,
                             const std::vector<std::vector<SlotSpan>>& pred) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::string>;
  std::set<Key> g, p;
  for (std::size_t u = 0; u < gold.size(); ++u) {
    for (const auto& s : gold[u]) g.insert({u, s.start, s.end, s.label});
  }
  for (std::size_t u = 0; u < pred.size(); ++u) {
    for (const auto& s : pred[u]) p.insert({u, s.start, s.end, s.label});
  }
  std::vector<Key> both;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(both));
  return FromCounts(both.size(), p.size(), g.size());
}

OraclePrf HandCountedKeyphraseF1(const std::vector<std::vector<BioLabel>>& gold,
                                 const std::vector<std::vector<BioLabel>>& pred) {
  // A phrase is a maximal run starting at B and continuing over I of the
  // same type.
  auto phrases = [](const std::vector<BioLabel>& tags) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    std::size_t i = 0;
    while (i < tags.size()) {
      if (tags[i].kind != BioKind::kB) {
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < tags.size() && tags[j].kind == BioKind::kI &&
             tags[j].slot_type == tags[i].slot_type) {
        ++j;
      }
      out.insert({i, j});
      i = j;
    }
    return out;
  };
  std::size_t tp = 0, n_gold = 0, n_pred = 0;
  for (std::size_t d = 0; d < gold.size(); ++d) {
    const auto g = phrases(gold[d]);
    const auto p = phrases(pred[d]);
    n_gold += g.size();
    n_pred += p.size();
    for (const auto& span : p) tp += g.count(span);
  }
  return FromCounts(tp, n_pred, n_gold);
}

std::vector<std::string> RandomWords(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> kVocab = {"play", "the",   "Song",  "by",   "red",
                                                  "42",   "Paris", "table", "at",   "noon",
                                                  "x1",   "blue",  "ROCK",  "jazz", "!",   "café"};
  std::uniform_int_distribution<std::size_t> pick(0, kVocab.size() - 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(kVocab[pick(rng)]);
  return out;
}

RandomInstance MakeRandomInstance(std::mt19937_64& rng, std::size_t max_tokens,
                                  std::size_t max_types) {
  static const std::vector<std::string> kTypes = {"artist", "city", "color", "object", "time"};
  std::uniform_int_distribution<std::size_t> n_types(1, std::min(max_types, kTypes.size()));
  std::uniform_int_distribution<std::size_t> n_tokens(1, max_tokens);
  std::uniform_int_distribution<int> half_steps(-4, 4);  // weights in {-2, -1.5, ..., 2}
  std::bernoulli_distribution coin(0.5);

  std::vector<std::string> types = kTypes;
  std::shuffle(types.begin(), types.end(), rng);
  types.resize(n_types(rng));

  RandomInstance inst;
  SlotModel& m = inst.model;
  m.labels = TagAlphabet(std::set<std::string>(types.begin(), types.end()));
  m.hyper.feature_window = static_cast<int>(rng() % 2);
  m.hyper.use_prefix_suffix = coin(rng);
  const std::size_t k = m.labels.size();
  auto weight = [&] { return 0.5 * half_steps(rng); };
  m.start.resize(k);
  for (auto& w : m.start) w = weight();
  m.transition.assign(k, std::vector<double>(k));
  for (auto& row : m.transition) {
    for (auto& w : row) w = weight();
  }

  const auto words = RandomWords(rng, n_tokens(rng));
  std::string text;
  for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
  inst.tokens = Tokenize(text);
  // Emission rows for the identity and shape features of every token, so
  // most positions carry signal. Unlisted features weigh zero.
  for (const auto& t : inst.tokens) {
    std::string lower = t.text;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const std::string& f : {"w0=" + lower, std::string("shape0=lower"),
                                 std::string("shape0=title"), std::string("shape0=digit")}) {
      std::vector<double> row(k);
      for (auto& w : row) w = weight();
      m.emission[f] = row;
    }
  }
  return inst;
}

std::vector<SlotSpan> RandomSpans(std::mt19937_64& rng, std::size_t n_tokens,
                                  const std::vector<std::string>& types) {
  std::vector<SlotSpan> spans;
  std::uniform_int_distribution<std::size_t> type(0, types.size() - 1);
  std::size_t i = 0;
  while (i < n_tokens) {
    if (rng() % 3 == 0) {
      const std::size_t len = 1 + rng() % std::min<std::size_t>(3, n_tokens - i);
      spans.push_back(SlotSpan{i, i + len, types[type(rng)]});
      i += len;
    } else {
      ++i;
    }
  }
  return spans;
}

std::vector<BioLabel> RandomTags(std::mt19937_64& rng, std::size_t n,
                                 const std::vector<std::string>& types) {
  std::vector<BioLabel> tags;
  std::uniform_int_distribution<std::size_t> type(0, types.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    switch (rng() % 3) {
      case 0: tags.push_back(BioLabel{}); break;
      case 1: tags.push_back(BioLabel{BioKind::kB, types[type(rng)]}); break;
      default: tags.push_back(BioLabel{BioKind::kI, types[type(rng)]}); break;
    }
  }
  return tags;
}

Corpus RandomCorpus(std::mt19937_64& rng, std::size_t max_utterances) {
  static const std::vector<std::string> kIntents = {"book", "play", "weather"};
  static const std::vector<std::string> kTypes = {"artist", "city", "time"};
  Corpus c;
  c.id = "random";
  c.name = "random";
  c.intents = {kIntents.begin(), kIntents.end()};
  c.slot_types = {kTypes.begin(), kTypes.end()};
  const std::size_t n = 1 + rng() % max_utterances;
  for (std::size_t i = 0; i < n; ++i) {
    Utterance u;
    u.id = "u" + std::to_string(i + 1);
    const auto words = RandomWords(rng, 1 + rng() % 8);
    for (const auto& w : words) u.text += (u.text.empty() ? "" : " ") + w;
    u.tokens = Tokenize(u.text);
    u.intent = kIntents[rng() % kIntents.size()];
    u.slots = RandomSpans(rng, u.tokens.size(), kTypes);
    u.split = static_cast<Split>(rng() % 3);
    c.utterances.push_back(std::move(u));
  }
  return c;
}

}  // namespace nluforge::testing
