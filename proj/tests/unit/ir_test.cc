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

#include <algorithm>
#include <cctype>
#include <random>

#include "nluforge/error.h"
#include "nluforge/ir.h"
#include "oracles.h"

namespace nluforge {
namespace {

using testing::OracleBioValid;

std::vector<BioLabel> Tags(std::initializer_list<const char*> tags) {
  std::vector<BioLabel> out;
  for (const char* t : tags) out.push_back(BioLabel::Parse(t));
  return out;
}

std::vector<std::string> Codes(const std::vector<ValidationIssue>& issues) {
  std::vector<std::string> out;
  for (const auto& i : issues) out.push_back(i.code);
  return out;
}

Corpus TwoUtterances() {
  Corpus c;
  c.id = "c";
  c.name = "c";
  c.intents = {"adjust"};
  c.slot_types = {"adjust_color", "adjust_brightness"};
  Utterance a;
  a.id = "u1";
  a.text = "lighten the vegetables";
  a.tokens = Tokenize(a.text);
  a.intent = "adjust";
  a.slots = {{0, 1, "adjust_color"}};
  Utterance b;
  b.id = "u2";
  b.text = "make it darker";
  b.tokens = Tokenize(b.text);
  b.intent = "adjust";
  b.split = Split::kDev;
  c.utterances = {a, b};
  return c;
}

TEST(Tokenize, WhitespaceWithByteOffsets) {
  const auto t = Tokenize("lighten the vegetables");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0], (Token{"lighten", 0, 7}));
  EXPECT_EQ(t[1], (Token{"the", 8, 11}));
  EXPECT_EQ(t[2], (Token{"vegetables", 12, 22}));
}

TEST(Tokenize, EmptyText) { EXPECT_TRUE(Tokenize("").empty()); }

TEST(Tokenize, SplitsEdgePunctuation) {
  const auto t = Tokenize("color: red");
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0], (Token{"color", 0, 5}));
  EXPECT_EQ(t[1], (Token{":", 5, 6}));
  EXPECT_EQ(t[2], (Token{"red", 7, 10}));
}

TEST(Tokenize, KeepsCaseAndInnerPunctuation) {
  const auto t = Tokenize("(New-York) 3.5");
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[0].text, "(");
  EXPECT_EQ(t[1].text, "New-York");
  EXPECT_EQ(t[2].text, ")");
  EXPECT_EQ(t[3].text, "3.5");
}

TEST(Tokenize, OffsetFaithfulOnRandomText) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "ab .,!?\t\nZ9-";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const std::size_t n = rng() % 30;
    for (std::size_t i = 0; i < n; ++i) text += alphabet[rng() % alphabet.size()];
    const auto tokens = Tokenize(text);
    std::size_t cursor = 0;
    for (const auto& tok : tokens) {
      ASSERT_GE(tok.char_start, cursor);
      ASSERT_LT(tok.char_start, tok.char_end);
      ASSERT_EQ(text.substr(tok.char_start, tok.char_end - tok.char_start), tok.text);
      for (std::size_t k = cursor; k < tok.char_start; ++k) {
        ASSERT_TRUE(std::isspace(static_cast<unsigned char>(text[k]))) << text;
      }
      cursor = tok.char_end;
    }
    for (std::size_t k = cursor; k < text.size(); ++k) {
      ASSERT_TRUE(std::isspace(static_cast<unsigned char>(text[k])));
    }
    EXPECT_EQ(Tokenize(text), tokens);
  }
}

TEST(BioLabel, ParseAndPrint) {
  EXPECT_EQ(BioLabel::Parse("O"), BioLabel::Outside());
  EXPECT_EQ(BioLabel::Parse("B-adjust_color"), BioLabel::Begin("adjust_color"));
  EXPECT_EQ(BioLabel::Inside("x").ToString(), "I-x");
  for (const char* bad : {"", "B-", "X-y", "o", "I"}) {
    EXPECT_THROW(BioLabel::Parse(bad), Error) << bad;
  }
}

TEST(ValidateBio, Examples) {
  EXPECT_TRUE(ValidateBio(Tags({"O", "B-x", "I-x"})).empty());
  auto orphan = ValidateBio(Tags({"O", "I-x"}));
  ASSERT_EQ(orphan.size(), 1u);
  EXPECT_EQ(orphan[0].code, issue::kOrphanInside);
  EXPECT_EQ(orphan[0].position, 1u);
  EXPECT_EQ(orphan[0].severity, Severity::kError);
  auto mismatch = ValidateBio(Tags({"B-x", "I-y"}));
  ASSERT_EQ(mismatch.size(), 1u);
  EXPECT_EQ(mismatch[0].code, issue::kTypeMismatchInside);
  EXPECT_EQ(mismatch[0].position, 1u);
  EXPECT_EQ(Codes(ValidateBio(Tags({"I-x"}))), std::vector<std::string>{"orphan_inside"});
}

TEST(RepairBio, Examples) {
  EXPECT_EQ(RepairBio(Tags({"O", "I-x", "I-x"})), Tags({"O", "B-x", "I-x"}));
  EXPECT_EQ(RepairBio(Tags({"B-x", "I-x"})), Tags({"B-x", "I-x"}));
  EXPECT_EQ(RepairBio(Tags({"I-x", "O", "I-y"})), Tags({"B-x", "O", "B-y"}));
}

TEST(SpansFromBio, Examples) {
  EXPECT_EQ(SpansFromBio(Tags({"B-adjust_brightness", "O", "O"})),
            (std::vector<SlotSpan>{{0, 1, "adjust_brightness"}}));
  EXPECT_TRUE(SpansFromBio(Tags({"O", "O"})).empty());
  EXPECT_EQ(SpansFromBio(Tags({"B-x", "I-x", "B-x"})),
            (std::vector<SlotSpan>{{0, 2, "x"}, {2, 3, "x"}}));
  EXPECT_THROW(SpansFromBio(Tags({"O", "I-x"})), Error);
}

TEST(BioFromSpans, Examples) {
  std::vector<SlotSpan> one = {{0, 1, "x"}};
  EXPECT_EQ(BioFromSpans(3, one), Tags({"B-x", "O", "O"}));
  EXPECT_EQ(BioFromSpans(2, {}), Tags({"O", "O"}));
  std::vector<SlotSpan> mid = {{1, 3, "y"}};
  EXPECT_EQ(BioFromSpans(4, mid), Tags({"O", "B-y", "I-y", "O"}));
}

TEST(BioFromSpans, RejectsBadSpans) {
  std::vector<SlotSpan> overlap = {{0, 2, "x"}, {1, 3, "y"}};
  std::vector<SlotSpan> out_of_range = {{2, 4, "x"}};
  std::vector<SlotSpan> empty = {{1, 1, "x"}};
  std::vector<SlotSpan> unsorted = {{2, 3, "x"}, {0, 1, "x"}};
  for (const auto* spans : {&overlap, &out_of_range, &empty, &unsorted}) {
    try {
      BioFromSpans(3, *spans);
      ADD_FAILURE() << "accepted invalid spans";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kValidation);
    }
  }
}

TEST(BioProperties, RoundTripAndRepair) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> types = {"a", "b", "c"};
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = rng() % 9;
    const auto spans = testing::RandomSpans(rng, n, types);
    const auto tags = BioFromSpans(n, spans);
    ASSERT_TRUE(OracleBioValid(tags));
    ASSERT_EQ(SpansFromBio(tags), spans);
    ASSERT_EQ(BioFromSpans(n, SpansFromBio(tags)), tags);
    ASSERT_EQ(RepairBio(tags), tags);

    const auto noisy = testing::RandomTags(rng, n, types);
    const auto repaired = RepairBio(noisy);
    ASSERT_TRUE(OracleBioValid(repaired));
    ASSERT_TRUE(ValidateBio(repaired).empty());
    ASSERT_EQ(RepairBio(repaired), repaired);
    ASSERT_EQ(ValidateBio(noisy).empty(), OracleBioValid(noisy));
    for (std::size_t i = 0; i < n; ++i) {
      // Only I positions may change, and only to B of the same type.
      if (noisy[i] != repaired[i]) {
        ASSERT_EQ(noisy[i].kind, BioKind::kI);
        ASSERT_EQ(repaired[i], BioLabel::Begin(noisy[i].slot_type));
      }
    }
  }
}

TEST(ValidateCorpus, Examples) {
  EXPECT_FALSE(HasErrors(ValidateCorpus(TwoUtterances())));

  Corpus unknown = TwoUtterances();
  unknown.utterances[0].intent = "foo";
  auto issues = ValidateCorpus(unknown);
  ASSERT_TRUE(HasErrors(issues));
  const auto codes = Codes(issues);
  EXPECT_NE(std::find(codes.begin(), codes.end(), "unknown_intent"), codes.end());

  Corpus dup = TwoUtterances();
  dup.utterances[1].id = "u1";
  const auto dup_codes = Codes(ValidateCorpus(dup));
  EXPECT_NE(std::find(dup_codes.begin(), dup_codes.end(), "duplicate_id"), dup_codes.end());

  Corpus slot = TwoUtterances();
  slot.utterances[0].slots[0].label = "nope";
  const auto slot_codes = Codes(ValidateCorpus(slot));
  EXPECT_NE(std::find(slot_codes.begin(), slot_codes.end(), "unknown_slot_type"),
            slot_codes.end());
}

TEST(ValidateCorpus, WellFormedHasNoErrors) {
  Corpus c = TwoUtterances();
  c.utterances[1].split = Split::kTrain;
  for (const auto& i : ValidateCorpus(c)) {
    EXPECT_NE(i.severity, Severity::kError) << i.code;
  }
}

TEST(EditUtterance, RelabelBumpsVersion) {
  Corpus c = TwoUtterances();
  c.version = 4;
  UtterancePatch patch;
  patch.slots = std::vector<SlotSpan>{{0, 1, "adjust_brightness"}};
  Corpus edited = EditUtterance(c, "u1", patch, 4);
  EXPECT_EQ(edited.version, 5);
  EXPECT_EQ(edited.utterances[0].slots[0].label, "adjust_brightness");
  EXPECT_EQ(edited.utterances[1], c.utterances[1]);
  EXPECT_EQ(c.utterances[0].slots[0].label, "adjust_color");
}

TEST(EditUtterance, EmptyPatchIsIdentityEdit) {
  Corpus c = TwoUtterances();
  Corpus edited = EditUtterance(c, "u2", {}, c.version);
  EXPECT_EQ(edited.version, c.version + 1);
  EXPECT_EQ(edited.utterances, c.utterances);
}

TEST(EditUtterance, StaleVersionConflicts) {
  Corpus c = TwoUtterances();
  c.version = 3;
  try {
    EditUtterance(c, "u1", {}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConflict);
  }
  EXPECT_EQ(c.version, 3);
}

TEST(EditUtterance, InvalidPatchRejectedAndUnknownIdNotFound) {
  Corpus c = TwoUtterances();
  UtterancePatch bad;
  bad.slots = std::vector<SlotSpan>{{0, 9, "adjust_color"}};
  try {
    EditUtterance(c, "u1", bad, c.version);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidation);
  }
  try {
    EditUtterance(c, "zz", {}, c.version);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

TEST(EditUtterance, TextChangeRetokenizes) {
  Corpus c = TwoUtterances();
  UtterancePatch patch;
  patch.text = "brighten the dirt now";
  patch.slots = std::vector<SlotSpan>{};
  Corpus edited = EditUtterance(c, "u1", patch, c.version);
  EXPECT_EQ(edited.utterances[0].tokens.size(), 4u);
}

TEST(AddUtterance, AppendsUnderVersionCheck) {
  Corpus c = TwoUtterances();
  Utterance u;
  u.id = "u3";
  u.text = "dim it";
  u.tokens = Tokenize(u.text);
  u.intent = "adjust";
  Corpus added = AddUtterance(c, u, c.version);
  EXPECT_EQ(added.utterances.size(), 3u);
  EXPECT_EQ(added.version, c.version + 1);
  EXPECT_THROW(AddUtterance(c, u, c.version + 1), Error);
  EXPECT_THROW(AddUtterance(added, u, added.version), Error);  // duplicate id
}

}  // namespace
}  // namespace nluforge
