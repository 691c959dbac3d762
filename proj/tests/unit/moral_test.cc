// Copyright 2026 The refine-loop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "refine/moral.h"

#include <algorithm>

#include <gtest/gtest.h>

#include "refine/error.h"

namespace refine::moral {
namespace {

const JudgmentLexicon& Lex() { return JudgmentLexicon::Default(); }

TEST(MoralNormTest, ParsesJudgmentAndAction) {
  Norm n = ParseNorm("It's wrong to keep things that belong to someone else.", Lex());
  EXPECT_EQ(n.judgment, "It's wrong");
  EXPECT_EQ(n.action, "keep things that belong to someone else");
  EXPECT_EQ(n.polarity, Polarity::kNegative);
  EXPECT_TRUE(n.to_marker);
  EXPECT_EQ(n.Render(), "It's wrong to keep things that belong to someone else.");
}

TEST(MoralNormTest, LongestPrefixWins) {
  Norm n = ParseNorm("You should not lie to friends.", Lex());
  EXPECT_EQ(n.judgment, "You should not");
  EXPECT_EQ(n.polarity, Polarity::kNegative);
  n = ParseNorm("you shouldnt lie to friends", Lex());
  EXPECT_EQ(n.judgment, "You shouldn't");
}

TEST(MoralNormTest, UnparseableNorm) {
  try {
    ParseNorm("Practice makes perfect.", Lex());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnparseableNorm);
  }
  EXPECT_THROW(ParseNorm("You should.", Lex()), Error);
}

TEST(MoralNormTest, InversionFlipsPolarityKeepsAction) {
  Norm n = ParseNorm("You shouldn't criticize your family's religion.", Lex());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Norm inv = InvertJudgment(n, Lex(), seed);
    EXPECT_EQ(inv.polarity, Polarity::kPositive);
    EXPECT_EQ(inv.action, n.action);
    const auto& inverses = Lex().Find(n.judgment)->inverses;
    EXPECT_NE(std::find(inverses.begin(), inverses.end(), inv.judgment),
              inverses.end());
  }
  Norm good = WithJudgment(n, *Lex().Find("It's good"));
  EXPECT_EQ(good.Render(), "It's good to criticize your family's religion.");
}

TEST(MoralNormTest, LexiconRejectsDanglingInverse) {
  EXPECT_THROW(JudgmentLexicon({{"It's fine", Polarity::kPositive, {"Nope"}, true}}),
               Error);
}

TEST(MoralNormTest, SynonymParaphrases) {
  SynonymTable table{{"bad", {"awful"}}};
  auto lex = Lex().WithSynonyms(table);
  ASSERT_NE(lex.Find("It's awful"), nullptr);
  EXPECT_EQ(lex.Find("It's awful")->polarity, Polarity::kNegative);
  auto para = lex.ParaphrasesOf("It's bad", table);
  EXPECT_EQ(para, std::vector<std::string>{"It's awful"});
}

TEST(MoralOverlapTest, TokenF1) {
  EXPECT_DOUBLE_EQ(TokenF1("return the bike", "return the bike"), 1.0);
  EXPECT_DOUBLE_EQ(TokenF1("a b", "c d"), 0.0);
  EXPECT_NEAR(TokenF1("lock the bike", "lock the door"), 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(TokenF1("", ""), 1.0);
}

TEST(MoralDiagnoseTest, ContradictionAndMisalignment) {
  Norm gold = ParseNorm("You shouldn't lie to your friends.", Lex());
  EXPECT_TRUE(DiagnoseNorm(gold, gold, kDefaultOverlapThreshold).clean());

  auto d = DiagnoseNorm(gold, ParseNorm("You should lie to your friends.", Lex()),
                        kDefaultOverlapThreshold);
  ASSERT_EQ(d.errors.size(), 1u);
  EXPECT_EQ(d.errors[0], TaskError(errors::Contradiction{}));

  d = DiagnoseNorm(gold, ParseNorm("It's wrong to buy new shoes.", Lex()),
                   kDefaultOverlapThreshold);
  ASSERT_EQ(d.errors.size(), 1u);
  EXPECT_EQ(d.errors[0],
            TaskError(errors::SemanticMisalignment{"to buy new shoes"}));
  EXPECT_EQ(d.hint, std::optional<std::string>("lie to your friends"));
}

TEST(MoralVerbsTest, ExtractsInfinitivePhrases) {
  MoralContext c{"Omar plans to watch a movie tonight and rest.",
                 "Omar wants to borrow money.", "Omar refuses to help."};
  auto phrases = ExtractVerbPhrases(c, DefaultVerbs());
  EXPECT_EQ(phrases, (std::vector<std::string>{"watch a movie tonight", "help"}));
}

}  // namespace
}  // namespace refine::moral
