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

#include "refine/snlr.h"

#include <algorithm>

#include <gtest/gtest.h>

#include "refine/error.h"
#include "testkit.h"

namespace refine::snlr {
namespace {

const Lexicon& Lex() { return Lexicon::Default(); }

Scenario Rose() {
  Scenario s;
  s.subject = "rose";
  s.rules = {ParseRule("rule 1: if X is green and X is tall then X is soft", Lex()),
             ParseRule("rule 2: if X is soft or X is cold then X is happy", Lex()),
             ParseRule("rule 3: if X is red and X is round then X is hot", Lex())};
  s.fact = ParseFact("rose is viridian and rose is tall", Lex()).second;
  return s;
}

TEST(SnlrTextTest, RuleRoundTrip) {
  for (const auto& rule : Rose().rules) {
    EXPECT_EQ(ParseRule(RenderRule(rule), Lex()), rule);
  }
  EXPECT_EQ(RenderRule(Rose().rules[1]),
            "rule 2: if X is soft or X is cold then X is happy");
  EXPECT_EQ(RenderFact(Rose()), "rose is viridian and rose is tall");
}

TEST(SnlrTextTest, MalformedRule) {
  EXPECT_THROW(ParseRule("if green then soft", Lex()), Error);
}

TEST(SnlrLexiconTest, Generalize) {
  auto g = Lex().Generalize(Lex().MakeLiteral("viridian"));
  ASSERT_TRUE(g.has_value());
  EXPECT_EQ(g->value, "green");
  EXPECT_EQ(g->family, "color");
  EXPECT_FALSE(Lex().Generalize(Lex().MakeLiteral("green")).has_value());
  auto specifics = Lex().SpecificsOf("green");
  EXPECT_NE(std::find(specifics.begin(), specifics.end(), "viridian"),
            specifics.end());
}

TEST(SnlrSolveTest, TwoHopChain) {
  auto sol = SolveScenario(Rose(), Lex());
  EXPECT_EQ(sol.chain.Render(),
            "#0: rose is green\n#1: rose is soft\n#2: rose is happy");
  EXPECT_EQ(sol.conclusion.value, "happy");
  EXPECT_EQ(sol.chain.Hops(), 2);
  EXPECT_EQ(sol.chain.steps[0].tag, StepTag::kImplicit);
  EXPECT_EQ(sol.chain.steps[1].rule_id, std::optional<int>(1));
}

TEST(SnlrSolveTest, UnsatisfiableWhenNothingFires) {
  Scenario s = Rose();
  s.fact = {Lex().MakeLiteral("azure")};
  try {
    SolveScenario(s, Lex());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsatisfiable);
  }
}

TEST(SnlrSolveTest, MatchesNaiveSaturation) {
  for (int i = 0; i < 300; ++i) {
    auto g = GenerateScenario(static_cast<std::uint64_t>(i) + 17, 1 + i % 2, Lex());
    auto expected = testkit::Saturate(g.scenario, Lex());
    EXPECT_EQ(KnownLiterals(g.scenario, Lex()), expected);
    EXPECT_TRUE(expected.count(g.conclusion));
    for (const auto& step : g.gold.steps) {
      EXPECT_TRUE(expected.count(step.statement));
    }
    EXPECT_EQ(g.gold.steps.back().statement, g.conclusion);
    EXPECT_EQ(g.gold.Hops(), 1 + i % 2);
  }
}

TEST(SnlrDiagnoseTest, TaxonomyErrors) {
  Scenario s = Rose();
  auto gold = SolveScenario(s, Lex()).chain;
  auto diag = [&](const char* text) {
    return DiagnoseChain(s, Lex(), gold, ParseChain(text, s, Lex()));
  };
  EXPECT_TRUE(diag("#0: rose is green\n#1: rose is soft\n#2: rose is happy").clean());

  auto d = diag("#0: rose is green\n#1: rose is happy");
  ASSERT_EQ(d.errors.size(), 1u);
  EXPECT_EQ(d.errors[0], TaskError(errors::MissingLink{}));

  d = diag("#0: rose is soft\n#1: rose is happy");
  ASSERT_EQ(d.errors.size(), 1u);
  EXPECT_EQ(d.errors[0], TaskError(errors::MissingImplicitKnowledge{}));

  d = diag("#0: rose is green\n#1: rose is soft\n#2: rose is hot\n#3: rose is happy");
  ASSERT_EQ(d.errors.size(), 1u);
  EXPECT_EQ(d.errors[0],
            TaskError(errors::LogicallyInvalid{Connective::kAnd, 3}));
}

TEST(SnlrParseTest, InfersTagsAndCitations) {
  Scenario s = Rose();
  auto chain = ParseChain("#0: rose is green\n#1: rose is soft.", s, Lex());
  ASSERT_EQ(chain.steps.size(), 2u);
  EXPECT_EQ(chain.steps[0].tag, StepTag::kImplicit);
  EXPECT_EQ(chain.steps[1].rule_id, std::optional<int>(1));
  EXPECT_THROW(ParseChain("rose is green", s, Lex()), Error);
}

TEST(SnlrGenerateTest, Deterministic) {
  auto a = GenerateScenario(5, 2, Lex());
  auto b = GenerateScenario(5, 2, Lex());
  EXPECT_EQ(a.scenario, b.scenario);
  EXPECT_EQ(a.gold, b.gold);
}

}  // namespace
}  // namespace refine::snlr
