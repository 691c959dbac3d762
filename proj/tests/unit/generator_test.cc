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

#include "refine/generator.h"

#include <map>

#include <gtest/gtest.h>

#include "refine/error.h"
#include "refine/perturb.h"
#include "testkit.h"

namespace refine {
namespace {

const TaskResources& Res() { return TaskResources::Default(); }

TaskInstance FixedMwp() {
  mwp::MwpProblem p{"m1", "number0 and number1 then number2",
                    {{0, Rational(2)}, {1, Rational(3)}, {2, Rational(4)}},
                    mwp::ParseEquation("#0: number0 * number1\n#1: #0 - number2"),
                    Rational(2)};
  return TaskInstance{p};
}

std::vector<Proposal> Ask(Generator& g, const TaskInstance& inst,
                          const Hypothesis* prev, const Feedback* fb, int turn) {
  ProposeRequest r;
  r.instance = &inst;
  r.previous = prev;
  r.feedback = fb;
  r.turn = turn;
  return g.Propose(r);
}

TEST(RepairGeneratorTest, ColdStartIsFirstPair) {
  auto inst = FixedMwp();
  RepairGenerator g(Res());
  auto out = Ask(g, inst, nullptr, nullptr, 0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].hypothesis.text, "#0: number0 + number1");
}

TEST(RepairGeneratorTest, OperatorTriedInOrderWithoutRepeats) {
  auto inst = FixedMwp();
  RepairGenerator g(Res());
  Hypothesis h{"#0: number0 + number1\n#1: #0 - number2"};
  Feedback fb = Feedback::Error(errors::IncorrectOperators{0});
  std::vector<std::string> seen;
  for (int i = 0; i < 3; ++i) {
    h = Ask(g, inst, &h, &fb, i + 1)[0].hypothesis;
    seen.push_back(h.text.substr(0, h.text.find('\n')));
  }
  EXPECT_EQ(seen, (std::vector<std::string>{"#0: number0 - number1",
                                            "#0: number0 * number1",
                                            "#0: number0 / number1"}));
  try {
    Ask(g, inst, &h, &fb, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEditSpaceExhausted);
  }
}

TEST(RepairGeneratorTest, MissingOperatorAppendsStep) {
  auto inst = FixedMwp();
  RepairGenerator g(Res());
  Hypothesis h{"#0: number0 * number1"};
  Feedback fb = Feedback::Error(errors::MissingOperators{});
  auto out = Ask(g, inst, &h, &fb, 1);
  EXPECT_EQ(out[0].hypothesis.text, "#0: number0 * number1\n#1: #0 + number0");
}

TEST(RepairGeneratorTest, UnstructuredFeedbackLeavesHypothesis) {
  auto inst = FixedMwp();
  RepairGenerator g(Res());
  Hypothesis h{"#0: number0 * number1"};
  Feedback fb = Feedback::Free("try harder");
  EXPECT_EQ(Ask(g, inst, &h, &fb, 1)[0].hypothesis, h);
}

TEST(RepairGeneratorTest, SnlrGapsFilledFromSolver) {
  auto instances = testkit::SnlrInstances(30, 12);
  PoolSpec spec{{ErrorKind::kMissingLink, ErrorKind::kMissingImplicitKnowledge,
                 ErrorKind::kLogicallyInvalid}, 1, 4, 1};
  auto pool = BuildPool(instances, spec, Res());
  ASSERT_FALSE(pool.records.empty());
  std::map<std::string, const TaskInstance*> by_id;
  for (const auto& i : instances) by_id[i.id()] = &i;
  for (const auto& r : pool.records) {
    RepairGenerator g(Res());
    auto out = Ask(g, *by_id.at(r.instance_id), &r.implausible, &r.feedback, 1);
    EXPECT_EQ(out[0].hypothesis, r.plausible) << r.id;
  }
}

TEST(RepairGeneratorTest, MoralRepairs) {
  auto instances = testkit::MoralInstances(30, 12);
  PoolSpec spec{{ErrorKind::kSemanticMisalignment, ErrorKind::kContradiction}, 1, 4, 1};
  auto pool = BuildPool(instances, spec, Res());
  std::map<std::string, const TaskInstance*> by_id;
  for (const auto& i : instances) by_id[i.id()] = &i;
  int fixed_first_try = 0;
  for (const auto& r : pool.records) {
    RepairGenerator g(Res());
    const TaskInstance& inst = *by_id.at(r.instance_id);
    auto out = Ask(g, inst, &r.implausible, &r.feedback, 1);
    if (r.kind == ErrorKind::kSemanticMisalignment) {
      // The hint restores the action; the judgment may still differ.
      auto d = Diagnose(inst, out[0].hypothesis, Res());
      for (const auto& e : d.errors) {
        EXPECT_NE(KindOf(e), ErrorKind::kSemanticMisalignment);
      }
    }
    fixed_first_try += out[0].hypothesis == r.plausible ? 1 : 0;
  }
  EXPECT_GT(fixed_first_try, 0);
}

TEST(ScriptedGeneratorTest, RepeatsLastEntry) {
  auto inst = FixedMwp();
  ScriptedGenerator g({"#0: number0 + number1", "#0: number1 + number0"});
  EXPECT_EQ(Ask(g, inst, nullptr, nullptr, 0)[0].hypothesis.text, "#0: number0 + number1");
  EXPECT_EQ(Ask(g, inst, nullptr, nullptr, 1)[0].hypothesis.text, "#0: number1 + number0");
  EXPECT_EQ(Ask(g, inst, nullptr, nullptr, 9)[0].hypothesis.text, "#0: number1 + number0");
}

TEST(ScriptedGeneratorTest, UnknownFixture) {
  try {
    ScriptedGenerator::FromFixture({}, "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownFixture);
  }
}

TEST(ScriptedGeneratorTest, NoHintLineIsFlagged) {
  auto inst = FixedMwp();
  ScriptedGenerator g({"#0: number0 + number1\nNo hint"});
  EXPECT_TRUE(Ask(g, inst, nullptr, nullptr, 0)[0].emitted_no_hint);
}

TEST(ExtractProposalTest, FindsStepBlock) {
  auto inst = FixedMwp();
  auto p = ExtractProposal(inst, "Sure! Here:\n#0: number0 * number1\n#1: #0 - number2\nDone.",
                           Res());
  EXPECT_EQ(p.hypothesis.text, "#0: number0 * number1\n#1: #0 - number2");
  EXPECT_FALSE(p.emitted_no_hint);
  p = ExtractProposal(inst, "  garbage  ", Res());
  EXPECT_EQ(p.hypothesis.text, "garbage");
}

TEST(ExtractProposalTest, MoralPicksParseableLine) {
  auto inst = testkit::MoralInstances(1, 1)[0];
  auto p = ExtractProposal(inst, "Thinking...\nyou shouldn't lie to friends", Res());
  EXPECT_EQ(p.hypothesis.text, "You shouldn't lie to friends.");
}

TEST(RemoteGeneratorTest, SamplesKCompletions) {
  auto inst = FixedMwp();
  int calls = 0;
  auto transport = std::make_shared<FunctionTransport>([&](const CompletionRequest& r) {
    ++calls;
    EXPECT_DOUBLE_EQ(r.temperature, 1.0);
    EXPECT_DOUBLE_EQ(r.top_p, 0.5);
    return std::string("#0: number0 * number1");
  });
  RemoteGenerator g(transport, DefaultRecipe(Task::kMwp, PromptRole::kGenerator),
                    {1, 0}, Res());
  ProposeRequest r;
  r.instance = &inst;
  r.k = 4;
  r.decode = {DecodeKind::kSampled, 0.5};
  EXPECT_EQ(g.Propose(r).size(), 4u);
  EXPECT_EQ(calls, 4);
}

TEST(RemoteGeneratorTest, TransportFailurePropagates) {
  auto inst = FixedMwp();
  auto transport = std::make_shared<FunctionTransport>([](const CompletionRequest&) -> std::string {
    throw Error(ErrorCode::kTimeout, "slow");
  });
  RemoteGenerator g(transport, DefaultRecipe(Task::kMwp, PromptRole::kGenerator),
                    {2, 0}, Res());
  try {
    Ask(g, inst, nullptr, nullptr, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTimeout);
  }
}

}  // namespace
}  // namespace refine
