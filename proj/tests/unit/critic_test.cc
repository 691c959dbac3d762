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

#include "refine/critic.h"

#include <atomic>
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "refine/error.h"
#include "refine/perturb.h"
#include "testkit.h"

namespace refine {
namespace {

const TaskResources& Res() { return TaskResources::Default(); }

struct Call {
  const TaskInstance* instance;
  Hypothesis hypothesis;
};

// Gold and perturbed hypotheses, interleaved.
std::vector<Call> Replay(const std::vector<TaskInstance>& instances) {
  PoolSpec spec;
  for (int i = 0; i < kErrorKindCount; ++i) spec.kinds.push_back(static_cast<ErrorKind>(i));
  auto pool = BuildPool(instances, spec, Res());
  std::map<std::string, const TaskInstance*> by_id;
  for (const auto& i : instances) by_id[i.id()] = &i;
  std::vector<Call> calls;
  for (const auto& r : pool.records) {
    calls.push_back({by_id.at(r.instance_id), r.implausible});
    calls.push_back({by_id.at(r.instance_id), r.plausible});
  }
  return calls;
}

std::vector<TaskInstance> Mixed() {
  auto out = testkit::MwpInstances(40, 21);
  for (auto& i : testkit::SnlrInstances(40, 22)) out.push_back(std::move(i));
  for (auto& i : testkit::MoralInstances(40, 23)) out.push_back(std::move(i));
  return out;
}

TEST(OracleCriticTest, AcceptsGoldRejectsPerturbation) {
  auto instances = Mixed();
  OracleCritic oracle(Res());
  for (const auto& c : Replay(instances)) {
    Feedback f = oracle.Critique(*c.instance, c.hypothesis);
    EXPECT_EQ(f.is_no_hint(), c.hypothesis == GoldHypothesis(*c.instance));
  }
}

TEST(OracleCriticTest, UnparseableHypothesisIsUnstructured) {
  auto instances = testkit::MwpInstances(1, 3);
  OracleCritic oracle(Res());
  Feedback f = oracle.Critique(instances[0], Hypothesis{"what?"});
  EXPECT_FALSE(f.is_no_hint());
  EXPECT_FALSE(f.is_structured());
}

TEST(NoisyCriticTest, EpsilonZeroIsOracle) {
  auto instances = Mixed();
  OracleCritic oracle(Res());
  NoisyCritic noisy(std::make_unique<OracleCritic>(Res()), {0.0, 5, false}, Res());
  for (const auto& c : Replay(instances)) {
    ASSERT_EQ(noisy.Critique(*c.instance, c.hypothesis),
              oracle.Critique(*c.instance, c.hypothesis));
  }
}

TEST(NoisyCriticTest, EpsilonOneAgreesOnlyByChance) {
  auto instances = Mixed();
  OracleCritic oracle(Res());
  NoisyCritic noisy(std::make_unique<OracleCritic>(Res()), {1.0, 6, false}, Res());
  double expected = 0, variance = 0;
  int agree = 0;
  int calls = 0;
  for (const auto& c : Replay(instances)) {
    Feedback truth = oracle.Critique(*c.instance, c.hypothesis);
    Feedback got = noisy.Critique(*c.instance, c.hypothesis);
    EXPECT_FALSE(got.is_no_hint());
    EXPECT_EQ(TaskOf(KindOf(got.structured()->error)), c.instance->task());
    double p = testkit::RandomAgreementProbability(*c.instance, c.hypothesis,
                                                   truth, Res());
    expected += p;
    variance += p * (1 - p);
    agree += got == truth ? 1 : 0;
    ++calls;
  }
  EXPECT_GT(calls, 500);
  EXPECT_LE(agree, expected + 3 * std::sqrt(variance));
}

TEST(NoisyCriticTest, ExemptKeepsAcceptance) {
  auto instances = testkit::MwpInstances(20, 8);
  NoisyCritic noisy(std::make_unique<OracleCritic>(Res()), {1.0, 6, true}, Res());
  for (const auto& i : instances) {
    EXPECT_TRUE(noisy.Critique(i, GoldHypothesis(i)).is_no_hint());
  }
}

TEST(NoisyCriticTest, RejectsBadEpsilon) {
  EXPECT_THROW(NoisyCritic(std::make_unique<OracleCritic>(Res()), {1.5, 0, false},
                           Res()),
               Error);
}

TEST(NoisyCriticTest, SameSeedSameStream) {
  auto instances = Mixed();
  auto calls = Replay(instances);
  NoisyCritic a(std::make_unique<OracleCritic>(Res()), {0.5, 77, false}, Res());
  NoisyCritic b(std::make_unique<OracleCritic>(Res()), {0.5, 77, false}, Res());
  for (const auto& c : calls) {
    ASSERT_EQ(a.Critique(*c.instance, c.hypothesis),
              b.Critique(*c.instance, c.hypothesis));
  }
}

TEST(RandomFeedbackTest, ParametersFitHypothesis) {
  auto instances = testkit::SnlrInstances(20, 4);
  Rng rng(1);
  for (const auto& i : instances) {
    for (int k = 0; k < 20; ++k) {
      Feedback f = RandomFeedback(i, GoldHypothesis(i), rng, Res());
      ASSERT_TRUE(f.is_structured());
      if (auto* e = std::get_if<errors::LogicallyInvalid>(&f.structured()->error)) {
        EXPECT_NE(i.snlr()->scenario.FindRule(e->rule), nullptr);
      }
    }
  }
}

TEST(RemoteCriticTest, ParsesFirstLine) {
  auto instances = testkit::MwpInstances(1, 3);
  std::string seen_prompt;
  auto transport = std::make_shared<FunctionTransport>([&](const CompletionRequest& r) {
    seen_prompt = r.prompt;
    EXPECT_DOUBLE_EQ(r.temperature, 0.0);
    return std::string("The operator in #0 is incorrect.\nextra chatter");
  });
  RemoteCritic critic(transport, DefaultRecipe(Task::kMwp, PromptRole::kCritic),
                      {1, 0});
  Feedback f = critic.Critique(instances[0], Hypothesis{"#0: number0 - number1"});
  ASSERT_TRUE(f.is_structured());
  EXPECT_EQ(f.structured()->error, TaskError(errors::IncorrectOperators{0}));
  EXPECT_NE(seen_prompt.find("#0: number0 - number1"), std::string::npos);
  EXPECT_EQ(critic.source(), FeedbackSource::kRemote);
}

TEST(RemoteCriticTest, UnavailableAfterRetries) {
  auto instances = testkit::MwpInstances(1, 3);
  std::atomic<int> calls{0};
  auto transport = std::make_shared<FunctionTransport>([&](const CompletionRequest&) -> std::string {
    ++calls;
    throw Error(ErrorCode::kTransport, "down");
  });
  RemoteCritic critic(transport, DefaultRecipe(Task::kMwp, PromptRole::kCritic),
                      {3, 0});
  Feedback f = critic.Critique(instances[0], Hypothesis{"x"});
  EXPECT_EQ(f.rendered(), kCriticUnavailableText);
  EXPECT_EQ(calls.load(), 3);
}

TEST(RemoteCriticTest, NoMeansAccept) {
  auto instances = testkit::MwpInstances(1, 3);
  auto transport = std::make_shared<FunctionTransport>(
      [](const CompletionRequest&) { return std::string("No"); });
  RemoteCritic critic(transport, DefaultRecipe(Task::kMwp, PromptRole::kCritic), {1, 0});
  EXPECT_TRUE(critic.Critique(instances[0], Hypothesis{"x"}).is_no_hint());
}

}  // namespace
}  // namespace refine
