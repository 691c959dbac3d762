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

#include "refine/eval.h"

#include <gtest/gtest.h>

#include "refine/error.h"
#include "testkit.h"

namespace refine {
namespace {

const TaskResources& Res() { return TaskResources::Default(); }

RefinementTrace Final(const TaskInstance& inst, const std::string& text,
                      StopReason stop) {
  RefinementTrace t;
  t.run_id = inst.id();
  t.instance_id = inst.id();
  t.task = inst.task();
  t.final_hypothesis = Hypothesis{text};
  t.stop = stop;
  return t;
}

TEST(ScoreTracesTest, CountsMatchesAndBuckets) {
  mwp::MwpProblem p{"m", "t", {{0, Rational(6)}, {1, Rational(3)}},
                    mwp::ParseEquation("#0: number0 / number1"), Rational(2)};
  std::vector<TaskInstance> instances = {TaskInstance{p}};
  std::vector<RefinementTrace> traces = {
      Final(instances[0], "#0: number0 / number1", StopReason::kNoHint),
      Final(instances[0], "#0: number0 - number1", StopReason::kBudgetExhausted),
      Final(instances[0], "#0: number1 / number0", StopReason::kBudgetExhausted),
      Final(instances[0], "junk", StopReason::kError),
  };
  auto r = ScoreTraces(traces, instances, Res(), "toy");
  EXPECT_EQ(r.dataset, "toy");
  EXPECT_EQ(r.traces, 4);
  EXPECT_EQ(r.exact_matches, 1);
  EXPECT_DOUBLE_EQ(*r.em, 0.25);
  EXPECT_EQ(r.answers_scored, 4);
  EXPECT_EQ(r.answers_correct, 1);
  EXPECT_EQ(r.error_buckets["IncorrectOperators"], 1);
  EXPECT_EQ(r.error_buckets["IncorrectNumbers"], 2);
  EXPECT_EQ(r.unparseable, 1);
  EXPECT_EQ(r.stop_reasons["budget_exhausted"], 2);
}

TEST(ScoreTracesTest, AnswerCanMatchWithoutEm) {
  mwp::MwpProblem p{"m", "t", {{0, Rational(2)}, {1, Rational(2)}},
                    mwp::ParseEquation("#0: number0 + number1"), Rational(4)};
  std::vector<TaskInstance> instances = {TaskInstance{p}};
  auto r = ScoreTraces({Final(instances[0], "#0: number0 * number1", StopReason::kNoHint)},
                       instances, Res());
  EXPECT_EQ(r.exact_matches, 0);
  EXPECT_EQ(r.answers_correct, 1);
}

TEST(ScoreTracesTest, EmptyAndUnknown) {
  auto instances = testkit::MwpInstances(1, 1);
  auto r = ScoreTraces({}, instances, Res());
  EXPECT_FALSE(r.em.has_value());
  EXPECT_FALSE(r.accuracy.has_value());
  RefinementTrace stray;
  stray.instance_id = "nope";
  try {
    ScoreTraces({stray}, instances, Res());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownInstance);
  }
}

TEST(ScoreTracesTest, MoralHasNoAnswers) {
  auto instances = testkit::MoralInstances(2, 1);
  auto r = ScoreTraces({Final(instances[0], GoldHypothesis(instances[0]).text,
                              StopReason::kNoHint)},
                       instances, Res());
  EXPECT_EQ(r.exact_matches, 1);
  EXPECT_EQ(r.answers_scored, 0);
  EXPECT_FALSE(r.accuracy.has_value());
}

TEST(BootstrapTest, IntervalBracketsMean) {
  std::vector<double> v;
  for (int i = 0; i < 200; ++i) v.push_back(i % 4 == 0 ? 1.0 : 0.0);
  auto ci = BootstrapMean(v, 2000, 3);
  EXPECT_DOUBLE_EQ(ci.mean, 0.25);
  EXPECT_LT(ci.low, 0.25);
  EXPECT_GT(ci.high, 0.25);
  EXPECT_GT(ci.low, 0.15);
  EXPECT_LT(ci.high, 0.35);
  auto again = BootstrapMean(v, 2000, 3);
  EXPECT_DOUBLE_EQ(again.low, ci.low);
}

TEST(BootstrapTest, ConstantSample) {
  auto ci = BootstrapMean({1, 1, 1}, 100, 1);
  EXPECT_DOUBLE_EQ(ci.low, 1.0);
  EXPECT_DOUBLE_EQ(ci.high, 1.0);
  EXPECT_DOUBLE_EQ(BootstrapMean({}, 100, 1).mean, 0.0);
}

TEST(NoiseSweepTest, EmDropsWithNoise) {
  auto instances = testkit::MwpInstances(40, 8);
  std::vector<RunItem> items;
  for (const auto& i : instances) items.push_back({i.id(), &i, std::nullopt});
  SweepConfig cfg;
  cfg.epsilons = {0.0, 1.0};
  cfg.trials = 2;
  cfg.loop.max_turns = 4;
  cfg.resamples = 200;
  cfg.parallelism = 2;
  GeneratorFactory gen = [](const RunItem&, std::uint64_t) {
    return std::make_unique<RepairGenerator>(Res());
  };
  auto rows = NoiseSweep(items, gen, cfg, Res());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].runs, 80);
  EXPECT_GT(rows[0].mean_em, rows[1].mean_em);
  EXPECT_LE(rows[0].ci_low, rows[0].mean_em);
  cfg.trials = 0;
  EXPECT_TRUE(NoiseSweep(items, gen, cfg, Res()).empty());
}

}  // namespace
}  // namespace refine
