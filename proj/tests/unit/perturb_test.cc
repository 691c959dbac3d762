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

#include "refine/perturb.h"

#include <map>
#include <set>

#include <gtest/gtest.h>

#include "refine/error.h"
#include "testkit.h"

namespace refine {
namespace {

const TaskResources& Res() { return TaskResources::Default(); }

PoolSpec AllKinds(int per_kind, int parallelism) {
  PoolSpec spec;
  for (int i = 0; i < kErrorKindCount; ++i) {
    spec.kinds.push_back(static_cast<ErrorKind>(i));
  }
  spec.per_kind = per_kind;
  spec.seed = 11;
  spec.parallelism = parallelism;
  return spec;
}

std::vector<TaskInstance> Mixed() {
  auto out = testkit::MwpInstances(30, 1);
  for (auto& i : testkit::SnlrInstances(30, 2)) out.push_back(std::move(i));
  for (auto& i : testkit::MoralInstances(30, 3)) out.push_back(std::move(i));
  return out;
}

TEST(PerturbTest, MwpOperatorSwapIsDetected) {
  auto gold = mwp::ParseEquation("#0: number0 + number1\n#1: #0 * number2");
  mwp::VariableBinding b{{0, Rational(2)}, {1, Rational(3)}, {2, Rational(4)}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto p = PerturbMwp(gold, b, ErrorKind::kIncorrectOperators, seed);
    auto d = mwp::DiagnoseProgram(gold, p.program);
    ASSERT_EQ(d.errors.size(), 1u);
    EXPECT_EQ(d.errors[0], p.error);
  }
}

TEST(PerturbTest, MissingOperatorsNeedsTwoSteps) {
  auto gold = mwp::ParseEquation("#0: number0 + number1");
  try {
    PerturbMwp(gold, {{0, Rational(1)}, {1, Rational(2)}},
               ErrorKind::kMissingOperators, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotApplicable);
  }
}

TEST(PerturbTest, WrongTaskKindNotApplicable) {
  auto gold = mwp::ParseEquation("#0: number0 + number1");
  EXPECT_THROW(PerturbMwp(gold, {}, ErrorKind::kMissingLink, 1), Error);
}

TEST(PerturbTest, EveryRecordVerifies) {
  auto instances = Mixed();
  auto pool = BuildPool(instances, AllKinds(2, 1), Res());
  ASSERT_GT(pool.records.size(), 300u);
  std::map<std::string, const TaskInstance*> by_id;
  for (const auto& i : instances) by_id[i.id()] = &i;
  for (const auto& r : pool.records) {
    const TaskInstance& inst = *by_id.at(r.instance_id);
    EXPECT_EQ(r.task, inst.task());
    EXPECT_EQ(TaskOf(r.kind), r.task);
    EXPECT_NE(r.plausible, r.implausible);
    EXPECT_EQ(r.plausible, GoldHypothesis(inst));
    EXPECT_NO_THROW(VerifyRecord(inst, r, Res()));
    ASSERT_TRUE(r.feedback.structured() != nullptr);
    EXPECT_EQ(KindOf(r.feedback.structured()->error), r.kind);
  }
}

TEST(PerturbTest, CoversEveryKind) {
  auto pool = BuildPool(Mixed(), AllKinds(1, 1), Res());
  std::set<ErrorKind> seen;
  for (const auto& r : pool.records) seen.insert(r.kind);
  EXPECT_EQ(seen.size(), static_cast<std::size_t>(kErrorKindCount));
}

TEST(PerturbTest, DeterministicAcrossParallelism) {
  auto instances = Mixed();
  auto a = BuildPool(instances, AllKinds(2, 1), Res());
  auto b = BuildPool(instances, AllKinds(2, 8), Res());
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.skipped.size(), b.skipped.size());
}

TEST(PerturbTest, TamperedRecordFailsVerification) {
  auto instances = testkit::MwpInstances(5, 9);
  auto pool = BuildPool(instances, AllKinds(1, 1), Res());
  ASSERT_FALSE(pool.records.empty());
  FeedbackRecord r = pool.records.front();
  r.implausible = r.plausible;
  const TaskInstance* inst = nullptr;
  for (const auto& i : instances) {
    if (i.id() == r.instance_id) inst = &i;
  }
  try {
    VerifyRecord(*inst, r, Res());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconsistentRecord);
  }
}

TEST(PerturbTest, MisalignmentCarriesGoldActionHint) {
  auto instances = testkit::MoralInstances(20, 5);
  PoolSpec spec{{ErrorKind::kSemanticMisalignment}, 1, 3, 1};
  auto pool = BuildPool(instances, spec, Res());
  ASSERT_EQ(pool.records.size(), 20u);
  for (const auto& r : pool.records) {
    ASSERT_TRUE(r.feedback.structured()->hint.has_value());
  }
}

}  // namespace
}  // namespace refine
