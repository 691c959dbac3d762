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

#include "refine/feedback.h"

#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "testkit.h"

namespace refine {
namespace {

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

TEST(FeedbackTemplateTest, GoldenStrings) {
  auto golden = ReadLines(std::string(REFINE_TEST_DIR) + "/golden/templates.txt");
  auto errors = testkit::GoldenTemplateErrors();
  ASSERT_EQ(golden.size(), errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    EXPECT_EQ(RenderError(errors[i]), golden[i]);
  }
}

TEST(FeedbackTemplateTest, KnownRenderings) {
  EXPECT_EQ(Feedback::Error(errors::IncorrectOperators{0}).rendered(),
            "The operator in #0 is incorrect.");
  EXPECT_EQ(Feedback::Error(errors::MissingLink{}).rendered(),
            "Missing link between the fact and the rules.");
  EXPECT_EQ(Feedback::Accept().rendered(), "No hint");
  EXPECT_EQ(Feedback::Error(errors::Contradiction{}, "be kind").rendered(),
            "Contradiction Hint: be kind");
}

TEST(FeedbackParseTest, Sentinels) {
  EXPECT_TRUE(ParseFeedback("No hint").is_no_hint());
  EXPECT_TRUE(ParseFeedback("No").is_no_hint());
  EXPECT_TRUE(ParseFeedback("No hint.").is_no_hint());
  auto free = ParseFeedback("free text");
  ASSERT_TRUE(std::holds_alternative<Feedback::Unstructured>(free.kind()));
  EXPECT_EQ(free.rendered(), "free text");
}

TEST(FeedbackParseTest, InvertsTemplates) {
  auto f = ParseFeedback("The operator in #1 is incorrect.");
  ASSERT_TRUE(f.is_structured());
  EXPECT_EQ(f.structured()->error, TaskError(errors::IncorrectOperators{1}));
  f = ParseFeedback("The or operator makes inference rule 4 invalid.");
  ASSERT_TRUE(f.is_structured());
  EXPECT_EQ(f.structured()->error,
            TaskError(errors::LogicallyInvalid{Connective::kOr, 4}));
}

TEST(FeedbackParseTest, RoundTripProperty) {
  Rng rng(4242);
  for (int i = 0; i < 10000; ++i) {
    TaskError error = testkit::RandomTaskError(rng);
    std::optional<std::string> hint;
    if (rng.Bernoulli(0.3)) hint = testkit::RandomWords(rng, 1, 6);
    Feedback f = Feedback::Error(error, hint);
    Feedback back = ParseFeedback(f.rendered());
    ASSERT_EQ(back, f) << f.rendered();
    ASSERT_EQ(back.rendered(), f.rendered());
  }
}

TEST(FeedbackTaxonomyTest, KindsPartitionTasks) {
  int total = 0;
  for (Task t : {Task::kMwp, Task::kSnlr, Task::kMoral}) {
    for (ErrorKind k : KindsForTask(t)) {
      EXPECT_EQ(TaskOf(k), t);
      EXPECT_EQ(ParseErrorKindName(ErrorKindName(k)), k);
      ++total;
    }
  }
  EXPECT_EQ(total, kErrorKindCount);
  EXPECT_FALSE(ParseErrorKindName("Bogus").has_value());
}

}  // namespace
}  // namespace refine
