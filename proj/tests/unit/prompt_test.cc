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

#include "refine/prompt.h"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>
#include <unistd.h>

#include "refine/error.h"

namespace refine {
namespace {

TEST(PromptTest, DefaultRecipesHaveDemonstrations) {
  for (Task task : {Task::kMwp, Task::kSnlr, Task::kMoral}) {
    for (PromptRole role : {PromptRole::kGenerator, PromptRole::kCritic}) {
      auto r = DefaultRecipe(task, role);
      EXPECT_EQ(r.task, task);
      EXPECT_EQ(r.role, role);
      EXPECT_FALSE(r.instruction.empty());
      EXPECT_GE(r.demonstrations.size(), 2u);
      EXPECT_EQ(RecipeFromJson(RecipeToJson(r)), r);
      EXPECT_EQ(DefaultRecipe(task, role), r);
    }
  }
}

TEST(PromptTest, CriticDemosIncludeAcceptance) {
  auto r = DefaultRecipe(Task::kMwp, PromptRole::kCritic);
  int accepted = 0;
  for (const auto& d : r.demonstrations) accepted += d.output == "No hint" ? 1 : 0;
  EXPECT_EQ(accepted, 2);
}

TEST(PromptTest, GeneratorPromptCarriesFeedback) {
  auto r = DefaultRecipe(Task::kMwp, PromptRole::kGenerator);
  std::string prev = "#0: number0 - number1";
  std::string fb = "The operator in #0 is incorrect.";
  std::string p = r.RenderGenerator("ctx text", &prev, &fb);
  EXPECT_NE(p.find("ctx text"), std::string::npos);
  EXPECT_NE(p.find(prev), std::string::npos);
  EXPECT_NE(p.rfind(fb), std::string::npos);
  EXPECT_EQ(p.substr(p.size() - 12), "Hypothesis:\n");
  std::string first = r.RenderGenerator("ctx text", nullptr, nullptr);
  EXPECT_LT(first.size(), p.size());
}

TEST(PromptTest, FileNamesAndLoading) {
  EXPECT_EQ(RecipeFileName(Task::kMwp, PromptRole::kGenerator), "mwp-generator.json");
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / ("refine-prompt-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto r = DefaultRecipe(Task::kSnlr, PromptRole::kCritic);
  r.instruction = "custom";
  std::ofstream(dir / RecipeFileName(Task::kSnlr, PromptRole::kCritic))
      << RecipeToJson(r).dump(2);
  EXPECT_EQ(LoadRecipe(dir.string(), Task::kSnlr, PromptRole::kCritic), r);
  EXPECT_THROW(LoadRecipe(dir.string(), Task::kMwp, PromptRole::kCritic), Error);
  EXPECT_EQ(LoadRecipe("", Task::kMwp, PromptRole::kCritic),
            DefaultRecipe(Task::kMwp, PromptRole::kCritic));
  fs::remove_all(dir);
}

}  // namespace
}  // namespace refine
