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

#ifndef REFINE_PROMPT_H_
#define REFINE_PROMPT_H_

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "refine/feedback.h"

namespace refine {

enum class PromptRole { kGenerator, kCritic };

std::string_view PromptRoleName(PromptRole role);

// For generator recipes `output` is the refined hypothesis; `previous` and
// `feedback` are empty for a first attempt. For critic recipes `previous` is
// the hypothesis under review and `output` the feedback sentence.
struct Demonstration {
  std::string context;
  std::string previous;
  std::string feedback;
  std::string output;
  bool operator==(const Demonstration&) const = default;
};

struct PromptRecipe {
  std::string version = "v1";
  Task task = Task::kMwp;
  PromptRole role = PromptRole::kGenerator;
  std::string instruction;
  bool chain_of_thought = false;
  std::vector<Demonstration> demonstrations;

  // Generator prompt. `previous` and `feedback` are included when present.
  std::string RenderGenerator(const std::string& context,
                              const std::string* previous,
                              const std::string* feedback) const;
  std::string RenderCritic(const std::string& context,
                           const std::string& hypothesis) const;

  bool operator==(const PromptRecipe&) const = default;
};

// Built-in recipes: two demonstrations per feedback class, drawn from seeded
// synthetic instances (and two fixed moral stories), plus two accepted
// hypotheses for critics.
PromptRecipe DefaultRecipe(Task task, PromptRole role);

nlohmann::json RecipeToJson(const PromptRecipe& recipe);
PromptRecipe RecipeFromJson(const nlohmann::json& json);

// `<dir>/<task>-<role>.json`, e.g. "mwp-generator.json".
std::string RecipeFileName(Task task, PromptRole role);

// Reads the recipe file from `dir`; falls back to the built-in recipe when
// `dir` is empty. A missing file in a given directory is an error (kIo).
PromptRecipe LoadRecipe(const std::string& dir, Task task, PromptRole role);

}  // namespace refine

#endif  // REFINE_PROMPT_H_
