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

#include <fstream>
#include <sstream>

#include "refine/error.h"
#include "refine/perturb.h"
#include "refine/task.h"

namespace refine {
namespace {

constexpr int kDemosPerClass = 2;

std::vector<TaskInstance> DemoInstances(Task task) {
  std::vector<TaskInstance> out;
  switch (task) {
    case Task::kMwp:
      for (int s = 1; s <= 40; ++s) {
        const std::string id = "demo-" + std::to_string(s);
        out.push_back({mwp::ProblemFromSynthetic(mwp::GenerateMwp(s, id))});
      }
      break;
    case Task::kSnlr:
      for (int s = 1; s <= 40; ++s) {
        auto g = snlr::GenerateScenario(s, 1 + s % 2, snlr::Lexicon::Default());
        out.push_back({SnlrProblem{"demo-" + std::to_string(s),
                                   std::move(g.scenario), std::move(g.gold),
                                   std::move(g.conclusion)}});
      }
      break;
    case Task::kMoral: {
      const auto& lex = moral::JudgmentLexicon::Default();
      auto story = [&](std::string id, moral::MoralContext ctx,
                       std::string norm, std::string action) {
        MoralProblem p{std::move(id), std::move(ctx), norm,
                       moral::ParseNorm(norm, lex), std::move(action)};
        out.push_back({std::move(p)});
      };
      story("demo-1",
            {"Maya is helping her younger brother with his homework.",
             "Maya wants her brother to finish quickly.",
             "Maya decides to do the assignment herself and hands it in for "
             "him."},
            "It's wrong to do other people's schoolwork for them.",
            "Maya explains each question and lets her brother write the "
            "answers.");
      story("demo-2",
            {"Leo found a wallet on the bus seat next to him.",
             "Leo wants to buy new headphones.",
             "Leo keeps the cash and throws the wallet away."},
            "You should return lost property to its owner.",
            "Leo hands the wallet to the driver so it can be returned.");
      break;
    }
  }
  return out;
}

std::string Instruction(Task task, PromptRole role) {
  if (role == PromptRole::kCritic) {
    switch (task) {
      case Task::kMwp:
        return "Check the equation program against the problem. Reply with "
               "one feedback sentence naming the first error, or \"No hint\" "
               "if the program is correct.";
      case Task::kSnlr:
        return "Check the inference chain against the rules and the fact. "
               "Reply with one feedback sentence naming the first error, or "
               "\"No hint\" if the chain is valid.";
      case Task::kMoral:
        return "Check the norm against the story. Reply with one feedback "
               "sentence, or \"No hint\" if the norm fits.";
    }
  }
  switch (task) {
    case Task::kMwp:
      return "Write an equation program for the problem, one step per line "
             "as \"#i: a op b\". Operands are number0, number1, ... from the "
             "problem or earlier steps #j. If feedback on a previous program "
             "is given, revise that program.";
    case Task::kSnlr:
      return "Derive the conclusion from the rules and the fact, one "
             "statement per line as \"#i: subject is value\". If feedback on "
             "a previous chain is given, revise that chain.";
    case Task::kMoral:
      return "Write the moral norm that applies to the story, as a judgment "
             "followed by an action. If feedback on a previous norm is given, "
             "revise that norm.";
  }
  return {};
}

void AppendBlock(std::ostringstream& out, const std::string& label,
                 const std::string& text) {
  out << label << ":\n" << text << "\n";
}

}  // namespace

std::string_view PromptRoleName(PromptRole role) {
  return role == PromptRole::kGenerator ? "generator" : "critic";
}

std::string PromptRecipe::RenderGenerator(const std::string& context,
                                          const std::string* previous,
                                          const std::string* feedback) const {
  std::ostringstream out;
  out << instruction << "\n\n";
  int n = 1;
  for (const auto& demo : demonstrations) {
    out << "### Example " << n++ << "\n";
    AppendBlock(out, "Context", demo.context);
    if (!demo.previous.empty()) AppendBlock(out, "Previous hypothesis", demo.previous);
    if (!demo.feedback.empty()) AppendBlock(out, "Feedback", demo.feedback);
    AppendBlock(out, "Hypothesis", demo.output);
    out << "\n";
  }
  out << "### Input\n";
  AppendBlock(out, "Context", context);
  if (previous != nullptr) AppendBlock(out, "Previous hypothesis", *previous);
  if (feedback != nullptr) AppendBlock(out, "Feedback", *feedback);
  out << "Hypothesis:\n";
  return out.str();
}

std::string PromptRecipe::RenderCritic(const std::string& context,
                                       const std::string& hypothesis) const {
  std::ostringstream out;
  out << instruction << "\n\n";
  int n = 1;
  for (const auto& demo : demonstrations) {
    out << "### Example " << n++ << "\n";
    AppendBlock(out, "Context", demo.context);
    AppendBlock(out, "Hypothesis", demo.previous);
    AppendBlock(out, "Feedback", demo.output);
    out << "\n";
  }
  out << "### Input\n";
  AppendBlock(out, "Context", context);
  AppendBlock(out, "Hypothesis", hypothesis);
  out << "Feedback:\n";
  return out.str();
}

PromptRecipe DefaultRecipe(Task task, PromptRole role) {
  PromptRecipe recipe;
  recipe.task = task;
  recipe.role = role;
  recipe.instruction = Instruction(task, role);
  recipe.chain_of_thought = role == PromptRole::kGenerator && task != Task::kMoral;
  const auto& resources = TaskResources::Default();
  const auto instances = DemoInstances(task);

  auto with_answer = [&](const TaskInstance& instance, std::string z) {
    if (!recipe.chain_of_thought) return z;
    return z + "\nAnswer: " + GoldAnswer(instance).value_or("");
  };

  for (ErrorKind kind : KindsForTask(task)) {
    int found = 0;
    for (std::size_t i = 0; i < instances.size() && found < kDemosPerClass; ++i) {
      FeedbackRecord record;
      try {
        record = MakeRecord(instances[i], kind, 0, 7, resources);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kNotApplicable) continue;
        throw;
      }
      ++found;
      if (role == PromptRole::kGenerator) {
        recipe.demonstrations.push_back(
            {record.context, record.implausible.text,
             record.feedback.rendered(),
             with_answer(instances[i], record.plausible.text)});
      } else {
        recipe.demonstrations.push_back({record.context,
                                         record.implausible.text, "",
                                         record.feedback.rendered()});
      }
    }
  }
  if (role == PromptRole::kCritic) {
    for (int i = 0; i < kDemosPerClass && i < static_cast<int>(instances.size()); ++i) {
      recipe.demonstrations.push_back({ContextText(instances[i]),
                                       GoldHypothesis(instances[i]).text, "",
                                       std::string(kNoHintText)});
    }
  }
  return recipe;
}

nlohmann::json RecipeToJson(const PromptRecipe& recipe) {
  nlohmann::json demos = nlohmann::json::array();
  for (const auto& d : recipe.demonstrations) {
    demos.push_back({{"context", d.context},
                     {"previous", d.previous},
                     {"feedback", d.feedback},
                     {"output", d.output}});
  }
  return {{"version", recipe.version},
          {"task", TaskName(recipe.task)},
          {"role", PromptRoleName(recipe.role)},
          {"instruction", recipe.instruction},
          {"chain_of_thought", recipe.chain_of_thought},
          {"demonstrations", demos}};
}

PromptRecipe RecipeFromJson(const nlohmann::json& json) {
  try {
    PromptRecipe recipe;
    recipe.version = json.at("version").get<std::string>();
    auto task = ParseTaskName(json.at("task").get<std::string>());
    if (!task) throw Error(ErrorCode::kInvalidConfig, "unknown recipe task");
    recipe.task = *task;
    const auto role = json.at("role").get<std::string>();
    if (role == "generator") {
      recipe.role = PromptRole::kGenerator;
    } else if (role == "critic") {
      recipe.role = PromptRole::kCritic;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown recipe role " + role);
    }
    recipe.instruction = json.at("instruction").get<std::string>();
    recipe.chain_of_thought = json.value("chain_of_thought", false);
    for (const auto& d : json.at("demonstrations")) {
      recipe.demonstrations.push_back(
          {d.value("context", ""), d.value("previous", ""),
           d.value("feedback", ""), d.at("output").get<std::string>()});
    }
    return recipe;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("malformed prompt recipe: ") + e.what());
  }
}

std::string RecipeFileName(Task task, PromptRole role) {
  return std::string(TaskName(task)) + "-" + std::string(PromptRoleName(role)) +
         ".json";
}

PromptRecipe LoadRecipe(const std::string& dir, Task task, PromptRole role) {
  if (dir.empty()) return DefaultRecipe(task, role);
  const std::string path = dir + "/" + RecipeFileName(task, role);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open prompt recipe " + path);
  nlohmann::json json;
  try {
    in >> json;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig,
                "malformed prompt recipe " + path + ": " + e.what());
  }
  PromptRecipe recipe = RecipeFromJson(json);
  if (recipe.task != task || recipe.role != role) {
    throw Error(ErrorCode::kInvalidConfig,
                path + " holds a recipe for another task or role");
  }
  return recipe;
}

}  // namespace refine
