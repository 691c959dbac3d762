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

#include "refine/task.h"

#include <algorithm>
#include <tuple>

#include "refine/error.h"

namespace refine {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const moral::Norm& GoldNorm(const MoralProblem& problem) {
  if (!problem.norm) {
    throw Error(ErrorCode::kMissingGold,
                "instance " + problem.id + " has no parseable gold norm");
  }
  return *problem.norm;
}

// (kind rank within its task, step, operand position).
std::tuple<int, int, int> PriorityKey(const TaskError& error) {
  return std::visit(
      Overloaded{
          [](const errors::MissingOperators&) {
            return std::make_tuple(0, 0, 0);
          },
          [](const errors::IncorrectOperators& e) {
            return std::make_tuple(1, e.step, 0);
          },
          [](const errors::IncorrectNumbers& e) {
            return std::make_tuple(
                2, e.step, e.position == OperandPosition::kFirst ? 0 : 1);
          },
          [](const errors::LogicallyInvalid&) {
            return std::make_tuple(0, 0, 0);
          },
          [](const errors::MissingImplicitKnowledge&) {
            return std::make_tuple(1, 0, 0);
          },
          [](const errors::MissingLink&) { return std::make_tuple(2, 0, 0); },
          [](const errors::Contradiction&) {
            return std::make_tuple(0, 0, 0);
          },
          [](const errors::SemanticMisalignment&) {
            return std::make_tuple(1, 0, 0);
          },
      },
      error);
}

}  // namespace

const std::string& TaskInstance::id() const {
  return std::visit([](const auto& p) -> const std::string& { return p.id; },
                    problem);
}

Task TaskInstance::task() const {
  switch (problem.index()) {
    case 0: return Task::kMwp;
    case 1: return Task::kSnlr;
    default: return Task::kMoral;
  }
}

const TaskResources& TaskResources::Default() {
  static const TaskResources kDefault;
  return kDefault;
}

Hypothesis GoldHypothesis(const TaskInstance& instance) {
  return std::visit(
      Overloaded{
          [](const mwp::MwpProblem& p) {
            return Hypothesis{p.gold_program.Render()};
          },
          [](const SnlrProblem& p) { return Hypothesis{p.gold_chain.Render()}; },
          [](const MoralProblem& p) { return Hypothesis{GoldNorm(p).Render()}; },
      },
      instance.problem);
}

std::string ContextText(const TaskInstance& instance) {
  return std::visit(
      Overloaded{
          [](const mwp::MwpProblem& p) { return p.text; },
          [](const SnlrProblem& p) {
            std::string out;
            for (const auto& rule : p.scenario.rules) {
              out += snlr::RenderRule(rule) + "\n";
            }
            return out + "fact: " + snlr::RenderFact(p.scenario);
          },
          [](const MoralProblem& p) {
            return "<|SIT|> " + p.context.situation + " <|INT|> " +
                   p.context.intention + " <|I_ACT|> " +
                   p.context.immoral_action + " <|NRM|>";
          },
      },
      instance.problem);
}

Diagnosis Diagnose(const TaskInstance& instance, const Hypothesis& hypothesis,
                   const TaskResources& resources) {
  Diagnosis out;
  if (const auto* p = instance.mwp()) {
    std::optional<mwp::EquationProgram> cand;
    try {
      cand = mwp::ParseEquation(hypothesis.text);
    } catch (const Error&) {
      out.unparseable = true;
      return out;
    }
    auto d = mwp::DiagnoseProgram(p->gold_program, *cand);
    out.errors = std::move(d.errors);
    out.not_expressible = d.not_expressible;
  } else if (const auto* p = instance.snlr()) {
    std::optional<snlr::InferenceChain> cand;
    try {
      cand = snlr::ParseChain(hypothesis.text, p->scenario, resources.lexicon);
    } catch (const Error&) {
      out.unparseable = true;
      return out;
    }
    auto d = snlr::DiagnoseChain(p->scenario, resources.lexicon, p->gold_chain,
                                 *cand);
    out.errors = std::move(d.errors);
    out.not_expressible = d.not_expressible;
  } else {
    const auto& gold = GoldNorm(*instance.moral());
    std::optional<moral::Norm> cand;
    try {
      cand = moral::ParseNorm(hypothesis.text, resources.judgments);
    } catch (const Error&) {
      out.unparseable = true;
      return out;
    }
    auto d = moral::DiagnoseNorm(gold, *cand, resources.overlap_threshold);
    out.errors = std::move(d.errors);
    out.hint = std::move(d.hint);
  }
  return out;
}

bool ExactMatch(const TaskInstance& instance, const Hypothesis& hypothesis,
                const TaskResources& resources) {
  try {
    if (const auto* p = instance.mwp()) {
      return mwp::ComparePrograms(p->gold_program,
                                  mwp::ParseEquation(hypothesis.text));
    }
    if (const auto* p = instance.snlr()) {
      return snlr::ParseChain(hypothesis.text, p->scenario, resources.lexicon)
                 .Render() == p->gold_chain.Render();
    }
    const auto& gold = GoldNorm(*instance.moral());
    return moral::ParseNorm(hypothesis.text, resources.judgments).Render() ==
           gold.Render();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMissingGold) throw;
    return false;
  }
}

std::optional<std::string> DeriveAnswer(const TaskInstance& instance,
                                        const Hypothesis& hypothesis,
                                        const TaskResources& resources) {
  try {
    if (const auto* p = instance.mwp()) {
      return FormatRational(
          mwp::ExecuteProgram(mwp::ParseEquation(hypothesis.text), p->binding));
    }
    if (const auto* p = instance.snlr()) {
      auto chain =
          snlr::ParseChain(hypothesis.text, p->scenario, resources.lexicon);
      if (chain.steps.empty()) return std::nullopt;
      return chain.steps.back().statement.value;
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

std::optional<std::string> GoldAnswer(const TaskInstance& instance) {
  if (const auto* p = instance.mwp()) return FormatRational(p->gold_answer);
  if (const auto* p = instance.snlr()) return p->conclusion.value;
  return std::nullopt;
}

const TaskError& SelectByPriority(const std::vector<TaskError>& errors) {
  if (errors.empty()) {
    throw Error(ErrorCode::kInvariantViolation, "no error to select");
  }
  return *std::min_element(errors.begin(), errors.end(),
                           [](const TaskError& a, const TaskError& b) {
                             return PriorityKey(a) < PriorityKey(b);
                           });
}

Feedback OracleFeedback(const TaskInstance& instance,
                        const Hypothesis& hypothesis,
                        const TaskResources& resources) {
  Diagnosis d = Diagnose(instance, hypothesis, resources);
  if (d.unparseable) return Feedback::Free(std::string(kUnparseableText));
  if (d.not_expressible) return Feedback::Free(std::string(kNotExpressibleText));
  if (d.errors.empty()) return Feedback::Accept();
  const TaskError& chosen = SelectByPriority(d.errors);
  if (std::holds_alternative<errors::SemanticMisalignment>(chosen)) {
    return Feedback::Error(chosen, d.hint);
  }
  return Feedback::Error(chosen);
}

}  // namespace refine
