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

#ifndef REFINE_TASK_H_
#define REFINE_TASK_H_

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "refine/feedback.h"
#include "refine/moral.h"
#include "refine/mwp.h"
#include "refine/snlr.h"

namespace refine {

struct SnlrProblem {
  std::string id;
  snlr::Scenario scenario;
  snlr::InferenceChain gold_chain;
  snlr::Literal conclusion;
};

struct MoralProblem {
  std::string id;
  moral::MoralContext context;
  std::string norm_text;
  // Empty when the gold norm does not start with a known judgment. Such
  // instances are kept but cannot be perturbed or critiqued by the oracle.
  std::optional<moral::Norm> norm;
  std::string moral_action;
};

using Problem = std::variant<mwp::MwpProblem, SnlrProblem, MoralProblem>;

struct TaskInstance {
  Problem problem;

  const std::string& id() const;
  Task task() const;

  const mwp::MwpProblem* mwp() const { return std::get_if<0>(&problem); }
  const SnlrProblem* snlr() const { return std::get_if<1>(&problem); }
  const MoralProblem* moral() const { return std::get_if<2>(&problem); }
};

// A hypothesis travels as its canonical text: an equation program, an
// inference chain, or a norm sentence. Generators may produce text that does
// not parse; the critic is the one to reject it.
struct Hypothesis {
  std::string text;
  bool operator==(const Hypothesis&) const = default;
};

// Immutable configuration shared by every task operation.
struct TaskResources {
  snlr::Lexicon lexicon = snlr::Lexicon::Default();
  moral::JudgmentLexicon judgments = moral::JudgmentLexicon::Default();
  moral::VerbLexicon verbs = moral::DefaultVerbs();
  moral::SynonymTable synonyms;
  double overlap_threshold = moral::kDefaultOverlapThreshold;

  static const TaskResources& Default();
};

struct Diagnosis {
  std::vector<TaskError> errors;
  bool not_expressible = false;
  bool unparseable = false;
  std::optional<std::string> hint;

  bool clean() const {
    return errors.empty() && !not_expressible && !unparseable;
  }
};

// Throws kMissingGold for a moral instance whose norm did not parse.
Hypothesis GoldHypothesis(const TaskInstance& instance);

// The context x as shown to generators and critics.
std::string ContextText(const TaskInstance& instance);

Diagnosis Diagnose(const TaskInstance& instance, const Hypothesis& hypothesis,
                   const TaskResources& resources);

// Strict equality of canonical renderings; unparseable text never matches.
bool ExactMatch(const TaskInstance& instance, const Hypothesis& hypothesis,
                const TaskResources& resources);

// MWP: the executed value. sNLR: the value of the last chain step. Moral
// norms have no answer. Empty also when the hypothesis cannot be evaluated.
std::optional<std::string> DeriveAnswer(const TaskInstance& instance,
                                        const Hypothesis& hypothesis,
                                        const TaskResources& resources);
std::optional<std::string> GoldAnswer(const TaskInstance& instance);

// Picks the one error the critic reports. MWP: MissingOperators, then
// IncorrectOperators, then IncorrectNumbers, each at its earliest step.
// sNLR: LogicallyInvalid, MissingImplicitKnowledge, MissingLink. Moral:
// Contradiction, SemanticMisalignment. `errors` must be non-empty.
const TaskError& SelectByPriority(const std::vector<TaskError>& errors);

inline constexpr std::string_view kUnparseableText = "unparseable hypothesis";
inline constexpr std::string_view kNotExpressibleText =
    "The hypothesis differs from the reference in a way no template covers.";

// Gold-referenced critique: NoHint for a clean diagnosis, otherwise the
// highest-priority error (moral misalignment carries the gold action hint).
Feedback OracleFeedback(const TaskInstance& instance,
                        const Hypothesis& hypothesis,
                        const TaskResources& resources);

}  // namespace refine

#endif  // REFINE_TASK_H_
