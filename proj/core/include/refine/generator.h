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

#ifndef REFINE_GENERATOR_H_
#define REFINE_GENERATOR_H_

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "refine/completion.h"
#include "refine/feedback.h"
#include "refine/prompt.h"
#include "refine/task.h"

namespace refine {

enum class DecodeKind { kGreedy, kSampled };

struct DecodePolicy {
  DecodeKind kind = DecodeKind::kGreedy;
  double top_p = 0.5;  // used by sampled decoding only
};

struct Proposal {
  Hypothesis hypothesis;
  // The raw output contained a line reading exactly "No hint".
  bool emitted_no_hint = false;
};

struct ProposeRequest {
  const TaskInstance* instance = nullptr;
  const Hypothesis* previous = nullptr;  // null on a first attempt
  const Feedback* feedback = nullptr;    // feedback on `previous`
  int turn = 0;                          // proposals made so far in this run
  int k = 1;
  DecodePolicy decode;
};

// Returns at least one proposal; exactly one under greedy decoding.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::vector<Proposal> Propose(const ProposeRequest& request) = 0;
  virtual std::string_view kind() const = 0;
};

// Applies structured feedback by direct edits, remembering which
// alternatives it already tried so operator and operand feedback (which name
// the fault but not the fix) still make progress. One instance per run.
//
// Operators are tried in the order + - * /. Operand alternatives are the
// problem's variables in index order, then earlier steps. MissingOperators
// appends "#n: #(n-1) + number0". sNLR gaps are filled with the matching
// step of the solver's chain; an invalid rule application is removed. A
// contradiction takes the next untried opposite-polarity judgment; a
// misalignment hint becomes the new action. Feedback it cannot act on leaves
// the hypothesis unchanged. Throws kEditSpaceExhausted when every
// alternative for the named fault has been tried.
class RepairGenerator : public Generator {
 public:
  explicit RepairGenerator(const TaskResources& resources)
      : resources_(resources) {}
  std::vector<Proposal> Propose(const ProposeRequest& request) override;
  std::string_view kind() const override { return "repair"; }

  static constexpr std::size_t kMaxSteps = 8;

 private:
  Hypothesis FirstAttempt(const TaskInstance& instance) const;
  Hypothesis Repair(const TaskInstance& instance, const Hypothesis& previous,
                    const Feedback::Structured& feedback);
  Hypothesis RepairMwp(const mwp::MwpProblem& problem,
                       const Hypothesis& previous, const TaskError& error);
  Hypothesis RepairSnlr(const SnlrProblem& problem, const Hypothesis& previous,
                        const TaskError& error);
  Hypothesis RepairMoral(const MoralProblem& problem,
                         const Hypothesis& previous,
                         const Feedback::Structured& feedback);

  const TaskResources& resources_;
  std::map<int, std::set<int>> tried_ops_;
  std::map<std::pair<int, int>, std::set<std::string>> tried_operands_;
  std::set<std::string> tried_judgments_;
};

// fixture id -> hypothesis texts, one per turn.
using FixtureSet = std::map<std::string, std::vector<std::string>>;

// Replays a fixed sequence; past its end it repeats the last entry.
class ScriptedGenerator : public Generator {
 public:
  explicit ScriptedGenerator(std::vector<std::string> script);
  // Throws kUnknownFixture.
  static std::unique_ptr<ScriptedGenerator> FromFixture(
      const FixtureSet& fixtures, const std::string& id);

  std::vector<Proposal> Propose(const ProposeRequest& request) override;
  std::string_view kind() const override { return "scripted"; }

 private:
  std::vector<std::string> script_;
};

// Lenient reading of a raw completion: the first block that parses as a
// hypothesis for the task, else the trimmed text as an opaque hypothesis.
Proposal ExtractProposal(const TaskInstance& instance, const std::string& raw,
                         const TaskResources& resources);

// Sends one request per sample. Greedy: temperature 0, top_p 1. Sampled:
// temperature 1 with the policy's top_p. Transport failures propagate as
// kTransport / kTimeout after the retry budget.
class RemoteGenerator : public Generator {
 public:
  RemoteGenerator(std::shared_ptr<CompletionTransport> transport,
                  PromptRecipe recipe, RetryPolicy retry,
                  const TaskResources& resources, int max_tokens = 256);
  std::vector<Proposal> Propose(const ProposeRequest& request) override;
  std::string_view kind() const override { return "remote"; }

 private:
  std::shared_ptr<CompletionTransport> transport_;
  PromptRecipe recipe_;
  RetryPolicy retry_;
  const TaskResources& resources_;
  int max_tokens_;
};

}  // namespace refine

#endif  // REFINE_GENERATOR_H_
