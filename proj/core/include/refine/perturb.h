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

#ifndef REFINE_PERTURB_H_
#define REFINE_PERTURB_H_

#include <cstdint>
#include <string>
#include <vector>

#include "refine/feedback.h"
#include "refine/task.h"

namespace refine {

// One single-edit perturbation of a gold hypothesis. `rule` names the edit
// that fired, e.g. "replace_operator".
struct MwpPerturbation {
  mwp::EquationProgram program;
  TaskError error;
  std::string rule;
};
struct SnlrPerturbation {
  snlr::InferenceChain chain;
  TaskError error;
  std::string rule;
};
struct MoralPerturbation {
  moral::Norm norm;
  TaskError error;
  std::optional<std::string> hint;
  std::string rule;
};

// All three throw kNotApplicable when the gold hypothesis does not admit the
// requested edit.
//
// IncorrectOperators swaps one step's operator; IncorrectNumbers points one
// variable or step-reference operand at a different variable;
// MissingOperators drops the last step.
MwpPerturbation PerturbMwp(const mwp::EquationProgram& gold,
                           const mwp::VariableBinding& binding, ErrorKind kind,
                           std::uint64_t seed);

// MissingImplicitKnowledge / MissingLink delete one implicit / rule step.
// LogicallyInvalid inserts the consequent of a connective rule whose
// antecedent never holds, right after the step that makes it look plausible.
SnlrPerturbation PerturbSnlr(const snlr::Scenario& scenario,
                             const snlr::InferenceChain& gold, ErrorKind kind,
                             std::uint64_t seed, const snlr::Lexicon& lexicon);

// Contradiction inverts the judgment (sometimes as a paraphrase when a
// synonym table is loaded). SemanticMisalignment swaps in a context verb
// phrase and, half of the time, a random judgment; the hint is the gold
// action phrase.
MoralPerturbation PerturbMoral(const moral::Norm& gold,
                               const moral::MoralContext& context,
                               ErrorKind kind, std::uint64_t seed,
                               const TaskResources& resources);

// A pool entry: (x, z, z', f) plus how it was made.
struct FeedbackRecord {
  std::string id;  // "<instance id>:<kind>:<rep>"
  std::string instance_id;
  Task task;
  ErrorKind kind;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string rule;
  std::string context;
  Hypothesis plausible;
  Hypothesis implausible;
  Feedback feedback;

  bool operator==(const FeedbackRecord&) const = default;
};

// Perturbs and verifies: throws kNotApplicable, or kInconsistentRecord if
// re-diagnosing the result does not give back exactly the injected error.
FeedbackRecord MakeRecord(const TaskInstance& instance, ErrorKind kind,
                          int rep, std::uint64_t global_seed,
                          const TaskResources& resources);

// Throws kInconsistentRecord unless the oracle diagnosis of the implausible
// hypothesis is exactly the recorded feedback's single error.
void VerifyRecord(const TaskInstance& instance, const FeedbackRecord& record,
                  const TaskResources& resources);

struct PoolSpec {
  std::vector<ErrorKind> kinds;  // kinds of other tasks are ignored
  int per_kind = 1;
  std::uint64_t seed = 0;
  int parallelism = 1;
};

struct SkippedPerturbation {
  std::string instance_id;
  ErrorKind kind;
  int rep;
  std::string reason;
};

struct PoolResult {
  std::vector<FeedbackRecord> records;  // sorted by (instance id, kind, rep)
  std::vector<SkippedPerturbation> skipped;
};

// Deterministic for a fixed spec regardless of parallelism. Aborts with
// kInconsistentRecord on the first record that fails verification.
PoolResult BuildPool(const std::vector<TaskInstance>& instances,
                     const PoolSpec& spec, const TaskResources& resources);

}  // namespace refine

#endif  // REFINE_PERTURB_H_
