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

#ifndef REFINE_SNLR_H_
#define REFINE_SNLR_H_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "refine/feedback.h"

namespace refine::snlr {

// (attribute family, value), e.g. (color, viridian). Values are unique
// across families, so a bare value identifies its literal.
struct Literal {
  std::string family;
  std::string value;
  auto operator<=>(const Literal&) const = default;
};

struct Rule {
  int id;
  std::vector<Literal> antecedent;  // one or two literals
  Connective connective = Connective::kAnd;
  Literal consequent;

  bool is_connective() const { return antecedent.size() > 1; }
  bool operator==(const Rule&) const = default;
};

struct Scenario {
  std::string subject;
  std::vector<Rule> rules;
  std::vector<Literal> fact;

  const Rule* FindRule(int id) const;
  bool operator==(const Scenario&) const = default;
};

enum class StepTag { kImplicit, kLookup, kDeduction };

std::string_view StepTagName(StepTag tag);

struct ChainStep {
  int index;
  std::string subject;
  Literal statement;
  StepTag tag;
  std::optional<int> rule_id;
  bool operator==(const ChainStep&) const = default;
};

struct InferenceChain {
  std::vector<ChainStep> steps;

  // `#i: <subject> is <value>` lines joined with '\n'.
  std::string Render() const;
  // Number of rule applications (lookup or deduction steps).
  int Hops() const;
  bool operator==(const InferenceChain&) const = default;
};

// Attribute vocabulary plus the implicit "specific is general" knowledge
// (viridian -> green). The implicit map is acyclic and single-valued.
class Lexicon {
 public:
  Lexicon(std::map<std::string, std::string> family_of,
          std::map<std::string, std::string> implicit);

  static const Lexicon& Default();

  std::optional<std::string> FamilyOf(std::string_view value) const;
  std::optional<Literal> Generalize(const Literal& literal) const;
  Literal MakeLiteral(std::string_view value) const;

  // Values of one family, in lexicographic order.
  std::vector<std::string> ValuesOf(std::string_view family) const;
  // Specific values that generalize to `general`.
  std::vector<std::string> SpecificsOf(std::string_view general) const;

  const std::map<std::string, std::string>& family_of() const {
    return family_of_;
  }
  const std::map<std::string, std::string>& implicit() const {
    return implicit_;
  }

 private:
  std::map<std::string, std::string> family_of_;
  std::map<std::string, std::string> implicit_;
};

struct Solution {
  InferenceChain chain;
  Literal conclusion;
};

// Forward chaining with implicit-knowledge expansion. Rules are tried in id
// order and the first applicable one fires. The chain keeps only steps that
// support the conclusion. Throws kUnsatisfiable when no rule fires and
// kAmbiguous when more than one derived literal is left unused.
Solution SolveScenario(const Scenario& scenario, const Lexicon& lexicon);

// Every literal known at the forward-chaining fixpoint: fact, implicit
// generalizations and rule consequents.
std::set<Literal> KnownLiterals(const Scenario& scenario,
                                const Lexicon& lexicon);

bool RuleSatisfied(const Rule& rule, const std::set<Literal>& known);

struct GeneratedScenario {
  Scenario scenario;
  InferenceChain gold;
  Literal conclusion;
};

// Seeded 5-rule scenario. hops == 1: a single rule application, with an
// implicit step half of the time. hops == 2 ("hard"): an implicit step,
// an `or` rule, then an `and` rule. At least two distractor rules share
// attributes with the gold path and none of them ever fires.
GeneratedScenario GenerateScenario(std::uint64_t seed, int hops,
                                   const Lexicon& lexicon);

struct SnlrDiagnosis {
  // LogicallyInvalid entries in candidate order, then
  // MissingImplicitKnowledge, then MissingLink.
  std::vector<TaskError> errors;
  bool not_expressible = false;
  bool clean() const { return errors.empty() && !not_expressible; }
};

// Rule citations are judged against the scenario's closed world, so an
// omitted premise step shows up as a missing step rather than as an invalid
// rule application.
SnlrDiagnosis DiagnoseChain(const Scenario& scenario, const Lexicon& lexicon,
                            const InferenceChain& gold,
                            const InferenceChain& cand);

// Parses `#i: <subject> is <value>` lines. Tags and rule citations are
// inferred against the scenario. Throws kSyntax / kNonContiguousSteps.
InferenceChain ParseChain(std::string_view text, const Scenario& scenario,
                          const Lexicon& lexicon);

// Text layout shared with the dataset format:
//   "rule 3: if X is green and X is big then X is soft"
//   "rose is viridian and rose is tall"
std::string RenderRule(const Rule& rule);
std::string RenderFact(const Scenario& scenario);
Rule ParseRule(std::string_view text, const Lexicon& lexicon);
// Returns (subject, literals).
std::pair<std::string, std::vector<Literal>> ParseFact(std::string_view text,
                                                       const Lexicon& lexicon);
std::string RenderLiteral(const std::string& subject, const Literal& literal);

}  // namespace refine::snlr

#endif  // REFINE_SNLR_H_
