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

#ifndef REFINE_TESTS_TESTKIT_H_
#define REFINE_TESTS_TESTKIT_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "refine/mwp.h"
#include "refine/rng.h"
#include "refine/snlr.h"
#include "refine/task.h"

namespace refine::testkit {

// Seeded instance sets. Ids are "<prefix>-%05d".
std::vector<TaskInstance> MwpInstances(int count, std::uint64_t seed);
// Alternates one- and two-hop scenarios.
std::vector<TaskInstance> SnlrInstances(int count, std::uint64_t seed);
// Synthetic moral stories built from small phrase tables. Every context
// carries at least two infinitive verb phrases unrelated to the norm.
std::vector<TaskInstance> MoralInstances(int count, std::uint64_t seed);

struct RandomProgram {
  mwp::EquationProgram program;
  mwp::VariableBinding binding;
};

// 1-6 steps over 2-5 variables valued 0..12, constants 0..9 and earlier
// steps. Division by zero is possible on purpose.
RandomProgram MakeRandomProgram(Rng& rng);

// Fraction on 128-bit integers, kept apart from the library's rational type.
struct Fraction {
  __int128 num = 0;
  __int128 den = 1;
};

// Expands each step into an expression tree and evaluates it recursively.
// Returns the last step's value; empty on division by zero anywhere or a
// missing binding.
std::optional<Fraction> TreeEvaluate(const mwp::EquationProgram& program,
                                     const mwp::VariableBinding& binding);

bool SameValue(const Fraction& f, const Rational& r);

// Any taxonomy entry with random parameters. Snippets and hints are short
// word sequences.
TaskError RandomTaskError(Rng& rng);
std::string RandomWords(Rng& rng, int min_words, int max_words);

// The nine template strings, one per line, as checked into the golden file.
std::vector<TaskError> GoldenTemplateErrors();

// Probability that one uniform random taxonomy draw, as the noisy critic
// makes it, equals `verdict`. Worked out from the draw's shape, not by
// sampling.
double RandomAgreementProbability(const TaskInstance& instance,
                                  const Hypothesis& hypothesis,
                                  const Feedback& verdict,
                                  const TaskResources& resources);

// Naive fixpoint: sweep every rule and every implicit edge until nothing
// changes.
std::set<snlr::Literal> Saturate(const snlr::Scenario& scenario,
                                 const snlr::Lexicon& lexicon);

}  // namespace refine::testkit

#endif  // REFINE_TESTS_TESTKIT_H_
