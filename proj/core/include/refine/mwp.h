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

#ifndef REFINE_MWP_H_
#define REFINE_MWP_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "refine/feedback.h"
#include "refine/rational.h"

namespace refine::mwp {

enum class Op { kAdd, kSub, kMul, kDiv };

inline constexpr Op kAllOps[] = {Op::kAdd, Op::kSub, Op::kMul, Op::kDiv};

char OpSymbol(Op op);

// `number{index}` in the abstracted problem text.
struct Variable {
  int index;
  bool operator==(const Variable&) const = default;
};
struct Constant {
  Rational value;
  bool operator==(const Constant&) const = default;
};
// `#{step}`: the value of an earlier step.
struct StepRef {
  int step;
  bool operator==(const StepRef&) const = default;
};

using Operand = std::variant<Variable, Constant, StepRef>;

std::string RenderOperand(const Operand& operand);

struct EquationStep {
  int index;
  Op op;
  Operand lhs;
  Operand rhs;
  bool operator==(const EquationStep&) const = default;

  const Operand& operand(OperandPosition position) const {
    return position == OperandPosition::kFirst ? lhs : rhs;
  }
  Operand& operand(OperandPosition position) {
    return position == OperandPosition::kFirst ? lhs : rhs;
  }
};

// A straight-line equation program. Steps are numbered 0..n-1, refer only to
// earlier steps, and the last step is the result.
class EquationProgram {
 public:
  // Validates the invariants; throws refine::Error.
  explicit EquationProgram(std::vector<EquationStep> steps);

  const std::vector<EquationStep>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  const EquationStep& step(std::size_t i) const { return steps_[i]; }

  // Canonical wire form: one `#i: lhs op rhs` line per step, '\n'-joined.
  std::string Render() const;

  bool operator==(const EquationProgram&) const = default;

 private:
  std::vector<EquationStep> steps_;
};

// Values abstracted out of the problem text, keyed by variable index.
using VariableBinding = std::map<int, Rational>;

struct MwpProblem {
  std::string id;
  std::string text;
  VariableBinding binding;
  EquationProgram gold_program;
  Rational gold_answer;
};

// Parses the `#i: a op b` surface syntax. Blank lines are ignored. Throws
// refine::Error with kSyntax (position = character offset),
// kForwardReference or kNonContiguousSteps.
EquationProgram ParseEquation(std::string_view src);

// Evaluates steps in order with exact arithmetic; throws kDivisionByZero
// (position = step index) or kMissingBinding.
Rational ExecuteProgram(const EquationProgram& program,
                        const VariableBinding& binding);

// Strict exact match on canonical renderings. (a + b) and (b + a) differ.
bool ComparePrograms(const EquationProgram& gold, const EquationProgram& cand);

struct MwpDiagnosis {
  // Canonical order: MissingOperators first, then per aligned step the
  // operator error followed by first and second operand errors.
  std::vector<TaskError> errors;
  // Set when the candidate differs in a way the taxonomy cannot name (e.g.
  // more steps than gold). `errors` is empty in that case.
  bool not_expressible = false;

  bool clean() const { return errors.empty() && !not_expressible; }
};

MwpDiagnosis DiagnoseProgram(const EquationProgram& gold,
                             const EquationProgram& cand);

// Seeded synthetic problem: 2-4 distinct variable values in [1, 20], 1-3
// steps, guaranteed to execute. Concrete numbers appear in `text`.
struct SyntheticMwp {
  std::string id;
  std::string text;
  std::vector<Rational> numbers;
  std::string equation;  // infix over the concrete numbers
  Rational answer;
};
SyntheticMwp GenerateMwp(std::uint64_t seed, std::string id);

// Numbers in textual order, each replaced by `number{k}` in the text.
struct AbstractedText {
  std::string text;
  std::vector<Rational> numbers;
};
AbstractedText AbstractNumbers(std::string_view text);

// Converts an infix expression with parentheses into step form by post-order
// traversal. Operands may be `number{k}` tokens or literal numbers; a literal
// equal to one of `numbers` becomes that variable (repeated values are
// assigned in order of appearance), any other literal stays a constant.
// Throws kSyntax, including for an expression without an operator.
EquationProgram ProgramFromInfix(std::string_view infix,
                                 const std::vector<Rational>& numbers);

MwpProblem ProblemFromSynthetic(const SyntheticMwp& synthetic);

}  // namespace refine::mwp

#endif  // REFINE_MWP_H_
