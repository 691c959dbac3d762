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

#include "refine/mwp.h"

#include <cctype>
#include <sstream>
#include <utility>

#include "refine/error.h"
#include "refine/rng.h"

namespace refine::mwp {
namespace {

class LineParser {
 public:
  LineParser(std::string_view src, std::size_t base)
      : src_(src), base_(base) {}

  EquationStep Parse(int expected_index) {
    SkipSpace();
    Expect('#');
    int index = ParseInt();
    if (index != expected_index) {
      throw Error(ErrorCode::kNonContiguousSteps,
                  "expected step #" + std::to_string(expected_index) +
                      " but found #" + std::to_string(index),
                  base_);
    }
    SkipSpace();
    Expect(':');
    Operand lhs = ParseOperand(index);
    SkipSpace();
    Op op = ParseOp();
    Operand rhs = ParseOperand(index);
    SkipSpace();
    if (pos_ != src_.size()) Fail("unexpected trailing input");
    return EquationStep{index, op, std::move(lhs), std::move(rhs)};
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(ErrorCode::kSyntax,
                what + " at offset " + std::to_string(base_ + pos_),
                base_ + pos_);
  }

  void SkipSpace() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' ||
                                  src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  void Expect(char c) {
    if (pos_ >= src_.size() || src_[pos_] != c) {
      Fail(std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  bool AtDigit() const {
    return pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_]));
  }

  int ParseInt() {
    if (!AtDigit()) Fail("expected digits");
    std::int64_t v = 0;
    while (AtDigit()) {
      v = v * 10 + (src_[pos_++] - '0');
      if (v > 1'000'000) Fail("index too large");
    }
    return static_cast<int>(v);
  }

  Operand ParseOperand(int current_step) {
    SkipSpace();
    const std::size_t start = pos_;
    if (pos_ < src_.size() && src_[pos_] == '#') {
      ++pos_;
      int ref = ParseInt();
      if (ref >= current_step) {
        throw Error(ErrorCode::kForwardReference,
                    "step #" + std::to_string(current_step) +
                        " references #" + std::to_string(ref),
                    base_ + start);
      }
      return StepRef{ref};
    }
    static constexpr std::string_view kNumber = "number";
    if (src_.substr(pos_, kNumber.size()) == kNumber) {
      pos_ += kNumber.size();
      return Variable{ParseInt()};
    }
    if (AtDigit() || (pos_ < src_.size() && src_[pos_] == '.')) {
      while (pos_ < src_.size() &&
             (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '.')) {
        ++pos_;
      }
      auto value = ParseRational(src_.substr(start, pos_ - start));
      if (!value) {
        pos_ = start;
        Fail("malformed constant");
      }
      return Constant{*value};
    }
    Fail("expected operand");
  }

  Op ParseOp() {
    if (pos_ < src_.size()) {
      switch (src_[pos_]) {
        case '+': ++pos_; return Op::kAdd;
        case '-': ++pos_; return Op::kSub;
        case '*': ++pos_; return Op::kMul;
        case '/': ++pos_; return Op::kDiv;
        default: break;
      }
    }
    Fail("expected operator");
  }

  std::string_view src_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

Rational Apply(Op op, const Rational& a, const Rational& b, int step) {
  switch (op) {
    case Op::kAdd: return a + b;
    case Op::kSub: return a - b;
    case Op::kMul: return a * b;
    case Op::kDiv:
      if (b.numerator() == 0) {  // int == rational recurses under C++20
        throw Error(ErrorCode::kDivisionByZero,
                    "division by zero in #" + std::to_string(step),
                    static_cast<std::size_t>(step));
      }
      return a / b;
  }
  return a;
}

}  // namespace

char OpSymbol(Op op) {
  switch (op) {
    case Op::kAdd: return '+';
    case Op::kSub: return '-';
    case Op::kMul: return '*';
    case Op::kDiv: return '/';
  }
  return '?';
}

std::string RenderOperand(const Operand& operand) {
  if (const auto* v = std::get_if<Variable>(&operand)) {
    return "number" + std::to_string(v->index);
  }
  if (const auto* s = std::get_if<StepRef>(&operand)) {
    return "#" + std::to_string(s->step);
  }
  return FormatExact(std::get<Constant>(operand).value);
}

EquationProgram::EquationProgram(std::vector<EquationStep> steps)
    : steps_(std::move(steps)) {
  if (steps_.empty()) {
    throw Error(ErrorCode::kSyntax, "program has no steps", 0);
  }
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const auto& step = steps_[i];
    if (step.index != static_cast<int>(i)) {
      throw Error(ErrorCode::kNonContiguousSteps,
                  "step " + std::to_string(i) + " is numbered #" +
                      std::to_string(step.index));
    }
    for (const Operand* operand : {&step.lhs, &step.rhs}) {
      if (const auto* ref = std::get_if<StepRef>(operand)) {
        if (ref->step < 0 || ref->step >= step.index) {
          throw Error(ErrorCode::kForwardReference,
                      "step #" + std::to_string(step.index) + " references #" +
                          std::to_string(ref->step));
        }
      }
      if (const auto* var = std::get_if<Variable>(operand)) {
        if (var->index < 0) {
          throw Error(ErrorCode::kSyntax, "negative variable index");
        }
      }
    }
  }
}

std::string EquationProgram::Render() const {
  std::string out;
  for (const auto& step : steps_) {
    if (!out.empty()) out += '\n';
    out += "#" + std::to_string(step.index) + ": " + RenderOperand(step.lhs) +
           " " + OpSymbol(step.op) + " " + RenderOperand(step.rhs);
  }
  return out;
}

EquationProgram ParseEquation(std::string_view src) {
  std::vector<EquationStep> steps;
  std::size_t line_start = 0;
  while (line_start <= src.size()) {
    std::size_t line_end = src.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = src.size();
    std::string_view line = src.substr(line_start, line_end - line_start);
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      LineParser parser(line, line_start);
      steps.push_back(parser.Parse(static_cast<int>(steps.size())));
    }
    line_start = line_end + 1;
  }
  if (steps.empty()) throw Error(ErrorCode::kSyntax, "empty program", 0);
  return EquationProgram(std::move(steps));
}

Rational ExecuteProgram(const EquationProgram& program,
                        const VariableBinding& binding) {
  std::vector<Rational> values;
  values.reserve(program.size());
  auto resolve = [&](const Operand& operand) -> Rational {
    if (const auto* v = std::get_if<Variable>(&operand)) {
      auto it = binding.find(v->index);
      if (it == binding.end()) {
        throw Error(ErrorCode::kMissingBinding,
                    "no value bound for number" + std::to_string(v->index));
      }
      return it->second;
    }
    if (const auto* s = std::get_if<StepRef>(&operand)) return values[s->step];
    return std::get<Constant>(operand).value;
  };
  for (const auto& step : program.steps()) {
    values.push_back(
        Apply(step.op, resolve(step.lhs), resolve(step.rhs), step.index));
  }
  return values.back();
}

bool ComparePrograms(const EquationProgram& gold, const EquationProgram& cand) {
  return gold.Render() == cand.Render();
}

MwpDiagnosis DiagnoseProgram(const EquationProgram& gold,
                             const EquationProgram& cand) {
  MwpDiagnosis out;
  if (ComparePrograms(gold, cand)) return out;
  if (cand.size() > gold.size()) {
    out.not_expressible = true;
    return out;
  }
  if (cand.size() < gold.size()) out.errors.push_back(errors::MissingOperators{});
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const auto& g = gold.step(i);
    const auto& c = cand.step(i);
    const int step = static_cast<int>(i);
    if (g.op != c.op) out.errors.push_back(errors::IncorrectOperators{step});
    if (RenderOperand(g.lhs) != RenderOperand(c.lhs)) {
      out.errors.push_back(
          errors::IncorrectNumbers{OperandPosition::kFirst, step});
    }
    if (RenderOperand(g.rhs) != RenderOperand(c.rhs)) {
      out.errors.push_back(
          errors::IncorrectNumbers{OperandPosition::kSecond, step});
    }
  }
  if (out.errors.empty()) out.not_expressible = true;
  return out;
}

SyntheticMwp GenerateMwp(std::uint64_t seed, std::string id) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(StableHash(seed, "mwp#" + std::to_string(attempt)));
    const int num_vars = 2 + static_cast<int>(rng.Index(3));
    const int num_steps = 1 + static_cast<int>(rng.Index(num_vars - 1 < 3 ? num_vars - 1 : 3));

    std::vector<int> pool;
    for (int v = 1; v <= 20; ++v) pool.push_back(v);
    rng.Shuffle(pool);
    std::vector<Rational> numbers;
    for (int k = 0; k < num_vars; ++k) numbers.emplace_back(pool[k]);

    std::vector<int> order(num_vars);
    for (int k = 0; k < num_vars; ++k) order[k] = k;
    rng.Shuffle(order);

    // A left-leaning chain: step 0 combines two numbers, every later step
    // combines the previous result with one fresh number.
    std::vector<EquationStep> steps;
    std::vector<std::string> infix;
    auto num_text = [&](int k) { return FormatExact(numbers[k]); };
    std::size_t next_var = 0;
    for (int i = 0; i < num_steps; ++i) {
      Op op = kAllOps[rng.Index(4)];
      Operand lhs, rhs;
      std::string lhs_text, rhs_text;
      if (i == 0) {
        lhs = Variable{order[next_var]};
        lhs_text = num_text(order[next_var++]);
        rhs = Variable{order[next_var]};
        rhs_text = num_text(order[next_var++]);
      } else {
        Operand prev = StepRef{i - 1};
        Operand fresh = Variable{order[next_var]};
        std::string prev_text = "( " + infix.back() + " )";
        std::string fresh_text = num_text(order[next_var++]);
        if (rng.Bernoulli(0.5)) {
          lhs = prev; lhs_text = prev_text; rhs = fresh; rhs_text = fresh_text;
        } else {
          lhs = fresh; lhs_text = fresh_text; rhs = prev; rhs_text = prev_text;
        }
      }
      steps.push_back(EquationStep{i, op, lhs, rhs});
      infix.push_back(lhs_text + " " + OpSymbol(op) + " " + rhs_text);
    }
    EquationProgram program(std::move(steps));
    VariableBinding binding;
    for (int k = 0; k < num_vars; ++k) binding[k] = numbers[k];
    Rational answer;
    try {
      answer = ExecuteProgram(program, binding);
    } catch (const Error&) {
      continue;
    }
    std::ostringstream text;
    text << "Given the quantities ";
    for (int k = 0; k < num_vars; ++k) {
      if (k > 0) text << (k + 1 == num_vars ? " and " : ", ");
      text << num_text(k);
    }
    text << ", work out the amount asked for.";
    return SyntheticMwp{std::move(id), text.str(), std::move(numbers),
                        infix.back(), answer};
  }
}

}  // namespace refine::mwp

namespace refine::mwp {
namespace {

bool IsDigit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

class InfixParser {
 public:
  InfixParser(std::string_view src, const std::vector<Rational>& numbers)
      : src_(src), numbers_(numbers), used_(numbers.size(), false) {}

  EquationProgram Parse() {
    Expr();
    SkipSpace();
    if (pos_ != src_.size()) Fail("unexpected trailing input");
    if (steps_.empty()) Fail("expression has no operator");
    return EquationProgram(std::move(steps_));
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(ErrorCode::kSyntax,
                what + " at offset " + std::to_string(pos_), pos_);
  }

  void SkipSpace() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool Peek(char c) {
    SkipSpace();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  Operand Emit(Op op, Operand lhs, Operand rhs) {
    const int index = static_cast<int>(steps_.size());
    steps_.push_back(EquationStep{index, op, std::move(lhs), std::move(rhs)});
    return StepRef{index};
  }

  Operand Expr() {
    Operand lhs = Term();
    for (;;) {
      if (Peek('+')) {
        ++pos_;
        Operand rhs = Term();
        lhs = Emit(Op::kAdd, std::move(lhs), std::move(rhs));
      } else if (Peek('-')) {
        ++pos_;
        Operand rhs = Term();
        lhs = Emit(Op::kSub, std::move(lhs), std::move(rhs));
      } else {
        return lhs;
      }
    }
  }

  Operand Term() {
    Operand lhs = Factor();
    for (;;) {
      if (Peek('*')) {
        ++pos_;
        Operand rhs = Factor();
        lhs = Emit(Op::kMul, std::move(lhs), std::move(rhs));
      } else if (Peek('/')) {
        ++pos_;
        Operand rhs = Factor();
        lhs = Emit(Op::kDiv, std::move(lhs), std::move(rhs));
      } else {
        return lhs;
      }
    }
  }

  Operand Factor() {
    if (Peek('(')) {
      ++pos_;
      Operand inner = Expr();
      if (!Peek(')')) Fail("expected ')'");
      ++pos_;
      return inner;
    }
    SkipSpace();
    static constexpr std::string_view kNumber = "number";
    if (src_.substr(pos_, kNumber.size()) == kNumber) {
      pos_ += kNumber.size();
      if (pos_ >= src_.size() || !IsDigit(src_[pos_])) Fail("expected digits");
      int k = 0;
      while (pos_ < src_.size() && IsDigit(src_[pos_])) {
        k = k * 10 + (src_[pos_++] - '0');
        if (k > 1'000'000) Fail("index too large");
      }
      return Variable{k};
    }
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (IsDigit(src_[pos_]) || src_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ == start) Fail("expected operand");
    auto value = ParseRational(src_.substr(start, pos_ - start));
    if (!value) {
      pos_ = start;
      Fail("malformed number");
    }
    return Bind(*value);
  }

  Operand Bind(const Rational& value) {
    std::optional<int> reuse;
    for (std::size_t k = 0; k < numbers_.size(); ++k) {
      if (numbers_[k] != value) continue;
      if (!used_[k]) {
        used_[k] = true;
        return Variable{static_cast<int>(k)};
      }
      if (!reuse) reuse = static_cast<int>(k);
    }
    if (reuse) return Variable{*reuse};
    return Constant{value};
  }

  std::string_view src_;
  const std::vector<Rational>& numbers_;
  std::vector<bool> used_;
  std::vector<EquationStep> steps_;
  std::size_t pos_ = 0;
};

}  // namespace

AbstractedText AbstractNumbers(std::string_view text) {
  AbstractedText out;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool boundary =
        i == 0 || !(std::isalnum(static_cast<unsigned char>(text[i - 1])) ||
                    text[i - 1] == '_' || text[i - 1] == '.');
    if (!IsDigit(text[i]) || !boundary) {
      out.text += text[i++];
      continue;
    }
    std::string digits;
    std::size_t j = i;
    while (j < text.size() && IsDigit(text[j])) digits += text[j++];
    // Thousands separators: ",ddd" groups.
    while (j + 3 < text.size() && text[j] == ',' && IsDigit(text[j + 1]) &&
           IsDigit(text[j + 2]) && IsDigit(text[j + 3]) &&
           (j + 4 >= text.size() || !IsDigit(text[j + 4]))) {
      digits += text.substr(j + 1, 3);
      j += 4;
    }
    if (j + 1 < text.size() && text[j] == '.' && IsDigit(text[j + 1])) {
      digits += '.';
      ++j;
      while (j < text.size() && IsDigit(text[j])) digits += text[j++];
    }
    out.text += "number" + std::to_string(out.numbers.size());
    out.numbers.push_back(*ParseRational(digits));
    i = j;
  }
  return out;
}

EquationProgram ProgramFromInfix(std::string_view infix,
                                 const std::vector<Rational>& numbers) {
  return InfixParser(infix, numbers).Parse();
}

MwpProblem ProblemFromSynthetic(const SyntheticMwp& synthetic) {
  AbstractedText abstracted = AbstractNumbers(synthetic.text);
  EquationProgram program =
      ProgramFromInfix(synthetic.equation, abstracted.numbers);
  VariableBinding binding;
  for (std::size_t k = 0; k < abstracted.numbers.size(); ++k) {
    binding[static_cast<int>(k)] = abstracted.numbers[k];
  }
  return MwpProblem{synthetic.id, std::move(abstracted.text),
                    std::move(binding), std::move(program), synthetic.answer};
}

}  // namespace refine::mwp
