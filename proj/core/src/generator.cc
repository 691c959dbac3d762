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

#include "refine/generator.h"

#include <algorithm>
#include <sstream>

#include "refine/error.h"

namespace refine {
namespace {

std::string Trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(Trim(line));
  return out;
}

[[noreturn]] void Exhausted(const std::string& what) {
  throw Error(ErrorCode::kEditSpaceExhausted, "every alternative for " + what +
                                                  " has been tried");
}

std::vector<int> VariablesOf(const mwp::MwpProblem& problem,
                             const mwp::EquationProgram* program) {
  std::set<int> vars;
  for (const auto& [k, v] : problem.binding) vars.insert(k);
  if (vars.empty() && program != nullptr) {
    for (const auto& step : program->steps()) {
      for (const auto* operand : {&step.lhs, &step.rhs}) {
        if (const auto* var = std::get_if<mwp::Variable>(operand)) {
          vars.insert(var->index);
        }
      }
    }
  }
  if (vars.empty()) vars.insert(0);
  return {vars.begin(), vars.end()};
}

std::vector<Proposal> Copies(Hypothesis hypothesis, const ProposeRequest& req) {
  const int k = req.decode.kind == DecodeKind::kGreedy ? 1 : std::max(req.k, 1);
  return std::vector<Proposal>(static_cast<std::size_t>(k),
                               Proposal{std::move(hypothesis), false});
}

bool HasNoHintLine(const std::string& raw) {
  for (const auto& line : Lines(raw)) {
    if (line == kNoHintText) return true;
  }
  return false;
}

}  // namespace

std::vector<Proposal> RepairGenerator::Propose(const ProposeRequest& request) {
  const TaskInstance& instance = *request.instance;
  if (request.previous == nullptr) {
    return Copies(FirstAttempt(instance), request);
  }
  const Feedback::Structured* structured =
      request.feedback == nullptr ? nullptr : request.feedback->structured();
  if (structured == nullptr) return Copies(*request.previous, request);
  if (TaskOf(KindOf(structured->error)) != instance.task()) {
    return Copies(*request.previous, request);
  }
  return Copies(Repair(instance, *request.previous, *structured), request);
}

Hypothesis RepairGenerator::FirstAttempt(const TaskInstance& instance) const {
  if (const auto* p = instance.mwp()) {
    const auto vars = VariablesOf(*p, nullptr);
    const int second = vars.size() > 1 ? vars[1] : vars[0];
    return Hypothesis{"#0: number" + std::to_string(vars[0]) + " + number" +
                      std::to_string(second)};
  }
  if (const auto* p = instance.snlr()) {
    try {
      auto solution = snlr::SolveScenario(p->scenario, resources_.lexicon);
      snlr::InferenceChain first;
      first.steps.push_back(solution.chain.steps.front());
      first.steps.front().index = 0;
      return Hypothesis{first.Render()};
    } catch (const Error&) {
      const std::string value =
          p->scenario.fact.empty() ? "unknown" : p->scenario.fact.front().value;
      return Hypothesis{"#0: " + p->scenario.subject + " is " + value};
    }
  }
  const auto phrases =
      moral::ExtractVerbPhrases(instance.moral()->context, resources_.verbs);
  const std::string action =
      phrases.empty() ? "do the right thing" : phrases.front();
  return Hypothesis{"It's good to " + action + "."};
}

Hypothesis RepairGenerator::Repair(const TaskInstance& instance,
                                   const Hypothesis& previous,
                                   const Feedback::Structured& feedback) {
  if (const auto* p = instance.mwp()) {
    return RepairMwp(*p, previous, feedback.error);
  }
  if (const auto* p = instance.snlr()) {
    return RepairSnlr(*p, previous, feedback.error);
  }
  return RepairMoral(*instance.moral(), previous, feedback);
}

Hypothesis RepairGenerator::RepairMwp(const mwp::MwpProblem& problem,
                                      const Hypothesis& previous,
                                      const TaskError& error) {
  std::optional<mwp::EquationProgram> program;
  try {
    program = mwp::ParseEquation(previous.text);
  } catch (const Error&) {
    return previous;
  }
  std::vector<mwp::EquationStep> steps = program->steps();

  if (const auto* e = std::get_if<errors::IncorrectOperators>(&error)) {
    if (e->step < 0 || e->step >= static_cast<int>(steps.size())) return previous;
    auto& step = steps[static_cast<std::size_t>(e->step)];
    auto& tried = tried_ops_[e->step];
    tried.insert(static_cast<int>(step.op));
    auto next = std::find_if(std::begin(mwp::kAllOps), std::end(mwp::kAllOps),
                             [&](mwp::Op op) {
                               return !tried.count(static_cast<int>(op));
                             });
    if (next == std::end(mwp::kAllOps)) {
      Exhausted("the operator in #" + std::to_string(e->step));
    }
    step.op = *next;
    tried.insert(static_cast<int>(*next));
  } else if (const auto* e = std::get_if<errors::IncorrectNumbers>(&error)) {
    if (e->step < 0 || e->step >= static_cast<int>(steps.size())) return previous;
    auto& step = steps[static_cast<std::size_t>(e->step)];
    mwp::Operand& operand = step.operand(e->position);
    auto& tried = tried_operands_[{e->step, static_cast<int>(e->position)}];
    tried.insert(mwp::RenderOperand(operand));
    std::vector<mwp::Operand> alternatives;
    for (int k : VariablesOf(problem, &*program)) {
      alternatives.push_back(mwp::Variable{k});
    }
    for (int j = 0; j < e->step; ++j) alternatives.push_back(mwp::StepRef{j});
    auto next = std::find_if(alternatives.begin(), alternatives.end(),
                             [&](const mwp::Operand& o) {
                               return !tried.count(mwp::RenderOperand(o));
                             });
    if (next == alternatives.end()) {
      Exhausted("the " + std::string(PositionName(e->position)) +
                " number in #" + std::to_string(e->step));
    }
    operand = *next;
    tried.insert(mwp::RenderOperand(*next));
  } else if (std::holds_alternative<errors::MissingOperators>(error)) {
    if (steps.size() >= kMaxSteps) Exhausted("appending steps");
    const int n = static_cast<int>(steps.size());
    steps.push_back(mwp::EquationStep{n, mwp::Op::kAdd, mwp::StepRef{n - 1},
                                      mwp::Variable{VariablesOf(problem, &*program)[0]}});
  } else {
    return previous;
  }
  return Hypothesis{mwp::EquationProgram(std::move(steps)).Render()};
}

Hypothesis RepairGenerator::RepairSnlr(const SnlrProblem& problem,
                                       const Hypothesis& previous,
                                       const TaskError& error) {
  std::optional<snlr::InferenceChain> chain;
  try {
    chain = snlr::ParseChain(previous.text, problem.scenario, resources_.lexicon);
  } catch (const Error&) {
    return previous;
  }
  auto renumbered = [](snlr::InferenceChain c) {
    for (std::size_t i = 0; i < c.steps.size(); ++i) {
      c.steps[i].index = static_cast<int>(i);
    }
    return Hypothesis{c.Render()};
  };

  if (const auto* e = std::get_if<errors::LogicallyInvalid>(&error)) {
    auto it = std::find_if(chain->steps.begin(), chain->steps.end(),
                           [&](const snlr::ChainStep& s) {
                             return s.rule_id == e->rule;
                           });
    if (it == chain->steps.end()) return previous;
    chain->steps.erase(it);
    return renumbered(std::move(*chain));
  }

  const bool implicit =
      std::holds_alternative<errors::MissingImplicitKnowledge>(error);
  if (!implicit && !std::holds_alternative<errors::MissingLink>(error)) {
    return previous;
  }
  std::optional<snlr::Solution> solution;
  try {
    solution = snlr::SolveScenario(problem.scenario, resources_.lexicon);
  } catch (const Error&) {
    return previous;
  }
  auto present = [&](const snlr::Literal& literal) {
    return std::any_of(chain->steps.begin(), chain->steps.end(),
                       [&](const snlr::ChainStep& s) {
                         return s.statement == literal;
                       });
  };
  const auto& solver_steps = solution->chain.steps;
  for (std::size_t s = 0; s < solver_steps.size(); ++s) {
    const bool is_implicit = solver_steps[s].tag == snlr::StepTag::kImplicit;
    if (is_implicit != implicit || present(solver_steps[s].statement)) continue;
    // Insert after the last candidate step that the solver places earlier.
    std::size_t at = 0;
    for (std::size_t c = 0; c < chain->steps.size(); ++c) {
      for (std::size_t earlier = 0; earlier < s; ++earlier) {
        if (chain->steps[c].statement == solver_steps[earlier].statement) {
          at = c + 1;
        }
      }
    }
    chain->steps.insert(chain->steps.begin() + static_cast<std::ptrdiff_t>(at),
                        solver_steps[s]);
    return renumbered(std::move(*chain));
  }
  return previous;
}

Hypothesis RepairGenerator::RepairMoral(const MoralProblem& problem,
                                        const Hypothesis& previous,
                                        const Feedback::Structured& feedback) {
  (void)problem;
  const auto& lexicon = resources_.judgments;
  std::optional<moral::Norm> norm;
  try {
    norm = moral::ParseNorm(previous.text, lexicon);
  } catch (const Error&) {
    return previous;
  }
  if (std::holds_alternative<errors::Contradiction>(feedback.error)) {
    const moral::JudgmentForm* form = lexicon.Find(norm->judgment);
    tried_judgments_.insert(norm->judgment);
    std::vector<std::string> order = form->inverses;
    for (const auto& other : lexicon.forms()) {
      if (other.polarity != form->polarity) order.push_back(other.surface);
    }
    for (const auto& surface : order) {
      if (tried_judgments_.count(surface)) continue;
      tried_judgments_.insert(surface);
      return Hypothesis{
          moral::WithJudgment(*norm, *lexicon.Find(surface)).Render()};
    }
    Exhausted("the judgment");
  }
  if (std::holds_alternative<errors::SemanticMisalignment>(feedback.error)) {
    if (!feedback.hint) return previous;
    std::string action = Trim(*feedback.hint);
    if (action.rfind("to ", 0) == 0) action = Trim(action.substr(3));
    while (!action.empty() &&
           (action.back() == '.' || action.back() == '!' || action.back() == '?')) {
      action.pop_back();
    }
    if (action.empty()) return previous;
    norm->action = action;
    return Hypothesis{norm->Render()};
  }
  return previous;
}

ScriptedGenerator::ScriptedGenerator(std::vector<std::string> script)
    : script_(std::move(script)) {
  if (script_.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "scripted generator needs a script");
  }
}

std::unique_ptr<ScriptedGenerator> ScriptedGenerator::FromFixture(
    const FixtureSet& fixtures, const std::string& id) {
  auto it = fixtures.find(id);
  if (it == fixtures.end() || it->second.empty()) {
    throw Error(ErrorCode::kUnknownFixture, "no fixture named " + id);
  }
  return std::make_unique<ScriptedGenerator>(it->second);
}

std::vector<Proposal> ScriptedGenerator::Propose(const ProposeRequest& request) {
  const std::size_t at =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(request.turn, 0)),
                            script_.size() - 1);
  const std::string& raw = script_[at];
  auto proposals = Copies(Hypothesis{raw}, request);
  if (HasNoHintLine(raw)) {
    for (auto& p : proposals) p.emitted_no_hint = true;
  }
  return proposals;
}

Proposal ExtractProposal(const TaskInstance& instance, const std::string& raw,
                         const TaskResources& resources) {
  Proposal out;
  out.emitted_no_hint = HasNoHintLine(raw);
  const auto lines = Lines(raw);
  if (instance.task() == Task::kMoral) {
    for (const auto& line : lines) {
      try {
        out.hypothesis.text =
            moral::ParseNorm(line, resources.judgments).Render();
        return out;
      } catch (const Error&) {
      }
    }
  } else {
    // First run of consecutive "#i: ..." lines.
    std::string block;
    bool started = false;
    for (const auto& line : lines) {
      const bool step_line = !line.empty() && line.front() == '#';
      if (step_line) {
        if (!block.empty()) block += '\n';
        block += line;
        started = true;
      } else if (started) {
        break;
      }
    }
    try {
      if (const auto* p = instance.snlr()) {
        out.hypothesis.text =
            snlr::ParseChain(block, p->scenario, resources.lexicon).Render();
      } else {
        out.hypothesis.text = mwp::ParseEquation(block).Render();
      }
      if (!block.empty()) return out;
    } catch (const Error&) {
    }
  }
  out.hypothesis.text = Trim(raw);
  return out;
}

RemoteGenerator::RemoteGenerator(std::shared_ptr<CompletionTransport> transport,
                                 PromptRecipe recipe, RetryPolicy retry,
                                 const TaskResources& resources, int max_tokens)
    : transport_(std::move(transport)),
      recipe_(std::move(recipe)),
      retry_(retry),
      resources_(resources),
      max_tokens_(max_tokens) {}

std::vector<Proposal> RemoteGenerator::Propose(const ProposeRequest& request) {
  const TaskInstance& instance = *request.instance;
  std::string feedback_text;
  if (request.feedback != nullptr) feedback_text = request.feedback->rendered();
  CompletionRequest completion;
  completion.prompt = recipe_.RenderGenerator(
      ContextText(instance),
      request.previous == nullptr ? nullptr : &request.previous->text,
      request.feedback == nullptr ? nullptr : &feedback_text);
  completion.max_tokens = max_tokens_;
  int k = 1;
  if (request.decode.kind == DecodeKind::kSampled) {
    completion.temperature = 1.0;
    completion.top_p = request.decode.top_p;
    k = std::max(request.k, 1);
  }
  std::vector<Proposal> out;
  for (int i = 0; i < k; ++i) {
    out.push_back(ExtractProposal(
        instance, CompleteWithRetry(*transport_, completion, retry_),
        resources_));
  }
  return out;
}

}  // namespace refine
