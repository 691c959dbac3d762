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

#include "refine/perturb.h"

#include <algorithm>
#include <set>
#include <tuple>

#include "refine/error.h"
#include "refine/parallel.h"
#include "refine/rng.h"

namespace refine {
namespace {

[[noreturn]] void NotApplicable(const std::string& why) {
  throw Error(ErrorCode::kNotApplicable, why);
}

void Renumber(snlr::InferenceChain& chain) {
  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    chain.steps[i].index = static_cast<int>(i);
  }
}

std::vector<int> InScopeVariables(const mwp::EquationProgram& program,
                                  const mwp::VariableBinding& binding) {
  std::set<int> vars;
  for (const auto& [k, v] : binding) vars.insert(k);
  for (const auto& step : program.steps()) {
    for (const auto* operand : {&step.lhs, &step.rhs}) {
      if (const auto* var = std::get_if<mwp::Variable>(operand)) {
        vars.insert(var->index);
      }
    }
  }
  return {vars.begin(), vars.end()};
}

}  // namespace

MwpPerturbation PerturbMwp(const mwp::EquationProgram& gold,
                           const mwp::VariableBinding& binding, ErrorKind kind,
                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<mwp::EquationStep> steps = gold.steps();
  switch (kind) {
    case ErrorKind::kIncorrectOperators: {
      const std::size_t i = rng.Index(steps.size());
      std::vector<mwp::Op> others;
      for (mwp::Op op : mwp::kAllOps) {
        if (op != steps[i].op) others.push_back(op);
      }
      steps[i].op = rng.Pick(others);
      return {mwp::EquationProgram(std::move(steps)),
              errors::IncorrectOperators{static_cast<int>(i)},
              "replace_operator"};
    }
    case ErrorKind::kIncorrectNumbers: {
      const std::vector<int> vars = InScopeVariables(gold, binding);
      struct Slot {
        std::size_t step;
        OperandPosition position;
        std::vector<int> alternatives;
      };
      std::vector<Slot> slots;
      for (std::size_t i = 0; i < steps.size(); ++i) {
        for (OperandPosition pos :
             {OperandPosition::kFirst, OperandPosition::kSecond}) {
          const mwp::Operand& operand = steps[i].operand(pos);
          if (std::holds_alternative<mwp::Constant>(operand)) continue;
          std::vector<int> alternatives;
          for (int k : vars) {
            if (operand != mwp::Operand(mwp::Variable{k})) {
              alternatives.push_back(k);
            }
          }
          if (!alternatives.empty()) {
            slots.push_back({i, pos, std::move(alternatives)});
          }
        }
      }
      if (slots.empty()) NotApplicable("no operand has an alternative variable");
      const Slot& slot = rng.Pick(slots);
      steps[slot.step].operand(slot.position) =
          mwp::Variable{rng.Pick(slot.alternatives)};
      return {mwp::EquationProgram(std::move(steps)),
              errors::IncorrectNumbers{slot.position,
                                       static_cast<int>(slot.step)},
              "replace_operand"};
    }
    case ErrorKind::kMissingOperators: {
      if (steps.size() < 2) NotApplicable("cannot truncate a one-step program");
      steps.pop_back();
      return {mwp::EquationProgram(std::move(steps)), errors::MissingOperators{},
              "truncate_last_step"};
    }
    default:
      NotApplicable(std::string(ErrorKindName(kind)) + " is not an MWP error");
  }
}

SnlrPerturbation PerturbSnlr(const snlr::Scenario& scenario,
                             const snlr::InferenceChain& gold, ErrorKind kind,
                             std::uint64_t seed, const snlr::Lexicon& lexicon) {
  Rng rng(seed);
  snlr::InferenceChain chain = gold;
  switch (kind) {
    case ErrorKind::kMissingImplicitKnowledge:
    case ErrorKind::kMissingLink: {
      const bool implicit = kind == ErrorKind::kMissingImplicitKnowledge;
      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < chain.steps.size(); ++i) {
        const bool is_implicit = chain.steps[i].tag == snlr::StepTag::kImplicit;
        if (is_implicit == implicit) candidates.push_back(i);
      }
      if (candidates.empty()) {
        NotApplicable(implicit ? "chain has no implicit step"
                               : "chain has no rule step");
      }
      if (chain.steps.size() < 2) NotApplicable("cannot delete the only step");
      chain.steps.erase(chain.steps.begin() +
                        static_cast<std::ptrdiff_t>(rng.Pick(candidates)));
      Renumber(chain);
      if (implicit) {
        return {std::move(chain), errors::MissingImplicitKnowledge{},
                "delete_implicit_step"};
      }
      return {std::move(chain), errors::MissingLink{}, "delete_rule_step"};
    }
    case ErrorKind::kLogicallyInvalid: {
      const std::set<snlr::Literal> known = snlr::KnownLiterals(scenario, lexicon);
      std::map<snlr::Literal, int> consequent_count;
      for (const auto& rule : scenario.rules) ++consequent_count[rule.consequent];
      std::vector<const snlr::Rule*> candidates;
      for (const auto& rule : scenario.rules) {
        if (!rule.is_connective() || snlr::RuleSatisfied(rule, known)) continue;
        if (consequent_count[rule.consequent] != 1) continue;
        if (known.count(rule.consequent)) continue;
        candidates.push_back(&rule);
      }
      if (candidates.empty()) {
        NotApplicable("no connective rule with an unsatisfied antecedent");
      }
      const snlr::Rule& rule = *rng.Pick(candidates);
      // After the last chain step that states part of the antecedent.
      std::size_t at = 0;
      for (std::size_t i = 0; i < chain.steps.size(); ++i) {
        const auto& statement = chain.steps[i].statement;
        if (std::find(rule.antecedent.begin(), rule.antecedent.end(),
                      statement) != rule.antecedent.end()) {
          at = i + 1;
        }
      }
      const bool from_fact_only = std::all_of(
          rule.antecedent.begin(), rule.antecedent.end(),
          [&](const snlr::Literal& l) {
            return !known.count(l) ||
                   std::find(scenario.fact.begin(), scenario.fact.end(), l) !=
                       scenario.fact.end();
          });
      chain.steps.insert(
          chain.steps.begin() + static_cast<std::ptrdiff_t>(at),
          snlr::ChainStep{0, scenario.subject, rule.consequent,
                          from_fact_only ? snlr::StepTag::kLookup
                                         : snlr::StepTag::kDeduction,
                          rule.id});
      Renumber(chain);
      return {std::move(chain),
              errors::LogicallyInvalid{rule.connective, rule.id},
              "apply_unsatisfied_rule"};
    }
    default:
      NotApplicable(std::string(ErrorKindName(kind)) + " is not an sNLR error");
  }
}

MoralPerturbation PerturbMoral(const moral::Norm& gold,
                               const moral::MoralContext& context,
                               ErrorKind kind, std::uint64_t seed,
                               const TaskResources& resources) {
  Rng rng(seed);
  const auto& lexicon = resources.judgments;
  switch (kind) {
    case ErrorKind::kContradiction: {
      moral::Norm inverted = moral::InvertJudgment(gold, lexicon, rng.Next());
      std::string rule = "invert_judgment";
      auto paraphrases = lexicon.ParaphrasesOf(inverted.judgment, resources.synonyms);
      if (!paraphrases.empty() && rng.Bernoulli(0.5)) {
        inverted = moral::WithJudgment(inverted,
                                       *lexicon.Find(rng.Pick(paraphrases)));
        rule = "invert_judgment_paraphrased";
      }
      return {std::move(inverted), errors::Contradiction{}, std::nullopt,
              std::move(rule)};
    }
    case ErrorKind::kSemanticMisalignment: {
      std::vector<std::string> phrases;
      for (auto& phrase : moral::ExtractVerbPhrases(context, resources.verbs)) {
        if (moral::TokenF1(gold.action, phrase) < resources.overlap_threshold) {
          phrases.push_back(std::move(phrase));
        }
      }
      if (phrases.empty()) {
        NotApplicable("context has no verb phrase unrelated to the norm action");
      }
      const std::string& action = rng.Pick(phrases);
      const moral::JudgmentForm* form = lexicon.Find(gold.judgment);
      std::string rule = "substitute_action";
      if (rng.Bernoulli(0.5)) {
        form = &rng.Pick(lexicon.forms());
        rule = "substitute_action_and_judgment";
      }
      moral::Norm cand{form->surface, action, form->polarity, form->infinitive};
      std::string snippet = cand.ActionPhrase();
      return {std::move(cand), errors::SemanticMisalignment{std::move(snippet)},
              gold.ActionPhrase(), std::move(rule)};
    }
    default:
      NotApplicable(std::string(ErrorKindName(kind)) + " is not a moral error");
  }
}

void VerifyRecord(const TaskInstance& instance, const FeedbackRecord& record,
                  const TaskResources& resources) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInconsistentRecord,
                "record " + record.id + ": " + why);
  };
  if (record.plausible == record.implausible) fail("perturbation is a no-op");
  const auto* structured = record.feedback.structured();
  if (structured == nullptr) fail("feedback is not structured");
  const Diagnosis d = Diagnose(instance, record.implausible, resources);
  if (d.unparseable) fail("perturbed hypothesis does not parse");
  if (d.errors.size() != 1 || !(d.errors.front() == structured->error)) {
    fail("diagnosis does not match the injected error");
  }
  if (!(OracleFeedback(instance, record.implausible, resources) ==
        record.feedback)) {
    fail("oracle feedback differs from the recorded feedback");
  }
}

FeedbackRecord MakeRecord(const TaskInstance& instance, ErrorKind kind,
                          int rep, std::uint64_t global_seed,
                          const TaskResources& resources) {
  FeedbackRecord record{};
  record.instance_id = instance.id();
  record.task = instance.task();
  record.kind = kind;
  record.rep = rep;
  record.id = instance.id() + ":" + std::string(ErrorKindName(kind)) + ":" +
              std::to_string(rep);
  record.seed = StableHash(global_seed, record.id);
  record.context = ContextText(instance);
  record.plausible = GoldHypothesis(instance);
  if (TaskOf(kind) != instance.task()) {
    NotApplicable(std::string(ErrorKindName(kind)) + " does not belong to task " +
                  std::string(TaskName(instance.task())));
  }
  if (const auto* p = instance.mwp()) {
    auto edit = PerturbMwp(p->gold_program, p->binding, kind, record.seed);
    record.rule = edit.rule;
    record.implausible = Hypothesis{edit.program.Render()};
    record.feedback = Feedback::Error(edit.error);
  } else if (const auto* p = instance.snlr()) {
    auto edit = PerturbSnlr(p->scenario, p->gold_chain, kind, record.seed,
                            resources.lexicon);
    record.rule = edit.rule;
    record.implausible = Hypothesis{edit.chain.Render()};
    record.feedback = Feedback::Error(edit.error);
  } else {
    const auto* m = instance.moral();
    auto edit = PerturbMoral(*m->norm, m->context, kind, record.seed, resources);
    record.rule = edit.rule;
    record.implausible = Hypothesis{edit.norm.Render()};
    record.feedback = Feedback::Error(edit.error, edit.hint);
  }
  VerifyRecord(instance, record, resources);
  return record;
}

PoolResult BuildPool(const std::vector<TaskInstance>& instances,
                     const PoolSpec& spec, const TaskResources& resources) {
  struct Job {
    const TaskInstance* instance;
    ErrorKind kind;
    int rep;
  };
  std::vector<Job> jobs;
  for (const auto& instance : instances) {
    for (ErrorKind kind : spec.kinds) {
      if (TaskOf(kind) != instance.task()) continue;
      for (int rep = 0; rep < spec.per_kind; ++rep) {
        jobs.push_back({&instance, kind, rep});
      }
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    return std::make_tuple(a.instance->id(), a.kind, a.rep) <
           std::make_tuple(b.instance->id(), b.kind, b.rep);
  });

  std::vector<std::optional<FeedbackRecord>> made(jobs.size());
  std::vector<std::optional<std::string>> reasons(jobs.size());
  ParallelFor(jobs.size(), spec.parallelism, [&](std::size_t i) {
    const Job& job = jobs[i];
    try {
      made[i] = MakeRecord(*job.instance, job.kind, job.rep, spec.seed, resources);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotApplicable &&
          e.code() != ErrorCode::kMissingGold) {
        throw;
      }
      reasons[i] = e.what();
    }
  });

  PoolResult out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (made[i]) {
      out.records.push_back(std::move(*made[i]));
    } else {
      out.skipped.push_back({jobs[i].instance->id(), jobs[i].kind, jobs[i].rep,
                             *reasons[i]});
    }
  }
  return out;
}

}  // namespace refine
