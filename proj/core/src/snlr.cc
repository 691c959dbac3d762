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

#include "refine/snlr.h"

#include <algorithm>
#include <regex>
#include <utility>

#include "refine/error.h"
#include "refine/rng.h"

namespace refine::snlr {
namespace {

std::string Trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

bool SatisfiedBy(const Rule& rule, const std::set<Literal>& facts) {
  return RuleSatisfied(rule, facts);
}

// Full forward-chaining run, before relevance pruning.
struct ChainState {
  std::vector<ChainStep> steps;
  std::vector<std::vector<Literal>> supports;
  std::set<Literal> known;
  std::set<Literal> used_by_rules;
  std::vector<Literal> derived;
};

ChainState ForwardChain(const Scenario& scenario, const Lexicon& lexicon) {
  ChainState state;
  const std::set<Literal> facts(scenario.fact.begin(), scenario.fact.end());
  auto expand = [&](Literal literal) {
    while (auto general = lexicon.Generalize(literal)) {
      if (state.known.count(*general)) break;
      state.known.insert(*general);
      state.steps.push_back(ChainStep{0, scenario.subject, *general,
                                      StepTag::kImplicit, std::nullopt});
      state.supports.push_back({literal});
      literal = *general;
    }
  };
  for (const auto& literal : scenario.fact) state.known.insert(literal);
  for (const auto& literal : scenario.fact) expand(literal);

  std::vector<const Rule*> rules;
  for (const auto& rule : scenario.rules) rules.push_back(&rule);
  std::stable_sort(rules.begin(), rules.end(),
                   [](const Rule* a, const Rule* b) { return a->id < b->id; });

  for (bool fired = true; fired;) {
    fired = false;
    for (const Rule* rule : rules) {
      if (state.known.count(rule->consequent)) continue;
      if (!RuleSatisfied(*rule, state.known)) continue;
      std::vector<Literal> support;
      for (const auto& literal : rule->antecedent) {
        if (state.known.count(literal)) support.push_back(literal);
      }
      for (const auto& literal : support) state.used_by_rules.insert(literal);
      const StepTag tag =
          SatisfiedBy(*rule, facts) ? StepTag::kLookup : StepTag::kDeduction;
      state.known.insert(rule->consequent);
      state.derived.push_back(rule->consequent);
      state.steps.push_back(
          ChainStep{0, scenario.subject, rule->consequent, tag, rule->id});
      state.supports.push_back(std::move(support));
      expand(rule->consequent);
      fired = true;
      break;
    }
  }
  return state;
}

const std::vector<std::string>& Subjects() {
  static const std::vector<std::string> kSubjects = {
      "rose", "tulip", "daisy", "lily", "bob",   "alice",
      "dave", "erin",  "fiona", "gary", "harry", "iris"};
  return kSubjects;
}

}  // namespace

const Rule* Scenario::FindRule(int id) const {
  for (const auto& rule : rules) {
    if (rule.id == id) return &rule;
  }
  return nullptr;
}

std::string_view StepTagName(StepTag tag) {
  switch (tag) {
    case StepTag::kImplicit: return "implicit";
    case StepTag::kLookup: return "lookup";
    case StepTag::kDeduction: return "deduction";
  }
  return "deduction";
}

std::string RenderLiteral(const std::string& subject, const Literal& literal) {
  return subject + " is " + literal.value;
}

std::string InferenceChain::Render() const {
  std::string out;
  for (const auto& step : steps) {
    if (!out.empty()) out += '\n';
    out += "#" + std::to_string(step.index) + ": " +
           RenderLiteral(step.subject, step.statement);
  }
  return out;
}

int InferenceChain::Hops() const {
  return static_cast<int>(std::count_if(
      steps.begin(), steps.end(),
      [](const ChainStep& s) { return s.tag != StepTag::kImplicit; }));
}

Lexicon::Lexicon(std::map<std::string, std::string> family_of,
                 std::map<std::string, std::string> implicit)
    : family_of_(std::move(family_of)), implicit_(std::move(implicit)) {
  for (const auto& [specific, general] : implicit_) {
    if (!family_of_.count(specific) || !family_of_.count(general)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "implicit mapping " + specific + " -> " + general +
                      " uses a value outside the lexicon");
    }
    std::set<std::string> seen = {specific};
    for (std::string at = general;;) {
      if (!seen.insert(at).second) {
        throw Error(ErrorCode::kInvalidConfig,
                    "implicit knowledge is cyclic at " + at);
      }
      auto it = implicit_.find(at);
      if (it == implicit_.end()) break;
      at = it->second;
    }
  }
}

const Lexicon& Lexicon::Default() {
  static const Lexicon kDefault = [] {
    std::map<std::string, std::string> family_of;
    auto add = [&](const std::string& family,
                   std::initializer_list<const char*> values) {
      for (const char* v : values) family_of[v] = family;
    };
    add("color", {"green", "red", "blue", "yellow", "viridian", "emerald",
                  "olive", "crimson", "scarlet", "azure", "cobalt", "navy",
                  "amber", "golden"});
    add("size", {"big", "small", "gigantic", "huge", "tiny", "minuscule"});
    add("shape", {"round", "square", "flat", "tall"});
    add("texture", {"soft", "hard", "rough", "smooth"});
    add("temperature", {"hot", "cold", "warm", "cool"});
    add("mood", {"happy", "sad", "calm", "angry"});
    add("age", {"young", "old"});
    std::map<std::string, std::string> implicit = {
        {"viridian", "green"}, {"emerald", "green"}, {"olive", "green"},
        {"crimson", "red"},    {"scarlet", "red"},   {"azure", "blue"},
        {"cobalt", "blue"},    {"navy", "blue"},     {"amber", "yellow"},
        {"golden", "yellow"},  {"gigantic", "big"},  {"huge", "big"},
        {"tiny", "small"},     {"minuscule", "small"}};
    return Lexicon(std::move(family_of), std::move(implicit));
  }();
  return kDefault;
}

std::optional<std::string> Lexicon::FamilyOf(std::string_view value) const {
  auto it = family_of_.find(std::string(value));
  if (it == family_of_.end()) return std::nullopt;
  return it->second;
}

std::optional<Literal> Lexicon::Generalize(const Literal& literal) const {
  auto it = implicit_.find(literal.value);
  if (it == implicit_.end()) return std::nullopt;
  return MakeLiteral(it->second);
}

Literal Lexicon::MakeLiteral(std::string_view value) const {
  return Literal{FamilyOf(value).value_or(""), std::string(value)};
}

std::vector<std::string> Lexicon::ValuesOf(std::string_view family) const {
  std::vector<std::string> out;
  for (const auto& [value, fam] : family_of_) {
    if (fam == family) out.push_back(value);
  }
  return out;
}

std::vector<std::string> Lexicon::SpecificsOf(std::string_view general) const {
  std::vector<std::string> out;
  for (const auto& [specific, gen] : implicit_) {
    if (gen == general) out.push_back(specific);
  }
  return out;
}

bool RuleSatisfied(const Rule& rule, const std::set<Literal>& known) {
  if (rule.antecedent.empty()) return false;
  if (rule.connective == Connective::kOr) {
    return std::any_of(rule.antecedent.begin(), rule.antecedent.end(),
                       [&](const Literal& l) { return known.count(l) > 0; });
  }
  return std::all_of(rule.antecedent.begin(), rule.antecedent.end(),
                     [&](const Literal& l) { return known.count(l) > 0; });
}

std::set<Literal> KnownLiterals(const Scenario& scenario,
                                const Lexicon& lexicon) {
  return ForwardChain(scenario, lexicon).known;
}

Solution SolveScenario(const Scenario& scenario, const Lexicon& lexicon) {
  ChainState state = ForwardChain(scenario, lexicon);
  if (state.derived.empty()) {
    throw Error(ErrorCode::kUnsatisfiable,
                "no rule applies to the fact about " + scenario.subject);
  }
  std::vector<Literal> sinks;
  for (const auto& literal : state.derived) {
    if (!state.used_by_rules.count(literal)) sinks.push_back(literal);
  }
  if (sinks.size() != 1) {
    std::string names;
    for (const auto& s : sinks) names += (names.empty() ? "" : ", ") + s.value;
    throw Error(ErrorCode::kAmbiguous,
                "scenario has " + std::to_string(sinks.size()) +
                    " distinct conclusions: " + names);
  }
  const Literal conclusion = sinks.front();

  std::set<Literal> needed = {conclusion};
  std::vector<bool> keep(state.steps.size(), false);
  for (std::size_t i = state.steps.size(); i-- > 0;) {
    if (needed.count(state.steps[i].statement)) {
      keep[i] = true;
      for (const auto& s : state.supports[i]) needed.insert(s);
    }
  }
  Solution out{{}, conclusion};
  for (std::size_t i = 0; i < state.steps.size(); ++i) {
    if (!keep[i]) continue;
    ChainStep step = state.steps[i];
    step.index = static_cast<int>(out.chain.steps.size());
    out.chain.steps.push_back(std::move(step));
  }
  return out;
}

GeneratedScenario GenerateScenario(std::uint64_t seed, int hops,
                                   const Lexicon& lexicon) {
  if (hops != 1 && hops != 2) {
    throw Error(ErrorCode::kInvalidConfig, "hops must be 1 or 2");
  }
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(StableHash(seed, "snlr/" + std::to_string(hops) + "/" +
                                 std::to_string(attempt)));
    auto lit = [&](const std::string& v) { return lexicon.MakeLiteral(v); };

    const std::string family = rng.Bernoulli(0.5) ? "color" : "size";
    std::vector<std::string> generals;
    for (const auto& v : lexicon.ValuesOf(family)) {
      if (!lexicon.SpecificsOf(v).empty()) generals.push_back(v);
    }
    if (generals.size() < 2) {
      throw Error(ErrorCode::kInvalidConfig,
                  "lexicon family " + family + " needs two general values");
    }
    rng.Shuffle(generals);
    const std::string g1 = generals[0];
    const std::string g1_alt = generals[1];
    const bool use_implicit = hops == 2 || rng.Bernoulli(0.5);
    const std::string v1 =
        use_implicit ? rng.Pick(lexicon.SpecificsOf(g1)) : g1;

    auto shapes = lexicon.ValuesOf("shape");
    rng.Shuffle(shapes);
    const std::string w = shapes.at(0);
    const std::string w_alt = shapes.at(1);

    std::vector<std::string> pool;
    for (const char* fam : {"texture", "temperature", "mood", "age"}) {
      for (auto& v : lexicon.ValuesOf(fam)) pool.push_back(std::move(v));
    }
    rng.Shuffle(pool);
    std::size_t next_index = 0;
    auto next = [&]() { return pool.at(next_index++); };

    auto make = [&](std::vector<std::string> ante, Connective conn,
                    const std::string& cons) {
      if (ante.size() == 2 && rng.Bernoulli(0.5)) std::swap(ante[0], ante[1]);
      Rule rule{0, {}, conn, lit(cons)};
      for (const auto& a : ante) rule.antecedent.push_back(lit(a));
      return rule;
    };

    std::vector<Rule> rules;
    const std::string c1 = next();
    if (hops == 1) {
      switch (rng.Index(3)) {
        case 0: rules.push_back(make({g1}, Connective::kAnd, c1)); break;
        case 1: rules.push_back(make({g1, w}, Connective::kAnd, c1)); break;
        default: rules.push_back(make({g1, next()}, Connective::kOr, c1)); break;
      }
    } else {
      const std::string u = rng.Bernoulli(0.5) ? w_alt : next();
      rules.push_back(make({g1, u}, Connective::kOr, c1));
      rules.push_back(make({c1, w}, Connective::kAnd, next()));
    }

    // Two distractors always echo the gold path; the rest are drawn from a
    // shuffled menu.
    std::vector<Rule> distractors;
    distractors.push_back(make({g1, next()}, Connective::kAnd, next()));
    distractors.push_back(make({g1_alt, rng.Bernoulli(0.5) ? w_alt : next()},
                               Connective::kOr, next()));
    std::vector<int> menu = {0, 1, 2};
    rng.Shuffle(menu);
    for (int choice : menu) {
      if (rules.size() + distractors.size() >= 5) break;
      switch (choice) {
        case 0:
          distractors.push_back(make({w_alt}, Connective::kAnd, next()));
          break;
        case 1:
          distractors.push_back(make({w, next()}, Connective::kAnd, next()));
          break;
        default:
          distractors.push_back(make({c1, next()}, Connective::kAnd, next()));
          break;
      }
    }
    for (auto& d : distractors) rules.push_back(std::move(d));
    rng.Shuffle(rules);
    for (std::size_t i = 0; i < rules.size(); ++i) {
      rules[i].id = static_cast<int>(i) + 1;
    }

    Scenario scenario{rng.Pick(Subjects()), std::move(rules),
                      {lit(v1), lit(w)}};
    Solution solution;
    try {
      solution = SolveScenario(scenario, lexicon);
    } catch (const Error&) {
      continue;
    }
    if (solution.chain.Hops() != hops) continue;
    return GeneratedScenario{std::move(scenario), std::move(solution.chain),
                             solution.conclusion};
  }
}

SnlrDiagnosis DiagnoseChain(const Scenario& scenario, const Lexicon& lexicon,
                            const InferenceChain& gold,
                            const InferenceChain& cand) {
  SnlrDiagnosis out;
  if (gold.Render() == cand.Render()) return out;

  const std::set<Literal> known = KnownLiterals(scenario, lexicon);
  for (const auto& step : cand.steps) {
    if (step.tag == StepTag::kImplicit || !step.rule_id) continue;
    const Rule* rule = scenario.FindRule(*step.rule_id);
    if (rule && rule->is_connective() && !RuleSatisfied(*rule, known)) {
      out.errors.push_back(errors::LogicallyInvalid{rule->connective, rule->id});
    }
  }

  std::set<std::string> present;
  for (const auto& step : cand.steps) {
    present.insert(RenderLiteral(step.subject, step.statement));
  }
  bool missing_implicit = false;
  bool missing_link = false;
  for (const auto& step : gold.steps) {
    if (present.count(RenderLiteral(step.subject, step.statement))) continue;
    if (step.tag == StepTag::kImplicit) {
      missing_implicit = true;
    } else {
      missing_link = true;
    }
  }
  if (missing_implicit) out.errors.push_back(errors::MissingImplicitKnowledge{});
  if (missing_link) out.errors.push_back(errors::MissingLink{});
  if (out.errors.empty()) out.not_expressible = true;
  return out;
}

InferenceChain ParseChain(std::string_view text, const Scenario& scenario,
                          const Lexicon& lexicon) {
  static const std::regex kLine(R"(\s*#(\d+)\s*:\s*(.+?)\s+is\s+(.+?)\.?\s*)");
  const std::set<Literal> facts(scenario.fact.begin(), scenario.fact.end());
  const std::set<Literal> known = KnownLiterals(scenario, lexicon);
  std::vector<const Rule*> rules;
  for (const auto& rule : scenario.rules) rules.push_back(&rule);
  std::stable_sort(rules.begin(), rules.end(),
                   [](const Rule* a, const Rule* b) { return a->id < b->id; });

  InferenceChain chain;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    const std::string line(text.substr(line_start, line_end - line_start));
    const std::size_t offset = line_start;
    line_start = line_end + 1;
    if (Trim(line).empty()) continue;
    std::smatch m;
    if (!std::regex_match(line, m, kLine)) {
      throw Error(ErrorCode::kSyntax, "malformed chain step: " + Trim(line),
                  offset);
    }
    const int index = std::stoi(m[1].str().substr(0, 6));
    if (index != static_cast<int>(chain.steps.size())) {
      throw Error(ErrorCode::kNonContiguousSteps,
                  "expected step #" + std::to_string(chain.steps.size()),
                  offset);
    }
    ChainStep step{index, m[2].str(), lexicon.MakeLiteral(m[3].str()),
                   StepTag::kDeduction, std::nullopt};
    bool implicit = false;
    for (const auto& k : known) {
      auto general = lexicon.Generalize(k);
      if (general && *general == step.statement) {
        implicit = true;
        break;
      }
    }
    if (implicit) {
      step.tag = StepTag::kImplicit;
    } else {
      auto it = std::find_if(rules.begin(), rules.end(), [&](const Rule* r) {
        return r->consequent == step.statement;
      });
      if (it != rules.end()) {
        step.rule_id = (*it)->id;
        step.tag = RuleSatisfied(**it, facts) ? StepTag::kLookup
                                              : StepTag::kDeduction;
      } else if (facts.count(step.statement)) {
        step.tag = StepTag::kLookup;
      }
    }
    chain.steps.push_back(std::move(step));
  }
  return chain;
}

std::string RenderRule(const Rule& rule) {
  std::string out = "rule " + std::to_string(rule.id) + ": if ";
  for (std::size_t i = 0; i < rule.antecedent.size(); ++i) {
    if (i > 0) out += " " + std::string(ConnectiveName(rule.connective)) + " ";
    out += "X is " + rule.antecedent[i].value;
  }
  return out + " then X is " + rule.consequent.value;
}

std::string RenderFact(const Scenario& scenario) {
  std::string out;
  for (const auto& literal : scenario.fact) {
    if (!out.empty()) out += " and ";
    out += RenderLiteral(scenario.subject, literal);
  }
  return out;
}

Rule ParseRule(std::string_view text, const Lexicon& lexicon) {
  static const std::regex kRule(
      R"(\s*rule\s+(\d+)\s*:\s*if\s+X\s+is\s+(\S+?)(?:\s+(and|or)\s+X\s+is\s+(\S+?))?\s+then\s+X\s+is\s+(\S+?)\.?\s*)",
      std::regex::icase);
  std::smatch m;
  const std::string s(text);
  if (!std::regex_match(s, m, kRule)) {
    throw Error(ErrorCode::kSyntax, "malformed rule: " + s);
  }
  Rule rule{std::stoi(m[1].str().substr(0, 6)), {lexicon.MakeLiteral(m[2].str())},
            Connective::kAnd, lexicon.MakeLiteral(m[5].str())};
  if (m[3].matched) {
    rule.connective = m[3] == "or" ? Connective::kOr : Connective::kAnd;
    rule.antecedent.push_back(lexicon.MakeLiteral(m[4].str()));
  }
  return rule;
}

std::pair<std::string, std::vector<Literal>> ParseFact(std::string_view text,
                                                       const Lexicon& lexicon) {
  static const std::regex kClause(R"(\s*(\S+)\s+is\s+(\S+?)\.?\s*)");
  std::string subject;
  std::vector<Literal> literals;
  std::string s(text);
  std::size_t start = 0;
  while (true) {
    std::size_t cut = s.find(" and ", start);
    std::string clause = s.substr(start, cut == std::string::npos
                                             ? std::string::npos
                                             : cut - start);
    std::smatch m;
    if (!std::regex_match(clause, m, kClause)) {
      throw Error(ErrorCode::kSyntax, "malformed fact clause: " + Trim(clause));
    }
    if (!subject.empty() && m[1].str() != subject) {
      throw Error(ErrorCode::kSyntax, "fact mixes subjects " + subject +
                                          " and " + m[1].str());
    }
    subject = m[1].str();
    literals.push_back(lexicon.MakeLiteral(m[2].str()));
    if (cut == std::string::npos) break;
    start = cut + 5;
  }
  return {subject, literals};
}

}  // namespace refine::snlr
