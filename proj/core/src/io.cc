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

#include "refine/io.h"

#include <cmath>
#include <regex>
#include <sstream>

#include "refine/error.h"

namespace refine::io {
namespace {

[[noreturn]] void Invalid(const std::string& what) {
  throw Error(ErrorCode::kInvariantViolation, what);
}

std::string Trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

template <typename Fn>
auto Guard(const std::string& what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    Invalid(what + ": " + e.what());
  }
}

OperandPosition ParsePosition(const std::string& name) {
  if (name == "first") return OperandPosition::kFirst;
  if (name == "second") return OperandPosition::kSecond;
  Invalid("unknown operand position " + name);
}

Connective ParseConnective(const std::string& name) {
  if (name == "and") return Connective::kAnd;
  if (name == "or") return Connective::kOr;
  Invalid("unknown connective " + name);
}

Task TaskFromJson(const json& j) {
  auto task = ParseTaskName(j.get<std::string>());
  if (!task) Invalid("unknown task " + j.dump());
  return *task;
}

ErrorKind KindFromJson(const json& j) {
  auto kind = ParseErrorKindName(j.get<std::string>());
  if (!kind) Invalid("unknown error kind " + j.dump());
  return *kind;
}

snlr::StepTag ParseTag(const std::string& name) {
  for (auto tag : {snlr::StepTag::kImplicit, snlr::StepTag::kLookup,
                   snlr::StepTag::kDeduction}) {
    if (snlr::StepTagName(tag) == name) return tag;
  }
  Invalid("unknown step tag " + name);
}

json OptionalString(const std::optional<std::string>& s) {
  return s ? json(*s) : json(nullptr);
}

std::optional<std::string> StringOrNull(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

// A dataset file: a JSON array, or one JSON value per line.
std::vector<std::pair<std::size_t, json>> ReadDataset(
    const std::string& path, std::vector<IngestIssue>& malformed) {
  const std::string content = ReadFile(path);
  std::vector<std::pair<std::size_t, json>> out;
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return out;
  if (content[first] == '[') {
    json array;
    try {
      array = json::parse(content);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  path + " is not a valid JSON array: " + e.what());
    }
    for (std::size_t i = 0; i < array.size(); ++i) {
      out.emplace_back(i + 1, std::move(array[i]));
    }
    return out;
  }
  std::istringstream in(content);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      out.emplace_back(line_no, json::parse(line));
    } catch (const json::exception& e) {
      malformed.push_back({line_no, "", std::string("invalid JSON: ") + e.what()});
    }
  }
  return out;
}

std::string RecordId(const json& record, const std::string& fallback) {
  for (const char* key : {"id", "ID", "iIndex", "Id"}) {
    if (!record.contains(key)) continue;
    const json& v = record.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
  }
  return fallback;
}

const json* FirstOf(const json& record, std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    if (record.contains(key) && !record.at(key).is_null()) return &record.at(key);
  }
  return nullptr;
}

[[noreturn]] void Malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedRecord, what);
}

std::string AsString(const json& j, const char* what) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array() && !j.empty() && j.front().is_string()) {
    return j.front().get<std::string>();
  }
  Malformed(std::string(what) + " is not text");
}

Rational AsNumber(const json& j, const char* what) {
  if (j.is_array() && !j.empty()) return AsNumber(j.front(), what);
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number()) return RationalFromDouble(j.get<double>());
  if (j.is_string()) {
    if (auto r = ParseRational(Trim(j.get<std::string>()))) return *r;
  }
  Malformed(std::string(what) + " is not a number: " + j.dump());
}

std::vector<Rational> AsNumberList(const json& j) {
  std::vector<Rational> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(AsNumber(v, "number"));
    return out;
  }
  std::istringstream in(AsString(j, "numbers"));
  for (std::string token; in >> token;) {
    auto r = ParseRational(token);
    if (!r) Malformed("numbers field holds a non-number: " + token);
    out.push_back(*r);
  }
  return out;
}

}  // namespace

// --- Record files -------------------------------------------------------

RecordWriter::RecordWriter(const std::string& path, std::string_view schema)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(ErrorCode::kIo, "cannot write " + path);
  Write(json{{"schema", schema}, {"version", kSchemaVersion}});
}

void RecordWriter::Write(const json& record) {
  const std::string line = record.dump() + "\n";
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIo, "write to " + path_ + " failed");
}

void WriteRecords(const std::string& path, std::string_view schema,
                  const std::vector<json>& records) {
  RecordWriter writer(path, schema);
  for (const auto& record : records) writer.Write(record);
}

LoadedRecords LoadRecords(const std::string& path, std::string_view schema) {
  const std::string content = ReadFile(path);
  LoadedRecords out;
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    lines.push_back(content.substr(start, end - start));
    start = end + 1;
  }
  const bool ends_clean = content.empty() || content.back() == '\n';
  if (lines.empty()) {
    throw Error(ErrorCode::kVersionMismatch, path + " has no header line");
  }
  json header;
  try {
    header = json::parse(lines.front());
  } catch (const json::exception&) {
    throw Error(ErrorCode::kVersionMismatch, path + " has no header line", 1);
  }
  if (!header.is_object() || header.value("schema", "") != schema) {
    throw Error(ErrorCode::kVersionMismatch,
                path + " is not a " + std::string(schema) + " file", 1);
  }
  if (header.value("version", -1) != kSchemaVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                path + " has version " + header.value("version", json()).dump() +
                    ", expected " + std::to_string(kSchemaVersion),
                1);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (Trim(lines[i]).empty()) continue;
    try {
      out.records.push_back(json::parse(lines[i]));
      out.lines.push_back(line_no);
    } catch (const json::exception& e) {
      if (i + 1 == lines.size() && !ends_clean) {
        out.warnings.push_back(path + ": dropped truncated final line " +
                               std::to_string(line_no));
        break;
      }
      throw Error(ErrorCode::kMalformedRecord,
                  path + ":" + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    }
  }
  return out;
}

namespace {

template <typename T, typename Fn>
std::vector<T> LoadTyped(const std::string& path, std::string_view schema,
                         std::vector<std::string>* warnings, Fn&& convert) {
  LoadedRecords loaded = LoadRecords(path, schema);
  std::vector<T> out;
  for (std::size_t i = 0; i < loaded.records.size(); ++i) {
    try {
      out.push_back(convert(loaded.records[i]));
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvariantViolation,
                  path + ":" + std::to_string(loaded.lines[i]) + ": " + e.what(),
                  loaded.lines[i]);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvariantViolation,
                  path + ":" + std::to_string(loaded.lines[i]) + ": " + e.what(),
                  loaded.lines[i]);
    }
  }
  if (warnings != nullptr) {
    warnings->insert(warnings->end(), loaded.warnings.begin(),
                     loaded.warnings.end());
  }
  return out;
}

}  // namespace

// --- Conversions --------------------------------------------------------

json TaskErrorToJson(const TaskError& error) {
  json j = {{"type", ErrorKindName(KindOf(error))}};
  if (const auto* e = std::get_if<errors::IncorrectNumbers>(&error)) {
    j["position"] = PositionName(e->position);
    j["step"] = e->step;
  } else if (const auto* e = std::get_if<errors::IncorrectOperators>(&error)) {
    j["step"] = e->step;
  } else if (const auto* e = std::get_if<errors::LogicallyInvalid>(&error)) {
    j["op"] = ConnectiveName(e->op);
    j["rule"] = e->rule;
  } else if (const auto* e = std::get_if<errors::SemanticMisalignment>(&error)) {
    j["snippet"] = e->snippet;
  }
  return j;
}

TaskError TaskErrorFromJson(const json& j) {
  return Guard("malformed error", [&]() -> TaskError {
    switch (KindFromJson(j.at("type"))) {
      case ErrorKind::kIncorrectNumbers:
        return errors::IncorrectNumbers{
            ParsePosition(j.at("position").get<std::string>()),
            j.at("step").get<int>()};
      case ErrorKind::kIncorrectOperators:
        return errors::IncorrectOperators{j.at("step").get<int>()};
      case ErrorKind::kMissingOperators:
        return errors::MissingOperators{};
      case ErrorKind::kLogicallyInvalid:
        return errors::LogicallyInvalid{
            ParseConnective(j.at("op").get<std::string>()),
            j.at("rule").get<int>()};
      case ErrorKind::kMissingLink:
        return errors::MissingLink{};
      case ErrorKind::kMissingImplicitKnowledge:
        return errors::MissingImplicitKnowledge{};
      case ErrorKind::kContradiction:
        return errors::Contradiction{};
      case ErrorKind::kSemanticMisalignment:
        return errors::SemanticMisalignment{j.at("snippet").get<std::string>()};
    }
    Invalid("unreachable error kind");
  });
}

json FeedbackToJson(const Feedback& feedback) {
  json j;
  if (feedback.is_no_hint()) {
    j["kind"] = "no_hint";
  } else if (const auto* s = feedback.structured()) {
    j["kind"] = "error";
    j["error"] = TaskErrorToJson(s->error);
    j["hint"] = OptionalString(s->hint);
  } else {
    j["kind"] = "unstructured";
  }
  j["rendered"] = feedback.rendered();
  return j;
}

Feedback FeedbackFromJson(const json& j) {
  return Guard("malformed feedback", [&] {
    const auto kind = j.at("kind").get<std::string>();
    const auto rendered = j.at("rendered").get<std::string>();
    Feedback out;
    if (kind == "no_hint") {
      out = Feedback::Accept();
    } else if (kind == "error") {
      out = Feedback::Error(TaskErrorFromJson(j.at("error")),
                            StringOrNull(j, "hint"));
    } else if (kind == "unstructured") {
      out = Feedback::Free(rendered);
    } else {
      Invalid("unknown feedback kind " + kind);
    }
    if (out.rendered() != rendered) {
      Invalid("rendered feedback \"" + rendered +
              "\" does not match its fields (\"" + out.rendered() + "\")");
    }
    return out;
  });
}

json InstanceToJson(const TaskInstance& instance) {
  json j = {{"id", instance.id()}, {"task", TaskName(instance.task())}};
  if (const auto* p = instance.mwp()) {
    json binding = json::object();
    for (const auto& [k, v] : p->binding) binding[std::to_string(k)] = FormatExact(v);
    j["text"] = p->text;
    j["binding"] = binding;
    j["program"] = p->gold_program.Render();
    j["answer"] = FormatExact(p->gold_answer);
  } else if (const auto* p = instance.snlr()) {
    json rules = json::array();
    for (const auto& rule : p->scenario.rules) rules.push_back(snlr::RenderRule(rule));
    json chain = json::array();
    for (const auto& step : p->gold_chain.steps) {
      json s = {{"statement", step.statement.value},
                {"tag", snlr::StepTagName(step.tag)}};
      s["rule"] = step.rule_id ? json(*step.rule_id) : json(nullptr);
      chain.push_back(s);
    }
    j["rules"] = rules;
    j["fact"] = snlr::RenderFact(p->scenario);
    j["chain"] = chain;
    j["conclusion"] = p->conclusion.value;
  } else {
    const auto* m = instance.moral();
    j["situation"] = m->context.situation;
    j["intention"] = m->context.intention;
    j["immoral_action"] = m->context.immoral_action;
    j["norm"] = m->norm_text;
    j["moral_action"] = m->moral_action;
  }
  return j;
}

TaskInstance InstanceFromJson(const json& j, const TaskResources& resources) {
  return Guard("malformed instance", [&]() -> TaskInstance {
    const std::string id = j.at("id").get<std::string>();
    switch (TaskFromJson(j.at("task"))) {
      case Task::kMwp: {
        mwp::VariableBinding binding;
        for (const auto& [key, value] : j.at("binding").items()) {
          auto v = ParseRational(value.get<std::string>());
          if (!v) Invalid("binding " + key + " is not a number");
          binding[std::stoi(key)] = *v;
        }
        auto answer = ParseRational(j.at("answer").get<std::string>());
        if (!answer) Invalid("answer is not a number");
        mwp::MwpProblem p{id, j.at("text").get<std::string>(), binding,
                          mwp::ParseEquation(j.at("program").get<std::string>()),
                          *answer};
        if (mwp::ExecuteProgram(p.gold_program, p.binding) != p.gold_answer) {
          Invalid("program of " + id + " does not execute to its answer");
        }
        return {std::move(p)};
      }
      case Task::kSnlr: {
        SnlrProblem p;
        p.id = id;
        for (const auto& rule : j.at("rules")) {
          p.scenario.rules.push_back(
              snlr::ParseRule(rule.get<std::string>(), resources.lexicon));
        }
        auto [subject, fact] =
            snlr::ParseFact(j.at("fact").get<std::string>(), resources.lexicon);
        p.scenario.subject = subject;
        p.scenario.fact = fact;
        int index = 0;
        for (const auto& s : j.at("chain")) {
          std::optional<int> rule;
          if (!s.at("rule").is_null()) rule = s.at("rule").get<int>();
          p.gold_chain.steps.push_back(
              {index++, subject,
               resources.lexicon.MakeLiteral(s.at("statement").get<std::string>()),
               ParseTag(s.at("tag").get<std::string>()), rule});
        }
        p.conclusion =
            resources.lexicon.MakeLiteral(j.at("conclusion").get<std::string>());
        return {std::move(p)};
      }
      case Task::kMoral: {
        MoralProblem p;
        p.id = id;
        p.context = {j.at("situation").get<std::string>(),
                     j.at("intention").get<std::string>(),
                     j.at("immoral_action").get<std::string>()};
        p.norm_text = j.at("norm").get<std::string>();
        try {
          p.norm = moral::ParseNorm(p.norm_text, resources.judgments);
        } catch (const Error&) {
        }
        p.moral_action = j.value("moral_action", "");
        return {std::move(p)};
      }
    }
    Invalid("unreachable task");
  });
}

json RecordToJson(const FeedbackRecord& r) {
  return {{"id", r.id},
          {"instance_id", r.instance_id},
          {"task", TaskName(r.task)},
          {"kind", ErrorKindName(r.kind)},
          {"rep", r.rep},
          {"seed", r.seed},
          {"rule", r.rule},
          {"context", r.context},
          {"plausible", r.plausible.text},
          {"implausible", r.implausible.text},
          {"feedback", FeedbackToJson(r.feedback)}};
}

FeedbackRecord RecordFromJson(const json& j) {
  return Guard("malformed pool record", [&] {
    FeedbackRecord r;
    r.id = j.at("id").get<std::string>();
    r.instance_id = j.at("instance_id").get<std::string>();
    r.task = TaskFromJson(j.at("task"));
    r.kind = KindFromJson(j.at("kind"));
    r.rep = j.at("rep").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.rule = j.at("rule").get<std::string>();
    r.context = j.at("context").get<std::string>();
    r.plausible.text = j.at("plausible").get<std::string>();
    r.implausible.text = j.at("implausible").get<std::string>();
    r.feedback = FeedbackFromJson(j.at("feedback"));
    if (TaskOf(r.kind) != r.task) Invalid("record kind does not fit its task");
    const auto* s = r.feedback.structured();
    if (s == nullptr || KindOf(s->error) != r.kind) {
      Invalid("record feedback does not carry its error kind");
    }
    if (r.plausible == r.implausible) Invalid("record is not a perturbation");
    return r;
  });
}

json TurnToJson(const Turn& turn) {
  json proposals = json::array();
  for (const auto& p : turn.proposals) proposals.push_back(p.text);
  return {{"t", turn.t},
          {"proposals", proposals},
          {"selected", turn.selected.text},
          {"feedback", FeedbackToJson(turn.feedback)},
          {"source", FeedbackSourceName(turn.source)},
          {"generator_emitted_no_hint", turn.generator_emitted_no_hint},
          {"error", OptionalString(turn.error)}};
}

Turn TurnFromJson(const json& j) {
  return Guard("malformed turn", [&] {
    Turn turn;
    turn.t = j.at("t").get<int>();
    for (const auto& p : j.at("proposals")) turn.proposals.push_back({p.get<std::string>()});
    turn.selected.text = j.at("selected").get<std::string>();
    turn.feedback = FeedbackFromJson(j.at("feedback"));
    auto source = ParseFeedbackSource(j.at("source").get<std::string>());
    if (!source) Invalid("unknown feedback source");
    turn.source = *source;
    turn.generator_emitted_no_hint = j.value("generator_emitted_no_hint", false);
    turn.error = StringOrNull(j, "error");
    return turn;
  });
}

json TraceToJson(const RefinementTrace& trace) {
  json turns = json::array();
  for (const auto& turn : trace.turns) turns.push_back(TurnToJson(turn));
  return {{"run_id", trace.run_id},
          {"instance_id", trace.instance_id},
          {"task", TaskName(trace.task)},
          {"initial", trace.initial ? TurnToJson(*trace.initial) : json(nullptr)},
          {"turns", turns},
          {"stop", StopReasonName(trace.stop)},
          {"final_hypothesis", trace.final_hypothesis.text},
          {"final_answer", OptionalString(trace.final_answer)}};
}

RefinementTrace TraceFromJson(const json& j) {
  return Guard("malformed trace", [&] {
    RefinementTrace trace;
    trace.run_id = j.at("run_id").get<std::string>();
    trace.instance_id = j.at("instance_id").get<std::string>();
    trace.task = TaskFromJson(j.at("task"));
    if (j.contains("initial") && !j.at("initial").is_null()) {
      trace.initial = TurnFromJson(j.at("initial"));
    }
    for (const auto& t : j.at("turns")) trace.turns.push_back(TurnFromJson(t));
    auto stop = ParseStopReason(j.at("stop").get<std::string>());
    if (!stop) Invalid("unknown stop reason");
    trace.stop = *stop;
    trace.final_hypothesis.text = j.at("final_hypothesis").get<std::string>();
    trace.final_answer = StringOrNull(j, "final_answer");
    for (std::size_t i = 0; i < trace.turns.size(); ++i) {
      if (trace.turns[i].t != static_cast<int>(i) + 1) {
        Invalid("turn numbers are not 1..n");
      }
    }
    if (trace.stop == StopReason::kNoHint) {
      const Turn* last = trace.turns.empty()
                             ? (trace.initial ? &*trace.initial : nullptr)
                             : &trace.turns.back();
      if (last == nullptr || !last->feedback.is_no_hint()) {
        Invalid("stop reason no_hint without a final No hint");
      }
    }
    return trace;
  });
}

json TupleToJson(const EmittedTuple& t) {
  return {{"run_id", t.run_id},
          {"instance_id", t.instance_id},
          {"turn", t.turn},
          {"context", t.context},
          {"previous_feedback", t.previous_feedback},
          {"previous_hypothesis", t.previous_hypothesis},
          {"gold", t.gold}};
}

EmittedTuple TupleFromJson(const json& j) {
  return Guard("malformed tuple", [&] {
    return EmittedTuple{j.at("run_id").get<std::string>(),
                        j.at("instance_id").get<std::string>(),
                        j.at("turn").get<int>(),
                        j.at("context").get<std::string>(),
                        j.at("previous_feedback").get<std::string>(),
                        j.at("previous_hypothesis").get<std::string>(),
                        j.at("gold").get<std::string>()};
  });
}

json FailureToJson(const RunFailure& f) {
  return {{"run_id", f.run_id},
          {"instance_id", f.instance_id},
          {"code", f.code},
          {"message", f.message}};
}

json ReportToJson(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  };
  return {{"dataset", r.dataset},
          {"traces", r.traces},
          {"exact_matches", r.exact_matches},
          {"answers_scored", r.answers_scored},
          {"answers_correct", r.answers_correct},
          {"em", opt(r.em)},
          {"accuracy", opt(r.accuracy)},
          {"error_buckets", r.error_buckets},
          {"not_expressible", r.not_expressible},
          {"unparseable", r.unparseable},
          {"stop_reasons", r.stop_reasons},
          {"config", r.config}};
}

EvalReport ReportFromJson(const json& j) {
  return Guard("malformed report", [&] {
    EvalReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.traces = j.at("traces").get<int>();
    r.exact_matches = j.at("exact_matches").get<int>();
    r.answers_scored = j.at("answers_scored").get<int>();
    r.answers_correct = j.at("answers_correct").get<int>();
    if (!j.at("em").is_null()) r.em = j.at("em").get<double>();
    if (!j.at("accuracy").is_null()) r.accuracy = j.at("accuracy").get<double>();
    r.error_buckets = j.at("error_buckets").get<std::map<std::string, int>>();
    r.not_expressible = j.at("not_expressible").get<int>();
    r.unparseable = j.at("unparseable").get<int>();
    r.stop_reasons = j.at("stop_reasons").get<std::map<std::string, int>>();
    r.config = j.at("config").get<std::map<std::string, std::string>>();
    return r;
  });
}

json SweepRowToJson(const SweepRow& row) {
  return {{"epsilon", row.epsilon},
          {"runs", row.runs},
          {"mean_em", row.mean_em},
          {"ci_low", row.ci_low},
          {"ci_high", row.ci_high}};
}

SweepRow SweepRowFromJson(const json& j) {
  return Guard("malformed sweep row", [&] {
    return SweepRow{j.at("epsilon").get<double>(), j.at("runs").get<int>(),
                    j.at("mean_em").get<double>(), j.at("ci_low").get<double>(),
                    j.at("ci_high").get<double>()};
  });
}

std::vector<TaskInstance> LoadInstances(const std::string& path,
                                        const TaskResources& resources,
                                        std::vector<std::string>* warnings) {
  return LoadTyped<TaskInstance>(path, kInstancesSchema, warnings,
                                 [&](const json& j) {
                                   return InstanceFromJson(j, resources);
                                 });
}

std::vector<FeedbackRecord> LoadPool(const std::string& path,
                                     std::vector<std::string>* warnings) {
  return LoadTyped<FeedbackRecord>(path, kPoolSchema, warnings, RecordFromJson);
}

std::vector<RefinementTrace> LoadTraces(const std::string& path,
                                        std::vector<std::string>* warnings) {
  return LoadTyped<RefinementTrace>(path, kTracesSchema, warnings, TraceFromJson);
}

std::vector<EmittedTuple> LoadTuples(const std::string& path,
                                     std::vector<std::string>* warnings) {
  return LoadTyped<EmittedTuple>(path, kTuplesSchema, warnings, TupleFromJson);
}

// --- Ingestion ----------------------------------------------------------

mwp::MwpProblem MwpFromRecord(const json& record, const std::string& fallback_id,
                              MwpFormat format) {
  const std::string id = RecordId(record, fallback_id);
  std::string text;
  if (format == MwpFormat::kSvamp && record.contains("Body")) {
    text = Trim(AsString(record.at("Body"), "Body"));
    if (const json* q = FirstOf(record, {"Question"})) {
      text += (text.empty() ? "" : " ") + Trim(AsString(*q, "Question"));
    }
  } else if (const json* t = FirstOf(record, {"text", "sQuestion", "question",
                                              "Question", "Problem"})) {
    text = Trim(AsString(*t, "text"));
  } else {
    Malformed("record has no problem text");
  }
  const json* equation_field =
      FirstOf(record, {"equation", "Equation", "lEquations", "Formula"});
  if (equation_field == nullptr) Malformed("record has no equation");
  const json* answer_field =
      FirstOf(record, {"answer", "Answer", "lSolutions", "ans"});
  if (answer_field == nullptr) Malformed("record has no answer");

  std::vector<Rational> numbers;
  if (const json* given = FirstOf(record, {"numbers", "Numbers"})) {
    numbers = AsNumberList(*given);
    if (text.find("number0") == std::string::npos) {
      text = mwp::AbstractNumbers(text).text;
    }
  } else {
    auto abstracted = mwp::AbstractNumbers(text);
    text = std::move(abstracted.text);
    numbers = std::move(abstracted.numbers);
  }

  static const std::regex kLhs(R"(^\s*[A-Za-z]\s*=\s*)");
  static const std::regex kRhs(R"(\s*=\s*[A-Za-z]\s*$)");
  std::string equation = AsString(*equation_field, "equation");
  equation = std::regex_replace(equation, kLhs, "");
  equation = std::regex_replace(equation, kRhs, "");
  mwp::EquationProgram program = mwp::ProgramFromInfix(equation, numbers);

  mwp::VariableBinding binding;
  for (std::size_t k = 0; k < numbers.size(); ++k) {
    binding[static_cast<int>(k)] = numbers[k];
  }
  const Rational stated = AsNumber(*answer_field, "answer");
  Rational executed;
  try {
    executed = mwp::ExecuteProgram(program, binding);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInconsistentRecord,
                "equation does not execute: " + std::string(e.what()));
  }
  if (executed != stated) {
    const double a = ToDouble(executed);
    const double b = ToDouble(stated);
    if (std::fabs(a - b) > 1e-6 * std::max(1.0, std::fabs(b))) {
      throw Error(ErrorCode::kInconsistentRecord,
                  "equation gives " + FormatRational(executed) +
                      " but the answer is " + FormatRational(stated));
    }
  }
  return mwp::MwpProblem{id, text, std::move(binding), std::move(program),
                         executed};
}

IngestResult IngestMwp(const std::string& path, MwpFormat format) {
  IngestResult out;
  for (auto& [n, record] : ReadDataset(path, out.malformed)) {
    const std::string fallback = "record-" + std::to_string(n);
    const std::string id =
        record.is_object() ? RecordId(record, fallback) : fallback;
    try {
      if (!record.is_object()) Malformed("record is not an object");
      out.instances.push_back({MwpFromRecord(record, fallback, format)});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInconsistentRecord) {
        out.quarantined.push_back({n, id, e.what()});
      } else {
        out.malformed.push_back({n, id, e.what()});
      }
    } catch (const json::exception& e) {
      out.malformed.push_back({n, id, e.what()});
    }
  }
  return out;
}

MoralProblem MoralFromRecord(const json& record, const std::string& fallback_id,
                             const moral::JudgmentLexicon& judgments) {
  MoralProblem p;
  p.id = RecordId(record, fallback_id);
  if (record.contains("actor_input")) {
    const std::string input = AsString(record.at("actor_input"), "actor_input");
    const std::string output =
        record.contains("actor_output")
            ? AsString(record.at("actor_output"), "actor_output")
            : std::string();
    auto marker = [&](const std::string& s, std::string_view m) {
      const auto at = s.find(m);
      if (at == std::string::npos) {
        throw Error(ErrorCode::kMissingMarker,
                    "record is missing the " + std::string(m) + " marker");
      }
      return at;
    };
    const auto sit = marker(input, "<|SIT|>");
    const auto intent = marker(input, "<|INT|>");
    const auto act = marker(input, "<|I_ACT|>");
    const auto nrm = marker(input, "<|NRM|>");
    if (!(sit < intent && intent < act && act < nrm)) {
      Malformed("actor_input markers are out of order");
    }
    auto between = [&](std::size_t a, std::size_t len, std::size_t b) {
      return Trim(std::string_view(input).substr(a + len, b - a - len));
    };
    p.context.situation = between(sit, 7, intent);
    p.context.intention = between(intent, 7, act);
    p.context.immoral_action = between(act, 9, nrm);
    std::string norm_part = Trim(std::string_view(input).substr(nrm + 7));
    std::string rest = output;
    if (norm_part.empty()) {
      const auto m_act = marker(output, "<|M_ACT|>");
      norm_part = Trim(std::string_view(output).substr(0, m_act));
      rest = output.substr(m_act + 9);
    } else if (auto m_act = output.find("<|M_ACT|>"); m_act != std::string::npos) {
      rest = output.substr(m_act + 9);
    }
    p.norm_text = norm_part;
    p.moral_action = Trim(rest);
  } else {
    auto field = [&](const char* key) {
      if (!record.contains(key)) Malformed(std::string("record has no ") + key);
      return Trim(AsString(record.at(key), key));
    };
    p.context = {field("situation"), field("intention"), field("immoral_action")};
    p.norm_text = field("norm");
    p.moral_action =
        record.contains("moral_action")
            ? Trim(AsString(record.at("moral_action"), "moral_action"))
            : std::string();
  }
  if (p.context.situation.empty() || p.context.intention.empty() ||
      p.context.immoral_action.empty()) {
    Malformed("situation, intention and immoral action must be non-empty");
  }
  if (p.norm_text.empty()) Malformed("record has an empty norm");
  try {
    p.norm = moral::ParseNorm(p.norm_text, judgments);
  } catch (const Error&) {
    p.norm.reset();
  }
  return p;
}

IngestResult IngestMoral(const std::string& path,
                         const moral::JudgmentLexicon& judgments) {
  IngestResult out;
  for (auto& [n, record] : ReadDataset(path, out.malformed)) {
    const std::string fallback = "record-" + std::to_string(n);
    const std::string id =
        record.is_object() ? RecordId(record, fallback) : fallback;
    try {
      if (!record.is_object()) Malformed("record is not an object");
      MoralProblem p = MoralFromRecord(record, fallback, judgments);
      if (!p.norm) out.flagged.push_back(p.id);
      out.instances.push_back({std::move(p)});
    } catch (const Error& e) {
      out.malformed.push_back({n, id, e.what()});
    } catch (const json::exception& e) {
      out.malformed.push_back({n, id, e.what()});
    }
  }
  return out;
}

SnlrProblem SnlrFromRecord(const json& record, const std::string& fallback_id,
                           const snlr::Lexicon& lexicon) {
  SnlrProblem p;
  p.id = RecordId(record, fallback_id);
  if (!record.contains("rules") || !record.contains("fact")) {
    Malformed("record needs rules and fact");
  }
  std::vector<std::string> rule_lines;
  const json& rules = record.at("rules");
  if (rules.is_array()) {
    for (const auto& r : rules) rule_lines.push_back(AsString(r, "rule"));
  } else {
    std::istringstream in(AsString(rules, "rules"));
    for (std::string line; std::getline(in, line);) {
      if (!Trim(line).empty()) rule_lines.push_back(line);
    }
  }
  for (const auto& line : rule_lines) {
    p.scenario.rules.push_back(snlr::ParseRule(line, lexicon));
  }
  std::string fact = Trim(AsString(record.at("fact"), "fact"));
  if (fact.rfind("fact:", 0) == 0) fact = Trim(fact.substr(5));
  auto [subject, literals] = snlr::ParseFact(fact, lexicon);
  p.scenario.subject = subject;
  p.scenario.fact = literals;
  snlr::Solution solution;
  try {
    solution = snlr::SolveScenario(p.scenario, lexicon);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInconsistentRecord, e.what());
  }
  if (record.contains("conclusion")) {
    std::string stated = Trim(AsString(record.at("conclusion"), "conclusion"));
    while (!stated.empty() && stated.back() == '.') stated.pop_back();
    const auto is = stated.rfind(" is ");
    if (is != std::string::npos) stated = Trim(stated.substr(is + 4));
    if (stated != solution.conclusion.value) {
      throw Error(ErrorCode::kInconsistentRecord,
                  "solver concludes " + solution.conclusion.value +
                      " but the record states " + stated);
    }
  }
  p.gold_chain = std::move(solution.chain);
  p.conclusion = std::move(solution.conclusion);
  return p;
}

IngestResult IngestSnlr(const std::string& path, const snlr::Lexicon& lexicon) {
  IngestResult out;
  for (auto& [n, record] : ReadDataset(path, out.malformed)) {
    const std::string fallback = "record-" + std::to_string(n);
    const std::string id =
        record.is_object() ? RecordId(record, fallback) : fallback;
    try {
      if (!record.is_object()) Malformed("record is not an object");
      out.instances.push_back({SnlrFromRecord(record, fallback, lexicon)});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInconsistentRecord) {
        out.quarantined.push_back({n, id, e.what()});
      } else {
        out.malformed.push_back({n, id, e.what()});
      }
    } catch (const json::exception& e) {
      out.malformed.push_back({n, id, e.what()});
    }
  }
  return out;
}

// --- Configuration ------------------------------------------------------

json ReadJsonFile(const std::string& path) {
  const std::string content = ReadFile(path);
  try {
    return json::parse(content);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord,
                path + " is not valid JSON: " + e.what());
  }
}

namespace {

template <typename Fn>
auto ConfigGuard(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
}

}  // namespace

snlr::Lexicon LoadSnlrLexicon(const std::string& path) {
  const json j = ReadJsonFile(path);
  return ConfigGuard(path, [&] {
    std::map<std::string, std::string> family_of;
    for (const auto& [family, values] : j.at("families").items()) {
      for (const auto& v : values) family_of[v.get<std::string>()] = family;
    }
    auto implicit = j.value("implicit", std::map<std::string, std::string>{});
    return snlr::Lexicon(std::move(family_of), std::move(implicit));
  });
}

moral::JudgmentLexicon LoadJudgmentLexicon(const std::string& path) {
  const json j = ReadJsonFile(path);
  return ConfigGuard(path, [&] {
    std::vector<moral::JudgmentForm> forms;
    for (const auto& entry : j.at("judgments")) {
      const auto polarity = entry.at("polarity").get<std::string>();
      if (polarity != "positive" && polarity != "negative") {
        throw Error(ErrorCode::kInvalidConfig,
                    path + ": polarity must be positive or negative");
      }
      forms.push_back({entry.at("surface").get<std::string>(),
                       polarity == "positive" ? moral::Polarity::kPositive
                                              : moral::Polarity::kNegative,
                       entry.at("inverses").get<std::vector<std::string>>(),
                       entry.value("infinitive", false)});
    }
    return moral::JudgmentLexicon(std::move(forms));
  });
}

moral::SynonymTable LoadSynonyms(const std::string& path) {
  const json j = ReadJsonFile(path);
  return ConfigGuard(path, [&] { return j.get<moral::SynonymTable>(); });
}

moral::VerbLexicon LoadVerbs(const std::string& path) {
  std::istringstream in(ReadFile(path));
  moral::VerbLexicon verbs;
  for (std::string line; std::getline(in, line);) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (!line.empty()) verbs.insert(line);
  }
  return verbs;
}

FixtureSet LoadFixtures(const std::string& path) {
  const json j = ReadJsonFile(path);
  return ConfigGuard(path, [&] { return j.get<FixtureSet>(); });
}

}  // namespace refine::io
