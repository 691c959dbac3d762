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

#include "refine/session.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "refine/io.h"

namespace refine {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kSessionSchema = "refine.session";

std::string JoinFieldMessages(const std::vector<FieldError>& fields) {
  std::string out = "invalid feedback";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    out += (i == 0 ? ": " : "; ") + fields[i].field + " " + fields[i].message;
  }
  return out;
}

[[noreturn]] void Reject(const std::string& field, const std::string& message) {
  throw FeedbackValidationError(std::vector<FieldError>{{field, message}});
}

std::optional<int> IntField(const json& j, const char* key,
                            std::vector<FieldError>& errors) {
  if (!j.contains(key) || j.at(key).is_null()) {
    errors.push_back({key, "is required"});
    return std::nullopt;
  }
  if (!j.at(key).is_number_integer()) {
    errors.push_back({key, "must be an integer"});
    return std::nullopt;
  }
  const auto v = j.at(key).get<std::int64_t>();
  if (v < 0 || v > 1'000'000) {
    errors.push_back({key, "is out of range"});
    return std::nullopt;
  }
  return static_cast<int>(v);
}

std::optional<std::string> StringField(const json& j, const char* key,
                                       std::vector<FieldError>& errors,
                                       bool required) {
  if (!j.contains(key) || j.at(key).is_null()) {
    if (required) errors.push_back({key, "is required"});
    return std::nullopt;
  }
  if (!j.at(key).is_string()) {
    errors.push_back({key, "must be a string"});
    return std::nullopt;
  }
  return j.at(key).get<std::string>();
}

std::optional<std::size_t> MwpStepCount(const Hypothesis& h) {
  try {
    return mwp::ParseEquation(h.text).size();
  } catch (const Error&) {
    return std::nullopt;
  }
}

void CheckStep(int step, const std::optional<std::size_t>& steps,
               std::vector<FieldError>& errors) {
  if (steps && static_cast<std::size_t>(step) >= *steps) {
    errors.push_back({"step", "must name a step of the pending hypothesis (0.." +
                                  std::to_string(*steps - 1) + ")"});
  }
}

json PendingToJson(const Turn& turn) {
  json proposals = json::array();
  for (const auto& p : turn.proposals) proposals.push_back(p.text);
  return {{"t", turn.t},
          {"proposals", proposals},
          {"selected", turn.selected.text},
          {"generator_emitted_no_hint", turn.generator_emitted_no_hint}};
}

Turn PendingFromJson(const json& j) {
  Turn turn;
  turn.t = j.at("t").get<int>();
  for (const auto& p : j.at("proposals")) turn.proposals.push_back({p.get<std::string>()});
  turn.selected.text = j.at("selected").get<std::string>();
  turn.generator_emitted_no_hint = j.value("generator_emitted_no_hint", false);
  turn.source = FeedbackSource::kHuman;
  return turn;
}

}  // namespace

std::string_view SessionStateName(SessionState state) {
  return state == SessionState::kAwaitingFeedback ? "awaiting_feedback"
                                                  : "finished";
}

FeedbackValidationError::FeedbackValidationError(std::vector<FieldError> fields)
    : Error(ErrorCode::kInvalidFeedback, JoinFieldMessages(fields)),
      fields_(std::move(fields)) {}

Feedback StructuredFeedbackFromJson(const json& fields,
                                    const TaskInstance& instance,
                                    const Hypothesis& pending,
                                    const TaskResources& resources) {
  (void)resources;
  if (!fields.is_object()) {
    Reject("structured", "must be an object");
  }
  std::vector<FieldError> errors;
  const auto type = StringField(fields, "type", errors, true);
  if (!type) throw FeedbackValidationError(std::move(errors));
  const auto kind = ParseErrorKindName(*type);
  if (!kind) {
    Reject("type", "is not an error type: " + *type);
  }
  if (TaskOf(*kind) != instance.task()) {
    Reject("type", *type + " does not apply to task " +
                      std::string(TaskName(instance.task())));
  }
  auto hint = StringField(fields, "hint", errors, false);
  if (hint && hint->find('\n') != std::string::npos) {
    errors.push_back({"hint", "must be a single line"});
  }

  std::optional<TaskError> error;
  switch (*kind) {
    case ErrorKind::kIncorrectNumbers: {
      const auto step = IntField(fields, "step", errors);
      const auto position = StringField(fields, "position", errors, true);
      std::optional<OperandPosition> pos;
      if (position) {
        if (*position == "first") pos = OperandPosition::kFirst;
        else if (*position == "second") pos = OperandPosition::kSecond;
        else errors.push_back({"position", "must be first or second"});
      }
      if (step) CheckStep(*step, MwpStepCount(pending), errors);
      if (step && pos) error = errors::IncorrectNumbers{*pos, *step};
      break;
    }
    case ErrorKind::kIncorrectOperators: {
      const auto step = IntField(fields, "step", errors);
      if (step) {
        CheckStep(*step, MwpStepCount(pending), errors);
        error = errors::IncorrectOperators{*step};
      }
      break;
    }
    case ErrorKind::kMissingOperators:
      error = errors::MissingOperators{};
      break;
    case ErrorKind::kLogicallyInvalid: {
      const auto op = StringField(fields, "op", errors, true);
      const auto rule = IntField(fields, "rule", errors);
      std::optional<Connective> connective;
      if (op) {
        if (*op == "and") connective = Connective::kAnd;
        else if (*op == "or") connective = Connective::kOr;
        else errors.push_back({"op", "must be and or or"});
      }
      if (rule) {
        const snlr::Rule* r = instance.snlr()->scenario.FindRule(*rule);
        if (r == nullptr) {
          errors.push_back({"rule", "is not a rule of this scenario"});
        } else if (!r->is_connective()) {
          errors.push_back({"rule", "has no connective"});
        } else if (connective && r->connective != *connective) {
          errors.push_back({"op", "does not match rule " + std::to_string(*rule)});
        }
      }
      if (connective && rule) error = errors::LogicallyInvalid{*connective, *rule};
      break;
    }
    case ErrorKind::kMissingLink:
      error = errors::MissingLink{};
      break;
    case ErrorKind::kMissingImplicitKnowledge:
      error = errors::MissingImplicitKnowledge{};
      break;
    case ErrorKind::kContradiction:
      error = errors::Contradiction{};
      break;
    case ErrorKind::kSemanticMisalignment: {
      const auto snippet = StringField(fields, "snippet", errors, true);
      if (snippet) {
        if (snippet->empty()) {
          errors.push_back({"snippet", "must not be empty"});
        } else if (snippet->find_first_of("\"\n") != std::string::npos) {
          errors.push_back({"snippet", "must not contain quotes or newlines"});
        } else {
          error = errors::SemanticMisalignment{*snippet};
        }
      }
      break;
    }
  }
  if (!errors.empty()) throw FeedbackValidationError(std::move(errors));
  return Feedback::Error(std::move(*error), std::move(hint));
}

SessionGeneratorFactory DefaultSessionGenerators(const TaskResources& resources,
                                                 FixtureSet fixtures) {
  return [&resources, fixtures = std::move(fixtures)](
             const TaskInstance&, const std::string& kind)
             -> std::unique_ptr<Generator> {
    if (kind == "repair") return std::make_unique<RepairGenerator>(resources);
    constexpr std::string_view kScripted = "scripted:";
    if (kind.rfind(kScripted, 0) == 0) {
      return ScriptedGenerator::FromFixture(fixtures,
                                            kind.substr(kScripted.size()));
    }
    throw Error(ErrorCode::kInvalidConfig, "unknown session generator " + kind);
  };
}

json SessionToJson(const Session& s) {
  json turns = json::array();
  for (const auto& turn : s.turns) turns.push_back(io::TurnToJson(turn));
  return {{"schema", kSessionSchema},
          {"version", io::kSchemaVersion},
          {"id", s.id},
          {"instance_id", s.instance_id},
          {"config",
           {{"max_turns", s.config.max_turns},
            {"generator", s.config.generator},
            {"oracle_suggestion", s.config.oracle_suggestion}}},
          {"state", SessionStateName(s.state)},
          {"stop", s.stop ? json(StopReasonName(*s.stop)) : json(nullptr)},
          {"turns", turns},
          {"pending", s.pending ? PendingToJson(*s.pending) : json(nullptr)},
          {"revision", s.version}};
}

Session SessionFromJson(const json& j) {
  try {
    if (j.at("schema") != kSessionSchema || j.at("version") != io::kSchemaVersion) {
      throw Error(ErrorCode::kVersionMismatch, "not a session record");
    }
    Session s;
    s.id = j.at("id").get<std::string>();
    s.instance_id = j.at("instance_id").get<std::string>();
    const json& c = j.at("config");
    s.config = {c.at("max_turns").get<int>(), c.at("generator").get<std::string>(),
                c.value("oracle_suggestion", false)};
    const auto state = j.at("state").get<std::string>();
    if (state == "awaiting_feedback") s.state = SessionState::kAwaitingFeedback;
    else if (state == "finished") s.state = SessionState::kFinished;
    else throw Error(ErrorCode::kInvariantViolation, "unknown state " + state);
    if (!j.at("stop").is_null()) {
      s.stop = ParseStopReason(j.at("stop").get<std::string>());
      if (!s.stop) throw Error(ErrorCode::kInvariantViolation, "unknown stop reason");
    }
    for (const auto& t : j.at("turns")) s.turns.push_back(io::TurnFromJson(t));
    if (!j.at("pending").is_null()) s.pending = PendingFromJson(j.at("pending"));
    s.version = j.value("revision", std::uint64_t{0});
    const bool awaiting = s.state == SessionState::kAwaitingFeedback;
    if (awaiting != s.pending.has_value() || awaiting == s.stop.has_value() ||
        static_cast<int>(s.turns.size()) > s.config.max_turns) {
      throw Error(ErrorCode::kInvariantViolation,
                  "session " + s.id + " breaks its state invariants");
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvariantViolation,
                std::string("malformed session record: ") + e.what());
  }
}

SessionManager::SessionManager(std::vector<TaskInstance> instances,
                               const TaskResources& resources,
                               SessionGeneratorFactory make_generator,
                               std::string store_dir)
    : instances_(std::move(instances)),
      resources_(resources),
      make_generator_(std::move(make_generator)),
      store_dir_(std::move(store_dir)) {
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    index_.emplace(instances_[i].id(), i);
  }
  if (!store_dir_.empty()) {
    fs::create_directories(fs::path(store_dir_) / "sessions");
    Restore();
  }
}

const TaskInstance* SessionManager::FindInstance(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &instances_[it->second];
}

std::shared_ptr<SessionManager::Entry> SessionManager::Find(
    const std::string& id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kNotFound, "no session " + id);
  }
  return it->second;
}

void SessionManager::Publish(Entry& entry, std::shared_ptr<const Session> next) {
  std::lock_guard<std::mutex> lock(mu_);
  entry.snapshot = std::move(next);
}

void SessionManager::Persist(const Session& session) const {
  if (store_dir_.empty()) return;
  const fs::path dir = fs::path(store_dir_) / "sessions";
  const fs::path final_path = dir / (session.id + ".json");
  const fs::path tmp_path = dir / (session.id + ".json.tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << SessionToJson(session).dump(2) << "\n";
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp_path.string());
  }
  std::error_code ec;
  fs::rename(tmp_path, final_path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace " + final_path.string());
}

void SessionManager::Restore() {
  const fs::path dir = fs::path(store_dir_) / "sessions";
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    try {
      Session s = SessionFromJson(io::ReadJsonFile(path.string()));
      const TaskInstance* instance = FindInstance(s.instance_id);
      if (instance == nullptr) {
        throw Error(ErrorCode::kUnknownInstance,
                    "instance " + s.instance_id + " is not loaded");
      }
      auto entry = std::make_shared<Entry>();
      if (s.state == SessionState::kAwaitingFeedback) {
        // Replay every proposal the generator made so its memory of tried
        // alternatives matches the recorded history.
        entry->generator = make_generator_(*instance, s.config.generator);
        for (std::size_t i = 0; i <= s.turns.size(); ++i) {
          ProposeRequest request;
          request.instance = instance;
          request.previous = i == 0 ? nullptr : &s.turns[i - 1].selected;
          request.feedback = i == 0 ? nullptr : &s.turns[i - 1].feedback;
          request.turn = static_cast<int>(i);
          try {
            auto proposals = entry->generator->Propose(request);
            if (i == s.turns.size() &&
                proposals.front().hypothesis != s.pending->selected) {
              warnings_.push_back(path.string() +
                                  ": replayed proposal differs from the stored one");
            }
          } catch (const Error&) {
          }
        }
      }
      entry->snapshot = std::make_shared<const Session>(std::move(s));
      const std::string& id = entry->snapshot->id;
      if (id.size() > 1 && id[0] == 's') {
        try {
          next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(id.substr(1)) + 1);
        } catch (const std::exception&) {
        }
      }
      sessions_[id] = std::move(entry);
    } catch (const Error& e) {
      warnings_.push_back(path.string() + ": " + e.what());
    }
  }
}

void SessionManager::Advance(Session& session, Generator& generator,
                             const TaskInstance& instance) {
  const int t = static_cast<int>(session.turns.size()) + 1;
  ProposeRequest request;
  request.instance = &instance;
  request.previous = session.turns.empty() ? nullptr : &session.turns.back().selected;
  request.feedback = session.turns.empty() ? nullptr : &session.turns.back().feedback;
  request.turn = t - 1;
  try {
    auto proposals = generator.Propose(request);
    if (proposals.empty()) {
      throw Error(ErrorCode::kInvariantViolation, "generator returned no hypothesis");
    }
    Turn turn;
    turn.t = t;
    turn.proposals = {proposals.front().hypothesis};
    turn.selected = proposals.front().hypothesis;
    turn.source = FeedbackSource::kHuman;
    turn.generator_emitted_no_hint = proposals.front().emitted_no_hint;
    session.pending = std::move(turn);
    session.state = SessionState::kAwaitingFeedback;
  } catch (const Error& e) {
    if (session.turns.empty()) throw;
    Turn turn;
    turn.t = t;
    turn.selected = session.turns.back().selected;
    turn.feedback = Feedback::Free(e.what());
    turn.source = FeedbackSource::kHuman;
    turn.error = std::string(ErrorCodeName(e.code())) + ": " + e.what();
    session.turns.push_back(std::move(turn));
    session.pending.reset();
    session.state = SessionState::kFinished;
    session.stop = StopReason::kError;
  }
}

std::shared_ptr<const Session> SessionManager::Create(
    const std::string& instance_id, const SessionConfig& config) {
  if (config.max_turns < 1) {
    throw Error(ErrorCode::kInvalidConfig, "T must be at least 1");
  }
  const TaskInstance* instance = FindInstance(instance_id);
  if (instance == nullptr) {
    throw Error(ErrorCode::kUnknownInstance, "no instance " + instance_id);
  }
  auto entry = std::make_shared<Entry>();
  entry->generator = make_generator_(*instance, config.generator);

  Session s;
  s.instance_id = instance_id;
  s.config = config;
  Advance(s, *entry->generator, *instance);
  {
    std::lock_guard<std::mutex> lock(mu_);
    char id[32];
    std::snprintf(id, sizeof(id), "s%06llu",
                  static_cast<unsigned long long>(next_id_++));
    s.id = id;
  }
  s.version = 1;
  Persist(s);
  entry->snapshot = std::make_shared<const Session>(std::move(s));
  auto snapshot = entry->snapshot;
  std::lock_guard<std::mutex> lock(mu_);
  sessions_[snapshot->id] = std::move(entry);
  return snapshot;
}

std::shared_ptr<const Session> SessionManager::Get(const std::string& id) const {
  auto entry = Find(id);
  std::lock_guard<std::mutex> lock(mu_);
  return entry->snapshot;
}

std::vector<std::shared_ptr<const Session>> SessionManager::List() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::shared_ptr<const Session>> out;
  out.reserve(sessions_.size());
  for (const auto& [id, entry] : sessions_) out.push_back(entry->snapshot);
  return out;
}

std::shared_ptr<const Session> SessionManager::Submit(const std::string& id,
                                                      const Feedback& feedback) {
  return SubmitWith(id, [&](const Session&, const TaskInstance&) {
    return feedback;
  });
}

std::shared_ptr<const Session> SessionManager::SubmitJson(const std::string& id,
                                                          const json& body) {
  if (!body.is_object()) {
    Reject("body", "must be a JSON object");
  }
  const int forms = static_cast<int>(body.contains("text")) +
                    static_cast<int>(body.contains("structured")) +
                    static_cast<int>(body.contains("no_hint"));
  if (forms != 1) {
    Reject("body", "must carry exactly one of text, structured, no_hint");
  }
  return SubmitWith(id, [&](const Session& s, const TaskInstance& instance) {
    if (body.contains("text")) {
      if (!body.at("text").is_string()) {
        Reject("text", "must be a string");
      }
      return ParseFeedback(body.at("text").get<std::string>());
    }
    if (body.contains("no_hint")) {
      if (body.at("no_hint") != true) {
        Reject("no_hint", "must be true");
      }
      return Feedback::Accept();
    }
    return StructuredFeedbackFromJson(body.at("structured"), instance,
                                      s.pending->selected, resources_);
  });
}

std::shared_ptr<const Session> SessionManager::SubmitWith(
    const std::string& id,
    const std::function<Feedback(const Session&, const TaskInstance&)>& build) {
  auto entry = Find(id);
  std::lock_guard<std::mutex> op(entry->op);
  std::shared_ptr<const Session> current;
  {
    std::lock_guard<std::mutex> lock(mu_);
    current = entry->snapshot;
  }
  if (current->state != SessionState::kAwaitingFeedback) {
    throw Error(ErrorCode::kWrongState, "session " + id + " is finished");
  }
  const TaskInstance& instance = *FindInstance(current->instance_id);
  const Feedback feedback = build(*current, instance);

  Session next = *current;
  Turn turn = std::move(*next.pending);
  next.pending.reset();
  turn.feedback = feedback;
  turn.source = FeedbackSource::kHuman;
  const bool emitted_no_hint = turn.generator_emitted_no_hint;
  next.turns.push_back(std::move(turn));
  if (feedback.is_no_hint()) {
    next.state = SessionState::kFinished;
    next.stop = StopReason::kNoHint;
  } else if (emitted_no_hint) {
    next.state = SessionState::kFinished;
    next.stop = StopReason::kGeneratorEmittedNoHint;
  } else if (static_cast<int>(next.turns.size()) >= next.config.max_turns) {
    next.state = SessionState::kFinished;
    next.stop = StopReason::kBudgetExhausted;
  } else {
    Advance(next, *entry->generator, instance);
  }
  if (next.state == SessionState::kFinished) entry->generator.reset();
  ++next.version;
  Persist(next);
  auto snapshot = std::make_shared<const Session>(std::move(next));
  Publish(*entry, snapshot);
  return snapshot;
}

RefinementTrace SessionManager::ExportTrace(const std::string& id) const {
  auto s = Get(id);
  if (s->state != SessionState::kFinished) {
    throw Error(ErrorCode::kWrongState, "session " + id + " is still running");
  }
  const TaskInstance& instance = *FindInstance(s->instance_id);
  RefinementTrace trace;
  trace.run_id = s->id;
  trace.instance_id = s->instance_id;
  trace.task = instance.task();
  trace.turns = s->turns;
  trace.stop = *s->stop;
  if (!s->turns.empty()) {
    trace.final_hypothesis = s->turns.back().selected;
    trace.final_answer = DeriveAnswer(instance, trace.final_hypothesis, resources_);
  }
  return trace;
}

std::optional<Feedback> SessionManager::OracleSuggestion(
    const Session& session) const {
  if (!session.config.oracle_suggestion || !session.pending) return std::nullopt;
  const TaskInstance* instance = FindInstance(session.instance_id);
  if (instance == nullptr) return std::nullopt;
  try {
    return OracleFeedback(*instance, session.pending->selected, resources_);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace refine
