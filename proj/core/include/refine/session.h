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

#ifndef REFINE_SESSION_H_
#define REFINE_SESSION_H_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "refine/error.h"
#include "refine/generator.h"
#include "refine/loop.h"
#include "refine/task.h"

namespace refine {

// Interactive refinement with a human in the critic's seat. A session holds
// one pending hypothesis while it waits for feedback; submitting feedback
// either finishes it or asks the generator for the next hypothesis.
enum class SessionState { kAwaitingFeedback, kFinished };

std::string_view SessionStateName(SessionState state);

struct SessionConfig {
  int max_turns = 3;
  std::string generator = "repair";  // "repair" or "scripted:<fixture id>"
  bool oracle_suggestion = false;
  bool operator==(const SessionConfig&) const = default;
};

struct Session {
  std::string id;
  std::string instance_id;
  SessionConfig config;
  SessionState state = SessionState::kAwaitingFeedback;
  std::optional<StopReason> stop;
  std::vector<Turn> turns;     // critiqued turns
  std::optional<Turn> pending;  // feedback not yet given
  std::uint64_t version = 0;   // bumped on every transition
  bool operator==(const Session&) const = default;

  int current_turn() const {
    return pending ? pending->t : static_cast<int>(turns.size());
  }
};

struct FieldError {
  std::string field;
  std::string message;
  bool operator==(const FieldError&) const = default;
};

// kInvalidFeedback with one message per offending field.
class FeedbackValidationError : public Error {
 public:
  explicit FeedbackValidationError(std::vector<FieldError> fields);
  const std::vector<FieldError>& fields() const { return fields_; }

 private:
  std::vector<FieldError> fields_;
};

// Builds structured feedback from {"type", "step", "position", "op",
// "rule", "snippet", "hint"} and checks it against the taxonomy, the
// instance's task and the pending hypothesis (step ids that exist, rules in
// the scenario). Throws FeedbackValidationError.
Feedback StructuredFeedbackFromJson(const nlohmann::json& fields,
                                    const TaskInstance& instance,
                                    const Hypothesis& pending,
                                    const TaskResources& resources);

using SessionGeneratorFactory = std::function<std::unique_ptr<Generator>(
    const TaskInstance&, const std::string& kind)>;

// Supports "repair" and "scripted:<id>" over the given fixtures.
SessionGeneratorFactory DefaultSessionGenerators(const TaskResources& resources,
                                                 FixtureSet fixtures = {});

nlohmann::json SessionToJson(const Session& session);
Session SessionFromJson(const nlohmann::json& j);

// Many sessions at once. Operations on one session are serialized; readers
// get immutable snapshots. With a store directory every transition is
// written to <store>/sessions/<id>.json before the call returns, and
// sessions found there are restored on construction (generator state is
// rebuilt by replaying the recorded feedback).
class SessionManager {
 public:
  SessionManager(std::vector<TaskInstance> instances,
                 const TaskResources& resources,
                 SessionGeneratorFactory make_generator,
                 std::string store_dir = "");

  // Throws kUnknownInstance, kInvalidConfig, or the generator's error.
  std::shared_ptr<const Session> Create(const std::string& instance_id,
                                        const SessionConfig& config);
  // Throws kNotFound.
  std::shared_ptr<const Session> Get(const std::string& id) const;
  std::vector<std::shared_ptr<const Session>> List() const;

  // Throws kNotFound, kWrongState.
  std::shared_ptr<const Session> Submit(const std::string& id,
                                        const Feedback& feedback);
  // {"text"}, {"structured": {...}} or {"no_hint": true}. Throws
  // kInvalidFeedback (FeedbackValidationError for structured fields).
  std::shared_ptr<const Session> SubmitJson(const std::string& id,
                                            const nlohmann::json& body);

  // The standard trace record of a finished session. Throws kNotFound,
  // kWrongState.
  RefinementTrace ExportTrace(const std::string& id) const;

  // What the oracle would say about the pending hypothesis, if anything.
  std::optional<Feedback> OracleSuggestion(const Session& session) const;

  const TaskInstance* FindInstance(const std::string& id) const;
  const std::vector<TaskInstance>& instances() const { return instances_; }
  // Files in the store that could not be restored.
  const std::vector<std::string>& restore_warnings() const { return warnings_; }

 private:
  struct Entry {
    std::mutex op;  // serializes transitions
    std::shared_ptr<const Session> snapshot;
    std::unique_ptr<Generator> generator;
  };

  std::shared_ptr<Entry> Find(const std::string& id) const;
  void Publish(Entry& entry, std::shared_ptr<const Session> next);
  void Persist(const Session& session) const;
  void Restore();
  // Asks for the next hypothesis. A generator failure after the first turn
  // is recorded as an error turn and finishes the session.
  void Advance(Session& session, Generator& generator,
               const TaskInstance& instance);
  std::shared_ptr<const Session> SubmitWith(
      const std::string& id,
      const std::function<Feedback(const Session&, const TaskInstance&)>& build);

  std::vector<TaskInstance> instances_;
  std::map<std::string, std::size_t> index_;
  const TaskResources& resources_;
  SessionGeneratorFactory make_generator_;
  std::string store_dir_;
  std::vector<std::string> warnings_;

  mutable std::mutex mu_;  // guards sessions_ and next_id_
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace refine

#endif  // REFINE_SESSION_H_
