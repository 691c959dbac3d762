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

#ifndef REFINE_FEEDBACK_H_
#define REFINE_FEEDBACK_H_

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace refine {

enum class Task { kMwp, kSnlr, kMoral };

std::string_view TaskName(Task task);
std::optional<Task> ParseTaskName(std::string_view name);

enum class OperandPosition { kFirst, kSecond };
enum class Connective { kAnd, kOr };

std::string_view PositionName(OperandPosition position);
std::string_view ConnectiveName(Connective connective);

// One alternative per row of the error taxonomy. Each carries exactly the
// parameters its template consumes.
namespace errors {

struct IncorrectNumbers {
  OperandPosition position;
  int step;
  bool operator==(const IncorrectNumbers&) const = default;
};
struct IncorrectOperators {
  int step;
  bool operator==(const IncorrectOperators&) const = default;
};
struct MissingOperators {
  bool operator==(const MissingOperators&) const = default;
};
struct LogicallyInvalid {
  Connective op;
  int rule;
  bool operator==(const LogicallyInvalid&) const = default;
};
struct MissingLink {
  bool operator==(const MissingLink&) const = default;
};
struct MissingImplicitKnowledge {
  bool operator==(const MissingImplicitKnowledge&) const = default;
};
struct Contradiction {
  bool operator==(const Contradiction&) const = default;
};
struct SemanticMisalignment {
  std::string snippet;
  bool operator==(const SemanticMisalignment&) const = default;
};

}  // namespace errors

using TaskError =
    std::variant<errors::IncorrectNumbers, errors::IncorrectOperators,
                 errors::MissingOperators, errors::LogicallyInvalid,
                 errors::MissingLink, errors::MissingImplicitKnowledge,
                 errors::Contradiction, errors::SemanticMisalignment>;

// Discriminator for TaskError, in taxonomy order.
enum class ErrorKind {
  kIncorrectNumbers,
  kIncorrectOperators,
  kMissingOperators,
  kLogicallyInvalid,
  kMissingLink,
  kMissingImplicitKnowledge,
  kContradiction,
  kSemanticMisalignment,
};

inline constexpr int kErrorKindCount = 8;

ErrorKind KindOf(const TaskError& error);
Task TaskOf(ErrorKind kind);
std::string_view ErrorKindName(ErrorKind kind);
std::optional<ErrorKind> ParseErrorKindName(std::string_view name);

// Kinds belonging to one task, in taxonomy order.
std::vector<ErrorKind> KindsForTask(Task task);

// Exact template instantiation, without any hint clause.
std::string RenderError(const TaskError& error);

inline constexpr std::string_view kNoHintText = "No hint";
inline constexpr std::string_view kHintMarker = " Hint: ";

// The critic's verdict on one hypothesis: acceptance ("No hint"), a
// taxonomy error with an optional hint, or text that fits no template.
class Feedback {
 public:
  struct NoHint {
    bool operator==(const NoHint&) const = default;
  };
  struct Structured {
    TaskError error;
    std::optional<std::string> hint;
    bool operator==(const Structured&) const = default;
  };
  struct Unstructured {
    std::string text;
    bool operator==(const Unstructured&) const = default;
  };
  using Kind = std::variant<NoHint, Structured, Unstructured>;

  Feedback() : Feedback(NoHint{}) {}

  static Feedback Accept() { return Feedback(NoHint{}); }
  static Feedback Error(TaskError error,
                        std::optional<std::string> hint = std::nullopt);
  static Feedback Free(std::string text);

  const Kind& kind() const { return kind_; }
  const std::string& rendered() const { return rendered_; }

  bool is_no_hint() const { return std::holds_alternative<NoHint>(kind_); }
  bool is_structured() const {
    return std::holds_alternative<Structured>(kind_);
  }
  const Structured* structured() const {
    return std::get_if<Structured>(&kind_);
  }

  bool operator==(const Feedback& other) const { return kind_ == other.kind_; }

 private:
  explicit Feedback(Kind kind);

  Kind kind_;
  std::string rendered_;
};

// Total inverse of Feedback::rendered(). "No hint" (and a bare "No", which
// some served critics emit) parse to NoHint; text matching no template is
// carried verbatim as Unstructured.
Feedback ParseFeedback(std::string_view text);

}  // namespace refine

#endif  // REFINE_FEEDBACK_H_
