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

#include "refine/feedback.h"

#include <array>
#include <charconv>
#include <regex>
#include <utility>

namespace refine {
namespace {

constexpr std::array<std::string_view, kErrorKindCount> kKindNames = {
    "IncorrectNumbers", "IncorrectOperators",       "MissingOperators",
    "LogicallyInvalid", "MissingLink",              "MissingImplicitKnowledge",
    "Contradiction",    "SemanticMisalignment",
};

std::string_view Trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<int> ToIndex(const std::string& digits) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return v;
}

// Matches a single template instantiation with no hint clause.
std::optional<TaskError> MatchTemplate(const std::string& text) {
  static const std::regex kNumbers(
      R"(The (first|second) number in #(\d+) is incorrect\.)");
  static const std::regex kOperator(R"(The operator in #(\d+) is incorrect\.)");
  static const std::regex kLogic(
      R"(The (and|or) operator makes inference rule (\d+) invalid\.)");
  static const std::regex kMisaligned(R"re(Semantically misaligned: "(.*)")re");

  std::smatch m;
  if (text == "An operator is missing.") return errors::MissingOperators{};
  if (text == "Missing link between the fact and the rules.") {
    return errors::MissingLink{};
  }
  if (text == "The implicit knowledge is missing.") {
    return errors::MissingImplicitKnowledge{};
  }
  if (text == "Contradiction") return errors::Contradiction{};
  if (std::regex_match(text, m, kNumbers)) {
    auto step = ToIndex(m[2].str());
    if (!step) return std::nullopt;
    return errors::IncorrectNumbers{
        m[1] == "first" ? OperandPosition::kFirst : OperandPosition::kSecond,
        *step};
  }
  if (std::regex_match(text, m, kOperator)) {
    auto step = ToIndex(m[1].str());
    if (!step) return std::nullopt;
    return errors::IncorrectOperators{*step};
  }
  if (std::regex_match(text, m, kLogic)) {
    auto rule = ToIndex(m[2].str());
    if (!rule) return std::nullopt;
    return errors::LogicallyInvalid{
        m[1] == "and" ? Connective::kAnd : Connective::kOr, *rule};
  }
  if (std::regex_match(text, m, kMisaligned)) {
    return errors::SemanticMisalignment{m[1].str()};
  }
  return std::nullopt;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string_view TaskName(Task task) {
  switch (task) {
    case Task::kMwp: return "mwp";
    case Task::kSnlr: return "snlr";
    case Task::kMoral: return "moral";
  }
  return "unknown";
}

std::optional<Task> ParseTaskName(std::string_view name) {
  if (name == "mwp") return Task::kMwp;
  if (name == "snlr") return Task::kSnlr;
  if (name == "moral" || name == "ms") return Task::kMoral;
  return std::nullopt;
}

std::string_view PositionName(OperandPosition position) {
  return position == OperandPosition::kFirst ? "first" : "second";
}

std::string_view ConnectiveName(Connective connective) {
  return connective == Connective::kAnd ? "and" : "or";
}

ErrorKind KindOf(const TaskError& error) {
  return static_cast<ErrorKind>(error.index());
}

Task TaskOf(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIncorrectNumbers:
    case ErrorKind::kIncorrectOperators:
    case ErrorKind::kMissingOperators:
      return Task::kMwp;
    case ErrorKind::kLogicallyInvalid:
    case ErrorKind::kMissingLink:
    case ErrorKind::kMissingImplicitKnowledge:
      return Task::kSnlr;
    case ErrorKind::kContradiction:
    case ErrorKind::kSemanticMisalignment:
      return Task::kMoral;
  }
  return Task::kMwp;
}

std::string_view ErrorKindName(ErrorKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<ErrorKind> ParseErrorKindName(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<ErrorKind>(i);
  }
  return std::nullopt;
}

std::vector<ErrorKind> KindsForTask(Task task) {
  std::vector<ErrorKind> out;
  for (int i = 0; i < kErrorKindCount; ++i) {
    auto kind = static_cast<ErrorKind>(i);
    if (TaskOf(kind) == task) out.push_back(kind);
  }
  return out;
}

std::string RenderError(const TaskError& error) {
  return std::visit(
      Overloaded{
          [](const errors::IncorrectNumbers& e) {
            return "The " + std::string(PositionName(e.position)) +
                   " number in #" + std::to_string(e.step) + " is incorrect.";
          },
          [](const errors::IncorrectOperators& e) {
            return "The operator in #" + std::to_string(e.step) +
                   " is incorrect.";
          },
          [](const errors::MissingOperators&) {
            return std::string("An operator is missing.");
          },
          [](const errors::LogicallyInvalid& e) {
            return "The " + std::string(ConnectiveName(e.op)) +
                   " operator makes inference rule " + std::to_string(e.rule) +
                   " invalid.";
          },
          [](const errors::MissingLink&) {
            return std::string("Missing link between the fact and the rules.");
          },
          [](const errors::MissingImplicitKnowledge&) {
            return std::string("The implicit knowledge is missing.");
          },
          [](const errors::Contradiction&) {
            return std::string("Contradiction");
          },
          [](const errors::SemanticMisalignment& e) {
            return "Semantically misaligned: \"" + e.snippet + "\"";
          },
      },
      error);
}

Feedback::Feedback(Kind kind) : kind_(std::move(kind)) {
  rendered_ = std::visit(
      Overloaded{
          [](const NoHint&) { return std::string(kNoHintText); },
          [](const Structured& s) {
            std::string out = RenderError(s.error);
            if (s.hint) out += std::string(kHintMarker) + *s.hint;
            return out;
          },
          [](const Unstructured& u) { return u.text; },
      },
      kind_);
}

Feedback Feedback::Error(TaskError error, std::optional<std::string> hint) {
  if (hint) {
    auto trimmed = Trim(*hint);
    hint = trimmed.empty() ? std::nullopt
                           : std::optional<std::string>(std::string(trimmed));
  }
  return Feedback(Structured{std::move(error), std::move(hint)});
}

Feedback Feedback::Free(std::string text) {
  return Feedback(Unstructured{std::move(text)});
}

Feedback ParseFeedback(std::string_view raw) {
  const std::string text(Trim(raw));
  if (text == kNoHintText || text == "No" || text == "No hint.") {
    return Feedback::Accept();
  }
  if (auto error = MatchTemplate(text)) return Feedback::Error(std::move(*error));
  // Try each hint-marker occurrence as the split point; the first prefix that
  // is a complete template wins.
  for (auto pos = text.find(kHintMarker); pos != std::string::npos;
       pos = text.find(kHintMarker, pos + 1)) {
    if (auto error = MatchTemplate(text.substr(0, pos))) {
      auto hint = text.substr(pos + kHintMarker.size());
      if (!Trim(hint).empty()) {
        return Feedback::Error(std::move(*error), std::move(hint));
      }
    }
  }
  return Feedback::Free(text);
}

}  // namespace refine
