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

#include "refine/critic.h"

#include "refine/error.h"

namespace refine {

std::string_view FeedbackSourceName(FeedbackSource source) {
  switch (source) {
    case FeedbackSource::kOracle: return "oracle";
    case FeedbackSource::kNoisy: return "noisy";
    case FeedbackSource::kRemote: return "remote";
    case FeedbackSource::kHuman: return "human";
  }
  return "oracle";
}

std::optional<FeedbackSource> ParseFeedbackSource(std::string_view name) {
  for (auto s : {FeedbackSource::kOracle, FeedbackSource::kNoisy,
                 FeedbackSource::kRemote, FeedbackSource::kHuman}) {
    if (FeedbackSourceName(s) == name) return s;
  }
  return std::nullopt;
}

Feedback RandomFeedback(const TaskInstance& instance,
                        const Hypothesis& hypothesis, Rng& rng,
                        const TaskResources& resources) {
  const auto kinds = KindsForTask(instance.task());
  const ErrorKind kind = rng.Pick(kinds);
  switch (kind) {
    case ErrorKind::kIncorrectNumbers:
    case ErrorKind::kIncorrectOperators: {
      std::size_t steps = 1;
      try {
        steps = mwp::ParseEquation(hypothesis.text).size();
      } catch (const Error&) {
      }
      const int step = static_cast<int>(rng.Index(steps));
      if (kind == ErrorKind::kIncorrectOperators) {
        return Feedback::Error(errors::IncorrectOperators{step});
      }
      const auto position = rng.Bernoulli(0.5) ? OperandPosition::kFirst
                                               : OperandPosition::kSecond;
      return Feedback::Error(errors::IncorrectNumbers{position, step});
    }
    case ErrorKind::kMissingOperators:
      return Feedback::Error(errors::MissingOperators{});
    case ErrorKind::kLogicallyInvalid: {
      const auto& rules = instance.snlr()->scenario.rules;
      const int rule = rules.empty() ? 1 : rng.Pick(rules).id;
      const auto op = rng.Bernoulli(0.5) ? Connective::kAnd : Connective::kOr;
      return Feedback::Error(errors::LogicallyInvalid{op, rule});
    }
    case ErrorKind::kMissingLink:
      return Feedback::Error(errors::MissingLink{});
    case ErrorKind::kMissingImplicitKnowledge:
      return Feedback::Error(errors::MissingImplicitKnowledge{});
    case ErrorKind::kContradiction:
      return Feedback::Error(errors::Contradiction{});
    case ErrorKind::kSemanticMisalignment: {
      auto phrases =
          moral::ExtractVerbPhrases(instance.moral()->context, resources.verbs);
      if (phrases.empty()) phrases.push_back("do something else");
      const std::string snippet = "to " + rng.Pick(phrases);
      const std::string hint = "to " + rng.Pick(phrases);
      return Feedback::Error(errors::SemanticMisalignment{snippet}, hint);
    }
  }
  return Feedback::Error(errors::MissingOperators{});
}

NoisyCritic::NoisyCritic(std::unique_ptr<Critic> inner, NoiseConfig config,
                         const TaskResources& resources)
    : inner_(std::move(inner)),
      config_(config),
      resources_(resources),
      rng_(config.seed) {
  if (!(config_.epsilon >= 0.0 && config_.epsilon <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "noise epsilon must be in [0, 1]");
  }
}

Feedback NoisyCritic::Critique(const TaskInstance& instance,
                               const Hypothesis& hypothesis) {
  Feedback honest = inner_->Critique(instance, hypothesis);
  std::lock_guard<std::mutex> lock(mu_);
  // One draw per call, whatever the outcome, keeps the replacement
  // decisions aligned across critics that share a seed.
  const bool replace = rng_.Bernoulli(config_.epsilon);
  if (!replace || (config_.exempt_no_hint && honest.is_no_hint())) return honest;
  return RandomFeedback(instance, hypothesis, rng_, resources_);
}

RemoteCritic::RemoteCritic(std::shared_ptr<CompletionTransport> transport,
                           PromptRecipe recipe, RetryPolicy retry,
                           int max_tokens)
    : transport_(std::move(transport)),
      recipe_(std::move(recipe)),
      retry_(retry),
      max_tokens_(max_tokens) {}

Feedback RemoteCritic::Critique(const TaskInstance& instance,
                                const Hypothesis& hypothesis) {
  CompletionRequest request;
  request.prompt = recipe_.RenderCritic(ContextText(instance), hypothesis.text);
  request.max_tokens = max_tokens_;
  request.temperature = 0.0;
  request.top_p = 1.0;
  std::string reply;
  try {
    reply = CompleteWithRetry(*transport_, request, retry_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kTransport && e.code() != ErrorCode::kTimeout) {
      throw;
    }
    return Feedback::Free(std::string(kCriticUnavailableText));
  }
  // Served critics sometimes continue past the feedback line.
  const auto newline = reply.find('\n');
  const auto first = reply.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && newline != std::string::npos &&
      newline > first) {
    reply = reply.substr(0, newline);
  }
  return ParseFeedback(reply);
}

}  // namespace refine
