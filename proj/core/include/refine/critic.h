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

#ifndef REFINE_CRITIC_H_
#define REFINE_CRITIC_H_

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "refine/completion.h"
#include "refine/feedback.h"
#include "refine/prompt.h"
#include "refine/rng.h"
#include "refine/task.h"

namespace refine {

enum class FeedbackSource { kOracle, kNoisy, kRemote, kHuman };

std::string_view FeedbackSourceName(FeedbackSource source);
std::optional<FeedbackSource> ParseFeedbackSource(std::string_view name);

// Always returns a Feedback; NoHint means the hypothesis is accepted.
class Critic {
 public:
  virtual ~Critic() = default;
  virtual Feedback Critique(const TaskInstance& instance,
                            const Hypothesis& hypothesis) = 0;
  virtual FeedbackSource source() const = 0;
};

class OracleCritic : public Critic {
 public:
  explicit OracleCritic(const TaskResources& resources) : resources_(resources) {}
  Feedback Critique(const TaskInstance& instance,
                    const Hypothesis& hypothesis) override {
    return OracleFeedback(instance, hypothesis, resources_);
  }
  FeedbackSource source() const override { return FeedbackSource::kOracle; }

 private:
  const TaskResources& resources_;
};

struct NoiseConfig {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  // Keep acceptances intact instead of replacing them too.
  bool exempt_no_hint = false;
};

// A uniformly drawn taxonomy error for the instance's task, with parameters
// valid for the hypothesis and scenario. Never NoHint.
Feedback RandomFeedback(const TaskInstance& instance,
                        const Hypothesis& hypothesis, Rng& rng,
                        const TaskResources& resources);

// With probability epsilon the inner critic's verdict is replaced by
// RandomFeedback. Draws come from one seeded stream per critic, so a critic
// belongs to a single run.
class NoisyCritic : public Critic {
 public:
  NoisyCritic(std::unique_ptr<Critic> inner, NoiseConfig config,
              const TaskResources& resources);
  Feedback Critique(const TaskInstance& instance,
                    const Hypothesis& hypothesis) override;
  FeedbackSource source() const override { return FeedbackSource::kNoisy; }

 private:
  std::unique_ptr<Critic> inner_;
  NoiseConfig config_;
  const TaskResources& resources_;
  std::mutex mu_;
  Rng rng_;
};

inline constexpr std::string_view kCriticUnavailableText = "critic unavailable";

// Greedy completion of the critic recipe, parsed with ParseFeedback. After
// the retry budget is spent the turn gets Unstructured("critic unavailable").
class RemoteCritic : public Critic {
 public:
  RemoteCritic(std::shared_ptr<CompletionTransport> transport,
               PromptRecipe recipe, RetryPolicy retry, int max_tokens = 64);
  Feedback Critique(const TaskInstance& instance,
                    const Hypothesis& hypothesis) override;
  FeedbackSource source() const override { return FeedbackSource::kRemote; }

 private:
  std::shared_ptr<CompletionTransport> transport_;
  PromptRecipe recipe_;
  RetryPolicy retry_;
  int max_tokens_;
};

}  // namespace refine

#endif  // REFINE_CRITIC_H_
