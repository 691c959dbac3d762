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

#ifndef REFINE_LOOP_H_
#define REFINE_LOOP_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "refine/critic.h"
#include "refine/generator.h"
#include "refine/task.h"

namespace refine {

enum class StopReason {
  kNoHint,
  kGeneratorEmittedNoHint,
  kBudgetExhausted,
  kError,
};

std::string_view StopReasonName(StopReason reason);
std::optional<StopReason> ParseStopReason(std::string_view name);

struct LoopConfig {
  int max_turns = 3;   // T
  int samples = 4;     // k, exploration only
  double top_p = 0.5;  // nucleus mass for exploration
  std::uint64_t seed = 0;
  // Abort the run on the first turn error instead of carrying on with
  // Unstructured feedback.
  bool fail_fast = false;

  void Validate() const;  // throws kInvalidConfig
};

struct Turn {
  int t = 0;
  std::vector<Hypothesis> proposals;
  Hypothesis selected;
  Feedback feedback;
  FeedbackSource source = FeedbackSource::kOracle;
  bool generator_emitted_no_hint = false;
  std::optional<std::string> error;
  bool operator==(const Turn&) const = default;
};

struct RefinementTrace {
  std::string run_id;
  std::string instance_id;
  Task task = Task::kMwp;
  // Critique of a supplied starting hypothesis (t = 0). Not counted in T.
  std::optional<Turn> initial;
  std::vector<Turn> turns;
  StopReason stop = StopReason::kBudgetExhausted;
  Hypothesis final_hypothesis;
  std::optional<std::string> final_answer;
  bool operator==(const RefinementTrace&) const = default;
};

// One supervised example (x, f_{t-1}, z_{t-1}, z*) for generator training.
struct EmittedTuple {
  std::string run_id;
  std::string instance_id;
  int turn = 0;
  std::string context;
  std::string previous_feedback;    // "No" on the first turn
  std::string previous_hypothesis;  // empty on the first turn
  std::string gold;
  bool operator==(const EmittedTuple&) const = default;
};

inline constexpr std::string_view kInitialFeedbackSentinel = "No";

// Greedy inference loop. When `start` is given it is critiqued first as turn
// 0 and refinement begins from it; otherwise the generator's first proposal
// is turn 1. Stops on NoHint, on a generator output carrying the no-hint
// line, after T turns, or on an error (fail-fast, or an exhausted edit
// space).
RefinementTrace RunInference(const TaskInstance& instance, Generator& generator,
                             Critic& critic, const LoopConfig& config,
                             const TaskResources& resources,
                             const std::optional<Hypothesis>& start = std::nullopt,
                             const std::string& run_id = "");

struct EmissionResult {
  RefinementTrace trace;
  std::vector<EmittedTuple> tuples;
};

// Exploration loop: k sampled proposals per turn, one picked uniformly with
// the config seed, critiqued, for all T turns. Emits exactly one tuple per
// turn.
EmissionResult RunEmission(const TaskInstance& instance, Generator& generator,
                           Critic& critic, const LoopConfig& config,
                           const TaskResources& resources,
                           const std::string& run_id = "");

struct RunItem {
  std::string run_id;
  const TaskInstance* instance = nullptr;
  std::optional<Hypothesis> start;  // inference only
};

// Factories receive the item and its derived seed.
using GeneratorFactory =
    std::function<std::unique_ptr<Generator>(const RunItem&, std::uint64_t)>;
using CriticFactory =
    std::function<std::unique_ptr<Critic>(const RunItem&, std::uint64_t)>;

enum class RunMode { kInference, kEmission };

struct RunFailure {
  std::string run_id;
  std::string instance_id;
  std::string code;
  std::string message;
  bool operator==(const RunFailure&) const = default;
};

struct BatchResult {
  std::vector<RefinementTrace> traces;  // sorted by run id
  std::vector<EmittedTuple> tuples;     // sorted by run id, then turn
  std::vector<RunFailure> failures;     // sorted by run id
};

// Seed for one run: StableHash(global seed, run id), independent of
// scheduling.
std::uint64_t RunSeed(std::uint64_t global_seed, const std::string& run_id);

BatchResult RunBatch(const std::vector<RunItem>& items,
                     const GeneratorFactory& make_generator,
                     const CriticFactory& make_critic, const LoopConfig& config,
                     RunMode mode, const TaskResources& resources,
                     int parallelism);

}  // namespace refine

#endif  // REFINE_LOOP_H_
