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

#include "refine/loop.h"

#include <algorithm>

#include "refine/error.h"
#include "refine/parallel.h"
#include "refine/rng.h"

namespace refine {
namespace {

Turn ErrorTurn(int t, const Hypothesis& current, const Error& e,
               FeedbackSource source) {
  Turn turn;
  turn.t = t;
  turn.selected = current;
  turn.feedback = Feedback::Free(e.what());
  turn.source = source;
  turn.error = std::string(ErrorCodeName(e.code())) + ": " + e.what();
  return turn;
}

void Finish(RefinementTrace& trace, const TaskInstance& instance,
            const std::optional<Hypothesis>& current,
            const TaskResources& resources) {
  if (current) {
    trace.final_hypothesis = *current;
    trace.final_answer = DeriveAnswer(instance, *current, resources);
  }
}

}  // namespace

std::string_view StopReasonName(StopReason reason) {
  switch (reason) {
    case StopReason::kNoHint: return "no_hint";
    case StopReason::kGeneratorEmittedNoHint: return "generator_emitted_no_hint";
    case StopReason::kBudgetExhausted: return "budget_exhausted";
    case StopReason::kError: return "error";
  }
  return "error";
}

std::optional<StopReason> ParseStopReason(std::string_view name) {
  for (auto r : {StopReason::kNoHint, StopReason::kGeneratorEmittedNoHint,
                 StopReason::kBudgetExhausted, StopReason::kError}) {
    if (StopReasonName(r) == name) return r;
  }
  return std::nullopt;
}

void LoopConfig::Validate() const {
  if (max_turns < 1) throw Error(ErrorCode::kInvalidConfig, "T must be at least 1");
  if (samples < 1) throw Error(ErrorCode::kInvalidConfig, "k must be at least 1");
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "top_p must be in (0, 1]");
  }
}

RefinementTrace RunInference(const TaskInstance& instance, Generator& generator,
                             Critic& critic, const LoopConfig& config,
                             const TaskResources& resources,
                             const std::optional<Hypothesis>& start,
                             const std::string& run_id) {
  config.Validate();
  RefinementTrace trace;
  trace.run_id = run_id.empty() ? instance.id() : run_id;
  trace.instance_id = instance.id();
  trace.task = instance.task();

  std::optional<Hypothesis> current;
  Feedback feedback;
  if (start) {
    feedback = critic.Critique(instance, *start);
    Turn initial;
    initial.t = 0;
    initial.proposals = {*start};
    initial.selected = *start;
    initial.feedback = feedback;
    initial.source = critic.source();
    trace.initial = std::move(initial);
    current = start;
    if (feedback.is_no_hint()) {
      trace.stop = StopReason::kNoHint;
      Finish(trace, instance, current, resources);
      return trace;
    }
  }

  trace.stop = StopReason::kBudgetExhausted;
  for (int t = 1; t <= config.max_turns; ++t) {
    ProposeRequest request;
    request.instance = &instance;
    request.previous = current ? &*current : nullptr;
    request.feedback = current ? &feedback : nullptr;
    request.turn = t - 1;
    request.k = 1;
    request.decode = DecodePolicy{DecodeKind::kGreedy, 1.0};
    std::vector<Proposal> proposals;
    try {
      proposals = generator.Propose(request);
    } catch (const Error& e) {
      trace.turns.push_back(
          ErrorTurn(t, current.value_or(Hypothesis{}), e, critic.source()));
      if (config.fail_fast || e.code() == ErrorCode::kEditSpaceExhausted) {
        trace.stop = StopReason::kError;
        break;
      }
      if (current) feedback = trace.turns.back().feedback;
      continue;
    }
    if (proposals.empty()) {
      throw Error(ErrorCode::kInvariantViolation,
                  "generator returned no hypothesis");
    }
    Turn turn;
    turn.t = t;
    turn.proposals = {proposals.front().hypothesis};
    turn.selected = proposals.front().hypothesis;
    turn.generator_emitted_no_hint = proposals.front().emitted_no_hint;
    turn.feedback = critic.Critique(instance, turn.selected);
    turn.source = critic.source();
    feedback = turn.feedback;
    current = turn.selected;
    trace.turns.push_back(std::move(turn));
    if (feedback.is_no_hint()) {
      trace.stop = StopReason::kNoHint;
      break;
    }
    if (trace.turns.back().generator_emitted_no_hint) {
      trace.stop = StopReason::kGeneratorEmittedNoHint;
      break;
    }
  }
  Finish(trace, instance, current, resources);
  return trace;
}

EmissionResult RunEmission(const TaskInstance& instance, Generator& generator,
                           Critic& critic, const LoopConfig& config,
                           const TaskResources& resources,
                           const std::string& run_id) {
  config.Validate();
  EmissionResult out;
  RefinementTrace& trace = out.trace;
  trace.run_id = run_id.empty() ? instance.id() : run_id;
  trace.instance_id = instance.id();
  trace.task = instance.task();
  const std::string context = ContextText(instance);
  const std::string gold = GoldHypothesis(instance).text;

  Rng select(config.seed);
  std::optional<Hypothesis> current;
  Feedback feedback;
  bool have_feedback = false;
  trace.stop = StopReason::kBudgetExhausted;
  for (int t = 1; t <= config.max_turns; ++t) {
    out.tuples.push_back(EmittedTuple{
        trace.run_id, trace.instance_id, t, context,
        have_feedback ? feedback.rendered()
                      : std::string(kInitialFeedbackSentinel),
        current ? current->text : std::string(), gold});

    ProposeRequest request;
    request.instance = &instance;
    request.previous = current ? &*current : nullptr;
    request.feedback = have_feedback ? &feedback : nullptr;
    request.turn = t - 1;
    request.k = config.samples;
    request.decode = DecodePolicy{DecodeKind::kSampled, config.top_p};
    std::vector<Proposal> proposals;
    try {
      proposals = generator.Propose(request);
    } catch (const Error& e) {
      trace.turns.push_back(
          ErrorTurn(t, current.value_or(Hypothesis{}), e, critic.source()));
      if (config.fail_fast || e.code() == ErrorCode::kEditSpaceExhausted) {
        trace.stop = StopReason::kError;
        break;
      }
      if (current) {
        feedback = trace.turns.back().feedback;
        have_feedback = true;
      }
      continue;
    }
    if (proposals.empty()) {
      throw Error(ErrorCode::kInvariantViolation,
                  "generator returned no hypothesis");
    }
    Turn turn;
    turn.t = t;
    for (const auto& p : proposals) turn.proposals.push_back(p.hypothesis);
    const std::size_t pick = select.Index(proposals.size());
    turn.selected = proposals[pick].hypothesis;
    turn.generator_emitted_no_hint = proposals[pick].emitted_no_hint;
    turn.feedback = critic.Critique(instance, turn.selected);
    turn.source = critic.source();
    feedback = turn.feedback;
    have_feedback = true;
    current = turn.selected;
    trace.turns.push_back(std::move(turn));
  }
  if (trace.stop != StopReason::kError && !trace.turns.empty() &&
      trace.turns.back().feedback.is_no_hint()) {
    trace.stop = StopReason::kNoHint;
  }
  Finish(trace, instance, current, resources);
  return out;
}

std::uint64_t RunSeed(std::uint64_t global_seed, const std::string& run_id) {
  return StableHash(global_seed, run_id);
}

BatchResult RunBatch(const std::vector<RunItem>& items,
                     const GeneratorFactory& make_generator,
                     const CriticFactory& make_critic, const LoopConfig& config,
                     RunMode mode, const TaskResources& resources,
                     int parallelism) {
  config.Validate();
  struct Slot {
    std::optional<RefinementTrace> trace;
    std::vector<EmittedTuple> tuples;
    std::optional<RunFailure> failure;
  };
  std::vector<Slot> slots(items.size());
  ParallelFor(items.size(), parallelism, [&](std::size_t i) {
    const RunItem& item = items[i];
    Slot& slot = slots[i];
    const std::string instance_id = item.instance ? item.instance->id() : "";
    try {
      if (item.instance == nullptr) {
        throw Error(ErrorCode::kUnknownInstance, "run " + item.run_id +
                                                     " has no instance");
      }
      LoopConfig run_config = config;
      run_config.seed = RunSeed(config.seed, item.run_id);
      auto generator = make_generator(item, run_config.seed);
      auto critic = make_critic(item, run_config.seed);
      if (mode == RunMode::kInference) {
        slot.trace = RunInference(*item.instance, *generator, *critic,
                                  run_config, resources, item.start, item.run_id);
      } else {
        auto result = RunEmission(*item.instance, *generator, *critic,
                                  run_config, resources, item.run_id);
        slot.trace = std::move(result.trace);
        slot.tuples = std::move(result.tuples);
      }
    } catch (const Error& e) {
      slot.failure = RunFailure{item.run_id, instance_id,
                                std::string(ErrorCodeName(e.code())), e.what()};
    } catch (const std::exception& e) {
      slot.failure = RunFailure{item.run_id, instance_id, "internal", e.what()};
    }
  });

  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return items[a].run_id < items[b].run_id;
  });
  BatchResult out;
  for (std::size_t i : order) {
    Slot& slot = slots[i];
    if (slot.trace) out.traces.push_back(std::move(*slot.trace));
    for (auto& tuple : slot.tuples) out.tuples.push_back(std::move(tuple));
    if (slot.failure) out.failures.push_back(std::move(*slot.failure));
  }
  return out;
}

}  // namespace refine
