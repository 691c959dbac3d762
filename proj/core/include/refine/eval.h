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

#ifndef REFINE_EVAL_H_
#define REFINE_EVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "refine/loop.h"
#include "refine/task.h"

namespace refine {

struct EvalReport {
  std::string dataset;
  int traces = 0;
  int exact_matches = 0;
  int answers_scored = 0;  // traces whose task has a gold answer
  int answers_correct = 0;
  std::optional<double> em;        // empty when there are no traces
  std::optional<double> accuracy;  // empty when no answer was scored
  // Oracle diagnosis of every final hypothesis, one count per error found.
  std::map<std::string, int> error_buckets;
  int not_expressible = 0;
  int unparseable = 0;
  std::map<std::string, int> stop_reasons;
  std::map<std::string, std::string> config;
  bool operator==(const EvalReport&) const = default;
};

// Throws kUnknownInstance when a trace names an instance not in `instances`.
EvalReport ScoreTraces(const std::vector<RefinementTrace>& traces,
                       const std::vector<TaskInstance>& instances,
                       const TaskResources& resources,
                       const std::string& dataset = "");

struct Interval {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
};

// Percentile bootstrap of the mean (95% by default).
Interval BootstrapMean(const std::vector<double>& values, int resamples,
                       std::uint64_t seed, double confidence = 0.95);

struct SweepRow {
  double epsilon = 0.0;
  int runs = 0;
  double mean_em = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool operator==(const SweepRow&) const = default;
};

struct SweepConfig {
  std::vector<double> epsilons;
  int trials = 1;  // independent noise seeds per epsilon
  LoopConfig loop;
  bool exempt_no_hint = false;
  int resamples = 1000;
  int parallelism = 1;
};

// For each epsilon, runs inference over `items` with a noisy oracle critic
// and the factory's generator; reports mean final EM with a bootstrap
// interval. trials == 0 gives an empty table.
std::vector<SweepRow> NoiseSweep(const std::vector<RunItem>& items,
                                 const GeneratorFactory& make_generator,
                                 const SweepConfig& config,
                                 const TaskResources& resources);

}  // namespace refine

#endif  // REFINE_EVAL_H_
