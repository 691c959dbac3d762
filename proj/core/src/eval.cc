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

#include "refine/eval.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "refine/error.h"
#include "refine/rng.h"

namespace refine {

EvalReport ScoreTraces(const std::vector<RefinementTrace>& traces,
                       const std::vector<TaskInstance>& instances,
                       const TaskResources& resources,
                       const std::string& dataset) {
  std::unordered_map<std::string, const TaskInstance*> by_id;
  for (const auto& instance : instances) by_id[instance.id()] = &instance;

  EvalReport report;
  report.dataset = dataset;
  for (const auto& trace : traces) {
    auto it = by_id.find(trace.instance_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kUnknownInstance,
                  "trace " + trace.run_id + " names unknown instance " +
                      trace.instance_id);
    }
    const TaskInstance& instance = *it->second;
    ++report.traces;
    ++report.stop_reasons[std::string(StopReasonName(trace.stop))];
    if (ExactMatch(instance, trace.final_hypothesis, resources)) {
      ++report.exact_matches;
    }
    if (auto gold = GoldAnswer(instance)) {
      ++report.answers_scored;
      auto answer = DeriveAnswer(instance, trace.final_hypothesis, resources);
      if (answer && *answer == *gold) ++report.answers_correct;
    }
    const Diagnosis d = Diagnose(instance, trace.final_hypothesis, resources);
    if (d.unparseable) ++report.unparseable;
    if (d.not_expressible) ++report.not_expressible;
    for (const auto& error : d.errors) {
      ++report.error_buckets[std::string(ErrorKindName(KindOf(error)))];
    }
  }
  if (report.traces > 0) {
    report.em = static_cast<double>(report.exact_matches) / report.traces;
  }
  if (report.answers_scored > 0) {
    report.accuracy =
        static_cast<double>(report.answers_correct) / report.answers_scored;
  }
  return report;
}

Interval BootstrapMean(const std::vector<double>& values, int resamples,
                       std::uint64_t seed, double confidence) {
  Interval out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (resamples <= 0) {
    out.low = out.high = out.mean;
    return out;
  }
  Rng rng(seed);
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      s += values[rng.Index(values.size())];
    }
    means.push_back(s / static_cast<double>(values.size()));
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - confidence) / 2.0;
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return means[lo] + (means[hi] - means[lo]) * (pos - static_cast<double>(lo));
  };
  out.low = at(tail);
  out.high = at(1.0 - tail);
  return out;
}

std::vector<SweepRow> NoiseSweep(const std::vector<RunItem>& items,
                                 const GeneratorFactory& make_generator,
                                 const SweepConfig& config,
                                 const TaskResources& resources) {
  std::vector<SweepRow> rows;
  if (config.trials <= 0) return rows;
  for (double epsilon : config.epsilons) {
    std::vector<double> em;
    for (int trial = 0; trial < config.trials; ++trial) {
      std::ostringstream tag;
      tag << "sweep:" << epsilon << ":" << trial;
      LoopConfig loop = config.loop;
      loop.seed = StableHash(config.loop.seed, tag.str());
      CriticFactory make_critic = [&](const RunItem&, std::uint64_t seed) {
        NoiseConfig noise{epsilon, StableHash(seed, "noise"),
                          config.exempt_no_hint};
        return std::make_unique<NoisyCritic>(
            std::make_unique<OracleCritic>(resources), noise, resources);
      };
      BatchResult batch = RunBatch(items, make_generator, make_critic, loop,
                                   RunMode::kInference, resources,
                                   config.parallelism);
      std::unordered_map<std::string, const TaskInstance*> by_run;
      for (const auto& item : items) by_run[item.run_id] = item.instance;
      for (const auto& trace : batch.traces) {
        em.push_back(ExactMatch(*by_run.at(trace.run_id),
                                trace.final_hypothesis, resources)
                         ? 1.0
                         : 0.0);
      }
      // A failed run never reached gold.
      for (std::size_t f = 0; f < batch.failures.size(); ++f) em.push_back(0.0);
    }
    const Interval ci =
        BootstrapMean(em, config.resamples, StableHash(config.loop.seed, "ci"));
    rows.push_back(SweepRow{epsilon, static_cast<int>(em.size()), ci.mean,
                            ci.low, ci.high});
  }
  return rows;
}

}  // namespace refine
