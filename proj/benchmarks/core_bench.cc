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

#include <benchmark/benchmark.h>

#include "refine/feedback.h"
#include "refine/mwp.h"
#include "refine/rng.h"
#include "refine/snlr.h"
#include "refine/task.h"

namespace refine {
namespace {

void BM_ExecuteProgram(benchmark::State& state) {
  std::vector<mwp::MwpProblem> problems;
  for (int i = 0; i < 64; ++i) {
    problems.push_back(mwp::ProblemFromSynthetic(
        mwp::GenerateMwp(static_cast<std::uint64_t>(i), "b" + std::to_string(i))));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& p = problems[i++ % problems.size()];
    benchmark::DoNotOptimize(mwp::ExecuteProgram(p.gold_program, p.binding));
  }
}
BENCHMARK(BM_ExecuteProgram);

void BM_ParseEquation(benchmark::State& state) {
  const std::string text =
      "#0: number0 + number1\n#1: #0 * number2\n#2: #1 - 4.5\n#3: #2 / number3";
  for (auto _ : state) benchmark::DoNotOptimize(mwp::ParseEquation(text));
}
BENCHMARK(BM_ParseEquation);

void BM_SolveScenario(benchmark::State& state) {
  const auto& lex = snlr::Lexicon::Default();
  auto g = snlr::GenerateScenario(42, static_cast<int>(state.range(0)), lex);
  for (auto _ : state) benchmark::DoNotOptimize(snlr::SolveScenario(g.scenario, lex));
}
BENCHMARK(BM_SolveScenario)->Arg(1)->Arg(2);

void BM_DiagnoseMwp(benchmark::State& state) {
  const auto& res = TaskResources::Default();
  TaskInstance instance{mwp::ProblemFromSynthetic(mwp::GenerateMwp(3, "d"))};
  Hypothesis wrong{"#0: number0 - number1"};
  for (auto _ : state) benchmark::DoNotOptimize(Diagnose(instance, wrong, res));
}
BENCHMARK(BM_DiagnoseMwp);

void BM_FeedbackRoundTrip(benchmark::State& state) {
  const std::vector<TaskError> errors = {
      errors::IncorrectNumbers{OperandPosition::kSecond, 3},
      errors::LogicallyInvalid{Connective::kOr, 2},
      errors::SemanticMisalignment{"to borrow the car without asking"}};
  std::size_t i = 0;
  for (auto _ : state) {
    std::string text = RenderError(errors[i++ % errors.size()]);
    benchmark::DoNotOptimize(ParseFeedback(text));
  }
}
BENCHMARK(BM_FeedbackRoundTrip);

}  // namespace
}  // namespace refine
