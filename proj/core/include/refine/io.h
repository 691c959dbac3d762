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

#ifndef REFINE_IO_H_
#define REFINE_IO_H_

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "refine/eval.h"
#include "refine/generator.h"
#include "refine/loop.h"
#include "refine/perturb.h"
#include "refine/task.h"

namespace refine::io {

using nlohmann::json;

// Record files are line-delimited JSON. The first line is a header
// {"schema": <name>, "version": <n>}; every later line is one record.
inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kInstancesSchema = "refine.instances";
inline constexpr std::string_view kPoolSchema = "refine.pool";
inline constexpr std::string_view kTracesSchema = "refine.traces";
inline constexpr std::string_view kTuplesSchema = "refine.tuples";
inline constexpr std::string_view kFailuresSchema = "refine.failures";
inline constexpr std::string_view kReportSchema = "refine.report";
inline constexpr std::string_view kSweepSchema = "refine.sweep";

// Writes the header on open and flushes after every record, so a crash
// leaves a readable prefix.
class RecordWriter {
 public:
  // Throws kIo.
  RecordWriter(const std::string& path, std::string_view schema);
  void Write(const json& record);

 private:
  std::string path_;
  std::ofstream out_;
};

struct LoadedRecords {
  std::vector<json> records;
  // Line number of each record (the header is line 1).
  std::vector<std::size_t> lines;
  std::vector<std::string> warnings;
};

// Throws kVersionMismatch for a missing or foreign header and
// kMalformedRecord (position = line number) for a bad line. A final line
// without its newline that does not parse is dropped with a warning.
LoadedRecords LoadRecords(const std::string& path, std::string_view schema);

void WriteRecords(const std::string& path, std::string_view schema,
                  const std::vector<json>& records);

// Conversions. Every *FromJson throws kInvariantViolation on records that
// break a type invariant (e.g. a rendered feedback string that does not
// match its structured fields).
json TaskErrorToJson(const TaskError& error);
TaskError TaskErrorFromJson(const json& j);
json FeedbackToJson(const Feedback& feedback);
Feedback FeedbackFromJson(const json& j);
json InstanceToJson(const TaskInstance& instance);
TaskInstance InstanceFromJson(const json& j, const TaskResources& resources);
json RecordToJson(const FeedbackRecord& record);
FeedbackRecord RecordFromJson(const json& j);
json TurnToJson(const Turn& turn);
Turn TurnFromJson(const json& j);
json TraceToJson(const RefinementTrace& trace);
RefinementTrace TraceFromJson(const json& j);
json TupleToJson(const EmittedTuple& tuple);
EmittedTuple TupleFromJson(const json& j);
json FailureToJson(const RunFailure& failure);
json ReportToJson(const EvalReport& report);
EvalReport ReportFromJson(const json& j);
json SweepRowToJson(const SweepRow& row);
SweepRow SweepRowFromJson(const json& j);

// Typed loaders; invariant violations are reported with the line number.
std::vector<TaskInstance> LoadInstances(const std::string& path,
                                        const TaskResources& resources,
                                        std::vector<std::string>* warnings = nullptr);
std::vector<FeedbackRecord> LoadPool(const std::string& path,
                                     std::vector<std::string>* warnings = nullptr);
std::vector<RefinementTrace> LoadTraces(const std::string& path,
                                        std::vector<std::string>* warnings = nullptr);
std::vector<EmittedTuple> LoadTuples(const std::string& path,
                                     std::vector<std::string>* warnings = nullptr);

// --- Dataset ingestion ------------------------------------------------------

struct IngestIssue {
  std::size_t record = 0;  // 1-based line (JSONL) or array position
  std::string id;
  std::string reason;
};

struct IngestResult {
  std::vector<TaskInstance> instances;
  std::vector<IngestIssue> malformed;    // skipped
  std::vector<IngestIssue> quarantined;  // well-formed but gold-inconsistent
  std::vector<std::string> flagged;      // kept, e.g. unparseable moral norm
};

enum class MwpFormat { kMawps, kSvamp };

// Reads a JSON array or JSONL file. MAWPS records use sQuestion /
// lEquations / lSolutions with concrete numbers; SVAMP records use Body /
// Question / Numbers / Equation / Answer over number{k} tokens. Both also
// accept text / numbers / equation / answer. Numbers are taken in textual
// order; infix equations are converted to steps in post-order. An equation
// that does not execute to the stated answer (relative tolerance 1e-6 for
// rounded decimals) is quarantined; the exact executed value becomes the gold
// answer otherwise.
IngestResult IngestMwp(const std::string& path, MwpFormat format);
// One record; throws kMalformedRecord / kSyntax / kInconsistentRecord.
mwp::MwpProblem MwpFromRecord(const json& record, const std::string& fallback_id,
                              MwpFormat format);

// Serialized form (actor_input with <|SIT|> <|INT|> <|I_ACT|> <|NRM|>,
// actor_output "norm <|M_ACT|> moral action") or the raw fields situation /
// intention / immoral_action / norm / moral_action.
IngestResult IngestMoral(const std::string& path,
                         const moral::JudgmentLexicon& judgments);
// Throws kMissingMarker or kMalformedRecord.
MoralProblem MoralFromRecord(const json& record, const std::string& fallback_id,
                             const moral::JudgmentLexicon& judgments);

// Records {id, rules: [...] or one string of lines, fact, conclusion}. The
// gold chain is re-derived with the solver and must reach the conclusion.
IngestResult IngestSnlr(const std::string& path, const snlr::Lexicon& lexicon);
SnlrProblem SnlrFromRecord(const json& record, const std::string& fallback_id,
                           const snlr::Lexicon& lexicon);

// --- Configuration files ----------------------------------------------------

// {"families": {"color": ["green", ...], ...}, "implicit": {"viridian": "green"}}
snlr::Lexicon LoadSnlrLexicon(const std::string& path);
// {"judgments": [{"surface", "polarity", "inverses", "infinitive"}, ...]}
moral::JudgmentLexicon LoadJudgmentLexicon(const std::string& path);
// {"bad": ["awful", "terrible"], ...}
moral::SynonymTable LoadSynonyms(const std::string& path);
// One verb per line; '#' starts a comment.
moral::VerbLexicon LoadVerbs(const std::string& path);
// {"fixture id": ["hypothesis for turn 1", ...], ...}
FixtureSet LoadFixtures(const std::string& path);

json ReadJsonFile(const std::string& path);  // throws kIo / kMalformedRecord

}  // namespace refine::io

#endif  // REFINE_IO_H_
