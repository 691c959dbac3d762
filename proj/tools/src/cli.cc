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

#include "refine/cli.h"

#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "refine/critic.h"
#include "refine/eval.h"
#include "refine/generator.h"
#include "refine/http_service.h"
#include "refine/io.h"
#include "refine/loop.h"
#include "refine/perturb.h"
#include "refine/prompt.h"
#include "refine/rng.h"
#include "refine/session.h"

#ifndef REFINE_VERSION
#define REFINE_VERSION "0.0.0"
#endif

namespace refine::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised for flag combinations that cannot work; exits with kExitUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  // Inputs.
  std::string task;
  std::string in;
  std::string format = "auto";
  std::string pool;
  std::vector<std::string> traces;
  std::string fixtures;
  std::string prompts;
  std::string config;
  std::string out;
  int limit = 0;

  // Resources.
  std::string lexicon;
  std::string judgments;
  std::string synonyms;
  std::string verbs;
  double overlap = moral::kDefaultOverlapThreshold;

  // Loop.
  std::string gen = "repair";
  std::string critic = "oracle";
  double eps = 0.0;
  bool exempt_no_hint = false;
  int turns = 3;
  int samples = 4;
  double top_p = 0.5;
  std::uint64_t seed = 0;
  int parallel = 1;
  bool fail_fast = false;

  // Remote endpoints.
  std::string gen_url;
  std::string gen_key;
  std::string critic_url;
  std::string critic_key;
  int timeout_ms = 30000;
  int retries = 3;

  // perturb
  std::vector<std::string> kinds{"all"};
  int per_kind = 1;

  // sweep
  std::vector<double> eps_list{0.0, 0.25, 0.5, 0.75, 1.0};
  int trials = 1;
  int resamples = 1000;

  // generators of synthetic data
  int count = 100;
  int hops = 0;  // 0 alternates one- and two-hop scenarios

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store;
  std::string token;
  bool oracle_suggestion = false;
};

std::string NowUtc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void WriteJson(const fs::path& path, const json& value) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << value.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

void Require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw UsageError(flag + " is required");
}

// --- configuration ----------------------------------------------------

std::string ConfigValueString(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

// Fills options left unset by flags and environment from the JSON config
// file: top-level keys first, then the section named after the subcommand.
void ApplyConfigFile(CLI::App& sub, const std::string& path) {
  const json j = io::ReadJsonFile(path);
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  json merged = json::object();
  for (const auto& [key, value] : j.items()) {
    if (!value.is_object()) merged[key] = value;
  }
  if (j.contains(sub.get_name()) && j.at(sub.get_name()).is_object()) {
    for (const auto& [key, value] : j.at(sub.get_name()).items()) merged[key] = value;
  }
  std::set<std::string> used;
  for (CLI::Option* opt : sub.get_options()) {
    std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::string alt = name;
    std::replace(alt.begin(), alt.end(), '-', '_');
    const std::string key = merged.contains(name) ? name : alt;
    if (!merged.contains(key)) continue;
    used.insert(key);
    if (opt->count() > 0) continue;
    const json& value = merged.at(key);
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(ConfigValueString(v));
    } else {
      opt->add_result(ConfigValueString(value));
    }
    opt->run_callback();
  }
  for (const auto& [key, value] : merged.items()) {
    if (!used.count(key)) {
      throw UsageError("config file " + path + " sets unknown option " + key);
    }
  }
}

// Every option of the subcommand with its effective value. Keys are never
// recorded.
json ResolvedConfig(CLI::App& sub) {
  json config = json::object();
  for (CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (name.size() >= 3 && name.compare(name.size() - 3, 3, "key") == 0) {
      config[name] = opt->count() > 0 ? "<set>" : "";
      continue;
    }
    if (opt->count() > 0) {
      const auto& results = opt->results();
      if (opt->get_expected_max() > 1) {
        config[name] = results;
      } else {
        config[name] = results.empty() ? std::string() : results.back();
      }
    } else {
      config[name] = opt->get_default_str();
    }
  }
  return config;
}

// --- inputs -----------------------------------------------------------

std::unique_ptr<TaskResources> MakeResources(const Options& o) {
  auto res = std::make_unique<TaskResources>();
  if (!o.lexicon.empty()) res->lexicon = io::LoadSnlrLexicon(o.lexicon);
  if (!o.judgments.empty()) res->judgments = io::LoadJudgmentLexicon(o.judgments);
  if (!o.synonyms.empty()) res->synonyms = io::LoadSynonyms(o.synonyms);
  if (!o.verbs.empty()) res->verbs = io::LoadVerbs(o.verbs);
  if (!(o.overlap > 0.0 && o.overlap <= 1.0)) {
    throw UsageError("--overlap-threshold must be in (0, 1]");
  }
  res->overlap_threshold = o.overlap;
  return res;
}

std::optional<Task> TaskFlag(const Options& o) {
  if (o.task.empty()) return std::nullopt;
  auto task = ParseTaskName(o.task);
  if (!task) throw UsageError("unknown task " + o.task + " (mwp, snlr, moral)");
  return task;
}

bool IsInstancesFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::string first;
  std::getline(in, first);
  try {
    const json header = json::parse(first);
    return header.is_object() && header.value("schema", "") == io::kInstancesSchema;
  } catch (const json::exception&) {
    return false;
  }
}

json IssuesToJson(const std::vector<io::IngestIssue>& issues) {
  json out = json::array();
  for (const auto& i : issues) {
    out.push_back({{"record", i.record}, {"id", i.id}, {"reason", i.reason}});
  }
  return out;
}

struct Input {
  std::vector<TaskInstance> instances;
  json ingest;
};

Input LoadInput(const Options& o, const TaskResources& res, std::ostream& err) {
  Require(o.in, "--in");
  const auto task = TaskFlag(o);
  Input input;
  std::string format = o.format;
  if (format == "auto") format = IsInstancesFile(o.in) ? "instances" : "dataset";
  if (format == "instances") {
    std::vector<std::string> warnings;
    input.instances = io::LoadInstances(o.in, res, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    input.ingest = {{"source", o.in}, {"format", "instances"}};
  } else {
    if (!task) throw UsageError("--task is required to ingest " + o.in);
    io::IngestResult result;
    if (*task == Task::kMwp) {
      io::MwpFormat variant = io::MwpFormat::kMawps;
      if (format == "svamp") {
        variant = io::MwpFormat::kSvamp;
      } else if (format == "dataset") {
        std::ifstream in(o.in);
        std::stringstream buffer;
        buffer << in.rdbuf();
        if (buffer.str().find("\"Body\"") != std::string::npos) {
          variant = io::MwpFormat::kSvamp;
        }
        format = variant == io::MwpFormat::kSvamp ? "svamp" : "mawps";
      } else if (format != "mawps") {
        throw UsageError("unknown --format " + format);
      }
      result = io::IngestMwp(o.in, variant);
    } else if (*task == Task::kSnlr) {
      result = io::IngestSnlr(o.in, res.lexicon);
      format = "snlr";
    } else {
      result = io::IngestMoral(o.in, res.judgments);
      format = "moral";
    }
    input.instances = std::move(result.instances);
    input.ingest = {{"source", o.in},
                    {"format", format},
                    {"malformed", IssuesToJson(result.malformed)},
                    {"quarantined", IssuesToJson(result.quarantined)},
                    {"flagged", result.flagged}};
    err << "ingested " << input.instances.size() << " instances from " << o.in
        << " (" << result.malformed.size() << " malformed, "
        << result.quarantined.size() << " quarantined, "
        << result.flagged.size() << " flagged)\n";
  }
  if (task) {
    for (const auto& instance : input.instances) {
      if (instance.task() != *task) {
        throw UsageError("instance " + instance.id() + " is a " +
                         std::string(TaskName(instance.task())) +
                         " instance, not " + o.task);
      }
    }
  }
  if (o.limit > 0 && input.instances.size() > static_cast<std::size_t>(o.limit)) {
    input.instances.erase(input.instances.begin() + o.limit, input.instances.end());
  }
  input.ingest["instances"] = input.instances.size();
  return input;
}

std::map<std::string, const TaskInstance*> IndexInstances(
    const std::vector<TaskInstance>& instances) {
  std::map<std::string, const TaskInstance*> index;
  for (const auto& instance : instances) {
    if (!index.emplace(instance.id(), &instance).second) {
      throw Error(ErrorCode::kInvariantViolation,
                  "duplicate instance id " + instance.id());
    }
  }
  return index;
}

// Cold-start runs, one per instance, or warm starts from the implausible
// hypotheses of a pool.
struct Items {
  std::vector<RunItem> items;
  std::vector<FeedbackRecord> records;  // keeps pool records alive
};

Items MakeItems(const Options& o, const std::vector<TaskInstance>& instances,
                bool allow_pool) {
  Items out;
  const auto index = IndexInstances(instances);
  if (!o.pool.empty()) {
    if (!allow_pool) throw UsageError("--pool is not supported here");
    out.records = io::LoadPool(o.pool);
    for (const auto& record : out.records) {
      auto it = index.find(record.instance_id);
      if (it == index.end()) {
        throw Error(ErrorCode::kUnknownInstance,
                    "pool record " + record.id + " names unknown instance " +
                        record.instance_id);
      }
      out.items.push_back({record.id, it->second, record.implausible});
    }
  } else {
    for (const auto& instance : instances) {
      out.items.push_back({instance.id(), &instance, std::nullopt});
    }
  }
  return out;
}

// --- generators and critics ---------------------------------------------

RetryPolicy Retry(const Options& o) {
  RetryPolicy policy;
  policy.attempts = std::max(1, o.retries);
  return policy;
}

GeneratorFactory MakeGeneratorFactory(const Options& o, Task task,
                                      const TaskResources& res) {
  if (o.gen == "repair") {
    return [&res](const RunItem&, std::uint64_t) {
      return std::make_unique<RepairGenerator>(res);
    };
  }
  if (o.gen == "scripted") {
    if (o.fixtures.empty()) throw UsageError("--gen scripted needs --fixtures");
    auto fixtures = std::make_shared<FixtureSet>(io::LoadFixtures(o.fixtures));
    return [fixtures](const RunItem& item, std::uint64_t) -> std::unique_ptr<Generator> {
      const std::string& id =
          fixtures->count(item.run_id) ? item.run_id : item.instance->id();
      return ScriptedGenerator::FromFixture(*fixtures, id);
    };
  }
  if (o.gen == "remote") {
    if (o.gen_url.empty()) {
      throw UsageError("--gen remote needs --gen-url or REFINE_GEN_URL");
    }
    std::shared_ptr<CompletionTransport> transport =
        MakeHttpTransport({o.gen_url, o.gen_key, o.timeout_ms});
    auto recipe = LoadRecipe(o.prompts, task, PromptRole::kGenerator);
    auto retry = Retry(o);
    return [transport, recipe, retry, &res](const RunItem&, std::uint64_t) {
      return std::make_unique<RemoteGenerator>(transport, recipe, retry, res);
    };
  }
  throw UsageError("unknown generator " + o.gen + " (repair, scripted, remote)");
}

CriticFactory MakeCriticFactory(const Options& o, Task task,
                                const TaskResources& res) {
  if (o.critic != "noisy" && (o.eps != 0.0 || o.exempt_no_hint)) {
    throw UsageError("--eps and --exempt-no-hint need --critic noisy");
  }
  if (o.critic == "oracle") {
    return [&res](const RunItem&, std::uint64_t) {
      return std::make_unique<OracleCritic>(res);
    };
  }
  if (o.critic == "noisy") {
    if (!(o.eps >= 0.0 && o.eps <= 1.0)) throw UsageError("--eps must be in [0, 1]");
    const double eps = o.eps;
    const bool exempt = o.exempt_no_hint;
    return [&res, eps, exempt](const RunItem&, std::uint64_t seed) {
      return std::make_unique<NoisyCritic>(
          std::make_unique<OracleCritic>(res),
          NoiseConfig{eps, StableHash(seed, "noise"), exempt}, res);
    };
  }
  if (o.critic == "remote") {
    if (o.critic_url.empty()) {
      throw UsageError("--critic remote needs --critic-url or REFINE_CRITIC_URL");
    }
    std::shared_ptr<CompletionTransport> transport =
        MakeHttpTransport({o.critic_url, o.critic_key, o.timeout_ms});
    auto recipe = LoadRecipe(o.prompts, task, PromptRole::kCritic);
    auto retry = Retry(o);
    return [transport, recipe, retry](const RunItem&, std::uint64_t) {
      return std::make_unique<RemoteCritic>(transport, recipe, retry);
    };
  }
  throw UsageError("unknown critic " + o.critic + " (oracle, noisy, remote)");
}

// Oracle-backed critics and emission need a gold hypothesis per instance.
void RequireGold(const std::vector<RunItem>& items, const std::string& why) {
  std::vector<std::string> missing;
  for (const auto& item : items) {
    if (const auto* m = item.instance->moral(); m != nullptr && !m->norm) {
      missing.push_back(item.instance->id());
    }
  }
  if (missing.empty()) return;
  std::string list;
  for (std::size_t i = 0; i < missing.size() && i < 5; ++i) {
    list += (i ? ", " : "") + missing[i];
  }
  throw UsageError(why + " needs a gold norm, but " +
                   std::to_string(missing.size()) +
                   " instance(s) have an unparseable one: " + list);
}

Task InputTask(const Options& o, const std::vector<TaskInstance>& instances) {
  if (auto task = TaskFlag(o)) return *task;
  if (instances.empty()) throw UsageError("--task is required for empty input");
  return instances.front().task();
}

LoopConfig MakeLoopConfig(const Options& o) {
  LoopConfig config;
  config.max_turns = o.turns;
  config.samples = o.samples;
  config.top_p = o.top_p;
  config.seed = o.seed;
  config.fail_fast = o.fail_fast;
  try {
    config.Validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (o.parallel < 1) throw UsageError("--parallel must be at least 1");
  return config;
}

template <typename T, typename Fn>
void WriteStream(const fs::path& path, std::string_view schema,
                 const std::vector<T>& values, Fn&& to_json) {
  io::RecordWriter writer(path.string(), schema);
  for (const auto& v : values) writer.Write(to_json(v));
}

// --- subcommands ----------------------------------------------------------

struct Context {
  Options& o;
  CLI::App& sub;
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> args;
  fs::path dir;
  json manifest;

  void StartManifest() {
    Require(o.out, "--out");
    dir = o.out;
    fs::create_directories(dir);
    manifest = {{"tool", "refine-loop"},
                {"version", REFINE_VERSION},
                {"command", sub.get_name()},
                {"args", args},
                {"config", ResolvedConfig(sub)},
                {"started_at", NowUtc()}};
    WriteJson(dir / "manifest.json", manifest);
  }

  void FinishManifest(const json& outputs) {
    manifest["outputs"] = outputs;
    manifest["finished_at"] = NowUtc();
    WriteJson(dir / "manifest.json", manifest);
  }
};

std::vector<ErrorKind> ParseKinds(const std::vector<std::string>& names, Task task) {
  std::vector<ErrorKind> kinds;
  for (const auto& raw : names) {
    std::stringstream parts(raw);
    for (std::string name; std::getline(parts, name, ',');) {
      if (name.empty()) continue;
      if (name == "all") {
        for (ErrorKind k : KindsForTask(task)) kinds.push_back(k);
        continue;
      }
      auto kind = ParseErrorKindName(name);
      if (!kind) throw UsageError("unknown error kind " + name);
      if (TaskOf(*kind) != task) {
        throw UsageError(name + " is not an error kind of " +
                         std::string(TaskName(task)));
      }
      kinds.push_back(*kind);
    }
  }
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  if (kinds.empty()) throw UsageError("--kinds selects nothing");
  return kinds;
}

void CmdPerturb(Context& c) {
  Options& o = c.o;
  auto res = MakeResources(o);
  const auto task = TaskFlag(o);
  if (!task) throw UsageError("--task is required");
  const auto kinds = ParseKinds(o.kinds, *task);
  if (o.per_kind < 1) throw UsageError("--per-kind must be at least 1");
  if (o.parallel < 1) throw UsageError("--parallel must be at least 1");
  c.StartManifest();
  Input input = LoadInput(o, *res, c.err);
  PoolSpec spec{kinds, o.per_kind, o.seed, o.parallel};
  PoolResult pool = BuildPool(input.instances, spec, *res);

  WriteStream(c.dir / "pool.jsonl", io::kPoolSchema, pool.records, io::RecordToJson);
  json skipped = json::array();
  for (const auto& s : pool.skipped) {
    skipped.push_back({{"instance_id", s.instance_id},
                       {"kind", ErrorKindName(s.kind)},
                       {"rep", s.rep},
                       {"reason", s.reason}});
  }
  std::map<std::string, int> per_kind;
  for (const auto& r : pool.records) ++per_kind[std::string(ErrorKindName(r.kind))];
  const json summary = {{"ingest", input.ingest},
                        {"records", pool.records.size()},
                        {"per_kind", per_kind},
                        {"skipped", skipped}};
  WriteJson(c.dir / "summary.json", summary);
  c.FinishManifest({"pool.jsonl", "summary.json"});
  c.out << json{{"records", pool.records.size()},
                {"skipped", pool.skipped.size()},
                {"per_kind", per_kind}}
               .dump()
        << "\n";
}

void WriteBatch(Context& c, const BatchResult& batch, bool tuples) {
  WriteStream(c.dir / "traces.jsonl", io::kTracesSchema, batch.traces,
              io::TraceToJson);
  WriteStream(c.dir / "failures.jsonl", io::kFailuresSchema, batch.failures,
              io::FailureToJson);
  if (tuples) {
    WriteStream(c.dir / "tuples.jsonl", io::kTuplesSchema, batch.tuples,
                io::TupleToJson);
  }
  for (const auto& f : batch.failures) {
    c.err << "run " << f.run_id << " failed: " << f.code << ": " << f.message << "\n";
  }
}

std::map<std::string, std::string> ReportConfig(const Options& o) {
  std::ostringstream eps;
  eps << o.eps;
  return {{"generator", o.gen},      {"critic", o.critic},
          {"epsilon", eps.str()},    {"T", std::to_string(o.turns)},
          {"seed", std::to_string(o.seed)}};
}

void CmdRun(Context& c, RunMode mode) {
  Options& o = c.o;
  auto res = MakeResources(o);
  const LoopConfig loop = MakeLoopConfig(o);
  c.StartManifest();
  Input input = LoadInput(o, *res, c.err);
  const Task task = InputTask(o, input.instances);
  Items items = MakeItems(o, input.instances, mode == RunMode::kInference);
  auto make_generator = MakeGeneratorFactory(o, task, *res);
  auto make_critic = MakeCriticFactory(o, task, *res);
  if (mode == RunMode::kEmission) {
    RequireGold(items.items, "emission");
  } else if (o.critic != "remote") {
    RequireGold(items.items, "--critic " + o.critic);
  }

  BatchResult batch = RunBatch(items.items, make_generator, make_critic, loop,
                               mode, *res, o.parallel);
  const bool emission = mode == RunMode::kEmission;
  WriteBatch(c, batch, emission);
  json outputs = {"traces.jsonl", "failures.jsonl"};
  if (emission) outputs.push_back("tuples.jsonl");

  json summary = {{"runs", items.items.size()},
                  {"traces", batch.traces.size()},
                  {"failures", batch.failures.size()}};
  if (emission) {
    summary["tuples"] = batch.tuples.size();
  } else {
    EvalReport report = ScoreTraces(batch.traces, input.instances, *res, o.in);
    report.config = ReportConfig(o);
    WriteStream(c.dir / "report.jsonl", io::kReportSchema,
                std::vector<EvalReport>{report}, io::ReportToJson);
    outputs.push_back("report.jsonl");
    summary["report"] = io::ReportToJson(report);
  }
  c.FinishManifest(outputs);
  c.out << summary.dump() << "\n";
}

void CmdEval(Context& c) {
  Options& o = c.o;
  auto res = MakeResources(o);
  if (o.traces.empty()) throw UsageError("--traces is required");
  c.StartManifest();
  Input input = LoadInput(o, *res, c.err);
  std::vector<RefinementTrace> traces;
  for (const auto& path : o.traces) {
    std::vector<std::string> warnings;
    auto loaded = io::LoadTraces(path, &warnings);
    for (const auto& w : warnings) c.err << "warning: " << w << "\n";
    traces.insert(traces.end(), std::make_move_iterator(loaded.begin()),
                  std::make_move_iterator(loaded.end()));
  }
  EvalReport report = ScoreTraces(traces, input.instances, *res, o.in);
  WriteStream(c.dir / "report.jsonl", io::kReportSchema,
              std::vector<EvalReport>{report}, io::ReportToJson);
  c.FinishManifest({"report.jsonl"});
  c.out << io::ReportToJson(report).dump() << "\n";
}

void CmdSweep(Context& c) {
  Options& o = c.o;
  auto res = MakeResources(o);
  const LoopConfig loop = MakeLoopConfig(o);
  for (double eps : o.eps_list) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw UsageError("--eps values must be in [0, 1]");
  }
  if (o.trials < 0) throw UsageError("--trials must not be negative");
  if (o.resamples < 1) throw UsageError("--resamples must be positive");
  c.StartManifest();
  Input input = LoadInput(o, *res, c.err);
  const Task task = InputTask(o, input.instances);
  Items items = MakeItems(o, input.instances, true);
  RequireGold(items.items, "the noisy oracle critic");
  if (o.gen == "remote") throw UsageError("sweep supports --gen repair or scripted");
  auto make_generator = MakeGeneratorFactory(o, task, *res);

  SweepConfig config;
  config.epsilons = o.eps_list;
  config.trials = o.trials;
  config.loop = loop;
  config.exempt_no_hint = o.exempt_no_hint;
  config.resamples = o.resamples;
  config.parallelism = o.parallel;
  const auto rows = NoiseSweep(items.items, make_generator, config, *res);
  WriteStream(c.dir / "sweep.jsonl", io::kSweepSchema, rows, io::SweepRowToJson);
  c.FinishManifest({"sweep.jsonl"});
  c.out << std::left << std::setw(10) << "epsilon" << std::setw(8) << "runs"
        << std::setw(10) << "mean_em" << std::setw(10) << "ci_low" << "ci_high\n";
  c.out << std::fixed << std::setprecision(4);
  for (const auto& row : rows) {
    c.out << std::setw(10) << row.epsilon << std::setw(8) << row.runs
          << std::setw(10) << row.mean_em << std::setw(10) << row.ci_low
          << row.ci_high << "\n";
  }
}

void CmdGenSnlr(Context& c) {
  Options& o = c.o;
  auto res = MakeResources(o);
  if (o.count < 0) throw UsageError("--count must not be negative");
  if (o.hops < 0 || o.hops > 2) throw UsageError("--hops must be 0, 1 or 2");
  c.StartManifest();
  io::RecordWriter writer((c.dir / "instances.jsonl").string(), io::kInstancesSchema);
  for (int i = 0; i < o.count; ++i) {
    const int hops = o.hops == 0 ? 1 + i % 2 : o.hops;
    char id[32];
    std::snprintf(id, sizeof(id), "snlr-%05d", i);
    auto generated = snlr::GenerateScenario(StableHash(o.seed, id), hops, res->lexicon);
    SnlrProblem p{id, std::move(generated.scenario), std::move(generated.gold),
                  std::move(generated.conclusion)};
    writer.Write(io::InstanceToJson(TaskInstance{std::move(p)}));
  }
  c.FinishManifest({"instances.jsonl"});
  c.out << json{{"instances", o.count}}.dump() << "\n";
}

void CmdGenMwp(Context& c) {
  Options& o = c.o;
  if (o.count < 0) throw UsageError("--count must not be negative");
  c.StartManifest();
  io::RecordWriter writer((c.dir / "instances.jsonl").string(), io::kInstancesSchema);
  for (int i = 0; i < o.count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "mwp-%05d", i);
    auto synthetic = mwp::GenerateMwp(StableHash(o.seed, id), id);
    writer.Write(io::InstanceToJson(TaskInstance{mwp::ProblemFromSynthetic(synthetic)}));
  }
  c.FinishManifest({"instances.jsonl"});
  c.out << json{{"instances", o.count}}.dump() << "\n";
}

void CmdPrompts(Context& c) {
  c.StartManifest();
  json outputs = json::array();
  for (Task task : {Task::kMwp, Task::kSnlr, Task::kMoral}) {
    for (PromptRole role : {PromptRole::kGenerator, PromptRole::kCritic}) {
      const std::string name = RecipeFileName(task, role);
      WriteJson(c.dir / name, RecipeToJson(DefaultRecipe(task, role)));
      outputs.push_back(name);
    }
  }
  c.FinishManifest(outputs);
  c.out << json{{"recipes", outputs}}.dump() << "\n";
}

HttpService* g_serving = nullptr;

void CmdServe(Context& c) {
  Options& o = c.o;
  auto res = MakeResources(o);
  if (o.port < 0 || o.port > 65535) throw UsageError("--port must be in [0, 65535]");
  if (!o.out.empty()) c.StartManifest();
  Input input = LoadInput(o, *res, c.err);
  FixtureSet fixtures;
  if (!o.fixtures.empty()) fixtures = io::LoadFixtures(o.fixtures);
  SessionManager sessions(std::move(input.instances), *res,
                          DefaultSessionGenerators(*res, std::move(fixtures)),
                          o.store);
  for (const auto& w : sessions.restore_warnings()) c.err << "warning: " << w << "\n";
  ServiceOptions options;
  options.host = o.host;
  options.port = o.port;
  options.default_oracle_suggestion = o.oracle_suggestion;
  if (!o.token.empty()) options.token = o.token;
  HttpService service(sessions, options);
  const int port = service.Bind();
  c.out << json{{"listening", "http://" + o.host + ":" + std::to_string(port)},
                {"sessions", sessions.List().size()}}
               .dump()
        << std::endl;
  g_serving = &service;
  std::signal(SIGINT, [](int) {
    if (g_serving) g_serving->Stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_serving) g_serving->Stop();
  });
  service.Serve();
  g_serving = nullptr;
}

// --- flag wiring ------------------------------------------------------------

void AddInput(CLI::App* s, Options& o) {
  s->add_option("--task", o.task, "mwp, snlr or moral");
  s->add_option("--in", o.in,
                "instances file, or a dataset to ingest (MAWPS/SVAMP JSON, "
                "sNLR or Moral Stories JSONL)");
  s->add_option("--format", o.format, "auto, instances, mawps, svamp")
      ->capture_default_str();
  s->add_option("--limit", o.limit, "use only the first N instances (0 = all)")
      ->capture_default_str();
}

void AddResources(CLI::App* s, Options& o) {
  s->add_option("--lexicon", o.lexicon, "sNLR attribute lexicon (JSON)");
  s->add_option("--judgments", o.judgments, "moral judgment lexicon (JSON)");
  s->add_option("--synonyms", o.synonyms, "judgment paraphrase table (JSON)");
  s->add_option("--verbs", o.verbs, "verb list for moral action extraction");
  s->add_option("--overlap-threshold", o.overlap,
                "token-F1 below which a norm action counts as misaligned")
      ->capture_default_str();
}

void AddCommon(CLI::App* s, Options& o) {
  s->add_option("--out", o.out, "output directory");
  s->add_option("--config", o.config,
                "JSON config file; flags and environment take precedence");
}

void AddLoop(CLI::App* s, Options& o, bool emission) {
  s->add_option("--gen", o.gen, "repair, scripted or remote")->capture_default_str();
  s->add_option("--fixtures", o.fixtures, "scripted generator fixtures (JSON)");
  s->add_option("--prompts", o.prompts,
                "directory of prompt recipes (default: built-in v1)");
  s->add_option("--critic", o.critic, "oracle, noisy or remote")->capture_default_str();
  s->add_option("--eps", o.eps, "noisy critic corruption probability")
      ->capture_default_str();
  s->add_flag("--exempt-no-hint", o.exempt_no_hint,
              "noisy critic keeps acceptances intact");
  s->add_option("--T", o.turns, "maximum refinement turns (default 3)")
      ->capture_default_str();
  if (emission) {
    s->add_option("--k", o.samples, "sampled hypotheses per turn")
        ->capture_default_str();
    s->add_option("--top-p", o.top_p, "nucleus mass for sampling (default 0.5)")
        ->capture_default_str();
  } else {
    s->add_option("--pool", o.pool, "warm-start from the pool's implausible hypotheses");
    s->add_flag("--fail-fast", o.fail_fast, "stop a run at its first error");
  }
  s->add_option("--seed", o.seed, "global seed")->capture_default_str();
  s->add_option("--parallel", o.parallel, "worker threads")->capture_default_str();
  s->add_option("--gen-url", o.gen_url, "generator completion endpoint")
      ->envname("REFINE_GEN_URL");
  s->add_option("--gen-key", o.gen_key, "generator endpoint key")
      ->envname("REFINE_GEN_KEY");
  s->add_option("--critic-url", o.critic_url, "critic completion endpoint")
      ->envname("REFINE_CRITIC_URL");
  s->add_option("--critic-key", o.critic_key, "critic endpoint key")
      ->envname("REFINE_CRITIC_KEY");
  s->add_option("--timeout-ms", o.timeout_ms, "per-request timeout")
      ->capture_default_str();
  s->add_option("--retries", o.retries, "attempts per completion request")
      ->capture_default_str();
}

}  // namespace

int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err) {
  Options o;
  CLI::App app{"refine-loop: critique-and-refine toolkit"};
  app.set_version_flag("--version", REFINE_VERSION);
  app.require_subcommand(1, 1);

  std::map<CLI::App*, std::function<void(Context&)>> commands;

  auto* perturb = app.add_subcommand("perturb", "build a feedback pool by rule-based perturbation");
  AddInput(perturb, o);
  AddResources(perturb, o);
  AddCommon(perturb, o);
  perturb->add_option("--kinds", o.kinds, "error kinds, comma separated, or all")
      ->delimiter(',')
      ->capture_default_str();
  perturb->add_option("--per-kind", o.per_kind, "records per instance and kind")
      ->capture_default_str();
  perturb->add_option("--seed", o.seed, "global seed")->capture_default_str();
  perturb->add_option("--parallel", o.parallel, "worker threads")->capture_default_str();
  commands[perturb] = CmdPerturb;

  auto* run = app.add_subcommand("run", "greedy refinement with a critic, then scoring");
  AddInput(run, o);
  AddResources(run, o);
  AddCommon(run, o);
  AddLoop(run, o, false);
  commands[run] = [](Context& c) { CmdRun(c, RunMode::kInference); };

  auto* emit = app.add_subcommand("emit", "exploration with k samples per turn; writes training tuples");
  AddInput(emit, o);
  AddResources(emit, o);
  AddCommon(emit, o);
  AddLoop(emit, o, true);
  commands[emit] = [](Context& c) { CmdRun(c, RunMode::kEmission); };

  auto* eval = app.add_subcommand("eval", "score traces against gold");
  AddInput(eval, o);
  AddResources(eval, o);
  AddCommon(eval, o);
  eval->add_option("--traces", o.traces, "trace files")->expected(1, -1);
  commands[eval] = CmdEval;

  auto* sweep = app.add_subcommand("sweep", "final EM against critic noise");
  AddInput(sweep, o);
  AddResources(sweep, o);
  AddCommon(sweep, o);
  sweep->add_option("--pool", o.pool, "warm-start from the pool's implausible hypotheses");
  sweep->add_option("--gen", o.gen, "repair or scripted")->capture_default_str();
  sweep->add_option("--fixtures", o.fixtures, "scripted generator fixtures (JSON)");
  sweep->add_option("--eps", o.eps_list, "noise levels")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--trials", o.trials, "noise seeds per level")->capture_default_str();
  sweep->add_option("--resamples", o.resamples, "bootstrap resamples")
      ->capture_default_str();
  sweep->add_flag("--exempt-no-hint", o.exempt_no_hint,
                  "noisy critic keeps acceptances intact");
  sweep->add_option("--T", o.turns, "maximum refinement turns")->capture_default_str();
  sweep->add_option("--seed", o.seed, "global seed")->capture_default_str();
  sweep->add_option("--parallel", o.parallel, "worker threads")->capture_default_str();
  commands[sweep] = CmdSweep;

  auto* gen_snlr = app.add_subcommand("gen-snlr", "generate seeded sNLR scenarios");
  AddResources(gen_snlr, o);
  AddCommon(gen_snlr, o);
  gen_snlr->add_option("--count", o.count, "scenarios")->capture_default_str();
  gen_snlr->add_option("--hops", o.hops, "1, 2, or 0 to alternate")->capture_default_str();
  gen_snlr->add_option("--seed", o.seed, "global seed")->capture_default_str();
  commands[gen_snlr] = CmdGenSnlr;

  auto* gen_mwp = app.add_subcommand("gen-mwp", "generate seeded synthetic word problems");
  AddCommon(gen_mwp, o);
  gen_mwp->add_option("--count", o.count, "problems")->capture_default_str();
  gen_mwp->add_option("--seed", o.seed, "global seed")->capture_default_str();
  commands[gen_mwp] = CmdGenMwp;

  auto* prompts = app.add_subcommand("prompts", "write the built-in prompt recipes");
  AddCommon(prompts, o);
  commands[prompts] = CmdPrompts;

  auto* serve = app.add_subcommand("serve", "session service for human critics");
  AddInput(serve, o);
  AddResources(serve, o);
  AddCommon(serve, o);
  serve->add_option("--host", o.host, "bind address")->capture_default_str();
  serve->add_option("--port", o.port, "port (0 picks a free one)")->capture_default_str();
  serve->add_option("--store", o.store, "directory for persisted sessions");
  serve->add_option("--fixtures", o.fixtures, "fixtures for scripted session generators");
  serve->add_option("--token", o.token, "require this bearer token")
      ->envname("REFINE_SERVICE_TOKEN");
  serve->add_flag("--oracle-suggestion", o.oracle_suggestion,
                  "show the oracle's feedback next to each pending hypothesis");
  commands[serve] = CmdServe;

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  Context context{o, *sub, out, err, args, {}, {}};
  try {
    if (!o.config.empty()) ApplyConfigFile(*sub, o.config);
    commands.at(sub)(context);
    return kExitOk;
  } catch (const UsageError& e) {
    err << json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    json error = {{"code", ErrorCodeName(e.code())}, {"message", e.what()}};
    if (e.position()) error["position"] = *e.position();
    err << json{{"error", error}}.dump() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return kExitFailure;
  }
}

}  // namespace refine::cli
