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

#include "refine/io.h"

#include <filesystem>
#include <fstream>
#include <map>

#include <gtest/gtest.h>
#include <unistd.h>

#include "refine/error.h"
#include "testkit.h"

namespace refine::io {
namespace {

namespace fs = std::filesystem;

const TaskResources& Res() { return TaskResources::Default(); }

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("refine-io-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  void WriteText(const std::string& name, const std::string& text) const {
    std::ofstream(Path(name), std::ios::binary) << text;
  }

  fs::path dir_;
};

std::vector<TaskInstance> Mixed() {
  auto out = testkit::MwpInstances(10, 1);
  for (auto& i : testkit::SnlrInstances(10, 2)) out.push_back(std::move(i));
  for (auto& i : testkit::MoralInstances(10, 3)) out.push_back(std::move(i));
  return out;
}

TEST_F(IoTest, InstancesRoundTrip) {
  auto instances = Mixed();
  std::vector<json> records;
  for (const auto& i : instances) records.push_back(InstanceToJson(i));
  WriteRecords(Path("i.jsonl"), kInstancesSchema, records);
  auto back = LoadInstances(Path("i.jsonl"), Res());
  ASSERT_EQ(back.size(), instances.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    EXPECT_EQ(InstanceToJson(back[k]), records[k]);
    EXPECT_EQ(GoldHypothesis(back[k]), GoldHypothesis(instances[k]));
  }
}

TEST_F(IoTest, PoolRoundTripIsExact) {
  auto instances = Mixed();
  PoolSpec spec;
  for (int k = 0; k < kErrorKindCount; ++k) spec.kinds.push_back(static_cast<ErrorKind>(k));
  auto pool = BuildPool(instances, spec, Res());
  std::vector<json> records;
  for (const auto& r : pool.records) records.push_back(RecordToJson(r));
  WriteRecords(Path("p.jsonl"), kPoolSchema, records);
  EXPECT_EQ(LoadPool(Path("p.jsonl")), pool.records);
}

TEST_F(IoTest, TracesAndTuplesRoundTrip) {
  auto instances = Mixed();
  std::vector<RunItem> items;
  for (const auto& i : instances) items.push_back({i.id(), &i, std::nullopt});
  GeneratorFactory gen = [](const RunItem&, std::uint64_t) {
    return std::make_unique<RepairGenerator>(Res());
  };
  CriticFactory critic = [](const RunItem&, std::uint64_t s) {
    return std::make_unique<NoisyCritic>(std::make_unique<OracleCritic>(Res()),
                                         NoiseConfig{0.3, s, false}, Res());
  };
  LoopConfig cfg;
  auto inf = RunBatch(items, gen, critic, cfg, RunMode::kInference, Res(), 1);
  auto emit = RunBatch(items, gen, critic, cfg, RunMode::kEmission, Res(), 1);
  {
    RecordWriter w(Path("t.jsonl"), kTracesSchema);
    for (const auto& t : inf.traces) w.Write(TraceToJson(t));
  }
  {
    RecordWriter w(Path("u.jsonl"), kTuplesSchema);
    for (const auto& t : emit.tuples) w.Write(TupleToJson(t));
  }
  EXPECT_EQ(LoadTraces(Path("t.jsonl")), inf.traces);
  EXPECT_EQ(LoadTuples(Path("u.jsonl")), emit.tuples);
}

TEST_F(IoTest, ReportAndSweepRoundTrip) {
  EvalReport r;
  r.dataset = "d";
  r.traces = 3;
  r.exact_matches = 1;
  r.em = 1.0 / 3.0;
  r.error_buckets["MissingLink"] = 2;
  r.stop_reasons["no_hint"] = 1;
  r.config["critic"] = "oracle";
  EXPECT_EQ(ReportFromJson(ReportToJson(r)), r);
  SweepRow row{0.25, 10, 0.5, 0.2, 0.8};
  EXPECT_EQ(SweepRowFromJson(SweepRowToJson(row)), row);
}

TEST_F(IoTest, HundredRecordsTruncatedTail) {
  std::string text = json{{"schema", kTuplesSchema}, {"version", kSchemaVersion}}.dump() + "\n";
  for (int i = 0; i < 100; ++i) text += json{{"n", i}}.dump() + "\n";
  text.resize(text.size() - 5);  // cut the last record mid-line
  WriteText("trunc.jsonl", text);
  auto loaded = LoadRecords(Path("trunc.jsonl"), kTuplesSchema);
  EXPECT_EQ(loaded.records.size(), 99u);
  EXPECT_EQ(loaded.warnings.size(), 1u);
  EXPECT_EQ(loaded.lines.front(), 2u);
}

TEST_F(IoTest, VersionMismatchRefused) {
  WriteText("v.jsonl", json{{"schema", kPoolSchema}, {"version", 99}}.dump() + "\n");
  try {
    LoadRecords(Path("v.jsonl"), kPoolSchema);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
  WriteText("s.jsonl", json{{"schema", kTracesSchema}, {"version", 1}}.dump() + "\n");
  EXPECT_THROW(LoadRecords(Path("s.jsonl"), kPoolSchema), Error);
}

TEST_F(IoTest, MalformedMiddleLineReportsLine) {
  WriteText("m.jsonl", json{{"schema", kPoolSchema}, {"version", 1}}.dump() +
                           "\n{\"a\":1}\n{oops\n{\"a\":2}\n");
  try {
    LoadRecords(Path("m.jsonl"), kPoolSchema);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRecord);
    EXPECT_EQ(e.position(), std::optional<std::size_t>(3));
  }
}

TEST_F(IoTest, InvariantViolationNamesLine) {
  auto instances = testkit::MwpInstances(2, 1);
  PoolSpec spec{{ErrorKind::kIncorrectOperators}, 1, 1, 1};
  auto pool = BuildPool(instances, spec, Res());
  json bad = RecordToJson(pool.records[0]);
  bad["feedback"]["rendered"] = "The operator in #7 is incorrect.";
  WriteRecords(Path("bad.jsonl"), kPoolSchema, {RecordToJson(pool.records[1]), bad});
  try {
    LoadPool(Path("bad.jsonl"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvariantViolation);
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST_F(IoTest, FeedbackJsonChecksRendering) {
  Feedback f = Feedback::Error(errors::SemanticMisalignment{"to lie"}, "to be honest");
  EXPECT_EQ(FeedbackFromJson(FeedbackToJson(f)), f);
  EXPECT_EQ(FeedbackFromJson(FeedbackToJson(Feedback::Accept())), Feedback::Accept());
  json j = FeedbackToJson(f);
  j["hint"] = "something else";
  EXPECT_THROW(FeedbackFromJson(j), Error);
}

TEST(IngestMoralTest, SerializedStoryWithHurtfulNorm) {
  json record = {
      {"actor_input",
       "<|SIT|> Nadia's teammate missed an easy shot in the last minute of the "
       "game. <|INT|> Nadia wants her teammate to practice more. <|I_ACT|> "
       "Nadia mocks her teammate in front of the whole team. <|NRM|>"},
      {"actor_output",
       "It's hurtful to mock your teammates. <|M_ACT|> Nadia tells her "
       "teammate it happens to everyone and offers to practice together."}};
  auto p = MoralFromRecord(record, "nadia", moral::JudgmentLexicon::Default());
  EXPECT_EQ(p.id, "nadia");
  EXPECT_EQ(p.context.intention, "Nadia wants her teammate to practice more.");
  ASSERT_TRUE(p.norm.has_value());
  EXPECT_EQ(p.norm->Render(), "It's hurtful to mock your teammates.");
  EXPECT_EQ(p.moral_action,
            "Nadia tells her teammate it happens to everyone and offers to "
            "practice together.");

  json raw = {{"situation", p.context.situation},
              {"intention", p.context.intention},
              {"immoral_action", p.context.immoral_action},
              {"norm", p.norm_text},
              {"moral_action", p.moral_action}};
  auto q = MoralFromRecord(raw, "nadia", moral::JudgmentLexicon::Default());
  EXPECT_EQ(InstanceToJson(TaskInstance{q}), InstanceToJson(TaskInstance{p}));
}

TEST(IngestMoralTest, UnknownJudgmentIsKeptWithoutNorm) {
  json record = {
      {"actor_input",
       "<|SIT|> Theo is at a concert with his cousins. <|INT|> Theo wants a "
       "better view. <|I_ACT|> Theo shoves past a smaller kid to reach the "
       "front. <|NRM|>"},
      {"actor_output",
       "It's mean to push people out of your way. <|M_ACT|> Theo asks if he "
       "can squeeze in beside the kid."}};
  auto p = MoralFromRecord(record, "theo", moral::JudgmentLexicon::Default());
  EXPECT_FALSE(p.norm.has_value());
  EXPECT_EQ(p.norm_text, "It's mean to push people out of your way.");
}

TEST(IngestMoralTest, MissingMarker) {
  json record = {{"actor_input", "<|SIT|> a <|INT|> b <|I_ACT|> c"},
                 {"actor_output", "You should d. <|M_ACT|> e"}};
  try {
    MoralFromRecord(record, "x", moral::JudgmentLexicon::Default());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingMarker);
  }
}

TEST(IngestMoralTest, SampleFileCounts) {
  auto r = IngestMoral(std::string(REFINE_DATA_DIR) + "/moral/sample.jsonl",
                       moral::JudgmentLexicon::Default());
  EXPECT_EQ(r.instances.size(), 5u);
  EXPECT_EQ(r.malformed.size(), 1u);
  EXPECT_EQ(r.flagged.size(), 1u);
}

TEST(IngestMwpTest, AbstractsConcreteNumbers) {
  json record = {{"sQuestion", "Tom had 10 marbles and lost 4. How many are left?"},
                 {"lEquations", {"X=10-4"}},
                 {"lSolutions", {6}}};
  auto p = MwpFromRecord(record, "r1", MwpFormat::kMawps);
  EXPECT_EQ(p.gold_program.Render(), "#0: number0 - number1");
  EXPECT_EQ(p.binding.at(0), Rational(10));
  EXPECT_EQ(p.binding.at(1), Rational(4));
  EXPECT_EQ(p.gold_answer, Rational(6));
  EXPECT_EQ(p.text, "Tom had number0 marbles and lost number1. How many are left?");
}

TEST(IngestMwpTest, RoundedAnswerAcceptedExactKept) {
  json record = {{"Body", "Split 10 cakes among 3 kids."},
                 {"Question", "How much each?"},
                 {"Numbers", "10.0 3.0"},
                 {"Equation", "( number0 / number1 )"},
                 {"Answer", 3.3333333}};
  auto p = MwpFromRecord(record, "r", MwpFormat::kSvamp);
  EXPECT_EQ(p.gold_answer, Rational(10, 3));
}

TEST(IngestMwpTest, InconsistentRecordQuarantined) {
  json record = {{"text", "A 5 and 2."}, {"equation", "5 + 2"}, {"answer", 8}};
  try {
    MwpFromRecord(record, "q", MwpFormat::kMawps);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconsistentRecord);
  }
}

TEST(IngestMwpTest, SampleFilesReportQuarantine) {
  auto sv = IngestMwp(std::string(REFINE_DATA_DIR) + "/mwp/sample_svamp.json",
                      MwpFormat::kSvamp);
  EXPECT_EQ(sv.instances.size(), 6u);
  EXPECT_EQ(sv.quarantined.size(), 1u);
  EXPECT_EQ(sv.malformed.size(), 1u);
  for (const auto& inst : sv.instances) {
    EXPECT_EQ(mwp::ExecuteProgram(inst.mwp()->gold_program, inst.mwp()->binding),
              inst.mwp()->gold_answer);
  }
  auto ma = IngestMwp(std::string(REFINE_DATA_DIR) + "/mwp/sample_mawps.json",
                      MwpFormat::kMawps);
  EXPECT_EQ(ma.instances.size(), 4u);
}

TEST_F(IoTest, EmptyDatasetGivesNothing) {
  WriteText("empty.json", "");
  auto r = IngestMwp(Path("empty.json"), MwpFormat::kMawps);
  EXPECT_TRUE(r.instances.empty());
  EXPECT_TRUE(r.malformed.empty());
}

TEST(IngestSnlrTest, SampleFileMatchesSolver) {
  auto r = IngestSnlr(std::string(REFINE_DATA_DIR) + "/snlr/sample.jsonl",
                      snlr::Lexicon::Default());
  EXPECT_EQ(r.instances.size(), 6u);
  EXPECT_TRUE(r.quarantined.empty());
}

TEST(IngestSnlrTest, WrongConclusionQuarantined) {
  json record = {{"id", "s"},
                 {"rules", "rule 1: if X is green then X is soft\nrule 2: if X is red then X is hot"},
                 {"fact", "rose is viridian"},
                 {"conclusion", "rose is hot"}};
  try {
    SnlrFromRecord(record, "s", snlr::Lexicon::Default());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconsistentRecord);
  }
  record["conclusion"] = "rose is soft";
  auto p = SnlrFromRecord(record, "s", snlr::Lexicon::Default());
  EXPECT_EQ(p.gold_chain.Render(), "#0: rose is green\n#1: rose is soft");
}

TEST_F(IoTest, ConfigFiles) {
  WriteText("lex.json", R"({"families": {"color": ["green", "viridian"], "size": ["big"]},
                            "implicit": {"viridian": "green"}})");
  auto lex = LoadSnlrLexicon(Path("lex.json"));
  EXPECT_EQ(lex.Generalize(lex.MakeLiteral("viridian"))->value, "green");
  WriteText("verbs.txt", "# verbs\nhelp\nlie\n\n");
  EXPECT_EQ(LoadVerbs(Path("verbs.txt")), (moral::VerbLexicon{"help", "lie"}));
  WriteText("syn.json", R"({"bad": ["awful"]})");
  EXPECT_EQ(LoadSynonyms(Path("syn.json")).at("bad"), std::vector<std::string>{"awful"});
  WriteText("fx.json", R"({"a": ["#0: number0 + number1"]})");
  EXPECT_EQ(LoadFixtures(Path("fx.json")).at("a").size(), 1u);
  WriteText("j.json", R"({"judgments": [
      {"surface": "It's fine", "polarity": "positive", "inverses": ["It's bad"], "infinitive": true},
      {"surface": "It's bad", "polarity": "negative", "inverses": ["It's fine"], "infinitive": true}]})");
  EXPECT_EQ(LoadJudgmentLexicon(Path("j.json")).forms().size(), 2u);
  EXPECT_THROW(ReadJsonFile(Path("missing.json")), Error);
}

}  // namespace
}  // namespace refine::io
