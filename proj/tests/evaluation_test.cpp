#include <gtest/gtest.h>

#include <sstream>

#include "groundmem/config.hpp"
#include "groundmem/error.hpp"
#include "groundmem/evaluation.hpp"
#include "groundmem/persistence.hpp"
#include "support.hpp"

using namespace groundmem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto dir = fixture::scratch_dir("eval");
  write_file_atomic(dir / name, body);
  return dir / name;
}

ItemResult result(RelationType r, bool same, Complexity c = Complexity::Local) {
  ItemResult x;
  x.item.relation_type = r;
  x.verdict.verdict = same ? Verdict::Same : Verdict::Different;
  x.annotation.complexity = c;
  return x;
}

QAItem qa(const std::string& q, const std::string& gold = "x") {
  QAItem i;
  i.question = q;
  i.gold_answer = gold;
  return i;
}

}  // namespace

TEST(Load, ScenarioFiles) {
  const auto d = load_transcripts(fixture::data_dir() / "scenarios.jsonl");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0].id, "home_office");
  const auto q = load_qa(fixture::data_dir() / "scenarios_qa.jsonl");
  ASSERT_FALSE(q.empty());
  EXPECT_EQ(q.back().gold_answer, "It was yellow");
  EXPECT_EQ(q.back().questioner, Speaker::B);
}

TEST(Load, ReportsLineNumbers) {
  const auto p = write_temp("t.jsonl",
                            "{\"dialogue_id\":\"d\",\"turns\":[{\"turn\":1,\"speaker\":\"A\",\"text\":\"hi\"}]}\n"
                            "{\"dialogue_id\":\"e\",\"turns\":[{\"turn\":1,\"speaker\":\"A\",\"text\":\"hi\"},"
                            "{\"turn\":1,\"speaker\":\"B\",\"text\":\"yo\"}]}\n");
  try {
    load_transcripts(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_TRUE(load_transcripts(write_temp("empty.jsonl", "")).empty());
  const auto bad = write_temp("q.jsonl",
                              R"({"dialogue_id":"d","question":"q","gold_answer":"g","relation_type":"Causal","questioner":"A"})"
                              "\n");
  EXPECT_EQ(code_of([&] { load_qa(bad); }), ErrorCode::UnknownRelationType);
}

TEST(Judge, MockFollowsEquivalenceRules) {
  auto gw = fixture::mock();
  const std::string stair = "What was the color of the stair in my basement like?";
  EXPECT_EQ(judge("white", "It was white", stair, *gw).verdict, Verdict::Same);
  EXPECT_EQ(judge("brown", "It was white", stair, *gw).verdict, Verdict::Different);
  EXPECT_EQ(judge("Kitchen", "Dining Room", "Which room?", *gw).verdict, Verdict::Different);
  EXPECT_EQ(judge("<think>x</think><answer>white</answer>", "It was white", stair, *gw).verdict, Verdict::Same);
}

TEST(Annotate, MockLabels) {
  auto gw = fixture::mock();
  EXPECT_EQ(annotate(qa("What color is the wall in the kitchen?"), *gw).complexity, Complexity::Local);
  EXPECT_EQ(annotate(qa("What is in the room north of the kitchen?"), *gw).complexity, Complexity::Relational);
  EXPECT_EQ(annotate(qa("Is it red or blue?"), *gw).constraint, ConstraintKind::List);
  EXPECT_EQ(annotate(qa("Is it red?"), *gw).question_kind, QuestionKind::Binary);
}

TEST(Aggregate, RatiosAndAbsentCells) {
  std::vector<ItemResult> rs;
  for (int i = 0; i < 50; ++i) rs.push_back(result(RelationType::Temporal, i < 25));
  const auto r = aggregate(rs, "Agentic-Image");
  EXPECT_DOUBLE_EQ(*r.by_relation[0].accuracy(), 0.5);
  EXPECT_FALSE(r.by_relation[1].accuracy());
  const auto table = render_table({r});
  EXPECT_NE(table.find("0.50"), std::string::npos);
  EXPECT_NE(table.find("—"), std::string::npos);
}

TEST(Aggregate, ReproducesATableRowFromSynthesizedVerdicts) {
  std::vector<ItemResult> rs;
  const int same[] = {25, 12, 22, 29};
  for (std::size_t k = 0; k < 4; ++k) {
    for (int i = 0; i < 50; ++i) rs.push_back(result(kRelationTypes[k], i < same[k]));
  }
  const auto table = render_table({aggregate(rs, "Agentic-Image")});
  const auto row = table.substr(table.find("Agentic-Image"));
  std::vector<std::string> cells;
  std::stringstream ss(row);
  std::string cell;
  while (ss >> cell) cells.push_back(cell);
  ASSERT_GE(cells.size(), 6u);
  EXPECT_EQ(cells[1], "0.50");
  EXPECT_EQ(cells[2], "0.24");
  EXPECT_EQ(cells[3], "0.44");
  EXPECT_EQ(cells[4], "0.58");
}

TEST(Aggregate, CountsSumToItems) {
  std::vector<ItemResult> rs;
  for (int i = 0; i < 37; ++i) {
    rs.push_back(result(kRelationTypes[i % 4], i % 3 == 0, i % 2 ? Complexity::Local : Complexity::Relational));
  }
  const auto r = aggregate(rs, "x");
  int n = 0, cross = 0;
  for (const auto& c : r.by_relation) n += c.n;
  for (const auto& row : r.by_relation_scope) {
    for (const auto& c : row) cross += c.n;
  }
  EXPECT_EQ(n, 37);
  EXPECT_EQ(cross, 37);
  EXPECT_EQ(r.by_scope[0].n + r.by_scope[1].n, 37);
  const auto csv = render_csv(r);
  EXPECT_EQ(csv.rfind("framework,relation_type,scope,n,same,accuracy\n", 0), 0u);
}

TEST(RunCondition, ParsesCliSpellings) {
  EXPECT_TRUE(parse_run_condition("full-dialog")->full_dialog);
  EXPECT_EQ(parse_run_condition("text")->condition, Condition::Textual);
  EXPECT_FALSE(parse_run_condition("video"));
  EXPECT_EQ(framework_label(*parse_run_condition("both")), "Agentic-Both");
  EXPECT_EQ(to_string(*parse_run_condition("image")), "image");
}

TEST(Benchmark, ScenarioRunIsPerfectUnderImageCondition) {
  auto gw = fixture::mock();
  const auto d = load_transcripts(fixture::data_dir() / "scenarios.jsonl");
  const auto q = load_qa(fixture::data_dir() / "scenarios_qa.jsonl");
  const auto r = run_benchmark(d, q, {}, *gw);
  EXPECT_EQ(r.report.overall.same, r.report.overall.n);
  EXPECT_EQ(r.items.size(), q.size());
}

TEST(Benchmark, FullDialogMakesNoRetrievals) {
  auto gw = fixture::mock();
  BenchmarkConfig c;
  c.run.full_dialog = true;
  const auto r = run_benchmark(load_transcripts(fixture::data_dir() / "scenarios.jsonl"),
                               load_qa(fixture::data_dir() / "scenarios_qa.jsonl"), c, *gw);
  for (const auto& i : r.items) {
    ASSERT_TRUE(i.trace);
    EXPECT_EQ(i.trace->retrieve_calls, 0);
  }
  EXPECT_EQ(r.report.label, "FD");
}

TEST(Benchmark, BothConditionSendsBothChannels) {
  auto gw = fixture::mock();
  BenchmarkConfig c;
  c.run.condition = c.build.condition = c.reasoner.condition = Condition::Both;
  const auto r = run_benchmark(load_transcripts(fixture::data_dir() / "scenarios.jsonl"),
                               load_qa(fixture::data_dir() / "scenarios_qa.jsonl"), c, *gw);
  const auto& steps = r.items.front().trace->steps;
  const auto& final = steps.back().request;
  EXPECT_NE(final.find("Image: attachment"), std::string::npos);
  EXPECT_NE(final.find("Summary:"), std::string::npos);
}

TEST(Benchmark, ParallelRunMatchesSequential) {
  auto gw = fixture::mock();
  const auto d = load_transcripts(fixture::data_dir() / "scenarios.jsonl");
  const auto q = load_qa(fixture::data_dir() / "scenarios_qa.jsonl");
  BenchmarkConfig one, many;
  many.jobs = 3;
  const auto a = run_benchmark(d, q, one, *gw), b = run_benchmark(d, q, many, *gw);
  ASSERT_EQ(a.items.size(), b.items.size());
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    EXPECT_EQ(item_to_json(a.items[i], "image"), item_to_json(b.items[i], "image"));
  }
}

TEST(Benchmark, MissingDialogueIsAPerItemFailure) {
  auto gw = fixture::mock();
  QAItem orphan = qa("What was in my kitchen?");
  orphan.dialogue_id = "nowhere";
  const auto r = run_benchmark({}, {orphan}, {}, *gw);
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_FALSE(r.items[0].error.empty());
  EXPECT_EQ(r.items[0].verdict.verdict, Verdict::Different);
}

TEST(Analysis, ReaggregatesWrittenTraces) {
  auto gw = fixture::mock();
  const auto r = run_benchmark(load_transcripts(fixture::data_dir() / "scenarios.jsonl"),
                               load_qa(fixture::data_dir() / "scenarios_qa.jsonl"), {}, *gw);
  const auto dir = fixture::scratch_dir("analysis");
  write_benchmark(r, {}, dir);
  const auto a = analyze_traces(dir);
  EXPECT_EQ(render_table({a.report}), render_table({r.report}));
  EXPECT_EQ(render_csv(a.report), read_file(dir / "report.csv"));
  std::filesystem::remove_all(dir);
}

TEST(Config, IniOverridesDefaults) {
  const auto p = write_temp("c.ini",
                            "[backend]\nseed = 99\ndropout = 0.5\n[constructor]\ncandidates = 5\n"
                            "[memory]\nlambda = 0.4\nfusion = union\n[reasoner]\nindirect_request_rule = false\n"
                            "[run]\ncondition = both\njobs = 2\n");
  const auto c = load_config_file(p);
  EXPECT_EQ(c.backend.seed, 99u);
  EXPECT_DOUBLE_EQ(c.backend.dropout, 0.5);
  EXPECT_EQ(c.build.constructor.candidates, 5);
  EXPECT_DOUBLE_EQ(c.reasoner.lambda, 0.4);
  EXPECT_TRUE(c.reasoner.union_fusion);
  EXPECT_FALSE(c.reasoner.indirect_request_rule);
  EXPECT_EQ(c.build.condition, Condition::Both);
  EXPECT_EQ(c.jobs, 2);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(code_of([&] { load_config_file(write_temp("a.ini", "[backend]\ncolour = 1\n")); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { load_config_file(write_temp("b.ini", "[memory]\nlambda = 2\n")); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { load_config_file(write_temp("c.ini", "[run]\njobs = many\n")); }), ErrorCode::ConfigError);
}
