#include <gtest/gtest.h>

#include <filesystem>

#include "groundmem/persistence.hpp"
#include "groundmem/reasoner.hpp"
#include "support.hpp"

using namespace groundmem;
namespace fs = std::filesystem;

namespace {

std::string cli() { return "env -u GROUNDMEM_MODE -u GROUNDMEM_SEED " + fixture::cli_path(); }
std::string transcripts() { return (fixture::data_dir() / "scenarios.jsonl").string(); }
std::string qa() { return (fixture::data_dir() / "scenarios_qa.jsonl").string(); }

/// Every regular file under `dir` with its contents, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  }
  return files;
}

}  // namespace

TEST(Cli, BuildWritesBanks) {
  const auto out = fixture::scratch_dir("cli_build");
  ASSERT_EQ(fixture::run(cli() + " build --transcripts " + transcripts() + " --out " + out.string()), 0);
  for (const char* f : {"home_office/manifest.json", "home_office/links.jsonl", "home_office/embeddings.bin", "home_office/frames/B_3_seq3.png",
                        "home_office/frames/B_3_seq3.objects.json", "basement/manifest.json", "bathroom/manifest.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_NE(read_file(out / "home_office/links.jsonl").find("is_north_of"), std::string::npos);
  fs::remove_all(out);
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto out = fixture::scratch_dir("cli_usage");
  EXPECT_EQ(fixture::run(cli()), 2);
  EXPECT_EQ(fixture::run(cli() + " frobnicate"), 2);
  EXPECT_EQ(fixture::run(cli() + " build --transcripts /nonexistent.jsonl --out " + out.string()), 2);
  EXPECT_EQ(fixture::run(cli() + " --condition video build --transcripts " + transcripts() + " --out " + out.string()), 2);
  EXPECT_EQ(fixture::run(cli() + " query --question q --asker C --bank " + out.string()), 2);
  EXPECT_EQ(fixture::run(cli() + " --jobs 0 eval --transcripts " + transcripts() + " --qa " + qa()), 2);
  EXPECT_EQ(fixture::run("env -u GROUNDMEM_CHAT_URL -u GROUNDMEM_IMAGE_URL -u GROUNDMEM_EMBED_URL GROUNDMEM_MODE=live " +
                         fixture::cli_path() + " eval --transcripts " + transcripts() + " --qa " + qa() + " --out " +
                         out.string()),
            2);
  EXPECT_EQ(fixture::run(cli() + " --help"), 0);
  fs::remove_all(out);
}

TEST(Cli, RuntimeFailureExitsOne) {
  const auto dir = fixture::scratch_dir("cli_runtime");
  write_file_atomic(dir / "bad.jsonl", "{not json\n");
  EXPECT_EQ(fixture::run(cli() + " build --transcripts " + (dir / "bad.jsonl").string() + " --out " +
                         (dir / "out").string()),
            1);
  fs::remove_all(dir);
}

TEST(Cli, QueryAnswersAndWritesTrace) {
  const auto out = fixture::scratch_dir("cli_query");
  ASSERT_EQ(fixture::run(cli() + " build --transcripts " + transcripts() + " --out " + out.string()), 0);
  const auto trace = out / "trace.json";
  const auto answer = fixture::capture(cli() + " query --bank " + out.string() +
                                       " --dialogue basement --asker B --trace " + trace.string() +
                                       " --question 'What was the color of the stair in my basement like?'");
  EXPECT_EQ(answer, "white\n");
  const auto t = trace_from_json(Json::parse(read_file(trace)));
  int rag = 0;
  for (const auto& s : t.plan.steps) rag += s.command == Command::Rag;
  EXPECT_EQ(t.retrieve_calls, rag);
  EXPECT_EQ(t.answer, "white");
  fs::remove_all(out);
}

TEST(Cli, BothConditionStoresBothArtifacts) {
  const auto out = fixture::scratch_dir("cli_both");
  ASSERT_EQ(fixture::run(cli() + " --condition both build --transcripts " + transcripts() + " --out " + out.string()),
            0);
  EXPECT_TRUE(fs::exists(out / "bathroom/frames/B_2_seq4.png"));
  EXPECT_TRUE(fs::exists(out / "bathroom/frames/B_2_seq4.summary.txt"));
  const auto text = fixture::scratch_dir("cli_text");
  ASSERT_EQ(fixture::run(cli() + " --condition text build --transcripts " + transcripts() + " --out " + text.string()),
            0);
  EXPECT_FALSE(fs::exists(text / "bathroom/frames/B_2_seq4.png"));
  EXPECT_TRUE(fs::exists(text / "bathroom/frames/B_2_seq4.summary.txt"));
  fs::remove_all(out);
  fs::remove_all(text);
}

TEST(Cli, EvalAndAnalyzeAreReproducible) {
  const auto a = fixture::scratch_dir("cli_eval_a"), b = fixture::scratch_dir("cli_eval_b");
  const auto before = read_file(transcripts()) + read_file(qa());
  for (const auto& dir : {a, b}) {
    ASSERT_EQ(fixture::run(cli() + " --seed 11 eval --transcripts " + transcripts() + " --qa " + qa() + " --out " +
                           dir.string()),
              0);
  }
  EXPECT_EQ(snapshot(a), snapshot(b));
  EXPECT_EQ(read_file(transcripts()) + read_file(qa()), before);
  for (const char* f : {"report.txt", "report.csv", "logit.json", "traces/home_office/0.json"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  ASSERT_EQ(fixture::run(cli() + " analyze --traces " + a.string()), 0);
  EXPECT_TRUE(fs::exists(a / "analysis/logit.json"));
  EXPECT_TRUE(fs::exists(a / "analysis/scope.txt"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, FullDialogEvalSkipsMemory) {
  const auto out = fixture::scratch_dir("cli_fd");
  const auto table = fixture::capture(cli() + " --condition full-dialog eval --transcripts " + transcripts() +
                                      " --qa " + qa() + " --out " + out.string());
  EXPECT_NE(table.find("FD"), std::string::npos) << table;
  const auto item = Json::parse(read_file(out / "traces/basement/0.json"));
  EXPECT_EQ(item["trace"]["retrieve_calls"], 0);
  fs::remove_all(out);
}
