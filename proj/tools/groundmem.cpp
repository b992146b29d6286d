#include <atomic>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "groundmem/config.hpp"
#include "groundmem/error.hpp"
#include "groundmem/evaluation.hpp"
#include "groundmem/persistence.hpp"
#include "groundmem/phase1.hpp"
#include "groundmem/reasoner.hpp"

namespace fs = std::filesystem;
using namespace groundmem;

namespace {

struct GlobalFlags {
  std::optional<std::string> config;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> condition;
  std::optional<int> jobs;
};

AppConfig resolve(const GlobalFlags& g) {
  AppConfig c = load_config(g.config ? std::optional<fs::path>(*g.config) : std::nullopt);
  if (g.mode) c.backend.mode = *g.mode == "live" ? Mode::Live : Mode::Mock;
  if (g.seed) c.backend.seed = *g.seed;
  if (g.condition) c.run = *parse_run_condition(*g.condition);
  if (g.jobs) c.jobs = *g.jobs;
  c.sync();
  validate(c.backend);
  return c;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string describe(const Error& e) { return e.tag() + ": " + e.what(); }

// --- build -----------------------------------------------------------------------

struct BuildArgs {
  std::string transcripts;
  std::string out;
};

int cmd_build(const GlobalFlags& g, const BuildArgs& a) {
  const AppConfig c = resolve(g);
  if (c.run.full_dialog) fail(ErrorCode::ConfigError, "build needs a memory condition (image, text or both)");
  const auto gateway = make_gateway(c.backend);
  const auto dialogues = load_transcripts(a.transcripts);
  std::vector<std::string> status(dialogues.size());
  std::vector<bool> ok(dialogues.size(), false);
  parallel_for(dialogues.size(), c.jobs, [&](std::size_t i) {
    const auto& d = dialogues[i];
    try {
      const auto result = build_memory(d, c.build, *gateway);
      save_bank(result.bank, fs::path(a.out) / d.id);
      std::size_t versions = 0;
      for (const auto& [f, e] : result.bank.entries()) versions += e.versions.size();
      status[i] = d.id + ": frames=" + std::to_string(result.bank.entries().size()) +
                  " versions=" + std::to_string(versions) + " triplets=" + std::to_string(result.bank.graph.size());
      ok[i] = true;
    } catch (const Error& e) {
      status[i] = d.id + ": failed " + describe(e);
    }
  });
  bool all = true;
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    (ok[i] ? std::cout : std::cerr) << status[i] << "\n";
    all = all && ok[i];
  }
  return all ? 0 : 1;
}

// --- query -----------------------------------------------------------------------

struct QueryArgs {
  std::string question;
  std::string asker;
  std::optional<std::string> trace;
  std::optional<std::string> bank;
  std::optional<std::string> dialogue;
  std::optional<std::string> transcripts;
};

fs::path locate_bank(const fs::path& root, const std::optional<std::string>& dialogue) {
  if (!fs::is_directory(root)) fail(ErrorCode::IoError, "no bank directory: " + root.string());
  if (fs::exists(root / "manifest.json")) return root;
  if (dialogue) return root / *dialogue;
  std::vector<fs::path> banks;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && fs::exists(e.path() / "manifest.json")) banks.push_back(e.path());
  }
  if (banks.size() == 1) return banks.front();
  fail(ErrorCode::ConfigError, banks.empty() ? "no bank under " + root.string()
                                             : "several banks under " + root.string() + "; pass --dialogue");
}

int cmd_query(const GlobalFlags& g, const QueryArgs& a) {
  const AppConfig c = resolve(g);
  const auto gateway = make_gateway(c.backend);
  const Speaker asker = *parse_speaker(a.asker);
  ExecutionTrace trace;
  if (c.run.full_dialog) {
    if (!a.transcripts) fail(ErrorCode::ConfigError, "full-dialog queries need --transcripts");
    const auto dialogues = load_transcripts(*a.transcripts);
    const Dialogue* pick = nullptr;
    for (const auto& d : dialogues) {
      if (!a.dialogue || d.id == *a.dialogue) {
        pick = &d;
        break;
      }
    }
    if (!pick) fail(ErrorCode::ConfigError, "dialogue not found in transcripts");
    trace = answer_from_transcript(a.question, asker, *pick, *gateway);
  } else {
    if (!a.bank) fail(ErrorCode::ConfigError, "query needs --bank");
    const MemoryBank bank = load_bank(locate_bank(*a.bank, a.dialogue));
    ReasonerConfig r = c.reasoner;
    r.condition = bank.condition;
    trace = answer_question(a.question, asker, bank, r, *gateway);
  }
  if (a.trace) write_file_atomic(*a.trace, trace_to_json(trace).dump(2) + "\n");
  std::cout << trace.answer << "\n";
  return 0;
}

// --- eval / analyze ----------------------------------------------------------------

struct EvalArgs {
  std::string transcripts;
  std::string qa;
  std::string out = "eval";
};

int cmd_eval(const GlobalFlags& g, const EvalArgs& a) {
  const AppConfig c = resolve(g);
  const auto gateway = make_gateway(c.backend);
  const auto dialogues = load_transcripts(a.transcripts);
  const auto qa = load_qa(a.qa);
  const auto result = run_benchmark(dialogues, qa, c.benchmark(), *gateway);
  write_benchmark(result, c.run, a.out);
  std::size_t failed = 0;
  for (const auto& item : result.items) failed += item.error.empty() ? 0 : 1;
  std::cout << render_table({result.report});
  std::cout << "items=" << result.items.size() << " failed=" << failed << "\n";
  for (const auto& item : result.items) {
    if (!item.error.empty()) std::cerr << item.item.dialogue_id << " #" << item.qa_index << ": " << item.error << "\n";
  }
  return 0;
}

struct AnalyzeArgs {
  std::string traces;
  std::optional<std::string> out;
};

int cmd_analyze(const GlobalFlags&, const AnalyzeArgs& a) {
  const Analysis analysis = analyze_traces(a.traces);
  const fs::path out = a.out ? fs::path(*a.out) : fs::path(a.traces) / "analysis";
  write_analysis(analysis, out);
  std::cout << render_scope_table(analysis.report);
  std::cout << "logit: n=" << analysis.fit.n << " converged=" << (analysis.fit.converged ? "true" : "false")
            << " intercept=" << analysis.fit.intercept << " slope=" << analysis.fit.slope << "\n";
  if (!analysis.fit.diagnostic.empty()) std::cerr << "logit: " << analysis.fit.diagnostic << "\n";
  return 0;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return 2;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded visual memory for multi-party dialogue"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--mode", g.mode, "backend mode")->check(CLI::IsMember({"live", "mock"}));
  app.add_option("--seed", g.seed, "sampling seed");
  app.add_option("--condition", g.condition, "memory condition")
      ->check(CLI::IsMember({"image", "text", "both", "full-dialog"}));
  app.add_option("--jobs", g.jobs, "concurrent dialogues")->check(CLI::PositiveNumber);

  BuildArgs build;
  auto* b = app.add_subcommand("build", "build memory banks from transcripts");
  b->add_option("--transcripts", build.transcripts, "transcripts JSONL")->required()->check(CLI::ExistingFile);
  b->add_option("--out", build.out, "output directory for banks")->required();

  QueryArgs query;
  auto* q = app.add_subcommand("query", "answer one question against a bank");
  q->add_option("--question", query.question, "question text")->required();
  q->add_option("--asker", query.asker, "asking speaker")->required()->check(CLI::IsMember({"A", "B"}));
  q->add_option("--trace", query.trace, "write the execution trace JSON here");
  q->add_option("--bank", query.bank, "bank directory, or a build --out directory")->check(CLI::ExistingDirectory);
  q->add_option("--dialogue", query.dialogue, "dialogue id when the directory holds several banks");
  q->add_option("--transcripts", query.transcripts, "transcripts JSONL (full-dialog)")->check(CLI::ExistingFile);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "run the benchmark");
  e->add_option("--transcripts", eval.transcripts, "transcripts JSONL")->required()->check(CLI::ExistingFile);
  e->add_option("--qa", eval.qa, "QA JSONL")->required()->check(CLI::ExistingFile);
  e->add_option("--out", eval.out, "output directory")->capture_default_str();

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "re-aggregate an eval directory and fit the faithfulness logit");
  an->add_option("--traces", analyze.traces, "eval output directory")->required()->check(CLI::ExistingDirectory);
  an->add_option("--out", analyze.out, "analysis output directory (default <traces>/analysis)");

  // Global flags are accepted after the subcommand as well.
  for (auto* sub : {b, q, e, an}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (b->parsed()) return cmd_build(g, build);
    if (q->parsed()) return cmd_query(g, query);
    if (e->parsed()) return cmd_eval(g, eval);
    return cmd_analyze(g, analyze);
  } catch (const Error& err) {
    std::cerr << "error: " << describe(err) << "\n";
    return exit_code_for(err.code());
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
