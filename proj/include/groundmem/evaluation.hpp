#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "groundmem/core.hpp"
#include "groundmem/gateway.hpp"
#include "groundmem/logit.hpp"
#include "groundmem/phase1.hpp"
#include "groundmem/reasoner.hpp"

namespace groundmem {

/// JSON lines: {dialogue_id, turns: [{turn, speaker, text}]}. Throws FormatError.
std::vector<Dialogue> load_transcripts(const std::filesystem::path& path);
/// JSON lines: {dialogue_id, question, gold_answer, relation_type, questioner}.
/// Throws FormatError or UnknownRelationType.
std::vector<QAItem> load_qa(const std::filesystem::path& path);

JudgeVerdict judge(const std::string& answer, const std::string& gold, const std::string& question, Gateway& gateway);
Annotation annotate(const QAItem& item, Gateway& gateway);

/// image | text | both | full-dialog
struct RunCondition {
  bool full_dialog = false;
  Condition condition = Condition::Visual;
};
std::optional<RunCondition> parse_run_condition(std::string_view text);
std::string to_string(const RunCondition& c);  // the CLI spelling
std::string framework_label(const RunCondition& c);  // "Agentic-Image", "FD", ...

struct ItemResult {
  std::size_t qa_index = 0;  // position among the dialogue's QA items
  QAItem item;
  std::string answer;
  JudgeVerdict verdict;
  Annotation annotation;
  std::optional<double> mean_phi;
  std::string error;  // failed items count as DIFFERENT
  std::optional<ExecutionTrace> trace;
};

struct Cell {
  int n = 0;
  int same = 0;
  std::optional<double> accuracy() const;
};

struct Report {
  std::string label;
  Cell overall;
  std::array<Cell, 4> by_relation;                     // kRelationTypes order
  std::array<Cell, 2> by_scope;                        // local, relational
  std::array<std::array<Cell, 2>, 4> by_relation_scope;
};

Report aggregate(const std::vector<ItemResult>& results, const std::string& label);
/// Relation-type columns, one row per report; absent cells print as "—".
std::string render_table(const std::vector<Report>& reports);
/// Rows Local / Relational, relation-type columns.
std::string render_scope_table(const Report& report);
std::string render_csv(const Report& report);

struct BenchmarkConfig {
  RunCondition run;
  BuildOptions build;
  ReasonerConfig reasoner;
  int jobs = 1;
};

struct BenchmarkResult {
  Report report;
  std::vector<ItemResult> items;
  LogitData logit_pairs;
  std::vector<std::string> diagnostics;
};

BenchmarkResult run_benchmark(const std::vector<Dialogue>& dialogues, const std::vector<QAItem>& qa,
                              const BenchmarkConfig& config, Gateway& gateway);

Json item_to_json(const ItemResult& r, const std::string& condition);
ItemResult item_from_json(const Json& j);
Json logit_to_json(const LogitFit& fit);

/// report.txt, report.csv, traces/<dialogue_id>/<qa_index>.json, logit.json.
void write_benchmark(const BenchmarkResult& result, const RunCondition& condition, const std::filesystem::path& out);

struct Analysis {
  Report report;
  LogitFit fit;
};
/// Re-aggregates the item records of a finished eval directory.
Analysis analyze_traces(const std::filesystem::path& eval_dir);
/// report.txt, scope.txt, logit.json under `out`.
void write_analysis(const Analysis& a, const std::filesystem::path& out);

}  // namespace groundmem
