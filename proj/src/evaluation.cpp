#include "groundmem/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <map>
#include <thread>

#include "groundmem/error.hpp"
#include "groundmem/parsers.hpp"
#include "groundmem/persistence.hpp"
#include "groundmem/prompts.hpp"
#include "groundmem/text.hpp"

namespace groundmem {

namespace fs = std::filesystem;

namespace {

constexpr const char* kAbsent = "—";

std::vector<std::pair<int, Json>> json_lines(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorCode::IoError, "no such file: " + path.string());
  std::vector<std::pair<int, Json>> out;
  int n = 0;
  for (const auto& line : text::split(read_file(path), '\n')) {
    ++n;
    if (text::trim(line).empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (!j.is_object()) fail(ErrorCode::FormatError, path.string() + " line " + std::to_string(n) + ": not a JSON object");
    out.emplace_back(n, std::move(j));
  }
  return out;
}

std::string where(const fs::path& p, int line) { return p.string() + " line " + std::to_string(line) + ": "; }

std::string fixed(double x, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::size_t display_width(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string pad(std::string s, std::size_t width) {
  const auto w = display_width(s);
  if (w < width) s.append(width - w, ' ');
  return s;
}

std::string cell_text(const Cell& c) {
  const auto a = c.accuracy();
  return a ? fixed(*a, 2) : std::string(kAbsent);
}

std::size_t relation_index(RelationType r) { return static_cast<std::size_t>(r); }
std::size_t scope_index(Complexity c) { return c == Complexity::Local ? 0 : 1; }

std::string render_rows(const std::string& head, const std::vector<std::pair<std::string, std::array<Cell, 5>>>& rows) {
  std::vector<std::string> header = {head};
  for (auto r : kRelationTypes) header.emplace_back(to_string(r));
  header.emplace_back("Overall");
  std::vector<std::vector<std::string>> table = {header};
  for (const auto& [label, cells] : rows) {
    std::vector<std::string> row = {label};
    for (const auto& c : cells) row.push_back(cell_text(c));
    table.push_back(std::move(row));
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], display_width(row[i]));
  }
  std::string out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    std::string line;
    for (std::size_t i = 0; i < table[r].size(); ++i) {
      line += i + 1 == table[r].size() ? table[r][i] : pad(table[r][i], widths[i] + 2);
    }
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w + 2;
      out += std::string(total - 2, '-') + "\n";
    }
  }
  return out;
}

std::optional<double> mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::optional<double> frame_mean_phi(const MemoryBank& bank, const FrameId& f) {
  std::vector<double> xs;
  for (const auto& v : bank.entry(f).versions) {
    if (v.version->phi) xs.push_back(*v.version->phi);
  }
  return mean(xs);
}

// Mean phi of the frame sequences cited as evidence; the whole dialogue when none are.
std::optional<double> item_phi(const MemoryBank& bank, const ExecutionTrace& trace) {
  std::vector<double> xs;
  for (const auto& id : trace.evidence_frames) {
    if (auto m = frame_mean_phi(bank, parse_frame_id(id))) xs.push_back(*m);
  }
  if (xs.empty()) {
    for (const auto& [f, e] : bank.entries()) {
      if (auto m = frame_mean_phi(bank, f)) xs.push_back(*m);
    }
  }
  return mean(xs);
}

struct DialogueRun {
  std::vector<ItemResult> items;
  std::vector<std::string> diagnostics;
};

DialogueRun run_dialogue(const Dialogue* dialogue, const std::vector<std::pair<std::size_t, const QAItem*>>& qa,
                         const BenchmarkConfig& config, Gateway& gateway) {
  DialogueRun out;
  std::optional<BuildResult> built;
  std::string build_error;
  if (!dialogue) {
    build_error = "unknown dialogue";
  } else if (!config.run.full_dialog) {
    try {
      built = build_memory(*dialogue, config.build, gateway);
      for (const auto& t : built->turns) {
        for (const auto& d : t.diagnostics) out.diagnostics.push_back(dialogue->id + ": " + d);
      }
    } catch (const Error& e) {
      build_error = e.tag() + ": " + e.what();
      out.diagnostics.push_back((dialogue ? dialogue->id : std::string()) + ": build failed (" + build_error + ")");
    }
  }
  for (const auto& [index, item] : qa) {
    ItemResult r;
    r.qa_index = index;
    r.item = *item;
    try {
      if (!build_error.empty()) fail(ErrorCode::StepFailed, build_error);
      ExecutionTrace trace = config.run.full_dialog
                                 ? answer_from_transcript(item->question, item->questioner, *dialogue, gateway)
                                 : answer_question(item->question, item->questioner, built->bank, config.reasoner, gateway);
      r.answer = trace.answer;
      if (built) r.mean_phi = item_phi(built->bank, trace);
      r.trace = std::move(trace);
      r.verdict = judge(r.answer, item->gold_answer, item->question, gateway);
    } catch (const Error& e) {
      r.error = e.tag() + ": " + e.what();
      r.verdict = {Verdict::Different, "not judged: " + r.error};
    }
    try {
      r.annotation = annotate(*item, gateway);
    } catch (const Error& e) {
      out.diagnostics.push_back(item->dialogue_id + " #" + std::to_string(index) + ": annotation failed (" + e.tag() + ")");
    }
    out.items.push_back(std::move(r));
  }
  return out;
}

Json annotation_json(const Annotation& a) {
  return {{"complexity_type", std::string(to_string(a.complexity))},
          {"question_type", std::string(to_string(a.question_kind))},
          {"constraint_type", std::string(to_string(a.constraint))},
          {"validity_type", std::string(to_string(a.validity))}};
}

}  // namespace

// Loading ---------------------------------------------------------------------------

std::vector<Dialogue> load_transcripts(const fs::path& path) {
  std::vector<Dialogue> out;
  for (const auto& [line, j] : json_lines(path)) {
    try {
      Dialogue d;
      d.id = j.at("dialogue_id").get<std::string>();
      for (const auto& t : j.at("turns")) {
        Utterance u;
        u.turn = t.at("turn").get<int>();
        const auto sp = parse_speaker(t.at("speaker").get<std::string>());
        if (!sp) fail(ErrorCode::FormatError, "speaker must be A or B");
        u.speaker = *sp;
        u.text = t.at("text").get<std::string>();
        d.turns.push_back(std::move(u));
      }
      validate_dialogue(d);
      out.push_back(std::move(d));
    } catch (const Json::exception& e) {
      fail(ErrorCode::FormatError, where(path, line) + e.what());
    } catch (const Error& e) {
      fail(e.code(), where(path, line) + e.what());
    }
  }
  return out;
}

std::vector<QAItem> load_qa(const fs::path& path) {
  std::vector<QAItem> out;
  for (const auto& [line, j] : json_lines(path)) {
    try {
      QAItem q;
      q.dialogue_id = j.at("dialogue_id").get<std::string>();
      q.question = j.at("question").get<std::string>();
      q.gold_answer = j.at("gold_answer").get<std::string>();
      q.relation_type = parse_relation_type(j.at("relation_type").get<std::string>());
      const auto sp = parse_speaker(j.at("questioner").get<std::string>());
      if (!sp) fail(ErrorCode::FormatError, "questioner must be A or B");
      q.questioner = *sp;
      if (text::trim(q.question).empty()) fail(ErrorCode::FormatError, "empty question");
      out.push_back(std::move(q));
    } catch (const Json::exception& e) {
      fail(ErrorCode::FormatError, where(path, line) + e.what());
    } catch (const Error& e) {
      fail(e.code(), where(path, line) + e.what());
    }
  }
  return out;
}

JudgeVerdict judge(const std::string& answer, const std::string& gold, const std::string& question, Gateway& gateway) {
  return parse_judge_output(gateway.chat(prompts::judge(question, extract_answer_text(answer), gold)));
}

Annotation annotate(const QAItem& item, Gateway& gateway) {
  return parse_annotator_output(gateway.chat(prompts::annotator(item.question, item.gold_answer)));
}

std::optional<RunCondition> parse_run_condition(std::string_view text) {
  const auto l = text::lower(text::trim(text));
  if (l == "full-dialog" || l == "full_dialog" || l == "fd") return RunCondition{true, Condition::Visual};
  if (auto c = parse_condition(l)) return RunCondition{false, *c};
  return std::nullopt;
}

std::string to_string(const RunCondition& c) {
  if (c.full_dialog) return "full-dialog";
  switch (c.condition) {
    case Condition::Visual: return "image";
    case Condition::Textual: return "text";
    case Condition::Both: return "both";
  }
  return "image";
}

std::string framework_label(const RunCondition& c) {
  if (c.full_dialog) return "FD";
  switch (c.condition) {
    case Condition::Visual: return "Agentic-Image";
    case Condition::Textual: return "Agentic-Text";
    case Condition::Both: return "Agentic-Both";
  }
  return "Agentic-Image";
}

// Aggregation -----------------------------------------------------------------------

std::optional<double> Cell::accuracy() const {
  if (n == 0) return std::nullopt;
  return static_cast<double>(same) / static_cast<double>(n);
}

Report aggregate(const std::vector<ItemResult>& results, const std::string& label) {
  Report r;
  r.label = label;
  for (const auto& x : results) {
    const int s = x.verdict.verdict == Verdict::Same ? 1 : 0;
    const auto ri = relation_index(x.item.relation_type);
    const auto si = scope_index(x.annotation.complexity);
    for (Cell* c : {&r.overall, &r.by_relation[ri], &r.by_scope[si], &r.by_relation_scope[ri][si]}) {
      c->n += 1;
      c->same += s;
    }
  }
  return r;
}

std::string render_table(const std::vector<Report>& reports) {
  std::vector<std::pair<std::string, std::array<Cell, 5>>> rows;
  for (const auto& r : reports) {
    rows.push_back({r.label, {r.by_relation[0], r.by_relation[1], r.by_relation[2], r.by_relation[3], r.overall}});
  }
  return render_rows("Framework", rows);
}

std::string render_scope_table(const Report& r) {
  std::vector<std::pair<std::string, std::array<Cell, 5>>> rows;
  const char* names[] = {"Local", "Relational"};
  for (std::size_t s = 0; s < 2; ++s) {
    rows.push_back({names[s],
                    {r.by_relation_scope[0][s], r.by_relation_scope[1][s], r.by_relation_scope[2][s],
                     r.by_relation_scope[3][s], r.by_scope[s]}});
  }
  return render_rows("Reasoning scope", rows);
}

std::string render_csv(const Report& r) {
  std::string out = "framework,relation_type,scope,n,same,accuracy\n";
  auto row = [&](const std::string& rel, const std::string& scope, const Cell& c) {
    const auto a = c.accuracy();
    out += r.label + "," + rel + "," + scope + "," + std::to_string(c.n) + "," + std::to_string(c.same) + "," +
           (a ? fixed(*a, 6) : std::string()) + "\n";
  };
  const char* scopes[] = {"local", "relational"};
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string rel(to_string(kRelationTypes[i]));
    row(rel, "all", r.by_relation[i]);
    for (std::size_t s = 0; s < 2; ++s) row(rel, scopes[s], r.by_relation_scope[i][s]);
  }
  for (std::size_t s = 0; s < 2; ++s) row("all", scopes[s], r.by_scope[s]);
  row("all", "all", r.overall);
  return out;
}

// Benchmark -------------------------------------------------------------------------

BenchmarkResult run_benchmark(const std::vector<Dialogue>& dialogues, const std::vector<QAItem>& qa,
                              const BenchmarkConfig& config, Gateway& gateway) {
  // Group QA by dialogue, keeping first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<std::size_t, const QAItem*>>> grouped;
  for (const auto& q : qa) {
    auto& g = grouped[q.dialogue_id];
    if (g.empty()) order.push_back(q.dialogue_id);
    g.emplace_back(g.size(), &q);
  }
  std::vector<DialogueRun> runs(order.size());
  auto work = [&](std::size_t i) {
    const auto it = std::find_if(dialogues.begin(), dialogues.end(), [&](const Dialogue& d) { return d.id == order[i]; });
    runs[i] = run_dialogue(it == dialogues.end() ? nullptr : &*it, grouped[order[i]], config, gateway);
  };
  const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(config.jobs, 1)), 1, std::max<std::size_t>(order.size(), 1));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < order.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < order.size(); i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  BenchmarkResult out;
  for (auto& run : runs) {
    for (auto& d : run.diagnostics) out.diagnostics.push_back(std::move(d));
    for (auto& item : run.items) {
      if (item.mean_phi) out.logit_pairs.emplace_back(*item.mean_phi, item.verdict.verdict == Verdict::Same);
      out.items.push_back(std::move(item));
    }
  }
  out.report = aggregate(out.items, framework_label(config.run));
  return out;
}

// Output ------------------------------------------------------------------------------

Json item_to_json(const ItemResult& r, const std::string& condition) {
  Json j = {{"condition", condition},
            {"dialogue_id", r.item.dialogue_id},
            {"qa_index", r.qa_index},
            {"question", r.item.question},
            {"gold_answer", r.item.gold_answer},
            {"relation_type", std::string(to_string(r.item.relation_type))},
            {"questioner", std::string(1, speaker_label(r.item.questioner))},
            {"answer", r.answer},
            {"verdict", std::string(to_string(r.verdict.verdict))},
            {"judge_reasoning", r.verdict.reasoning},
            {"annotation", annotation_json(r.annotation)},
            {"mean_phi", r.mean_phi ? Json(*r.mean_phi) : Json(nullptr)},
            {"error", r.error},
            {"trace", r.trace ? trace_to_json(*r.trace) : Json(nullptr)}};
  return j;
}

ItemResult item_from_json(const Json& j) {
  try {
    ItemResult r;
    r.qa_index = j.at("qa_index").get<std::size_t>();
    r.item.dialogue_id = j.at("dialogue_id").get<std::string>();
    r.item.question = j.at("question").get<std::string>();
    r.item.gold_answer = j.at("gold_answer").get<std::string>();
    r.item.relation_type = parse_relation_type(j.at("relation_type").get<std::string>());
    const auto sp = parse_speaker(j.at("questioner").get<std::string>());
    if (!sp) fail(ErrorCode::FormatError, "bad questioner");
    r.item.questioner = *sp;
    r.answer = j.at("answer").get<std::string>();
    r.verdict.verdict = j.at("verdict").get<std::string>() == "SAME" ? Verdict::Same : Verdict::Different;
    r.verdict.reasoning = j.at("judge_reasoning").get<std::string>();
    r.annotation = parse_annotator_output(j.at("annotation").dump());
    if (!j.at("mean_phi").is_null()) r.mean_phi = j["mean_phi"].get<double>();
    r.error = j.at("error").get<std::string>();
    if (!j.at("trace").is_null()) r.trace = trace_from_json(j["trace"]);
    return r;
  } catch (const Json::exception& e) {
    fail(ErrorCode::FormatError, std::string("item record: ") + e.what());
  }
}

Json logit_to_json(const LogitFit& fit) {
  return {{"n", fit.n},
          {"intercept", fit.intercept},
          {"slope", fit.slope},
          {"converged", fit.converged},
          {"iterations", fit.iterations},
          {"log_likelihood", fit.log_likelihood},
          {"diagnostic", fit.diagnostic}};
}

void write_benchmark(const BenchmarkResult& result, const RunCondition& condition, const fs::path& out) {
  const std::string cond = to_string(condition);
  for (const auto& item : result.items) {
    write_file_atomic(out / "traces" / item.item.dialogue_id / (std::to_string(item.qa_index) + ".json"),
                      item_to_json(item, cond).dump(2) + "\n");
  }
  write_file_atomic(out / "report.txt", render_table({result.report}) + "\n" + render_scope_table(result.report));
  write_file_atomic(out / "report.csv", render_csv(result.report));
  write_file_atomic(out / "logit.json", logit_to_json(fit_faithfulness_logit(result.logit_pairs)).dump(2) + "\n");
}

Analysis analyze_traces(const fs::path& eval_dir) {
  const fs::path traces = eval_dir / "traces";
  if (!fs::is_directory(traces)) fail(ErrorCode::IoError, "no traces directory under " + eval_dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(traces)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::vector<std::pair<std::pair<std::string, std::size_t>, ItemResult>> keyed;
  std::string condition = "image";
  for (const auto& f : files) {
    const Json j = Json::parse(read_file(f), nullptr, false);
    if (!j.is_object()) fail(ErrorCode::FormatError, f.string() + ": not a JSON object");
    if (j.contains("condition") && j["condition"].is_string()) condition = j["condition"].get<std::string>();
    auto item = item_from_json(j);
    keyed.push_back({{item.item.dialogue_id, item.qa_index}, std::move(item)});
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ItemResult> items;
  LogitData pairs;
  for (auto& [k, item] : keyed) {
    if (item.mean_phi) pairs.emplace_back(*item.mean_phi, item.verdict.verdict == Verdict::Same);
    items.push_back(std::move(item));
  }
  const auto run = parse_run_condition(condition);
  Analysis a;
  a.report = aggregate(items, framework_label(run.value_or(RunCondition{})));
  a.fit = fit_faithfulness_logit(pairs);
  return a;
}

void write_analysis(const Analysis& a, const fs::path& out) {
  write_file_atomic(out / "report.txt", render_table({a.report}) + "\n" + render_scope_table(a.report));
  write_file_atomic(out / "scope.txt", render_scope_table(a.report));
  write_file_atomic(out / "logit.json", logit_to_json(a.fit).dump(2) + "\n");
}

}  // namespace groundmem
