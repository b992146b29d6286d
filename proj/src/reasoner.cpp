#include "groundmem/reasoner.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "groundmem/error.hpp"
#include "groundmem/observer.hpp"
#include "groundmem/parsers.hpp"
#include "groundmem/prompts.hpp"
#include "groundmem/text.hpp"

namespace groundmem {

namespace {

std::string fixed6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

Command parse_command(const std::string& s) {
  if (s == "POV") return Command::Pov;
  if (s == "RAG") return Command::Rag;
  if (s == "PROCESS") return Command::Process;
  if (s == "FINAL_ANSWER") return Command::FinalAnswer;
  fail(ErrorCode::UnknownCommand, "unknown command '" + s + "'");
}

Json step_json(const PlanStep& s) {
  Json j = {{"command", std::string(to_string(s.command))}, {"instruction", s.instruction}};
  if (s.retrieval_count) j["retrieval_count"] = *s.retrieval_count;
  return j;
}

PlanStep step_from(const Json& j) {
  PlanStep s;
  s.command = parse_command(j.at("command").get<std::string>());
  s.instruction = j.at("instruction").get<std::string>();
  if (j.contains("retrieval_count")) s.retrieval_count = j["retrieval_count"].get<int>();
  return s;
}

std::string violations_text(const std::vector<PlanViolation>& vs) {
  std::vector<std::string> lines;
  for (const auto& v : vs) lines.push_back("step " + std::to_string(v.step) + ": " + v.rule);
  return text::join(lines, "\n");
}

// Evidence as the processor and answerer read it.
struct RenderedEvidence {
  std::string text;
  std::vector<std::shared_ptr<const Canvas>> attachments;
  std::vector<std::string> attachment_ids;
};

RenderedEvidence render_evidence(const std::vector<EvidenceItem>& items, Condition condition) {
  RenderedEvidence out;
  std::vector<std::string> blocks;
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto& it = items[k];
    const auto& v = *it.hit.version;
    const std::string id = to_string(v.frame_id);
    std::string b = "Artifact " + std::to_string(k + 1) + ": " + id + " (score " + fixed6(it.hit.score) + ", " +
                    std::string(to_string(it.hit.channel)) + ")\n";
    if (!text::trim(it.metadata).empty()) b += "Metadata: " + text::join(text::split(it.metadata, '\n'), "; ") + "\n";
    if (v.canvas && has_visual(condition)) {
      out.attachments.push_back(std::shared_ptr<const Canvas>(it.hit.version, &*v.canvas));
      out.attachment_ids.push_back(id);
      b += "Image: attachment " + std::to_string(out.attachments.size()) + "\n";
    }
    if (v.summary && has_textual(condition)) b += "Summary: " + text::replace_all(*v.summary, "\n", " ") + "\n";
    if (!it.triplets.empty()) {
      std::vector<std::string> rel;
      for (const auto& t : it.triplets) rel.push_back(to_string(t.subject) + " " + t.predicate + " " + to_string(t.object));
      b += "Relations: " + text::join(rel, "; ") + "\n";
    }
    blocks.push_back(std::move(b));
  }
  out.text = text::join(blocks, "\n");
  return out;
}

}  // namespace

bool is_indirect_request(const std::string& question) {
  const auto ws = text::words(question);
  if (ws.size() < 3) return false;
  const bool opener = (ws[0] == "do" || ws[0] == "can" || ws[0] == "could" || ws[0] == "did") && ws[1] == "you";
  return opener && (ws[2] == "remember" || ws[2] == "recall");
}

bool is_bare_affirmation(const std::string& answer) {
  static const std::set<std::string, std::less<>> kAffirm = {"yes", "yeah", "yep", "yup", "sure", "indeed", "correct"};
  static const std::set<std::string, std::less<>> kFiller = {"i", "do", "did", "remember", "recall", "it", "of",
                                                             "course", "that", "i'm", "am", "so", "absolutely"};
  const auto ws = text::words(answer);
  bool affirmed = false;
  for (const auto& w : ws) {
    if (kAffirm.contains(w)) affirmed = true;
    else if (!kFiller.contains(w)) return false;
  }
  return affirmed;
}

Plan make_plan(const std::string& question, Speaker asker, Gateway& gateway, int max_steps) {
  if (text::trim(question).empty()) fail(ErrorCode::PreconditionViolation, "empty question");
  std::string feedback;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string raw = gateway.chat(prompts::planner(question, speaker_label(asker), feedback));
    std::vector<PlanViolation> violations;
    Plan plan;
    try {
      plan = parse_planner_output(raw);
      violations = validate_plan(plan);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnparsableOutput && e.code() != ErrorCode::UnknownCommand &&
          e.code() != ErrorCode::MalformedRagCount)
        throw;
      violations.push_back({0, std::string("unparsable plan: ") + e.what()});
    }
    if (plan.steps.size() > static_cast<std::size_t>(max_steps))
      violations.push_back({plan.steps.size() - 1, "plan longer than " + std::to_string(max_steps) + " steps"});
    if (violations.empty()) return plan;
    feedback = "Your previous plan was rejected:\n" + violations_text(violations);
  }
  fail(ErrorCode::PlanInvalid, feedback);
}

PlanStep refine_instruction(const PlanStep& step, const std::string& question, Gateway& gateway) {
  try {
    const std::string rewritten = extract_answer_text(gateway.chat(prompts::refiner(question, step)));
    if (text::trim(rewritten).empty()) return step;
    PlanStep out = step;
    out.instruction = text::trimmed(rewritten);
    if (out.command == Command::Pov && !resolve_pov(out.instruction)) return step;
    return out;
  } catch (const Error&) {
    return step;
  }
}

ExecutionTrace execute_plan(const Plan& plan, const MemoryBank& bank, const std::string& question, Speaker asker,
                            const ReasonerConfig& config, Gateway& gateway) {
  if (const auto v = validate_plan(plan); !v.empty()) fail(ErrorCode::PlanInvalid, violations_text(v));
  ExecutionTrace trace;
  trace.question = question;
  trace.asker = speaker_label(asker);
  trace.plan = plan;

  Pov pov = Pov::Both;
  std::vector<EvidenceItem> evidence;
  std::vector<std::string> scratch;
  bool empty_bank = false;
  const RetrievalOptions options{config.lambda, config.condition, config.union_fusion};

  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const PlanStep& step = plan.steps[i];
    StepRecord rec;
    rec.index = i;
    rec.planned = step;
    rec.step = step;
    try {
      switch (step.command) {
        case Command::Pov: {
          const auto p = resolve_pov(step.instruction);
          if (!p) fail(ErrorCode::PreconditionViolation, "POV '" + step.instruction + "' does not resolve");
          pov = *p;
          rec.note = "pov set";
          break;
        }
        case Command::Rag: {
          ++trace.retrieve_calls;
          try {
            const auto hits = retrieve(bank, step.instruction, step.retrieval_count.value_or(1), pov, options, gateway);
            for (const auto& item : assemble_evidence(bank, hits)) {
              rec.hits.push_back({to_string(item.hit.version->frame_id), item.hit.score, item.hit.channel});
              const bool seen = std::any_of(evidence.begin(), evidence.end(),
                                            [&](const EvidenceItem& e) { return e.hit.frame_id == item.hit.frame_id; });
              if (!seen) evidence.push_back(item);
            }
          } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyBank) throw;
            empty_bank = true;
            rec.note = e.tag() + ": " + e.what();
          }
          break;
        }
        case Command::Process: {
          const auto ev = render_evidence(evidence, config.condition);
          const auto req = prompts::processor(step.instruction, ev.text, text::join(scratch, "\n"), ev.attachments);
          rec.request = user_text(req);
          rec.attachments = ev.attachment_ids;
          rec.output = gateway.chat(req);
          scratch.push_back(rec.output);
          break;
        }
        case Command::FinalAnswer: {
          if (evidence.empty() && empty_bank) {
            trace.answer = config.abstain;
            rec.note = "no evidence; abstained";
            break;
          }
          const auto ev = render_evidence(evidence, config.condition);
          auto req = prompts::answerer(question, trace.asker, ev.text, text::join(scratch, "\n"), ev.attachments, false);
          rec.request = user_text(req);
          rec.attachments = ev.attachment_ids;
          rec.output = gateway.chat(req);
          trace.raw_answer = rec.output;
          trace.answer = text::trimmed(extract_answer_text(rec.output));
          if (config.indirect_request_rule && is_indirect_request(question) && is_bare_affirmation(trace.answer)) {
            req = prompts::answerer(question, trace.asker, ev.text, text::join(scratch, "\n"), ev.attachments, true);
            const std::string again = gateway.chat(req);
            trace.reprompted = true;
            rec.note = "bare affirmation; asked again for the content";
            rec.request = user_text(req);
            rec.output = again;
            trace.raw_answer = again;
            trace.answer = text::trimmed(extract_answer_text(again));
          }
          if (trace.answer.empty()) trace.answer = config.abstain;
          break;
        }
      }
    } catch (const Error& e) {
      fail(ErrorCode::StepFailed, "step " + std::to_string(i) + " (" + std::string(to_string(step.command)) +
                                      "): " + e.tag() + ": " + e.what());
    }
    rec.pov = std::string(to_string(pov));
    trace.steps.push_back(std::move(rec));
  }
  for (const auto& e : evidence) trace.evidence_frames.push_back(to_string(e.hit.version->frame_id));
  return trace;
}

ExecutionTrace answer_question(const std::string& question, Speaker asker, const MemoryBank& bank,
                               const ReasonerConfig& config, Gateway& gateway) {
  const Plan planned = make_plan(question, asker, gateway, config.max_steps);
  Plan refined;
  for (const auto& s : planned.steps) refined.steps.push_back(refine_instruction(s, question, gateway));
  auto trace = execute_plan(refined, bank, question, asker, config, gateway);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) trace.steps[i].planned = planned.steps[i];
  trace.plan = planned;
  return trace;
}

ExecutionTrace answer_from_transcript(const std::string& question, Speaker asker, const Dialogue& dialogue,
                                      Gateway& gateway) {
  if (text::trim(question).empty()) fail(ErrorCode::PreconditionViolation, "empty question");
  std::vector<std::string> lines;
  for (const auto& u : dialogue.turns) lines.push_back(context_line(u));
  ExecutionTrace trace;
  trace.question = question;
  trace.asker = speaker_label(asker);
  const PlanStep final_step{Command::FinalAnswer, question, std::nullopt};
  trace.plan.steps.push_back(final_step);
  StepRecord rec;
  rec.planned = rec.step = final_step;
  rec.pov = "BOTH";
  const auto req = prompts::answerer_transcript(question, trace.asker, text::join(lines, "\n"));
  rec.request = user_text(req);
  try {
    rec.output = gateway.chat(req);
  } catch (const Error& e) {
    fail(ErrorCode::StepFailed, std::string("step 0 (FINAL_ANSWER): ") + e.tag() + ": " + e.what());
  }
  trace.raw_answer = rec.output;
  trace.answer = text::trimmed(extract_answer_text(rec.output));
  if (trace.answer.empty()) trace.answer = "not specified";
  trace.steps.push_back(std::move(rec));
  return trace;
}

// Trace JSON ----------------------------------------------------------------------

Json trace_to_json(const ExecutionTrace& t) {
  Json plan = Json::array();
  for (const auto& s : t.plan.steps) plan.push_back(step_json(s));
  Json steps = Json::array();
  for (const auto& r : t.steps) {
    Json hits = Json::array();
    for (const auto& h : r.hits)
      hits.push_back({{"version", h.version}, {"score", h.score}, {"channel", std::string(to_string(h.channel))}});
    steps.push_back({{"index", r.index},
                     {"planned", step_json(r.planned)},
                     {"step", step_json(r.step)},
                     {"pov", r.pov},
                     {"hits", hits},
                     {"request", r.request},
                     {"attachments", r.attachments},
                     {"output", r.output},
                     {"note", r.note}});
  }
  return {{"question", t.question},
          {"asker", std::string(1, t.asker)},
          {"plan", plan},
          {"steps", steps},
          {"retrieve_calls", t.retrieve_calls},
          {"raw_answer", t.raw_answer},
          {"reprompted", t.reprompted},
          {"answer", t.answer},
          {"evidence_frames", t.evidence_frames},
          {"diagnostics", t.diagnostics}};
}

ExecutionTrace trace_from_json(const Json& j) {
  try {
    ExecutionTrace t;
    t.question = j.at("question").get<std::string>();
    const auto asker = j.at("asker").get<std::string>();
    t.asker = asker.empty() ? 'A' : asker[0];
    for (const auto& s : j.at("plan")) t.plan.steps.push_back(step_from(s));
    for (const auto& sj : j.at("steps")) {
      StepRecord r;
      r.index = sj.at("index").get<std::size_t>();
      r.planned = step_from(sj.at("planned"));
      r.step = step_from(sj.at("step"));
      r.pov = sj.at("pov").get<std::string>();
      for (const auto& h : sj.at("hits")) {
        r.hits.push_back({h.at("version").get<std::string>(), h.at("score").get<double>(),
                          h.at("channel").get<std::string>() == "visual" ? Channel::Visual : Channel::Textual});
      }
      r.request = sj.at("request").get<std::string>();
      r.attachments = sj.at("attachments").get<std::vector<std::string>>();
      r.output = sj.at("output").get<std::string>();
      r.note = sj.at("note").get<std::string>();
      t.steps.push_back(std::move(r));
    }
    t.retrieve_calls = j.at("retrieve_calls").get<int>();
    t.raw_answer = j.at("raw_answer").get<std::string>();
    t.reprompted = j.at("reprompted").get<bool>();
    t.answer = j.at("answer").get<std::string>();
    t.evidence_frames = j.at("evidence_frames").get<std::vector<std::string>>();
    t.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    return t;
  } catch (const Json::exception& e) {
    fail(ErrorCode::FormatError, std::string("trace: ") + e.what());
  }
}

}  // namespace groundmem
