#include "groundmem/constructor.hpp"

#include <algorithm>

#include "groundmem/error.hpp"
#include "groundmem/parsers.hpp"
#include "groundmem/prompts.hpp"
#include "groundmem/scene.hpp"
#include "groundmem/text.hpp"

namespace groundmem {

namespace {

void require_delta(const std::string& delta, const char* what) {
  if (text::trim(delta).empty()) fail(ErrorCode::PreconditionViolation, std::string(what) + " needs a scene descriptor");
}

int blue_requested(const std::string& prompt) {
  const auto parsed = scene::parse_prompt(prompt);
  int n = 0;
  for (const auto& op : parsed.ops) {
    if (op.kind != scene::PromptOp::Kind::Remove && op.entity.outline == Outline::Blue) ++n;
  }
  return n;
}

}  // namespace

std::vector<AtomicFact> decompose_facts(const std::string& delta, const std::vector<std::string>& prompt_history,
                                        const FrameId& source, Gateway& gateway) {
  require_delta(delta, "fact decomposition");
  std::vector<AtomicFact> out;
  for (auto& f : parse_fact_list(gateway.chat(prompts::fact_decomposer(delta, prompt_history)))) {
    out.push_back({std::move(f), source});
  }
  return out;
}

std::string build_creation_prompt(const std::string& delta, const std::string& frame_meta, Gateway& gateway,
                                  int max_assumed) {
  require_delta(delta, "creation prompt");
  std::string prompt = parse_scene_output(gateway.chat(prompts::constructor_creation(delta, frame_meta)));
  if (const int n = scene::count_outline(prompt, Outline::Blue); n > max_assumed)
    fail(ErrorCode::AssumptionBudgetExceeded,
         std::to_string(n) + " assumed entities requested, at most " + std::to_string(max_assumed) + " allowed");
  return prompt;
}

std::string build_edit_prompt(const std::string& delta, const std::vector<std::string>& prompt_history,
                              std::shared_ptr<const Canvas> base, Gateway& gateway, int max_assumed) {
  require_delta(delta, "edit prompt");
  if (prompt_history.empty()) fail(ErrorCode::PreconditionViolation, "edit prompt needs a prompt history");
  std::string prompt = parse_scene_output(gateway.chat(prompts::constructor_edit(delta, prompt_history, std::move(base))));
  if (const int n = blue_requested(prompt); n > max_assumed)
    fail(ErrorCode::AssumptionBudgetExceeded,
         std::to_string(n) + " assumed entities requested, at most " + std::to_string(max_assumed) + " allowed");
  return prompt;
}

CandidateSet generate_candidates(const std::string& prompt, std::shared_ptr<const Canvas> base, int j,
                                 const FrameId& target, Gateway& gateway) {
  if (j < 1) fail(ErrorCode::PreconditionViolation, "candidate count must be positive");
  CandidateSet out;
  std::string last_error;
  for (int i = 0; i < j; ++i) {
    try {
      out.canvases.push_back(gateway.edit_image({base, prompt, i, to_string(target)}));
    } catch (const Error& e) {
      last_error = e.tag() + ": " + e.what();
      out.diagnostics.push_back(to_string(target) + " candidate " + std::to_string(i) + " failed (" + last_error + ")");
    }
  }
  if (out.canvases.empty())
    fail(ErrorCode::CandidateGenerationFailed, "no candidate for " + to_string(target) + " (" + last_error + ")");
  return out;
}

FaithfulnessReport faithfulness(const std::shared_ptr<const Canvas>& candidate, int candidate_index,
                                const std::vector<AtomicFact>& facts, Gateway& gateway) {
  FaithfulnessReport report;
  report.candidate_index = candidate_index;
  if (!facts.empty()) {
    std::vector<std::string> texts;
    for (const auto& f : facts) texts.push_back(f.text);
    const std::string caption = gateway.chat(prompts::captioner(candidate));
    report.verdicts = parse_fact_checker_output(gateway.chat(prompts::fact_checker(texts, caption, candidate)), facts);
  }
  report.phi = faithfulness_ratio(report.verdicts);
  return report;
}

std::size_t select_artifact(const std::vector<FaithfulnessReport>& reports) {
  if (reports.empty()) fail(ErrorCode::PreconditionViolation, "nothing to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].phi > reports[best].phi) best = i;
  }
  return best;
}

std::string summarize_scene(const std::string& delta, const std::optional<std::string>& previous_summary,
                            const std::string& frame_meta, Gateway& gateway) {
  require_delta(delta, "summary");
  return parse_scene_output(gateway.chat(prompts::summarizer(delta, previous_summary, frame_meta)));
}

std::string accumulate_metadata(const std::string& previous, const ObserverDecision& decision) {
  std::vector<std::string> lines;
  for (auto& l : text::split(previous, '\n')) {
    if (!text::trim(l).empty()) lines.push_back(std::move(l));
  }
  for (const auto* add : {&decision.frame_meta, &decision.metadata}) {
    const auto t = text::trimmed(*add);
    if (!t.empty() && std::find(lines.begin(), lines.end(), t) == lines.end()) lines.push_back(t);
  }
  return text::join(lines, "\n");
}

ConstructResult construct(const ObserverDecision& decision, const FrameId& target, int turn,
                          const std::shared_ptr<const ArtifactVersion>& previous,
                          const std::vector<std::string>& prompt_history, Condition condition,
                          const ConstructorConfig& config, Gateway& gateway) {
  if (decision.action == EditAction::Skip) fail(ErrorCode::PreconditionViolation, "SKIP decisions build nothing");
  const std::string& delta = decision.scene_descriptor;
  ConstructResult out;
  ArtifactVersion& v = out.version;
  v.frame_id = target;
  v.created_at_turn = turn;
  v.metadata = accumulate_metadata(previous ? previous->metadata : std::string(), decision);
  v.prompt = delta;

  if (has_visual(condition)) {
    std::shared_ptr<const Canvas> base;
    if (previous && previous->canvas) base = std::shared_ptr<const Canvas>(previous, &*previous->canvas);
    const bool creation = !base;
    v.prompt = creation ? build_creation_prompt(delta, decision.frame_meta, gateway, config.max_assumed)
                        : build_edit_prompt(delta, prompt_history, base, gateway, config.max_assumed);
    out.facts = decompose_facts(delta, prompt_history, target.frame(), gateway);
    auto cands = generate_candidates(v.prompt, base, config.candidates, target, gateway);
    out.diagnostics = std::move(cands.diagnostics);
    std::vector<std::shared_ptr<const Canvas>> owned;
    for (std::size_t i = 0; i < cands.canvases.size(); ++i) {
      owned.push_back(std::make_shared<const Canvas>(std::move(cands.canvases[i])));
      out.reports.push_back(faithfulness(owned.back(), static_cast<int>(i), out.facts, gateway));
    }
    out.selected = select_artifact(out.reports);
    v.canvas = normalize_canvas(*owned[out.selected], config.palette, config.tolerance);
    v.phi = out.reports[out.selected].phi;
  }
  if (has_textual(condition)) {
    std::optional<std::string> prev_summary;
    if (previous) prev_summary = previous->summary;
    v.summary = summarize_scene(delta, prev_summary, decision.frame_meta, gateway);
  }
  return out;
}

}  // namespace groundmem
