#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "groundmem/core.hpp"

namespace groundmem {

// Parsers for every structured reply the pipeline requests. All of them are
// total: they return a value or throw groundmem::Error, never anything else.

/// `{"frame_meta", "relation", "imagery", "action"}`; "Label: info" in
/// frame_meta splits into frame_meta (label) and metadata (info).
ObserverDecision parse_observer_output(std::string_view raw);

/// `<answer><item>POV B</item><item>RAG[k=5] ...</item>...</answer>`.
/// Validity of the plan is checked separately by validate_plan.
Plan parse_planner_output(std::string_view raw);

struct TripletCandidate {
  std::string subject;
  std::string predicate;
  std::string object;
  bool operator==(const TripletCandidate&) const = default;
};

/// `{"triplets": [{"subject", "predicate", "object"}...]}`.
std::vector<TripletCandidate> parse_linker_output(std::string_view raw);

/// `[{"fact", "box": [ymin, xmin, ymax, xmax] | null, "verdict": bool}...]`,
/// matched positionally against the submitted facts.
std::vector<FactVerdict> parse_fact_checker_output(std::string_view raw, const std::vector<AtomicFact>& facts);

/// `<reasoning>...</reasoning><answer>SAME|DIFFERENT</answer>`; `<think>` is
/// accepted in place of `<reasoning>`.
JudgeVerdict parse_judge_output(std::string_view raw);

/// `{"complexity_type", "question_type", "constraint_type", "validity_type"}`.
Annotation parse_annotator_output(std::string_view raw);

/// `{"facts": ["...", ...]}`.
std::vector<std::string> parse_fact_list(std::string_view raw);

/// `{"scene": "..."}` from the constructor and summarizer roles.
std::string parse_scene_output(std::string_view raw);

/// Last non-empty `<answer>` span, or the whole trimmed text when untagged.
std::string extract_answer_text(std::string_view raw);

/// All `<tag>...</tag>` inner spans, in order (untrimmed).
std::vector<std::string_view> tag_spans(std::string_view raw, std::string_view tag);

}  // namespace groundmem
