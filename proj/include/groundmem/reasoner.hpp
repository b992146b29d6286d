#pragma once

#include <optional>
#include <string>
#include <vector>

#include "groundmem/core.hpp"
#include "groundmem/gateway.hpp"
#include "groundmem/json_extract.hpp"
#include "groundmem/memory.hpp"

namespace groundmem {

struct ReasonerConfig {
  Condition condition = Condition::Visual;
  double lambda = 0.7;
  bool union_fusion = false;
  int max_steps = 12;
  std::string abstain = "not specified";
  /// Re-ask once when "do you remember ..." gets a bare "yes".
  bool indirect_request_rule = true;
};

struct HitRecord {
  std::string version;  // "B_3_seq2"
  double score = 0.0;
  Channel channel = Channel::Visual;
};

struct StepRecord {
  std::size_t index = 0;
  PlanStep planned;
  PlanStep step;  // after refinement
  std::string pov;  // POV in force when the step ran
  std::vector<HitRecord> hits;
  std::string request;  // user message sent to the model, when one was sent
  std::vector<std::string> attachments;  // version ids attached to the request
  std::string output;
  std::string note;
};

struct ExecutionTrace {
  std::string question;
  char asker = 'A';
  Plan plan;
  std::vector<StepRecord> steps;
  int retrieve_calls = 0;
  std::string raw_answer;
  bool reprompted = false;
  std::string answer;
  std::vector<std::string> evidence_frames;  // version ids, in evidence order
  std::vector<std::string> diagnostics;
};

Json trace_to_json(const ExecutionTrace& t);
ExecutionTrace trace_from_json(const Json& j);

/// Planner call, validated; one retry with the violations as feedback.
/// Throws PlanInvalid.
Plan make_plan(const std::string& question, Speaker asker, Gateway& gateway, int max_steps = 12);

/// Best effort: the original step comes back when the refiner fails.
PlanStep refine_instruction(const PlanStep& step, const std::string& question, Gateway& gateway);

/// Runs a plan against the bank. Errors inside a step surface as StepFailed.
ExecutionTrace execute_plan(const Plan& plan, const MemoryBank& bank, const std::string& question, Speaker asker,
                            const ReasonerConfig& config, Gateway& gateway);

/// make_plan, refine every step, execute_plan.
ExecutionTrace answer_question(const std::string& question, Speaker asker, const MemoryBank& bank,
                               const ReasonerConfig& config, Gateway& gateway);

/// Baseline without a memory bank: the whole transcript goes to the answerer.
ExecutionTrace answer_from_transcript(const std::string& question, Speaker asker, const Dialogue& dialogue,
                                      Gateway& gateway);

/// True for "do you remember ..." / "do you recall ..." style questions.
bool is_indirect_request(const std::string& question);
/// True when the answer is only an affirmation ("yes", "Yes, I do.").
bool is_bare_affirmation(const std::string& answer);

}  // namespace groundmem
