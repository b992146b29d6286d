#include "groundmem/prompts.hpp"

#include "groundmem/json_extract.hpp"
#include "groundmem/text.hpp"

namespace groundmem::prompts {

namespace {

using text::tagged;

const char* const kObserver = R"(You watch a two-person dialogue in which each speaker explores a separate house.
For the newest utterance decide how the speaker's own scene memory should change.
Reply with one JSON object and nothing else:
{"frame_meta": "<short room label, optionally 'Label: extra info'>",
 "relation": "<movement or connection between rooms, copied from the utterance, else empty>",
 "imagery": "<only what could be drawn: room, objects, colors, positions>",
 "action": "[NEW] | [CONTINUE] | [SKIP]"}
Use [NEW] when the speaker arrives in a different room, [CONTINUE] when the utterance adds to,
removes from or corrects the current room, and [SKIP] for greetings, acknowledgements, plans,
negations and questions addressed to the partner. The context lists the utterances tied to the
current room; <scene_change> separates it from the previous room.)";

const char* const kConstructor = R"(You write instructions for an image editing model that keeps a schematic
picture of one room. Style: flat iconic shapes on a plain white background.
Every object is named with an outline color that states how sure we are about it:
black = stated by the speaker, red = stated but its place is unclear,
blue = not stated, only expected (at most three blue objects in a new scene).
Creation mode: start with "A clean, minimalist, iconic scene." then "In a <room>, <objects>."
then "Solid white background, no shadows."
Edit mode: one sentence per operation: "Add <object>.", "Remove <object>.",
"Replace <old> with <new>."; moving or resizing is "DELETE <object> $$$ ADD <object>.";
finish with "Keep the <every untouched object> unchanged."
Things that hang on a wall need a blue wall, and a wall needs a blue floor.
Reply with JSON: {"scene": "<instruction>"})";

const char* const kSummarizer = R"(You keep a short factual paragraph describing one room from a dialogue.
Write stated facts plainly ("There is a white fridge."), expectations as deductions
("A kitchen usually has a stove."), and vague input as "User believes there might be ...".
When a previous paragraph is given, rewrite it: add or refine with the new detail, overwrite
only what the new detail contradicts, and keep everything else.
Reply with JSON: {"scene": "<paragraph>"})";

const char* const kDecomposer = R"(Turn the drawing instructions and the newest description into single-claim facts
that a picture can be checked against, such as "There is a cat", "The cat is red",
"The cat is on a sofa". Ignore anything marked with a blue outline: those are guesses.
Reply with JSON: {"facts": ["...", ...]})";

const char* const kCaptioner = R"(Describe the attached schematic picture object by object. List black-outlined
objects first, then red, then blue, each with its colors and position.)";

const char* const kChecker = R"(Check each fact against the attached picture. Look for the evidence first, then
decide. Reply with a JSON array holding one entry per fact, in the given order:
[{"fact": "...", "box": [ymin, xmin, ymax, xmax] or null, "verdict": true|false}])";

const char* const kLinker = R"(Record how rooms connect. Use only the frame ids listed below; a slot marked None
cannot take part in a relation. Moving in a direction from X to Y means Y lies in that
direction of X ("north from X to Y" gives Y is_north_of X); "X next to Y" gives
Y is_next_to X. Predicates: is_north_of, is_south_of, is_east_of, is_west_of,
is_next_to, is_same_as, is_revisit_of. If nothing is stated, return an empty list.
Reply with JSON: {"triplets": [{"subject": "<id>", "predicate": "<p>", "object": "<id>"}]})";

const char* const kPlanner = R"(You answer questions about a finished dialogue by taking the role of the speaker
who did not ask. Before answering, plan. Commands, one per step:
POV A | POV B | POV BOTH   choose whose memories to search ("my" is the asker, "your" is you)
RAG[k=N] <search text>      fetch the N best matching memories
PROCESS <task>              reason over what was fetched so far
FINAL_ANSWER <task>         answer; exactly once, as the last step
Reply as <answer><item>step</item>...</answer>.)";

const char* const kRefiner = R"(Rewrite one plan step into a short, direct task. For a search step give only the
search words. Keep the command itself. Reply as <answer>rewritten text</answer>.)";

const char* const kProcessor = R"(Work through the retrieved memories for the given task. Different frame numbers are
different visits; _seq versions are later states of the same visit, the highest one is current.
Report what you found, briefly.)";

const char* const kAnswerer = R"(Answer the question from the retrieved memories (pictures, summaries, notes and room
links). Think inside <think></think>, then give only the answer inside <answer></answer>.
For a yes/no question answer "yes" or "no", never a frame id. If the memories do not
contain the answer, say "not specified".)";

const char* const kJudge = R"(Decide whether a response means the same as the reference answer to a question.
Synonyms and differences in wording or style still count as SAME. A negation of the
reference, or a different object or place, is DIFFERENT. Judge only the final answer.
Reply as <reasoning>...</reasoning><answer>SAME or DIFFERENT</answer>.)";

const char* const kAnnotator = R"(Label the question on four axes.
complexity_type: "local" if one room answers it, "relational" if it needs a map or a timeline
(directions, order of visits, comparisons between rooms).
question_type: "binary" for yes/no or true/false checks, else "open".
constraint_type: "list" if the question offers candidate answers, else "free".
validity_type: "missing" if the premise is false or the answer was never given, else "valid".
Reply with JSON: {"complexity_type": "...", "question_type": "...", "constraint_type": "...", "validity_type": "..."})";

std::string lines(const std::vector<std::string>& v) { return text::join(v, "\n"); }

}  // namespace

ChatRequest observer(const std::vector<std::string>& context, const std::string& active_frame, char speaker,
                     const std::string& utterance) {
  std::string user = tagged("context", lines(context)) + tagged("frame", active_frame) +
                     tagged("speaker", std::string(1, speaker)) + tagged("utterance", utterance);
  return make_request(Role::Observer, kObserver, std::move(user));
}

ChatRequest constructor_creation(const std::string& delta, const std::string& frame_meta) {
  std::string user = tagged("mode", "creation") + tagged("frame_meta", frame_meta) + tagged("descriptor", delta);
  return make_request(Role::Constructor, kConstructor, std::move(user));
}

ChatRequest constructor_edit(const std::string& delta, const std::vector<std::string>& history,
                             std::shared_ptr<const Canvas> base) {
  std::string user = tagged("mode", "edit") + tagged("history", lines(history)) + tagged("descriptor", delta);
  std::vector<std::shared_ptr<const Canvas>> att;
  if (base) att.push_back(std::move(base));
  return make_request(Role::Constructor, kConstructor, std::move(user), std::move(att));
}

ChatRequest summarizer(const std::string& delta, const std::optional<std::string>& previous,
                       const std::string& frame_meta) {
  std::string user = tagged("frame_meta", frame_meta);
  if (previous) user += tagged("previous", *previous);
  user += tagged("descriptor", delta);
  return make_request(Role::Summarizer, kSummarizer, std::move(user));
}

ChatRequest fact_decomposer(const std::string& delta, const std::vector<std::string>& history) {
  std::string user = tagged("history", lines(history)) + tagged("descriptor", delta);
  return make_request(Role::FactDecomposer, kDecomposer, std::move(user));
}

ChatRequest captioner(std::shared_ptr<const Canvas> canvas) {
  return make_request(Role::Captioner, kCaptioner, tagged("image", "attachment 1"), {std::move(canvas)});
}

ChatRequest fact_checker(const std::vector<std::string>& facts, const std::string& caption,
                         std::shared_ptr<const Canvas> canvas) {
  std::string user = tagged("facts", Json(facts).dump()) + tagged("caption", caption);
  return make_request(Role::FactChecker, kChecker, std::move(user), {std::move(canvas)});
}

ChatRequest linker(const std::string& directive, const std::vector<std::string>& context, const FrameSlots& slots,
                   const std::vector<std::string>& frame_meta_table) {
  std::string frames = "PREV_FRAME: " + slots.prev + "\nCURR_FRAME: " + slots.curr + "\nNEXT_FRAME: " + slots.next;
  std::string user = tagged("directive", directive) + tagged("context", lines(context)) + tagged("frames", frames) +
                     tagged("frame_meta", lines(frame_meta_table));
  return make_request(Role::Linker, kLinker, std::move(user));
}

ChatRequest planner(const std::string& question, char asker, const std::string& feedback) {
  std::string user = tagged("asker", std::string(1, asker)) + tagged("question", question);
  if (!feedback.empty()) user += tagged("feedback", feedback);
  return make_request(Role::Planner, kPlanner, std::move(user));
}

ChatRequest refiner(const std::string& question, const PlanStep& step) {
  std::string user = tagged("question", question) + tagged("command", to_string(step.command)) +
                     tagged("instruction", step.instruction);
  return make_request(Role::Refiner, kRefiner, std::move(user));
}

ChatRequest processor(const std::string& instruction, const std::string& evidence, const std::string& scratch,
                      std::vector<std::shared_ptr<const Canvas>> attachments) {
  std::string user = tagged("instruction", instruction) + tagged("evidence", evidence) + tagged("scratch", scratch);
  return make_request(Role::Processor, kProcessor, std::move(user), std::move(attachments));
}

ChatRequest answerer(const std::string& question, char asker, const std::string& evidence, const std::string& scratch,
                     std::vector<std::shared_ptr<const Canvas>> attachments, bool state_content) {
  std::string user = tagged("asker", std::string(1, asker)) + tagged("question", question) +
                     tagged("evidence", evidence) + tagged("scratch", scratch);
  if (state_content)
    user += tagged("reminder", "Do not reply with a bare yes. State what is remembered, e.g. the color itself.");
  return make_request(Role::Answerer, kAnswerer, std::move(user), std::move(attachments));
}

ChatRequest answerer_transcript(const std::string& question, char asker, const std::string& transcript) {
  std::string user = tagged("asker", std::string(1, asker)) + tagged("question", question) +
                     tagged("transcript", transcript);
  return make_request(Role::Answerer, kAnswerer, std::move(user));
}

ChatRequest judge(const std::string& question, const std::string& response, const std::string& gold) {
  std::string user = tagged("question", question) + tagged("response", response) + tagged("reference", gold);
  return make_request(Role::Judge, kJudge, std::move(user));
}

ChatRequest annotator(const std::string& question, const std::string& gold) {
  std::string user = tagged("question", question) + tagged("reference", gold);
  return make_request(Role::Annotator, kAnnotator, std::move(user));
}

}  // namespace groundmem::prompts
