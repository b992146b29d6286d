#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace groundmem {

// ---------------------------------------------------------------------------
// Speakers and frame identifiers
// ---------------------------------------------------------------------------

enum class Speaker : std::uint8_t { A, B };

char speaker_label(Speaker s) noexcept;
Speaker other_speaker(Speaker s) noexcept;
/// Accepts exactly "A" or "B".
std::optional<Speaker> parse_speaker(std::string_view text) noexcept;

/// Identifies one artifact version: `<speaker>_<ordinal>` for the first
/// version of a frame, `<speaker>_<ordinal>_seq<n>` for later ones.
struct FrameId {
  Speaker speaker = Speaker::A;
  int ordinal = 1;
  int sequence = 1;

  /// The frame this version belongs to (sequence reset to 1).
  FrameId frame() const noexcept { return {speaker, ordinal, 1}; }
  FrameId with_sequence(int seq) const noexcept { return {speaker, ordinal, seq}; }

  auto operator<=>(const FrameId&) const = default;
};

std::string to_string(const FrameId& id);
/// Throws Error{MalformedFrameId}.
FrameId parse_frame_id(std::string_view text);

// ---------------------------------------------------------------------------
// Dialogue
// ---------------------------------------------------------------------------

struct Utterance {
  int turn = 0;
  Speaker speaker = Speaker::A;
  std::string text;
};

struct Dialogue {
  std::string id;
  std::vector<Utterance> turns;
};

/// Throws Error{FormatError} when turns are not strictly increasing or an
/// utterance is blank.
void validate_dialogue(const Dialogue& d);

// ---------------------------------------------------------------------------
// Observer output
// ---------------------------------------------------------------------------

enum class EditAction : std::uint8_t { New, Continue, Skip };

std::string_view to_string(EditAction a) noexcept;
/// Accepts NEW / CONTINUE / SKIP, bracketed or not, any case.
/// Throws Error{UnknownAction}.
EditAction parse_edit_action(std::string_view token);

struct ObserverDecision {
  EditAction action = EditAction::Skip;
  std::string scene_descriptor;  // depictable content; empty iff Skip
  std::string metadata;          // non-depictable info
  std::string frame_meta;        // short scene label
  std::optional<std::string> relation_hint;

  bool operator==(const ObserverDecision&) const = default;
};

// ---------------------------------------------------------------------------
// Canvas
// ---------------------------------------------------------------------------

/// Outline color encodes epistemic status: Black = confirmed and positioned,
/// Red = confirmed with unresolved position, Blue = assumed.
enum class Outline : std::uint8_t { Black, Red, Blue };

std::string_view to_string(Outline o) noexcept;
std::optional<Outline> parse_outline(std::string_view text) noexcept;

/// Pixel box in `[ymin, xmin, ymax, xmax]` order.
struct Box {
  int ymin = 0;
  int xmin = 0;
  int ymax = 0;
  int xmax = 0;
  auto operator<=>(const Box&) const = default;
};

struct CanvasObject {
  std::string name;
  Outline outline = Outline::Black;
  Box box;
  std::vector<std::string> attributes;

  bool operator==(const CanvasObject&) const = default;
};

struct Rgb {
  std::uint8_t r = 255;
  std::uint8_t g = 255;
  std::uint8_t b = 255;
  bool operator==(const Rgb&) const = default;
};

struct Canvas {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;  // row-major
  std::string scene;        // room label carried in the sidecar
  std::vector<CanvasObject> objects;

  static Canvas blank(int width, int height, Rgb fill = {});

  Rgb& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb& at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const Canvas&) const = default;
};

/// Throws Error{PreconditionViolation} on size mismatch or out-of-bounds boxes.
void validate_canvas(const Canvas& c);

// ---------------------------------------------------------------------------
// Artifacts and verification
// ---------------------------------------------------------------------------

enum class Condition : std::uint8_t { Visual, Textual, Both };

std::string_view to_string(Condition c) noexcept;
/// Accepts visual|image, textual|text, both.
std::optional<Condition> parse_condition(std::string_view text) noexcept;
inline bool has_visual(Condition c) noexcept { return c != Condition::Textual; }
inline bool has_textual(Condition c) noexcept { return c != Condition::Visual; }

struct ArtifactVersion {
  FrameId frame_id;
  std::optional<Canvas> canvas;
  std::optional<std::string> summary;
  std::string prompt;
  std::string metadata;
  int created_at_turn = 0;
  /// Faithfulness of the selected candidate (visual channel only).
  std::optional<double> phi;
};

struct Triplet {
  FrameId subject;
  std::string predicate;
  FrameId object;
  auto operator<=>(const Triplet&) const = default;
};

struct AtomicFact {
  std::string text;
  FrameId source_frame;
  bool operator==(const AtomicFact&) const = default;
};

struct FactVerdict {
  AtomicFact fact;
  bool verdict = false;
  std::optional<Box> box;
  bool operator==(const FactVerdict&) const = default;
};

struct FaithfulnessReport {
  int candidate_index = 0;
  std::vector<FactVerdict> verdicts;
  double phi = 1.0;
};

/// (#true) / (#verdicts); 1 for an empty set.
double faithfulness_ratio(const std::vector<FactVerdict>& verdicts) noexcept;

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

enum class Command : std::uint8_t { Pov, Rag, Process, FinalAnswer };
enum class Pov : std::uint8_t { A, B, Both };

std::string_view to_string(Command c) noexcept;
std::string_view to_string(Pov p) noexcept;
Pov pov_of(Speaker s) noexcept;
bool pov_admits(Pov pov, Speaker s) noexcept;
/// Resolves "A", "User B", "BOTH", "b's view"... Upper-case single letters
/// only, so the article "a" never resolves to speaker A.
std::optional<Pov> resolve_pov(std::string_view instruction) noexcept;

struct PlanStep {
  Command command = Command::FinalAnswer;
  std::string instruction;
  std::optional<int> retrieval_count;  // present iff command == Rag

  bool operator==(const PlanStep&) const = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  bool operator==(const Plan&) const = default;
};

std::string render_step(const PlanStep& step);

struct PlanViolation {
  std::size_t step = 0;
  std::string rule;
  bool operator==(const PlanViolation&) const = default;
};

/// Empty iff: exactly one FINAL_ANSWER and it is last, every RAG step has a
/// positive count, RAG counts only on RAG steps, and POV steps resolve.
std::vector<PlanViolation> validate_plan(const Plan& plan);

// ---------------------------------------------------------------------------
// Evaluation records
// ---------------------------------------------------------------------------

enum class RelationType : std::uint8_t { Temporal, Spatial, Attributive, Inferred };
inline constexpr RelationType kRelationTypes[] = {RelationType::Temporal, RelationType::Spatial,
                                                  RelationType::Attributive, RelationType::Inferred};

std::string_view to_string(RelationType r) noexcept;
/// Case-sensitive; throws Error{UnknownRelationType}.
RelationType parse_relation_type(std::string_view text);

struct QAItem {
  std::string dialogue_id;
  std::string question;
  std::string gold_answer;
  RelationType relation_type = RelationType::Attributive;
  Speaker questioner = Speaker::A;
};

enum class Verdict : std::uint8_t { Same, Different };
std::string_view to_string(Verdict v) noexcept;

struct JudgeVerdict {
  Verdict verdict = Verdict::Different;
  std::string reasoning;
};

enum class Complexity : std::uint8_t { Local, Relational };
enum class QuestionKind : std::uint8_t { Binary, Open };
enum class ConstraintKind : std::uint8_t { List, Free };
enum class Validity : std::uint8_t { Valid, Missing };

std::string_view to_string(Complexity v) noexcept;
std::string_view to_string(QuestionKind v) noexcept;
std::string_view to_string(ConstraintKind v) noexcept;
std::string_view to_string(Validity v) noexcept;

struct Annotation {
  Complexity complexity = Complexity::Local;
  QuestionKind question_kind = QuestionKind::Open;
  ConstraintKind constraint = ConstraintKind::Free;
  Validity validity = Validity::Valid;
  bool operator==(const Annotation&) const = default;
};

}  // namespace groundmem
