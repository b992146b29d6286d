#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundmem/core.hpp"

// Symbolic scene grammar shared by the prompt composer, the mock image
// backend, the mock verifier and the mock summarizer.
namespace groundmem::scene {

struct Entity {
  std::string name;                    // canonical singular noun ("drum set")
  std::vector<std::string> modifiers;  // single words in utterance order
  int count = 1;
  std::string location;                // "on the wall"
  std::string part;                    // "a red and grey striped bedspread"
  Outline outline = Outline::Black;

  bool operator==(const Entity&) const = default;
};

/// Reading of a free-text scene descriptor.
struct Interpretation {
  std::string room;                    // canonical room label, or empty
  std::vector<Entity> entities;
  std::vector<std::string> dangling;   // modifiers with no noun ("it's blue")
  bool hedged = false;
  bool correction = false;
  bool removal = false;
  bool move = false;
};

Interpretation interpret(std::string_view text);

// Lexicon -------------------------------------------------------------------

bool is_color(std::string_view word);
bool is_modifier(std::string_view word);
/// Canonical object name for a word or phrase ("stair case" -> staircase).
std::optional<std::string> canonical_object(std::string_view phrase);
/// First room phrase in the text, canonicalized ("Im in a home office" -> home office).
std::optional<std::string> find_room(std::string_view text);
/// Prompt wording for a room label ("outside" -> "outdoor area").
std::string room_display(std::string_view room);
/// Up to three objects a room of this kind usually contains.
std::vector<std::string> assumed_objects(std::string_view room);
std::optional<std::string> part_owner(std::string_view name);

// Rendering -----------------------------------------------------------------

/// "red and grey striped": consecutive colors joined with "and".
std::string modifier_phrase(const std::vector<std::string>& modifiers);
/// "a white fridge (in black outline)", "2 guitars (in black outline) on the wall".
std::string render_item(const Entity& e);
/// "the fridge" / "the red rug" (modifiers included when `disambiguate`).
std::string render_ref(const Entity& e, bool disambiguate);
/// Plain noun phrase without outline: "a white fridge", "2 guitars on the wall".
std::string render_phrase(const Entity& e);

/// Canvas registry attributes: modifiers, then count, location, "has <part>".
std::vector<std::string> to_attributes(const Entity& e);
Entity from_object(const CanvasObject& o);

// Prompts -------------------------------------------------------------------

struct SceneState {
  std::string room;
  std::vector<Entity> entities;
};

struct PromptOp {
  enum class Kind { Add, Remove, Replace };
  Kind kind = Kind::Add;
  std::string ref;  // Remove / Replace target
  Entity entity;    // Add / Replace result
};

struct ParsedPrompt {
  bool creation = false;
  std::string room;
  std::vector<PromptOp> ops;
  std::vector<std::string> keep;
};

/// Reads prompts produced by the composer below. Unrecognized sentences are
/// ignored.
ParsedPrompt parse_prompt(std::string_view prompt);
/// Index of the entity a reference ("the red rug") denotes.
std::optional<std::size_t> resolve_ref(const std::vector<Entity>& entities, std::string_view ref);
/// Applies a parsed prompt to a symbolic state (Keep clauses are not checked).
void apply(SceneState& state, const ParsedPrompt& prompt);
SceneState replay(const std::vector<std::string>& prompts);

std::string compose_creation_prompt(std::string_view delta, std::string_view frame_meta);
/// Throws PreconditionViolation on empty history.
std::string compose_edit_prompt(std::string_view delta, const std::vector<std::string>& history);
/// Same, against an explicit base state (e.g. read from a canvas registry).
std::string compose_edit_prompt(std::string_view delta, const SceneState& base);
SceneState state_of(const Canvas& canvas);
int count_outline(std::string_view prompt, Outline o);

// Facts ---------------------------------------------------------------------

/// Atomic facts for a non-blue entity (empty for blue).
std::vector<std::string> entity_facts(const Entity& e);
std::string scene_fact(std::string_view room);
/// Facts from the descriptor, then from the replayed prompt history; blue
/// content excluded, duplicates removed.
std::vector<std::string> decompose(std::string_view delta, const std::vector<std::string>& history);

/// Checks one fact against a canvas registry. Returns the evidence box when true.
std::optional<Box> check_fact(const Canvas& canvas, std::string_view fact);

// Summaries -----------------------------------------------------------------

std::string compose_summary(std::string_view delta, const std::optional<std::string>& previous,
                            std::string_view frame_meta);

/// Entities stated or implied by a summary paragraph, plus its scene label.
SceneState read_summary(std::string_view summary);

}  // namespace groundmem::scene
