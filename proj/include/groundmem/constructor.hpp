#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "groundmem/canvas.hpp"
#include "groundmem/core.hpp"
#include "groundmem/gateway.hpp"

namespace groundmem {

struct ConstructorConfig {
  int candidates = 3;  // J
  double tolerance = 16.0;
  int max_assumed = 3;
  std::vector<Rgb> palette = default_palette();
};

/// Throws PreconditionViolation on an empty descriptor.
std::vector<AtomicFact> decompose_facts(const std::string& delta, const std::vector<std::string>& prompt_history,
                                        const FrameId& source, Gateway& gateway);

/// Throws AssumptionBudgetExceeded when more than `max_assumed` blue entities appear.
std::string build_creation_prompt(const std::string& delta, const std::string& frame_meta, Gateway& gateway,
                                  int max_assumed = 3);
/// `base` is the canvas being edited, attached for vision-capable backends.
std::string build_edit_prompt(const std::string& delta, const std::vector<std::string>& prompt_history,
                              std::shared_ptr<const Canvas> base, Gateway& gateway, int max_assumed = 3);

struct CandidateSet {
  std::vector<Canvas> canvases;  // indexed 0..k-1
  std::vector<std::string> diagnostics;
};

/// J image-model samples of `prompt` over `base`. Proceeds with the survivors
/// when some fail; throws CandidateGenerationFailed when none succeed.
CandidateSet generate_candidates(const std::string& prompt, std::shared_ptr<const Canvas> base, int j,
                                 const FrameId& target, Gateway& gateway);

FaithfulnessReport faithfulness(const std::shared_ptr<const Canvas>& candidate, int candidate_index,
                                const std::vector<AtomicFact>& facts, Gateway& gateway);

/// Position of the highest phi; the first one wins ties.
/// Throws PreconditionViolation on an empty list.
std::size_t select_artifact(const std::vector<FaithfulnessReport>& reports);

std::string summarize_scene(const std::string& delta, const std::optional<std::string>& previous_summary,
                            const std::string& frame_meta, Gateway& gateway);

/// Metadata of the new version: previous metadata plus new label and info lines.
std::string accumulate_metadata(const std::string& previous, const ObserverDecision& decision);

struct ConstructResult {
  ArtifactVersion version;
  std::vector<AtomicFact> facts;
  std::vector<FaithfulnessReport> reports;
  std::size_t selected = 0;
  std::vector<std::string> diagnostics;
};

/// Builds the version `target` from a NEW or CONTINUE decision. `previous` is
/// the latest version of the same frame (absent for NEW); `prompt_history` the
/// prompts of all earlier versions of the frame.
ConstructResult construct(const ObserverDecision& decision, const FrameId& target, int turn,
                          const std::shared_ptr<const ArtifactVersion>& previous,
                          const std::vector<std::string>& prompt_history, Condition condition,
                          const ConstructorConfig& config, Gateway& gateway);

}  // namespace groundmem
