#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "groundmem/core.hpp"
#include "groundmem/gateway.hpp"

namespace groundmem {

inline constexpr std::string_view kSceneChange = "<scene_change>";

struct SpeakerState {
  std::optional<FrameId> active_frame;  // sequence 1
  int next_ordinal = 1;
  std::map<FrameId, std::vector<int>> frame_turn_spans;
  /// Versions built so far per frame.
  std::map<FrameId, int> versions;

  bool operator==(const SpeakerState&) const = default;
};

struct PerspectiveState {
  SpeakerState a;
  SpeakerState b;

  SpeakerState& of(Speaker s) noexcept { return s == Speaker::A ? a : b; }
  const SpeakerState& of(Speaker s) const noexcept { return s == Speaker::A ? a : b; }

  bool operator==(const PerspectiveState&) const = default;
};

struct RoutingOutcome {
  std::optional<FrameId> target;
  bool allocation = false;
};

/// "[Turn 26] B: Im in a home office"
std::string context_line(const Utterance& u);

/// Utterances of the speaker's previous frame, `<scene_change>`, then those of
/// the active frame. Empty before the speaker's first frame.
std::vector<std::string> build_context_window(const Dialogue& dialogue, const PerspectiveState& state, Speaker speaker);

/// The frame before `frame` in its speaker's sequence, if allocated.
std::optional<FrameId> previous_frame(const PerspectiveState& state, const FrameId& frame);

struct ObserveResult {
  ObserverDecision decision;
  std::vector<std::string> diagnostics;
};

/// One observer call, re-asked up to `parse_retries` times on unparsable
/// replies; after that the utterance is treated as SKIP with a diagnostic.
ObserveResult observe(const Utterance& u, const std::vector<std::string>& context,
                      const std::optional<FrameId>& active_frame, Gateway& gateway, int parse_retries = 2);

/// Applies a decision to the speaker's side of `state`.
/// Throws ContinueWithoutActiveFrame.
RoutingOutcome route(const ObserverDecision& decision, const Utterance& u, PerspectiveState& state);

}  // namespace groundmem
