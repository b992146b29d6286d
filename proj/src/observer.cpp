#include "groundmem/observer.hpp"

#include <algorithm>

#include "groundmem/error.hpp"
#include "groundmem/parsers.hpp"
#include "groundmem/prompts.hpp"

namespace groundmem {

std::string context_line(const Utterance& u) {
  return "[Turn " + std::to_string(u.turn) + "] " + speaker_label(u.speaker) + ": " + u.text;
}

std::optional<FrameId> previous_frame(const PerspectiveState& state, const FrameId& frame) {
  if (frame.ordinal <= 1) return std::nullopt;
  const FrameId prev{frame.speaker, frame.ordinal - 1, 1};
  const auto& side = state.of(frame.speaker);
  if (!side.frame_turn_spans.contains(prev)) return std::nullopt;
  return prev;
}

std::vector<std::string> build_context_window(const Dialogue& dialogue, const PerspectiveState& state, Speaker speaker) {
  const auto& side = state.of(speaker);
  if (!side.active_frame) return {};
  auto lines_of = [&](const FrameId& f, std::vector<std::string>& out) {
    const auto it = side.frame_turn_spans.find(f);
    if (it == side.frame_turn_spans.end()) return;
    for (int t : it->second) {
      const auto u = std::find_if(dialogue.turns.begin(), dialogue.turns.end(), [&](const Utterance& x) { return x.turn == t; });
      if (u != dialogue.turns.end()) out.push_back(context_line(*u));
    }
  };
  std::vector<std::string> out;
  if (const auto prev = previous_frame(state, *side.active_frame)) {
    lines_of(*prev, out);
    out.emplace_back(kSceneChange);
  }
  lines_of(*side.active_frame, out);
  return out;
}

ObserveResult observe(const Utterance& u, const std::vector<std::string>& context,
                      const std::optional<FrameId>& active_frame, Gateway& gateway, int parse_retries) {
  const auto request =
      prompts::observer(context, active_frame ? to_string(*active_frame) : "None", speaker_label(u.speaker), u.text);
  ObserveResult out;
  for (int attempt = 0; attempt <= parse_retries; ++attempt) {
    const std::string raw = gateway.chat(request);
    try {
      out.decision = parse_observer_output(raw);
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnparsableOutput && e.code() != ErrorCode::UnknownAction) throw;
      out.diagnostics.push_back("turn " + std::to_string(u.turn) + ": observer reply rejected (" + e.tag() + ": " +
                                e.what() + ")");
    }
  }
  out.diagnostics.push_back("turn " + std::to_string(u.turn) + ": falling back to SKIP");
  out.decision = ObserverDecision{};
  return out;
}

RoutingOutcome route(const ObserverDecision& decision, const Utterance& u, PerspectiveState& state) {
  auto& side = state.of(u.speaker);
  switch (decision.action) {
    case EditAction::Skip:
      return {};
    case EditAction::New: {
      const FrameId f{u.speaker, side.next_ordinal, 1};
      ++side.next_ordinal;
      side.active_frame = f;
      side.frame_turn_spans[f].push_back(u.turn);
      side.versions[f] = 1;
      return {f, true};
    }
    case EditAction::Continue: {
      if (!side.active_frame)
        fail(ErrorCode::ContinueWithoutActiveFrame,
             std::string("turn ") + std::to_string(u.turn) + ": CONTINUE from " + speaker_label(u.speaker) +
                 " before any frame");
      const FrameId f = *side.active_frame;
      side.frame_turn_spans[f].push_back(u.turn);
      const int seq = ++side.versions[f];
      return {f.with_sequence(seq), false};
    }
  }
  return {};
}

}  // namespace groundmem
