#include "groundmem/phase1.hpp"

#include "groundmem/error.hpp"

namespace groundmem {

BuildResult build_memory(const Dialogue& dialogue, const BuildOptions& options, Gateway& gateway) {
  validate_dialogue(dialogue);
  BuildResult out;
  out.bank.dialogue_id = dialogue.id;
  out.bank.condition = options.condition;

  for (const auto& u : dialogue.turns) {
    TurnRecord rec;
    rec.utterance = u;
    const auto window = build_context_window(dialogue, out.state, u.speaker);
    auto observed = observe(u, window, out.state.of(u.speaker).active_frame, gateway, options.parse_retries);
    rec.decision = std::move(observed.decision);
    rec.diagnostics = std::move(observed.diagnostics);

    const auto routed = route(rec.decision, u, out.state);
    rec.target = routed.target;
    if (routed.target) {
      const FrameId frame = routed.target->frame();
      if (routed.allocation) {
        const std::string label = rec.decision.frame_meta.empty() ? std::string("scene") : rec.decision.frame_meta;
        out.bank.allocate(frame, label);
      }
      const auto previous = routed.allocation ? nullptr : out.bank.latest(frame);
      auto built = construct(rec.decision, *routed.target, u.turn, previous, out.bank.prompt_history(frame),
                             options.condition, options.constructor, gateway);
      rec.reports = std::move(built.reports);
      for (auto& d : built.diagnostics) rec.diagnostics.push_back(std::move(d));
      out.bank.insert(std::move(built.version), gateway);
    }

    if (rec.decision.relation_hint && !rec.decision.relation_hint->empty()) {
      const auto& side = out.state.of(u.speaker);
      if (!side.active_frame) {
        rec.diagnostics.push_back("turn " + std::to_string(u.turn) + ": relation hint without an active frame");
      } else {
        FrameContext frames;
        frames.curr = side.active_frame;
        frames.prev = previous_frame(out.state, *side.active_frame);
        auto context = build_context_window(dialogue, out.state, u.speaker);
        context.push_back(context_line(u));
        auto links = extract_links(*rec.decision.relation_hint, context, frames, out.bank.label_table(u.speaker), gateway);
        for (auto& d : links.diagnostics) rec.diagnostics.push_back("turn " + std::to_string(u.turn) + ": " + d);
        for (const auto& t : links.triplets) {
          out.bank.graph.insert(t);
          rec.triplets.push_back(t);
        }
      }
    }
    out.turns.push_back(std::move(rec));
  }
  return out;
}

}  // namespace groundmem
