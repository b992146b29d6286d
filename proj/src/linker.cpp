#include "groundmem/linker.hpp"

#include <algorithm>
#include <map>

#include "groundmem/error.hpp"
#include "groundmem/json_extract.hpp"
#include "groundmem/parsers.hpp"
#include "groundmem/prompts.hpp"
#include "groundmem/text.hpp"

namespace groundmem {

std::optional<std::string> normalize_predicate(std::string_view raw) {
  std::string p;
  for (char c : text::trim(raw)) {
    const auto u = static_cast<unsigned char>(c);
    p.push_back(std::isalnum(u) ? static_cast<char>(std::tolower(u)) : '_');
  }
  static const std::map<std::string, std::string, std::less<>> kAliases = {
      {"north_of", "is_north_of"}, {"south_of", "is_south_of"}, {"east_of", "is_east_of"},
      {"west_of", "is_west_of"},   {"next_to", "is_next_to"},   {"same_as", "is_same_as"},
      {"revisit_of", "is_revisit_of"}, {"adjacent_to", "is_next_to"}, {"is_adjacent_to", "is_next_to"}};
  if (auto it = kAliases.find(p); it != kAliases.end()) p = it->second;
  if (std::find(std::begin(kPredicates), std::end(kPredicates), p) == std::end(kPredicates)) return std::nullopt;
  return p;
}

std::optional<std::string> inverse_predicate(std::string_view canonical) {
  if (canonical == "is_north_of") return "is_south_of";
  if (canonical == "is_south_of") return "is_north_of";
  if (canonical == "is_east_of") return "is_west_of";
  if (canonical == "is_west_of") return "is_east_of";
  if (canonical == "is_next_to" || canonical == "is_same_as") return std::string(canonical);
  return std::nullopt;
}

LinkResult extract_links(const std::string& relation_hint, const std::vector<std::string>& context,
                         const FrameContext& frames, const std::vector<std::string>& frame_meta_table,
                         Gateway& gateway) {
  if (!frames.curr) fail(ErrorCode::PreconditionViolation, "linking needs a current frame");
  prompts::FrameSlots slots;
  slots.curr = to_string(*frames.curr);
  if (frames.prev) slots.prev = to_string(*frames.prev);
  if (frames.next) slots.next = to_string(*frames.next);

  LinkResult out;
  auto allowed = [&](const FrameId& f) {
    return f == *frames.curr || (frames.prev && f == *frames.prev) || (frames.next && f == *frames.next);
  };
  for (const auto& c : parse_linker_output(
           gateway.chat(prompts::linker(relation_hint, context, slots, frame_meta_table)))) {
    const std::string shown = c.subject + " " + c.predicate + " " + c.object;
    const auto predicate = normalize_predicate(c.predicate);
    if (!predicate) {
      out.diagnostics.push_back("dropped '" + shown + "': unknown predicate");
      continue;
    }
    FrameId s, o;
    try {
      s = parse_frame_id(text::trim(c.subject));
      o = parse_frame_id(text::trim(c.object));
    } catch (const Error&) {
      out.diagnostics.push_back("dropped '" + shown + "': not a frame id");
      continue;
    }
    if (s.sequence != 1 || o.sequence != 1 || !allowed(s) || !allowed(o)) {
      out.diagnostics.push_back("dropped '" + shown + "': frame outside the provided slots");
      continue;
    }
    if (s == o) {
      out.diagnostics.push_back("dropped '" + shown + "': self relation");
      continue;
    }
    const Triplet t{s, *predicate, o};
    if (std::find(out.triplets.begin(), out.triplets.end(), t) == out.triplets.end()) out.triplets.push_back(t);
  }
  return out;
}

// Graph ---------------------------------------------------------------------------

void RelationGraph::add_frame(const FrameId& frame) { frames_.insert(frame.frame()); }

bool RelationGraph::has_frame(const FrameId& frame) const { return frames_.contains(frame); }

void RelationGraph::insert(const Triplet& t) {
  if (!has_frame(t.subject)) fail(ErrorCode::UnknownFrame, "no frame " + to_string(t.subject));
  if (!has_frame(t.object)) fail(ErrorCode::UnknownFrame, "no frame " + to_string(t.object));
  if (t.subject == t.object) fail(ErrorCode::InvalidTriplet, "self relation on " + to_string(t.subject));
  const auto p = normalize_predicate(t.predicate);
  if (!p || *p != t.predicate) fail(ErrorCode::InvalidTriplet, "non-canonical predicate '" + t.predicate + "'");
  if (std::find(triplets_.begin(), triplets_.end(), t) == triplets_.end()) triplets_.push_back(t);
}

std::vector<Triplet> RelationGraph::neighbors(const FrameId& frame, const std::optional<std::string>& predicate) const {
  if (!has_frame(frame)) fail(ErrorCode::UnknownFrame, "no frame " + to_string(frame));
  std::optional<std::string> want;
  if (predicate) {
    want = normalize_predicate(*predicate);
    if (!want) return {};
  }
  std::vector<Triplet> out;
  for (const auto& t : triplets_) {
    if (t.subject != frame && t.object != frame) continue;
    if (!want || t.predicate == *want) {
      out.push_back(t);
    } else if (inverse_predicate(t.predicate) == *want) {
      out.push_back({t.object, *want, t.subject});
    }
  }
  return out;
}

std::vector<Triplet> RelationGraph::triplets_for(const std::vector<FrameId>& hits) const {
  std::set<Triplet> out;
  for (const auto& t : triplets_) {
    for (const auto& h : hits) {
      if (t.subject == h.frame() || t.object == h.frame()) {
        out.insert(t);
        break;
      }
    }
  }
  return {out.begin(), out.end()};
}

std::string to_jsonl(const std::vector<Triplet>& triplets) {
  std::string out;
  for (const auto& t : triplets) {
    out += Json{{"subject", to_string(t.subject)}, {"predicate", t.predicate}, {"object", to_string(t.object)}}.dump();
    out += '\n';
  }
  return out;
}

std::vector<Triplet> triplets_from_jsonl(std::string_view text) {
  std::vector<Triplet> out;
  int line_no = 0;
  for (const auto& line : text::split(text, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (!j.is_object() || !j.contains("subject") || !j.contains("predicate") || !j.contains("object") ||
        !j["subject"].is_string() || !j["predicate"].is_string() || !j["object"].is_string())
      fail(ErrorCode::FormatError, "links line " + std::to_string(line_no) + ": expected {subject, predicate, object}");
    out.push_back({parse_frame_id(j["subject"].get<std::string>()), j["predicate"].get<std::string>(),
                   parse_frame_id(j["object"].get<std::string>())});
  }
  return out;
}

}  // namespace groundmem
