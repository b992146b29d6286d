#include <algorithm>
#include <map>
#include <set>

#include "groundmem/error.hpp"
#include "groundmem/json_extract.hpp"
#include "groundmem/parsers.hpp"
#include "groundmem/prompts.hpp"
#include "groundmem/scene.hpp"
#include "groundmem/text.hpp"
#include "mock_roles.hpp"

namespace groundmem::mock {

namespace {

std::string sec(const ChatRequest& r, const char* tag) { return text::section(user_text(r), tag); }

bool starts_with_any(const std::vector<std::string>& ws, std::initializer_list<std::string_view> phrases) {
  for (auto p : phrases) {
    const auto pw = text::words(p);
    if (pw.size() <= ws.size() && std::equal(pw.begin(), pw.end(), ws.begin())) return true;
  }
  return false;
}

const std::set<std::string, std::less<>> kQuestionNoise = {
    "what",  "which", "where", "who",   "how",   "when",   "why",    "was",    "were",  "is",     "are",  "the",
    "a",     "an",    "of",    "in",    "on",    "at",     "my",     "your",   "you",   "me",     "i",    "it",
    "like",  "do",    "does",  "did",   "can",   "could",  "remind", "remember", "recall", "tell", "present", "to",
    "there", "any",   "have",  "has",   "had",   "that",   "this",   "be",     "and",   "or",     "with", "about",
    "please", "for",  "again", "mine",  "yours", "also",   "its",    "it's",   "we",    "us"};

char other(char s) { return s == 'A' ? 'B' : 'A'; }

// One retrieved memory, as the answerer sees it.
struct View {
  std::string id;
  scene::SceneState state;
};

void absorb(scene::SceneState& into, const scene::SceneState& from) {
  if (into.room.empty()) into.room = from.room;
  for (const auto& e : from.entities) {
    const bool dup = std::any_of(into.entities.begin(), into.entities.end(), [&](const scene::Entity& x) {
      return x.name == e.name && x.modifiers == e.modifiers && x.count == e.count;
    });
    if (!dup) into.entities.push_back(e);
  }
}

std::vector<View> views_from_evidence(const ChatRequest& r) {
  std::vector<View> out;
  View* cur = nullptr;
  for (const auto& raw : text::split(sec(r, "evidence"), '\n')) {
    const auto line = text::trimmed(raw);
    if (line.rfind("Artifact ", 0) == 0) {
      const auto colon = line.find(": ");
      std::string id = colon == std::string::npos ? std::string() : line.substr(colon + 2);
      id = id.substr(0, id.find(' '));
      id = id.substr(0, id.find("_seq"));  // relations name frames, not versions
      out.push_back({id, {}});
      cur = &out.back();
    } else if (cur && line.rfind("Image: attachment ", 0) == 0) {
      const int k = std::atoi(line.c_str() + 18);
      if (k >= 1 && static_cast<std::size_t>(k) <= r.attachments.size() && r.attachments[k - 1])
        absorb(cur->state, scene::state_of(*r.attachments[k - 1]));
    } else if (cur && line.rfind("Summary: ", 0) == 0) {
      absorb(cur->state, scene::read_summary(line.substr(9)));
    }
  }
  return out;
}

struct Relation {
  std::string subject;
  std::string predicate;
  std::string object;
};

std::vector<Relation> relations_from_evidence(const ChatRequest& r) {
  std::vector<Relation> out;
  for (const auto& raw : text::split(sec(r, "evidence"), '\n')) {
    const auto line = text::trimmed(raw);
    if (line.rfind("Relations: ", 0) != 0) continue;
    for (const auto& t : text::split(line.substr(11), ';')) {
      const auto parts = text::split(text::trimmed(t), ' ');
      if (parts.size() == 3) out.push_back({parts[0], parts[1], parts[2]});
    }
  }
  return out;
}

// Replays a transcript through the observer and summarizer rules, one
// summary per visited room and speaker.
std::vector<View> views_from_transcript(const std::string& transcript) {
  std::vector<View> out;
  std::map<char, std::size_t> active;
  std::map<char, std::vector<std::string>> context;
  std::map<std::size_t, std::string> summary;
  for (const auto& raw : text::split(transcript, '\n')) {
    const auto line = text::trimmed(raw);
    const auto close = line.find("] ");
    if (close == std::string::npos || close + 4 > line.size() || line[close + 3] != ':') continue;
    const char speaker = line[close + 2];
    const std::string utterance = text::trimmed(line.substr(close + 4));
    const bool has = active.contains(speaker);
    const auto decision = parse_observer_output(observer(prompts::observer(
        context[speaker], has ? out[active[speaker]].id : "None", speaker, utterance)));
    if (decision.action == EditAction::Skip) continue;
    if (decision.action == EditAction::New || !has) {
      const int ordinal = 1 + static_cast<int>(std::count_if(out.begin(), out.end(), [&](const View& v) {
                            return v.id[0] == speaker;
                          }));
      out.push_back({std::string(1, speaker) + "_" + std::to_string(ordinal), {}});
      active[speaker] = out.size() - 1;
      summary[active[speaker]] = scene::compose_summary(decision.scene_descriptor, std::nullopt, decision.frame_meta);
      context[speaker].clear();
    } else {
      auto& s = summary[active[speaker]];
      s = scene::compose_summary(decision.scene_descriptor, s, "");
    }
    context[speaker].push_back(std::string(1, speaker) + ": " + utterance);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].state = scene::read_summary(summary[i]);
  return out;
}

bool has_entity(const scene::SceneState& s, const scene::Entity& want) {
  return std::any_of(s.entities.begin(), s.entities.end(), [&](const scene::Entity& e) {
    return e.name == want.name && std::all_of(want.modifiers.begin(), want.modifiers.end(), [&](const std::string& m) {
             return std::find(e.modifiers.begin(), e.modifiers.end(), m) != e.modifiers.end();
           });
  });
}

std::string colors_of(const scene::Entity& e) {
  std::vector<std::string> cs;
  for (const auto& m : e.modifiers) {
    if (scene::is_color(m)) cs.push_back(m);
  }
  return text::join(cs, " and ");
}

std::string wrap(const std::string& thought, const std::string& answer) {
  return "<think>" + thought + "</think>\n<answer>" + answer + "</answer>";
}

}  // namespace

// Planning ----------------------------------------------------------------------

std::string planner(const ChatRequest& r) {
  const std::string q = sec(r, "question");
  const std::string asker = sec(r, "asker");
  const char a = asker.empty() ? 'A' : asker[0];
  const auto ws = text::words(q);
  const bool mine = text::has_word(ws, "my") || text::has_word(ws, "mine") || text::has_word(ws, "i");
  const bool yours = text::has_word(ws, "your") || text::has_word(ws, "yours");
  std::string pov = "BOTH";
  if (mine && !yours) pov = std::string(1, a);
  if (yours && !mine) pov = std::string(1, other(a));
  std::vector<std::string> keys;
  for (const auto& w : ws) {
    if (!kQuestionNoise.contains(w)) keys.push_back(w);
  }
  if (keys.empty()) keys = ws;
  return "<answer><item>POV " + pov + "</item><item>RAG[k=5] " + text::join(keys, " ") +
         "</item><item>FINAL_ANSWER " + q + "</item></answer>";
}

std::string refiner(const ChatRequest& r) {
  const std::string q = sec(r, "question");
  const std::string command = sec(r, "command");
  const std::string instruction = sec(r, "instruction");
  std::string out;
  if (command == "RAG") {
    std::vector<std::string> keys;
    auto push = [&](const std::string& k) {
      if (!k.empty() && std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    };
    if (auto room = scene::find_room(instruction)) push(scene::room_display(*room));
    if (auto room = scene::find_room(q)) push(scene::room_display(*room));
    for (const auto* src : {&q, &instruction}) {
      for (const auto& e : scene::interpret(*src).entities) {
        push(e.modifiers.empty() ? e.name : text::join(e.modifiers, " ") + " " + e.name);
      }
    }
    const auto qw = text::words(q);
    if (text::has_word(qw, "color") || text::has_word(qw, "colour")) push("color");
    out = keys.empty() ? instruction : text::join(keys, " ");
  } else if (command == "POV") {
    const auto pov = resolve_pov(instruction);
    out = pov ? std::string(to_string(*pov)) : instruction;
  } else if (command == "FINAL_ANSWER") {
    out = "Answer directly: " + q;
  } else {
    out = "From the retrieved memories: " + instruction;
  }
  return "<answer>" + out + "</answer>";
}

std::string processor(const ChatRequest& r) {
  const auto views = views_from_evidence(r);
  std::vector<std::string> parts;
  for (const auto& v : views) {
    std::vector<std::string> names;
    for (const auto& e : v.state.entities) {
      if (e.outline != Outline::Blue) names.push_back(scene::render_phrase(e));
    }
    parts.push_back(v.id + " (" + (v.state.room.empty() ? std::string("room") : scene::room_display(v.state.room)) +
                    "): " + (names.empty() ? std::string("nothing confirmed") : text::join(names, ", ")));
  }
  return parts.empty() ? std::string("No memories retrieved.") : text::join(parts, "\n");
}

// Answering -----------------------------------------------------------------------

std::string answerer(const ChatRequest& r) {
  const std::string& body = user_text(r);
  const std::string q = sec(r, "question");
  const auto ws = text::words(q);
  const bool transcript = has_section(body, "transcript");
  const auto views = transcript ? views_from_transcript(sec(r, "transcript")) : views_from_evidence(r);
  const auto relations = transcript ? std::vector<Relation>{} : relations_from_evidence(r);
  if (views.empty()) return wrap("Nothing was retrieved.", "not specified");

  const auto qi = scene::interpret(q);
  const bool indirect = starts_with_any(ws, {"do you remember", "do you recall"});
  const bool binary = !indirect && !starts_with_any(ws, {"can you remind", "can you tell", "could you tell"}) &&
                      starts_with_any(ws, {"is", "are", "was", "were", "do", "does", "did", "has", "have", "can",
                                           "could", "had"});
  const bool wants_color = text::has_word(ws, "color") || text::has_word(ws, "colour");

  std::vector<const View*> pool;
  std::string direction;
  for (const auto& w : ws) {
    if (w == "north" || w == "south" || w == "east" || w == "west") direction = w;
  }
  if (!direction.empty() && !qi.room.empty()) {
    // "the room north of the kitchen": follow a link from the named room.
    for (const auto& v : views) {
      if (v.state.room != qi.room) continue;
      for (const auto& rel : relations) {
        if (rel.object == v.id && rel.predicate == "is_" + direction + "_of") {
          for (const auto& t : views) {
            if (t.id == rel.subject) pool.push_back(&t);
          }
        }
      }
    }
    if (pool.empty()) return wrap("No link from that room was retrieved.", "not specified");
    if (text::has_word(ws, "room") && (text::has_word(ws, "what") || text::has_word(ws, "which")) &&
        qi.entities.empty())
      return wrap("Followed the link.", scene::room_display(pool.front()->state.room));
  } else {
    for (const auto& v : views) {
      if (qi.room.empty() || v.state.room == qi.room) pool.push_back(&v);
    }
    if (pool.empty()) {
      for (const auto& v : views) pool.push_back(&v);
    }
  }

  if (qi.entities.empty()) {
    if (pool.empty()) return wrap("Nothing matched.", "not specified");
    std::vector<std::string> names;
    for (const auto& e : pool.front()->state.entities) {
      if (e.outline != Outline::Blue) names.push_back(scene::render_phrase(e));
    }
    return wrap("Listed " + pool.front()->id + ".", names.empty() ? std::string("not specified") : text::oxford_list(names));
  }
  const auto& target = qi.entities.front();
  // Surfaces locate an object; summaries do not keep them as entities.
  std::vector<scene::Entity> constraints;
  for (auto it = qi.entities.begin() + 1; it != qi.entities.end(); ++it) {
    if (it->name != "wall" && it->name != "floor" && it->name != "ceiling") constraints.push_back(*it);
  }

  for (const View* v : pool) {
    if (!std::all_of(constraints.begin(), constraints.end(), [&](const scene::Entity& c) { return has_entity(v->state, c); }))
      continue;
    for (const auto& e : v->state.entities) {
      if (e.name != target.name) continue;
      if (binary) {
        const bool ok = std::all_of(target.modifiers.begin(), target.modifiers.end(), [&](const std::string& m) {
          return std::find(e.modifiers.begin(), e.modifiers.end(), m) != e.modifiers.end();
        });
        return wrap("Checked " + v->id + ".", ok ? "yes" : "no");
      }
      if (indirect && !has_section(body, "reminder")) return wrap("I remember it.", "yes");
      if (starts_with_any(ws, {"how many"})) return wrap("Counted in " + v->id + ".", std::to_string(e.count));
      if (wants_color) {
        const auto c = colors_of(e);
        if (c.empty()) continue;
        return wrap("Found the " + e.name + " in " + v->id + ".", c);
      }
      if (starts_with_any(ws, {"where", "which room"}))
        return wrap("Found in " + v->id + ".", scene::room_display(v->state.room));
      return wrap("Found in " + v->id + ".", scene::render_phrase(e));
    }
  }
  if (binary) return wrap("Not found in the retrieved memories.", "no");
  return wrap("Not found in the retrieved memories.", "not specified");
}

// Judging ---------------------------------------------------------------------------

namespace {

std::set<std::string> meaning(std::string_view s) {
  static const std::set<std::string, std::less<>> kFiller = {
      "it",  "was",  "the",   "a",  "an", "is", "its",   "it's", "were",  "are",     "they", "color", "colour",
      "of",  "in",   "my",    "your", "i", "think", "believe", "probably", "that", "this", "there", "one",
      "be",  "been", "had",   "has", "have", "just", "only", "so", "well", "answer", "final"};
  static const std::map<std::string, std::string, std::less<>> kSynonyms = {
      {"gray", "grey"},     {"couch", "sofa"},     {"refrigerator", "fridge"}, {"yeah", "yes"},
      {"yep", "yes"},       {"yup", "yes"},        {"correct", "yes"},         {"true", "yes"},
      {"nope", "no"},       {"false", "no"},       {"incorrect", "no"},        {"stair", "staircase"},
      {"stairway", "staircase"}, {"bathtub", "tub"}, {"television", "tv"},     {"restroom", "bathroom"},
      {"two", "2"},        {"three", "3"},        {"four", "4"},              {"five", "5"},
      {"six", "6"},        {"seven", "7"},        {"eight", "8"},             {"nine", "9"},
      {"ten", "10"}};
  std::set<std::string> out;
  for (auto w : text::words(s)) {
    if (kFiller.contains(w)) continue;
    if (w == "n't" || (w.size() > 3 && w.substr(w.size() - 3) == "n't")) w = "not";
    w = text::singular(w);
    if (auto it = kSynonyms.find(w); it != kSynonyms.end()) w = it->second;
    out.insert(w);
  }
  return out;
}

}  // namespace

std::string judge(const ChatRequest& r) {
  const auto a = meaning(sec(r, "response"));
  const auto b = meaning(sec(r, "reference"));
  auto negated = [](const std::set<std::string>& s) { return s.contains("not") || s.contains("never"); };
  bool same = false;
  std::string why;
  if (a.empty() || b.empty()) {
    why = "One side carries no content.";
  } else if (negated(a) != negated(b)) {
    why = "One answer negates the other.";
  } else if (std::includes(a.begin(), a.end(), b.begin(), b.end()) || std::includes(b.begin(), b.end(), a.begin(), a.end())) {
    same = true;
    why = "The answers name the same thing.";
  } else {
    why = "The answers name different things.";
  }
  return "<reasoning>" + why + "</reasoning>\n<answer>" + (same ? "SAME" : "DIFFERENT") + "</answer>";
}

std::string annotator(const ChatRequest& r) {
  const std::string q = sec(r, "question");
  const std::string gold = sec(r, "reference");
  const auto ws = text::words(q);
  static const std::set<std::string, std::less<>> kRelational = {
      "north", "south", "east", "west", "first", "second", "third", "last", "previous", "before", "after",
      "bigger", "smaller", "larger", "than", "next", "between", "earlier", "later", "then"};
  const bool relational = std::any_of(ws.begin(), ws.end(), [](const std::string& w) { return kRelational.contains(w); });
  const bool binary = starts_with_any(ws, {"is", "are", "was", "were", "do", "does", "did", "has", "have", "had"}) &&
                      !starts_with_any(ws, {"do you remember", "do you recall"});
  const bool list = text::has_word(ws, "or");
  const auto gw = text::words(gold);
  const std::string g = " " + text::join(gw, " ") + " ";
  bool missing = false;
  for (const char* p : {" not mentioned ", " never mentioned ", " unknown ", " not specified ", " no such ",
                        " didn't say ", " did not say ", " wasn't mentioned ", " was not mentioned "}) {
    if (g.find(p) != std::string::npos) missing = true;
  }
  Json out = {{"complexity_type", relational ? "relational" : "local"},
              {"question_type", binary ? "binary" : "open"},
              {"constraint_type", list ? "list" : "free"},
              {"validity_type", missing ? "missing" : "valid"}};
  return out.dump();
}

}  // namespace groundmem::mock
