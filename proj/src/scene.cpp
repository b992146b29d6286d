#include "groundmem/scene.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>

#include "groundmem/error.hpp"
#include "groundmem/text.hpp"

namespace groundmem::scene {

namespace {

// Lexicon -------------------------------------------------------------------

const std::set<std::string, std::less<>> kColors = {
    "red",   "blue",  "green", "yellow", "white", "black",  "grey",   "brown", "pink",  "purple", "orange",
    "beige", "gold",  "golden", "silver", "teal", "cream",  "tan",    "maroon", "navy", "violet", "turquoise"};

const std::set<std::string, std::less<>> kModifiers = {
    "wooden", "wood",    "metal",  "metallic", "glass",  "plastic", "leather", "marble", "stone",  "brick",
    "striped", "checkered", "plaid", "floral", "dotted", "big",     "small",   "large",  "tiny",   "huge",
    "tall",   "short",   "round",  "square",   "long",   "old",     "new",     "modern", "antique", "broken",
    "open",   "closed",  "fluffy", "soft",     "little", "empty",   "full",    "dark",   "light",  "bright",
    "shiny",  "dirty",   "clean",  "messy",    "fancy",  "giant",   "double",  "single", "framed", "electric",
    "acoustic", "bigger", "smaller", "larger", "cozy",   "huge",    "fuzzy",   "spiral", "narrow", "wide"};

const std::set<std::string, std::less<>> kSizeWords = {"bigger", "smaller", "larger"};

// phrase -> canonical object
const std::map<std::string, std::string, std::less<>> kObjects = {
    {"bed", "bed"},
    {"nightstand", "nightstand"},
    {"night stand", "nightstand"},
    {"bedside table", "nightstand"},
    {"lamp", "lamp"},
    {"desk", "desk"},
    {"chair", "chair"},
    {"office chair", "chair"},
    {"armchair", "armchair"},
    {"drum set", "drum set"},
    {"drum kit", "drum set"},
    {"drums", "drum set"},
    {"guitar", "guitar"},
    {"piano", "piano"},
    {"stove", "stove"},
    {"oven", "oven"},
    {"sink", "sink"},
    {"counter", "counter"},
    {"countertop", "counter"},
    {"fridge", "fridge"},
    {"refrigerator", "fridge"},
    {"toilet", "toilet"},
    {"mirror", "mirror"},
    {"rug", "rug"},
    {"carpet", "carpet"},
    {"tub", "tub"},
    {"bathtub", "tub"},
    {"bath tub", "tub"},
    {"shower", "shower"},
    {"shelf", "shelf"},
    {"shelve", "shelf"},
    {"bookshelf", "bookshelf"},
    {"bookcase", "bookshelf"},
    {"boiler", "boiler"},
    {"staircase", "staircase"},
    {"stair", "staircase"},
    {"stairway", "staircase"},
    {"sofa", "sofa"},
    {"couch", "sofa"},
    {"tv", "tv"},
    {"television", "tv"},
    {"coffee table", "coffee table"},
    {"dining table", "dining table"},
    {"table", "table"},
    {"door", "door"},
    {"coat rack", "coat rack"},
    {"car", "car"},
    {"washing machine", "washing machine"},
    {"washer", "washing machine"},
    {"dryer", "dryer"},
    {"tree", "tree"},
    {"moon", "moon"},
    {"star", "star"},
    {"sun", "sun"},
    {"wall", "wall"},
    {"floor", "floor"},
    {"ceiling", "ceiling"},
    {"window", "window"},
    {"painting", "painting"},
    {"picture", "picture"},
    {"poster", "poster"},
    {"clock", "clock"},
    {"plant", "plant"},
    {"cabinet", "cabinet"},
    {"cupboard", "cupboard"},
    {"dresser", "dresser"},
    {"wardrobe", "wardrobe"},
    {"fireplace", "fireplace"},
    {"bench", "bench"},
    {"computer", "computer"},
    {"monitor", "monitor"},
    {"laptop", "laptop"},
    {"towel", "towel"},
    {"curtain", "curtain"},
    {"pillow", "pillow"},
    {"cushion", "cushion"},
    {"bedspread", "bedspread"},
    {"blanket", "blanket"},
    {"headboard", "headboard"},
    {"toy box", "toy box"},
    {"toy", "toy"},
    {"crib", "crib"},
    {"microwave", "microwave"},
    {"dishwasher", "dishwasher"},
    {"box", "box"},
    {"fence", "fence"},
    {"bush", "bush"},
    {"flower", "flower"},
    {"bike", "bike"},
    {"bicycle", "bike"},
    {"basket", "basket"},
    {"vase", "vase"},
    {"candle", "candle"},
    {"statue", "statue"},
    {"ottoman", "ottoman"},
    {"chandelier", "chandelier"},
    {"ceiling fan", "ceiling fan"},
    {"fan", "fan"},
    {"book", "book"},
    {"printer", "printer"},
    {"treadmill", "treadmill"},
    {"pool table", "pool table"},
    {"workbench", "workbench"},
    {"ladder", "ladder"},
    {"swing", "swing"},
    {"drawer", "drawer"},
    {"lampshade", "lampshade"},
    {"trophy", "trophy"},
    {"bucket", "bucket"},
};

// phrase -> canonical room label
const std::map<std::string, std::string, std::less<>> kRooms = {
    {"home office", "home office"},
    {"office", "office"},
    {"study", "study"},
    {"living room", "living room"},
    {"lounge", "living room"},
    {"family room", "living room"},
    {"dining room", "dining room"},
    {"laundry room", "laundry room"},
    {"childs room", "childs room"},
    {"kids room", "childs room"},
    {"nursery", "nursery"},
    {"bedroom", "bedroom"},
    {"master bedroom", "bedroom"},
    {"kitchen", "kitchen"},
    {"bathroom", "bathroom"},
    {"restroom", "bathroom"},
    {"washroom", "bathroom"},
    {"basement", "basement"},
    {"cellar", "basement"},
    {"hallway", "hallway"},
    {"hall", "hallway"},
    {"corridor", "hallway"},
    {"foyer", "hallway"},
    {"garage", "garage"},
    {"attic", "attic"},
    {"outside", "outside"},
    {"outdoors", "outside"},
    {"yard", "yard"},
    {"backyard", "yard"},
    {"garden", "garden"},
    {"lobby", "lobby"},
    {"pantry", "pantry"},
    {"gym", "gym"},
    {"library", "library"},
    {"balcony", "balcony"},
    {"porch", "porch"},
    {"storage room", "storage room"},
    {"game room", "game room"},
    {"music room", "music room"},
    {"utility room", "utility room"},
};

const std::map<std::string, std::vector<std::string>, std::less<>> kAssumed = {
    {"bedroom", {"bed", "nightstand", "lamp"}},
    {"home office", {"desk"}},
    {"office", {"desk", "chair"}},
    {"study", {"desk", "bookshelf"}},
    {"kitchen", {"stove", "sink", "counter"}},
    {"bathroom", {"sink", "toilet", "mirror"}},
    {"basement", {"shelf", "boiler"}},
    {"living room", {"sofa", "tv", "coffee table"}},
    {"hallway", {"door", "coat rack"}},
    {"dining room", {"dining table", "chair"}},
    {"garage", {"car"}},
    {"laundry room", {"washing machine"}},
    {"childs room", {"bed", "toy box"}},
    {"nursery", {"crib"}},
    {"outside", {"tree"}},
    {"yard", {"tree", "fence"}},
    {"garden", {"flower", "tree"}},
    {"attic", {"box"}},
    {"library", {"bookshelf"}},
    {"gym", {"treadmill"}},
    {"game room", {"pool table"}},
};

const std::map<std::string, std::string, std::less<>> kPartOwner = {
    {"bedspread", "bed"}, {"blanket", "bed"},      {"pillow", "bed"},   {"headboard", "bed"},
    {"cushion", "sofa"},  {"drawer", "dresser"},   {"lampshade", "lamp"},
};

const std::set<std::string, std::less<>> kNeedsWall = {"window", "painting", "picture", "poster", "clock", "shelf"};

const std::set<std::string, std::less<>> kDeterminers = {"a",  "an",   "the",   "some", "this", "that",
                                                         "my", "your", "their", "his",  "her",  "another"};

const std::map<std::string, int, std::less<>> kNumberWords = {
    {"two", 2}, {"three", 3}, {"four", 4},  {"five", 5},    {"six", 6},
    {"seven", 7}, {"eight", 8}, {"nine", 9}, {"ten", 10}, {"couple", 2}};

const std::set<std::string, std::less<>> kPreps = {"on",     "at",      "near",    "under",     "beside",
                                                   "behind", "above",   "below",   "by",        "against",
                                                   "over",   "inside",  "next",    "in",        "across",
                                                   "opposite", "between", "along", "underneath", "beneath", "to"};

const std::set<std::string, std::less<>> kCopulas = {"is", "are", "was", "were", "looks", "look", "seems"};

const std::set<std::string, std::less<>> kStop = {
    "it",    "its",    "it's",  "is",    "are",   "was",   "were",   "has",    "have",   "had",   "be",
    "been",  "there",  "here",  "this",  "that",  "these", "those",  "i",      "i'm",    "im",    "you",
    "we",    "they",   "he",    "she",   "me",    "my",    "mine",   "your",   "yours",  "also",  "too",
    "very",  "really", "so",    "just",  "still", "now",   "again",  "then",   "and",    "or",    "but",
    "with",  "of",     "to",    "from",  "for",   "in",    "on",     "at",     "not",    "no",    "yes",
    "ok",    "okay",   "maybe", "like",  "looks", "look",  "see",    "got",    "get",    "gets",  "think",
    "color", "one",    "ones",  "thing", "things", "something", "kind", "sort", "lot",    "lots",  "bit",
    "room",  "area",   "place", "side",  "back",  "front", "left",   "right",  "corner", "middle", "top",
    "bottom", "what",  "which", "where", "who",   "how",   "do",     "does",   "did",    "can",   "could",
    "would", "should", "will",  "need",  "want",  "let",   "us",     "a",      "an",     "the",   "some",
    "any",   "all",    "about", "as",    "by",    "if",    "into",   "out",    "up",     "down",  "off",
    "actually", "probably", "might", "perhaps", "possibly", "guess", "believe", "seems", "another", "other",
    "their", "his",    "her",   "our",   "very",  "quite", "pretty", "well",   "hi",     "hey",   "hello",
    "wait",  "mean",   "sure",  "hmm",   "uh",    "um",    "yeah",   "yep",    "nope",   "don't", "isn't",
    "there's", "that's", "what's", "i'll", "ill",  "we're", "you're", "they're", "be",    "being", "am"};

// Tokens ----------------------------------------------------------------------

struct Tok {
  std::string w;
  bool punct = false;
};

std::vector<Tok> lex(std::string_view text) {
  std::vector<Tok> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && cur.back() == '\'') cur.pop_back();
    while (!cur.empty() && cur.front() == '\'') cur.erase(cur.begin());
    if (cur.empty()) return;
    if (cur == "stripped") cur = "striped";
    else if (cur == "gray") cur = "grey";
    else if (cur == "colour") cur = "color";
    else if (cur == "child's" || cur == "children's" || cur == "kid's" || cur == "kids'") cur = "childs";
    out.push_back({cur, false});
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '\'') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      if (ch == ',' || ch == '.' || ch == '?' || ch == '!' || ch == ';' || ch == ':') out.push_back({std::string(1, ch), true});
    }
  }
  flush();
  // "stair case" -> "staircase"
  std::vector<Tok> merged;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out[i].punct && out[i].w == "stair" && i + 1 < out.size() && out[i + 1].w == "case") {
      merged.push_back({"staircase", false});
      ++i;
    } else {
      merged.push_back(out[i]);
    }
  }
  return merged;
}

bool word_at(const std::vector<Tok>& t, std::size_t i, std::string_view w) {
  return i < t.size() && !t[i].punct && t[i].w == w;
}

std::optional<int> number_at(const std::vector<Tok>& t, std::size_t i) {
  if (i >= t.size() || t[i].punct) return std::nullopt;
  const auto& w = t[i].w;
  if (!w.empty() && w.size() <= 3 && std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    const int n = std::stoi(w);
    if (n >= 1) return n;
    return std::nullopt;
  }
  if (auto it = kNumberWords.find(w); it != kNumberWords.end()) return it->second;
  return std::nullopt;
}

struct Match {
  std::string canonical;
  std::size_t length = 0;
};

std::string phrase_of(const std::vector<Tok>& t, std::size_t i, std::size_t n) {
  std::string s;
  for (std::size_t k = 0; k < n; ++k) {
    if (k) s += ' ';
    s += t[i + k].w;
  }
  return s;
}

// Longest lexicon phrase starting at i (last word may be plural).
std::optional<Match> match_phrase(const std::vector<Tok>& t, std::size_t i,
                                  const std::map<std::string, std::string, std::less<>>& lexicon) {
  for (std::size_t n = 3; n >= 1; --n) {
    if (i + n > t.size()) continue;
    bool words_only = true;
    for (std::size_t k = 0; k < n; ++k) words_only = words_only && !t[i + k].punct;
    if (!words_only) continue;
    std::string p = phrase_of(t, i, n);
    if (auto it = lexicon.find(p); it != lexicon.end()) return Match{it->second, n};
    std::string head = n > 1 ? phrase_of(t, i, n - 1) + " " : std::string();
    const std::string sing = head + text::singular(t[i + n - 1].w);
    if (sing != p) {
      if (auto it = lexicon.find(sing); it != lexicon.end()) return Match{it->second, n};
    }
  }
  return std::nullopt;
}

std::optional<Match> match_room(const std::vector<Tok>& t, std::size_t i) {
  if (auto m = match_phrase(t, i, kRooms)) return m;
  // "<word> room" for rooms outside the lexicon ("the red room").
  if (i + 1 < t.size() && !t[i].punct && word_at(t, i + 1, "room") && !kStop.contains(t[i].w) &&
      !kDeterminers.contains(t[i].w) && !number_at(t, i) && !match_phrase(t, i, kObjects))
    return Match{t[i].w + " room", 2};
  return std::nullopt;
}

std::vector<std::string> colors_of(const std::vector<std::string>& mods) {
  std::vector<std::string> out;
  for (const auto& m : mods) {
    if (is_color(m)) out.push_back(m);
  }
  return out;
}

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string article_phrase(std::string_view phrase) {
  return std::string(text::article_for(phrase)) + " " + std::string(phrase);
}

// Content words of a location phrase, for loose comparison.
std::set<std::string> location_words(std::string_view loc) {
  static const std::set<std::string, std::less<>> kIgnore = {"the", "a", "an", "of", "on", "at", "in", "to", "by", "it"};
  std::set<std::string> out;
  for (auto& w : text::word_tokens(loc)) {
    if (!kIgnore.contains(w)) out.insert(text::singular(w));
  }
  return out;
}

bool location_matches(std::string_view wanted, std::string_view have) {
  const auto w = location_words(wanted);
  const auto h = location_words(have);
  if (w.empty()) return true;
  return std::includes(h.begin(), h.end(), w.begin(), w.end());
}

}  // namespace

bool is_color(std::string_view word) { return kColors.contains(word); }

bool is_modifier(std::string_view word) { return kColors.contains(word) || kModifiers.contains(word); }

std::optional<std::string> canonical_object(std::string_view phrase) {
  const auto t = lex(phrase);
  if (t.empty()) return std::nullopt;
  if (auto m = match_phrase(t, 0, kObjects); m && m->length == t.size()) return m->canonical;
  return std::nullopt;
}

std::optional<std::string> find_room(std::string_view text) {
  const auto t = lex(text);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (auto m = match_room(t, i)) return m->canonical;
  }
  return std::nullopt;
}

std::string room_display(std::string_view room) {
  if (room == "outside") return "outdoor area";
  return std::string(room);
}

std::vector<std::string> assumed_objects(std::string_view room) {
  if (auto it = kAssumed.find(room); it != kAssumed.end()) return it->second;
  return {};
}

std::optional<std::string> part_owner(std::string_view name) {
  if (auto it = kPartOwner.find(name); it != kPartOwner.end()) return it->second;
  return std::nullopt;
}

// Interpretation --------------------------------------------------------------

Interpretation interpret(std::string_view text) {
  Interpretation in;
  const auto t = lex(text);
  const auto ws = text::words(text);
  const std::string low = " " + text::join(ws, " ") + " ";
  auto has = [&](std::string_view phrase) { return low.find(" " + std::string(phrase) + " ") != std::string::npos; };
  in.hedged = has("maybe") || has("might") || has("probably") || has("perhaps") || has("possibly") ||
              has("somewhere") || has("i think") || has("not sure") || has("i guess");
  in.correction = has("actually") || has("i mean") || has("correction") || has("no wait") || has("instead");
  in.removal = has("remove") || has("removed") || has("gone") || has("took away") || has("no longer");
  in.move = has("move") || has("moved") || has("put") || has("placed") || has("relocate") || has("bigger") ||
            has("smaller") || has("larger");

  std::vector<bool> consumed(t.size(), false);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (auto m = match_room(t, i)) {
      if (in.room.empty()) in.room = m->canonical;
      for (std::size_t k = 0; k < m->length; ++k) consumed[i + k] = true;
      i += m->length - 1;
    }
  }

  std::vector<std::string> pending;
  int count = 0;
  std::optional<std::size_t> clause_entity;
  bool copula = false;
  auto flush_pending = [&] {
    if (!pending.empty()) {
      if (clause_entity && copula) {
        auto& mods = in.entities[*clause_entity].modifiers;
        for (auto& p : pending) {
          if (!contains(mods, p)) mods.push_back(p);
        }
      } else {
        for (auto& p : pending) in.dangling.push_back(p);
      }
    }
    pending.clear();
    count = 0;
  };

  auto parse_location = [&](std::size_t j) -> std::pair<std::string, std::size_t> {
    if (j >= t.size() || t[j].punct || consumed[j] || !kPreps.contains(t[j].w)) return {"", j};
    const std::string& p = t[j].w;
    if (p == "next" && !word_at(t, j + 1, "to")) return {"", j};
    if (p == "in") {
      if (word_at(t, j + 1, "it") || word_at(t, j + 1, "here") || word_at(t, j + 1, "there")) return {"", j + 2};
      std::size_t k = j + 1;
      while (k < t.size() && !t[k].punct && kDeterminers.contains(t[k].w)) ++k;
      if (k < t.size() && consumed[k]) {
        while (k < t.size() && consumed[k]) ++k;
        return {"", k};
      }
    }
    std::size_t k = j;
    std::vector<std::string> words;
    while (k < t.size() && !t[k].punct && words.size() < 8) {
      const auto& w = t[k].w;
      if (k > j && (w == "and" || w == "with" || w == "that" || w == "which" || w == "but" || w == "while")) break;
      if (consumed[k]) break;
      words.push_back(w);
      ++k;
    }
    if (words.size() < 2) return {"", j};
    // "move the lamp to the window" places it next to the window.
    if (p == "to") words.insert(words.begin(), "next");
    return {text::join(words, " "), k};
  };

  for (std::size_t i = 0; i < t.size(); ++i) {
    if (consumed[i]) {
      flush_pending();
      continue;
    }
    const auto& tok = t[i];
    if (tok.punct) {
      flush_pending();
      clause_entity.reset();
      copula = false;
      continue;
    }
    const std::string& w = tok.w;
    if (auto n = number_at(t, i)) {
      count = *n;
      if (w == "couple" && word_at(t, i + 1, "of")) ++i;
      continue;
    }
    if (w == "and" && !pending.empty() && i + 1 < t.size() && !t[i + 1].punct && is_modifier(t[i + 1].w)) continue;
    const auto obj = match_phrase(t, i, kObjects);
    if (is_modifier(w) && !(obj && obj->length > 1)) {
      // A modifier word that is also the last word before a noun stays a modifier.
      pending.push_back(w);
      continue;
    }
    std::optional<std::string> name;
    std::size_t len = 1;
    if (obj) {
      name = obj->canonical;
      len = obj->length;
    } else if ((!pending.empty() || count > 0) && !kStop.contains(w) && !kDeterminers.contains(w) &&
               !kPreps.contains(w) && std::isalpha(static_cast<unsigned char>(w.front()))) {
      name = text::singular(w);
    }
    if (name) {
      Entity e;
      e.name = *name;
      e.modifiers = pending;
      e.count = count > 1 ? count : 1;
      e.outline = in.hedged ? Outline::Red : Outline::Black;
      pending.clear();
      count = 0;
      auto [loc, next] = parse_location(i + len);
      e.location = loc;
      in.entities.push_back(std::move(e));
      clause_entity = in.entities.size() - 1;
      copula = false;
      i = next - 1;
      continue;
    }
    if (kCopulas.contains(w)) copula = true;
  }
  flush_pending();
  return in;
}

// Rendering -------------------------------------------------------------------

std::string modifier_phrase(const std::vector<std::string>& modifiers) {
  std::string out;
  for (std::size_t i = 0; i < modifiers.size(); ++i) {
    if (i) out += (is_color(modifiers[i - 1]) && is_color(modifiers[i])) ? " and " : " ";
    out += modifiers[i];
  }
  return out;
}

namespace {

std::string noun_phrase(const Entity& e) {
  const std::string noun = e.count > 1 ? text::plural(e.name) : e.name;
  const std::string mods = modifier_phrase(e.modifiers);
  const std::string body = mods.empty() ? noun : mods + " " + noun;
  if (e.count > 1) return std::to_string(e.count) + " " + body;
  return article_phrase(body);
}

}  // namespace

std::string render_phrase(const Entity& e) {
  std::string out = noun_phrase(e);
  if (!e.location.empty()) out += " " + e.location;
  if (!e.part.empty()) out += " that has " + e.part;
  return out;
}

std::string render_item(const Entity& e) {
  std::string out = noun_phrase(e) + " (in " + std::string(to_string(e.outline)) + " outline)";
  if (!e.location.empty()) out += " " + e.location;
  if (!e.part.empty()) out += " that has " + e.part;
  return out;
}

std::string render_ref(const Entity& e, bool disambiguate) {
  std::string out = "the ";
  if (disambiguate && !e.modifiers.empty()) out += text::join(e.modifiers, " ") + " ";
  out += e.count > 1 ? text::plural(e.name) : e.name;
  return out;
}

std::vector<std::string> to_attributes(const Entity& e) {
  std::vector<std::string> out = e.modifiers;
  if (e.count > 1) out.push_back(std::to_string(e.count));
  if (!e.location.empty()) out.push_back(e.location);
  if (!e.part.empty()) out.push_back("has " + e.part);
  return out;
}

Entity from_object(const CanvasObject& o) {
  Entity e;
  e.name = o.name;
  e.outline = o.outline;
  for (const auto& a : o.attributes) {
    if (!a.empty() && std::all_of(a.begin(), a.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      e.count = std::stoi(a);
    } else if (a.rfind("has ", 0) == 0) {
      e.part = a.substr(4);
    } else if (a.find(' ') != std::string::npos) {
      e.location = a;
    } else {
      e.modifiers.push_back(a);
    }
  }
  return e;
}

// Prompt parsing --------------------------------------------------------------

namespace {

std::vector<std::string> split_sentences(std::string_view prompt) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < prompt.size(); ++i) {
    const char c = prompt[i];
    if (c == '.' && (i + 1 == prompt.size() || std::isspace(static_cast<unsigned char>(prompt[i + 1])))) {
      auto s = text::trimmed(cur);
      if (!s.empty()) out.push_back(std::move(s));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  auto s = text::trimmed(cur);
  if (!s.empty()) out.push_back(std::move(s));
  return out;
}

struct Marker {
  std::size_t begin;
  std::size_t end;
  Outline outline;
};

std::vector<Marker> find_markers(std::string_view s) {
  std::vector<Marker> out;
  std::size_t pos = 0;
  while ((pos = s.find("(in ", pos)) != std::string_view::npos) {
    const auto close = s.find(" outline)", pos);
    if (close == std::string_view::npos) break;
    const auto color = parse_outline(s.substr(pos + 4, close - pos - 4));
    if (color) out.push_back({pos, close + 9, *color});
    pos = close + 9;
  }
  return out;
}

bool starts_with_determiner(std::string_view s) {
  const auto ws = text::words(s);
  if (ws.empty()) return false;
  const auto& w = ws.front();
  return w == "a" || w == "an" || w == "the" || w == "some" || kNumberWords.contains(w) ||
         std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::string strip_joiners(std::string_view s) {
  std::string_view v = text::trim(s);
  bool changed = true;
  while (changed) {
    changed = false;
    if (!v.empty() && v.front() == ',') {
      v = text::trim(v.substr(1));
      changed = true;
    }
    if (!v.empty() && v.back() == ',') {
      v = text::trim(v.substr(0, v.size() - 1));
      changed = true;
    }
    if (text::starts_with_ci(v, "and ")) {
      v = text::trim(v.substr(4));
      changed = true;
    }
    if (v.size() >= 4 && v.substr(v.size() - 4) == " and") {
      v = text::trim(v.substr(0, v.size() - 4));
      changed = true;
    }
  }
  return std::string(v);
}

Entity parse_item(std::string_view head, Outline outline, std::string_view trailing) {
  Entity e;
  const auto in = interpret(head);
  if (!in.entities.empty()) {
    e = in.entities.front();
  } else {
    const auto ws = text::words(head);
    e.name = ws.empty() ? std::string("object") : text::singular(ws.back());
  }
  e.outline = outline;
  std::string tail = strip_joiners(trailing);
  if (const auto p = tail.find("that has "); p != std::string::npos) {
    e.part = text::trimmed(std::string_view(tail).substr(p + 9));
    tail = text::trimmed(std::string_view(tail).substr(0, p));
  }
  e.location = tail;
  return e;
}

// Splits "a bed (in blue outline), a lamp (in blue outline), and ..." into entities.
std::vector<Entity> parse_item_list(std::string_view s) {
  const auto markers = find_markers(s);
  std::vector<Entity> out;
  std::vector<std::size_t> head_start(markers.size(), 0);
  for (std::size_t k = 1; k < markers.size(); ++k) {
    const std::size_t lo = markers[k - 1].end;
    const std::size_t hi = markers[k].begin;
    std::size_t chosen = lo;
    // Nearest separator before the marker whose following text starts with a determiner.
    for (std::size_t p = hi; p-- > lo;) {
      const bool comma = s[p] == ',';
      const bool conj = p + 5 <= s.size() && s.substr(p, 5) == " and ";
      if (!comma && !conj) continue;
      const std::size_t after = comma ? p + 1 : p + 5;
      if (after < hi && starts_with_determiner(s.substr(after, hi - after))) {
        chosen = p;
        break;
      }
    }
    head_start[k] = chosen;
  }
  for (std::size_t k = 0; k < markers.size(); ++k) {
    const std::size_t hs = head_start[k];
    const std::size_t trail_end = k + 1 < markers.size() ? head_start[k + 1] : s.size();
    const auto head = strip_joiners(s.substr(hs, markers[k].begin - hs));
    const auto trailing = s.substr(markers[k].end, trail_end - markers[k].end);
    out.push_back(parse_item(head, markers[k].outline, trailing));
  }
  return out;
}

std::string room_from_display(std::string_view display) {
  if (display == "outdoor area") return "outside";
  if (auto r = find_room(display)) return *r;
  return text::trimmed(display);
}

std::string ref_before_marker(std::string_view s) {
  const auto m = s.find(" (in ");
  return text::trimmed(m == std::string_view::npos ? s : s.substr(0, m));
}

}  // namespace

ParsedPrompt parse_prompt(std::string_view prompt) {
  ParsedPrompt p;
  for (const auto& sentence : split_sentences(prompt)) {
    std::string_view s = sentence;
    if (text::starts_with_ci(s, "A clean, minimalist, iconic scene")) {
      p.creation = true;
    } else if (text::starts_with_ci(s, "Solid white background")) {
      continue;
    } else if (s.rfind("In a ", 0) == 0 || s.rfind("In an ", 0) == 0) {
      p.creation = true;
      std::string_view rest = s.substr(s.find(' ', 3) + 1);
      const auto comma = rest.find(',');
      p.room = room_from_display(comma == std::string_view::npos ? rest : rest.substr(0, comma));
      if (comma != std::string_view::npos) {
        for (auto& e : parse_item_list(rest.substr(comma + 1))) p.ops.push_back({PromptOp::Kind::Add, "", e});
      }
    } else if (s.rfind("Add ", 0) == 0) {
      for (auto& e : parse_item_list(s.substr(4))) p.ops.push_back({PromptOp::Kind::Add, "", e});
    } else if (s.rfind("Remove ", 0) == 0) {
      p.ops.push_back({PromptOp::Kind::Remove, ref_before_marker(s.substr(7)), {}});
    } else if (s.rfind("Replace ", 0) == 0) {
      const auto markers = find_markers(s);
      const std::size_t from = markers.empty() ? 8 : markers.front().end;
      const auto with = s.find(" with ", from);
      if (with == std::string_view::npos) continue;
      const auto items = parse_item_list(s.substr(with + 6));
      if (items.empty()) continue;
      p.ops.push_back({PromptOp::Kind::Replace, ref_before_marker(s.substr(8, with - 8)), items.front()});
    } else if (s.rfind("DELETE ", 0) == 0) {
      const auto sep = s.find("$$$");
      if (sep == std::string_view::npos) continue;
      p.ops.push_back({PromptOp::Kind::Remove, ref_before_marker(s.substr(7, sep - 7)), {}});
      std::string_view add = text::trim(s.substr(sep + 3));
      if (add.rfind("ADD ", 0) == 0) add = add.substr(4);
      for (auto& e : parse_item_list(add)) p.ops.push_back({PromptOp::Kind::Add, "", e});
    } else if (s.rfind("Keep ", 0) == 0) {
      std::string_view body = s.substr(5);
      const auto unchanged = body.rfind(" unchanged");
      if (unchanged != std::string_view::npos) body = body.substr(0, unchanged);
      if (body.rfind("the ", 0) == 0) body = body.substr(4);
      std::string list = text::replace_all(std::string(body), ", and ", ", ");
      list = text::replace_all(list, " and ", ", ");
      for (auto& part : text::split(list, ',')) {
        auto name = text::trimmed(part);
        if (name.rfind("the ", 0) == 0) name = name.substr(4);
        if (!name.empty()) p.keep.push_back("the " + name);
      }
    }
  }
  return p;
}

std::optional<std::size_t> resolve_ref(const std::vector<Entity>& entities, std::string_view ref) {
  auto ws = text::words(ref);
  while (!ws.empty() && (ws.front() == "the" || ws.front() == "a" || ws.front() == "an")) ws.erase(ws.begin());
  if (ws.empty()) return std::nullopt;
  std::optional<std::size_t> fallback;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const auto name_words = text::words(entities[i].name);
    if (name_words.size() > ws.size()) continue;
    bool tail = true;
    for (std::size_t k = 0; k < name_words.size(); ++k) {
      const auto& have = ws[ws.size() - name_words.size() + k];
      const bool last = k + 1 == name_words.size();
      tail = tail && (have == name_words[k] || (last && text::singular(have) == name_words[k]));
    }
    if (!tail) {
      // Aliases such as "stairs" for staircase.
      if (auto c = canonical_object(ws.back()); !(c && *c == entities[i].name)) continue;
    }
    const std::size_t prefix = ws.size() - (tail ? name_words.size() : 1);
    bool mods_ok = true;
    for (std::size_t k = 0; k < prefix; ++k) {
      if (std::all_of(ws[k].begin(), ws[k].end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) continue;
      mods_ok = mods_ok && contains(entities[i].modifiers, ws[k]);
    }
    if (mods_ok) return i;
    if (!fallback && prefix == 0) fallback = i;
  }
  return fallback;
}

void apply(SceneState& state, const ParsedPrompt& prompt) {
  if (prompt.creation) {
    state.room = prompt.room;
    state.entities.clear();
  }
  for (const auto& op : prompt.ops) {
    switch (op.kind) {
      case PromptOp::Kind::Add:
        state.entities.push_back(op.entity);
        break;
      case PromptOp::Kind::Remove:
        if (auto i = resolve_ref(state.entities, op.ref)) state.entities.erase(state.entities.begin() + static_cast<std::ptrdiff_t>(*i));
        break;
      case PromptOp::Kind::Replace:
        if (auto i = resolve_ref(state.entities, op.ref)) state.entities[*i] = op.entity;
        else state.entities.push_back(op.entity);
        break;
    }
  }
}

SceneState replay(const std::vector<std::string>& prompts) {
  SceneState s;
  for (const auto& p : prompts) apply(s, parse_prompt(p));
  return s;
}

// Prompt composition ------------------------------------------------------------

namespace {

struct EditOp {
  enum class Kind { Add, Replace, Remove, Move };
  Kind kind = Kind::Add;
  std::string ref;
  Entity before;
  Entity after;
};

// Working copy of a scene's entities that remembers which base entries are untouched.
struct Workspace {
  std::vector<Entity> cur;
  std::vector<std::ptrdiff_t> origin;  // index into the base list, -1 once changed
  std::string room;
  bool structural = true;
  std::vector<EditOp> ops;

  std::optional<std::size_t> find_name(std::string_view name) const {
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (cur[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::size_t same_name(std::string_view name) const {
    return static_cast<std::size_t>(std::count_if(cur.begin(), cur.end(), [&](const Entity& e) { return e.name == name; }));
  }

  std::string ref(std::size_t i) const { return render_ref(cur[i], same_name(cur[i].name) > 1); }

  std::optional<std::size_t> best_match(const Entity& m) const {
    const auto cm = colors_of(m.modifiers);
    std::optional<std::size_t> first;
    std::optional<std::size_t> uncolored;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (cur[i].name != m.name) continue;
      if (!first) first = i;
      const auto ce = colors_of(cur[i].modifiers);
      if (!cm.empty() && ce == cm) return i;
      if (ce.empty() && !uncolored) uncolored = i;
    }
    return uncolored ? uncolored : first;
  }

  void add(Entity e) {
    ops.push_back({EditOp::Kind::Add, "", {}, e});
    cur.push_back(std::move(e));
    origin.push_back(-1);
  }

  void replace(std::size_t i, Entity after) {
    if (after == cur[i]) return;
    ops.push_back({EditOp::Kind::Replace, ref(i), cur[i], after});
    cur[i] = std::move(after);
    origin[i] = -1;
  }

  void remove(std::size_t i) {
    ops.push_back({EditOp::Kind::Remove, ref(i), cur[i], {}});
    cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(i));
    origin.erase(origin.begin() + static_cast<std::ptrdiff_t>(i));
  }

  void move(std::size_t i, Entity after) {
    ops.push_back({EditOp::Kind::Move, ref(i), cur[i], after});
    cur.erase(cur.begin() + static_cast<std::ptrdiff_t>(i));
    origin.erase(origin.begin() + static_cast<std::ptrdiff_t>(i));
    cur.push_back(std::move(after));
    origin.push_back(-1);
  }

  void ensure_floor() {
    if (!structural || find_name("floor")) return;
    Entity floor;
    floor.name = "floor";
    floor.outline = Outline::Blue;
    add(floor);
  }

  // Objects that hang on a wall get a wall (and its floor) when none exists.
  void ensure_support(Entity& m) {
    if (!structural || m.name == "wall" || m.name == "floor") return;
    const bool needs = kNeedsWall.contains(m.name) || location_words(m.location).contains("wall");
    if (!needs || find_name("wall")) return;
    Entity wall;
    wall.name = "wall";
    wall.outline = Outline::Blue;
    for (const char* side : {"back", "front", "left", "right", "far"}) {
      if (location_words(m.location).contains(side)) {
        wall.location = std::string("at the ") + side + " of the " + room_display(room.empty() ? "room" : room);
        m.location = std::string("on the ") + side + " wall";
        break;
      }
    }
    add(wall);
    ensure_floor();
  }
};

Entity merge(const Entity& e, const Entity& m) {
  Entity r = e;
  if (!colors_of(m.modifiers).empty()) {
    std::erase_if(r.modifiers, [](const std::string& s) { return is_color(s); });
  }
  for (const auto& mod : m.modifiers) {
    if (!contains(r.modifiers, mod)) r.modifiers.push_back(mod);
  }
  if (m.count > 1) r.count = m.count;
  if (!m.location.empty()) r.location = m.location;
  if (!m.part.empty()) r.part = m.part;
  r.outline = e.outline == Outline::Black ? Outline::Black : m.outline;
  return r;
}

// "the bed has a striped bedspread": the part rides on its owner mention.
std::vector<Entity> fold_parts(const std::vector<Entity>& mentions) {
  std::vector<Entity> out = mentions;
  for (std::size_t i = 0; i < out.size();) {
    const auto owner = part_owner(out[i].name);
    auto it = owner ? std::find_if(out.begin(), out.end(), [&](const Entity& e) { return e.name == *owner; }) : out.end();
    if (it == out.end()) {
      ++i;
      continue;
    }
    Entity part = out[i];
    part.location.clear();
    part.part.clear();
    it->part = render_phrase(part);
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return out;
}

void plan_edits(Workspace& ws, const Interpretation& in) {
  for (Entity m : fold_parts(in.entities)) {
    if (in.removal) {
      if (auto i = ws.best_match(m)) ws.remove(*i);
      continue;
    }
    if (auto owner = part_owner(m.name)) {
      if (auto oi = ws.find_name(*owner)) {
        Entity part = m;
        part.location.clear();
        part.part.clear();
        Entity after = ws.cur[*oi];
        after.part = render_phrase(part);
        after.outline = after.outline == Outline::Black ? Outline::Black : m.outline;
        ws.replace(*oi, after);
        continue;
      }
    }
    const auto idx = ws.best_match(m);
    if (!idx) {
      ws.ensure_support(m);
      const bool is_wall = m.name == "wall";
      ws.add(m);
      if (is_wall) ws.ensure_floor();
      continue;
    }
    const Entity& e = ws.cur[*idx];
    const bool resized = std::any_of(m.modifiers.begin(), m.modifiers.end(), [](const std::string& s) { return kSizeWords.contains(s); });
    if (in.move && (!m.location.empty() || resized)) {
      ws.move(*idx, merge(e, m));
      continue;
    }
    const auto cm = colors_of(m.modifiers);
    const auto ce = colors_of(e.modifiers);
    if (!cm.empty() && !ce.empty() && cm != ce && !in.correction) {
      // A differently colored object of the same kind is a separate object.
      ws.add(m);
      continue;
    }
    if (e.outline == Outline::Blue) {
      Entity after = merge(e, m);
      after.outline = m.outline;
      ws.replace(*idx, after);
      continue;
    }
    ws.replace(*idx, merge(e, m));
  }
  if (!in.dangling.empty() && !in.removal) {
    std::optional<std::size_t> target;
    for (std::size_t i = ws.cur.size(); i-- > 0;) {
      if (ws.cur[i].outline != Outline::Blue) {
        target = i;
        break;
      }
    }
    if (target) {
      Entity m;
      m.name = ws.cur[*target].name;
      m.modifiers = in.dangling;
      m.outline = in.hedged ? Outline::Red : Outline::Black;
      ws.replace(*target, merge(ws.cur[*target], m));
    }
  }
}

Workspace workspace_for(const std::vector<Entity>& base, std::string room, bool structural) {
  Workspace ws;
  ws.cur = base;
  ws.room = std::move(room);
  ws.structural = structural;
  for (std::size_t i = 0; i < base.size(); ++i) ws.origin.push_back(static_cast<std::ptrdiff_t>(i));
  return ws;
}

}  // namespace

std::string compose_creation_prompt(std::string_view delta, std::string_view frame_meta) {
  const auto in = interpret(delta);
  std::string room = in.room;
  if (room.empty()) {
    const std::string label = text::trimmed(frame_meta.substr(0, std::min(frame_meta.find(':'), frame_meta.size())));
    if (auto r = find_room(label)) room = *r;
    else room = label.empty() ? "room" : text::lower(label);
  }

  std::vector<Entity> explicit_items;
  std::vector<Entity> assumed;
  for (const auto& name : assumed_objects(room)) {
    Entity e;
    e.name = name;
    e.outline = Outline::Blue;
    assumed.push_back(e);
  }
  for (const auto& m : in.entities) {
    if (auto owner = part_owner(m.name)) {
      Entity part = m;
      part.location.clear();
      auto it = std::find_if(explicit_items.begin(), explicit_items.end(), [&](const Entity& e) { return e.name == *owner; });
      if (it == explicit_items.end()) {
        auto at = std::find_if(assumed.begin(), assumed.end(), [&](const Entity& e) { return e.name == *owner; });
        if (at != assumed.end()) {
          Entity o = *at;
          assumed.erase(at);
          o.outline = m.outline;
          explicit_items.push_back(o);
          it = explicit_items.end() - 1;
        }
      }
      if (it != explicit_items.end()) {
        it->part = render_phrase(part);
        continue;
      }
    }
    explicit_items.push_back(m);
  }
  std::erase_if(assumed, [&](const Entity& a) {
    return std::any_of(explicit_items.begin(), explicit_items.end(), [&](const Entity& e) { return e.name == a.name; });
  });

  Workspace ws = workspace_for({}, room, true);
  for (auto m : explicit_items) {
    ws.ensure_support(m);
    const bool is_wall = m.name == "wall";
    ws.add(m);
    if (is_wall) ws.ensure_floor();
  }
  // Explicit first, then structural pairs, then assumptions within the budget.
  std::vector<Entity> items;
  std::vector<Entity> structural;
  for (const auto& e : ws.cur) (e.outline == Outline::Blue ? structural : items).push_back(e);
  for (auto& s : structural) items.push_back(s);
  const std::ptrdiff_t budget = std::max<std::ptrdiff_t>(0, 3 - static_cast<std::ptrdiff_t>(items.size()));
  for (std::ptrdiff_t k = 0; k < budget && k < static_cast<std::ptrdiff_t>(assumed.size()); ++k) items.push_back(assumed[k]);

  std::vector<std::string> rendered;
  for (const auto& e : items) rendered.push_back(render_item(e));
  std::string out = "A clean, minimalist, iconic scene. In " + article_phrase(room_display(room));
  if (!rendered.empty()) out += ", " + text::oxford_list(rendered);
  out += ". Solid white background, no shadows.";
  return out;
}

std::string compose_edit_prompt(std::string_view delta, const std::vector<std::string>& history) {
  if (history.empty()) fail(ErrorCode::PreconditionViolation, "edit prompt needs a prompt history");
  return compose_edit_prompt(delta, replay(history));
}

SceneState state_of(const Canvas& canvas) {
  SceneState s;
  s.room = canvas.scene;
  for (const auto& o : canvas.objects) s.entities.push_back(from_object(o));
  return s;
}

std::string compose_edit_prompt(std::string_view delta, const SceneState& base) {
  Workspace ws = workspace_for(base.entities, base.room, true);
  plan_edits(ws, interpret(delta));

  std::vector<std::string> sentences;
  for (const auto& op : ws.ops) {
    switch (op.kind) {
      case EditOp::Kind::Add:
        sentences.push_back("Add " + render_item(op.after) + ".");
        break;
      case EditOp::Kind::Replace:
        sentences.push_back("Replace " + op.ref + " (in " + std::string(to_string(op.before.outline)) + " outline) with " +
                            render_item(op.after) + ".");
        break;
      case EditOp::Kind::Remove:
        sentences.push_back("Remove " + op.ref + ".");
        break;
      case EditOp::Kind::Move:
        sentences.push_back("DELETE " + op.ref + " $$$ ADD " + render_item(op.after) + ".");
        break;
    }
  }
  std::vector<std::string> keep;
  for (std::size_t i = 0; i < ws.cur.size(); ++i) {
    if (ws.origin[i] < 0) continue;
    const auto& e = base.entities[static_cast<std::size_t>(ws.origin[i])];
    const auto same = std::count_if(base.entities.begin(), base.entities.end(), [&](const Entity& b) { return b.name == e.name; });
    keep.push_back(render_ref(e, same > 1).substr(4));
  }
  if (!keep.empty()) sentences.push_back("Keep the " + text::oxford_list(keep) + " unchanged.");
  if (sentences.empty()) sentences.push_back("No changes.");
  return text::join(sentences, " ");
}

int count_outline(std::string_view prompt, Outline o) {
  const std::string needle = "(in " + std::string(to_string(o)) + " outline)";
  int n = 0;
  for (std::size_t pos = prompt.find(needle); pos != std::string_view::npos; pos = prompt.find(needle, pos + 1)) ++n;
  return n;
}

// Facts -------------------------------------------------------------------------

std::vector<std::string> entity_facts(const Entity& e) {
  if (e.outline == Outline::Blue) return {};
  std::vector<std::string> out;
  const bool many = e.count > 1;
  const std::string noun = many ? text::plural(e.name) : e.name;
  const std::string subject = "The " + noun;
  const std::string verb = many ? " are " : " is ";
  out.push_back(many ? "There are " + std::to_string(e.count) + " " + noun : "There is " + article_phrase(e.name));
  for (const auto& m : e.modifiers) out.push_back(subject + verb + m);
  if (!e.location.empty()) out.push_back(subject + verb + e.location);
  if (!e.part.empty()) out.push_back(subject + (many ? " have " : " has ") + e.part);
  return out;
}

std::string scene_fact(std::string_view room) { return "The scene is " + article_phrase(room_display(room)); }

std::vector<std::string> decompose(std::string_view delta, const std::vector<std::string>& history) {
  std::vector<std::string> out;
  auto push = [&](const std::string& f) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  };
  const auto in = interpret(delta);
  if (!in.removal) {
    for (const auto& e : in.entities) {
      for (const auto& f : entity_facts(e)) push(f);
    }
  }
  if (!in.room.empty()) push(scene_fact(in.room));
  const auto state = replay(history);
  if (!state.room.empty()) push(scene_fact(state.room));
  for (const auto& e : state.entities) {
    for (const auto& f : entity_facts(e)) push(f);
  }
  return out;
}

namespace {

struct Seen {
  Entity entity;
  Box box;
};

std::vector<Seen> flatten(const Canvas& c) {
  std::vector<Seen> out;
  for (const auto& o : c.objects) {
    Entity e = from_object(o);
    out.push_back({e, o.box});
    if (!e.part.empty()) {
      const auto in = interpret(e.part);
      if (!in.entities.empty()) out.push_back({in.entities.front(), o.box});
    }
  }
  return out;
}

std::string canonical_name(std::string_view phrase) {
  if (auto c = canonical_object(phrase)) return *c;
  const auto ws = text::words(phrase);
  return ws.empty() ? std::string() : text::singular(text::join(ws, " "));
}

}  // namespace

std::optional<Box> check_fact(const Canvas& canvas, std::string_view fact) {
  std::string f = text::trimmed(fact);
  while (!f.empty() && (f.back() == '.' || f.back() == '!')) f.pop_back();
  const auto seen = flatten(canvas);
  const Box full{0, 0, canvas.height, canvas.width};

  if (text::starts_with_ci(f, "The scene is ")) {
    std::string rest = text::lower(f.substr(13));
    for (const char* art : {"a ", "an ", "the "}) {
      if (rest.rfind(art, 0) == 0) {
        rest = rest.substr(std::string_view(art).size());
        break;
      }
    }
    const std::string room = room_from_display(rest);
    if (!canvas.scene.empty() && (room == canvas.scene || rest == room_display(canvas.scene))) return full;
    return std::nullopt;
  }
  if (text::starts_with_ci(f, "There is ") || text::starts_with_ci(f, "There are ")) {
    const auto in = interpret(f.substr(text::starts_with_ci(f, "There is ") ? 9 : 10));
    if (in.entities.empty()) return std::nullopt;
    const auto& want = in.entities.front();
    for (const auto& s : seen) {
      if (s.entity.name != want.name) continue;
      if (!std::all_of(want.modifiers.begin(), want.modifiers.end(), [&](const std::string& m) { return contains(s.entity.modifiers, m); })) continue;
      if (want.count > 1 && s.entity.count != want.count) continue;
      if (!want.location.empty() && !location_matches(want.location, s.entity.location)) continue;
      return s.box;
    }
    return std::nullopt;
  }
  if (text::starts_with_ci(f, "The ")) {
    const std::string body = f.substr(4);
    std::size_t best = std::string::npos;
    std::string verb;
    for (const char* v : {" is ", " are ", " has ", " have "}) {
      const auto p = body.find(v);
      if (p != std::string::npos && p < best) {
        best = p;
        verb = v;
      }
    }
    if (best == std::string::npos) return std::nullopt;
    const std::string name = canonical_name(body.substr(0, best));
    const std::string rest = text::trimmed(std::string_view(body).substr(best + verb.size()));
    if (verb == " has " || verb == " have ") {
      const auto in = interpret(rest);
      if (in.entities.empty()) return std::nullopt;
      const auto& want = in.entities.front();
      for (const auto& s : seen) {
        if (s.entity.name != name || s.entity.part.empty()) continue;
        const auto have = interpret(s.entity.part);
        if (have.entities.empty() || have.entities.front().name != want.name) continue;
        const auto& hm = have.entities.front().modifiers;
        if (std::all_of(want.modifiers.begin(), want.modifiers.end(), [&](const std::string& m) { return contains(hm, m); }))
          return s.box;
      }
      return std::nullopt;
    }
    const auto first = text::words(rest);
    if (first.empty()) return std::nullopt;
    const bool is_location = kPreps.contains(first.front());
    for (const auto& s : seen) {
      if (s.entity.name != name) continue;
      if (is_location) {
        if (location_matches(rest, s.entity.location)) return s.box;
        continue;
      }
      bool ok = true;
      for (const auto& w : first) {
        if (w == "and") continue;
        if (std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
          ok = ok && s.entity.count == std::stoi(w);
        } else {
          ok = ok && contains(s.entity.modifiers, w == "gray" ? "grey" : w);
        }
      }
      if (ok) return s.box;
    }
    return std::nullopt;
  }
  return std::nullopt;
}

// Summaries -----------------------------------------------------------------------

namespace {

struct Record {
  enum class Kind { Scene, Explicit, Implied, Uncertain, Other };
  Kind kind = Kind::Other;
  Entity entity;
  std::string text;
};

std::string render_record(const Record& r, std::string_view room) {
  switch (r.kind) {
    case Record::Kind::Scene:
      return "The scene is " + article_phrase(room_display(r.text)) + ".";
    case Record::Kind::Explicit: {
      const bool many = r.entity.count > 1;
      return std::string(many ? "There are " : "There is ") + render_phrase(r.entity) + ".";
    }
    case Record::Kind::Implied: {
      const std::string where = room.empty() ? std::string("room") : room_display(room);
      std::string s = article_phrase(where);
      s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
      return s + " usually has " + article_phrase(r.entity.name) + ".";
    }
    case Record::Kind::Uncertain:
      return "User believes there might be " + render_phrase(r.entity) + ".";
    case Record::Kind::Other:
      return r.text;
  }
  return r.text;
}

std::optional<Entity> entity_with_part(std::string_view phrase) {
  std::string_view main = phrase;
  std::string part;
  if (const auto p = phrase.find(" that has "); p != std::string_view::npos) {
    main = phrase.substr(0, p);
    part = text::trimmed(phrase.substr(p + 10));
  }
  auto in = interpret(main);
  if (in.entities.empty()) return std::nullopt;
  Entity e = in.entities.front();
  e.part = part;
  return e;
}

std::vector<Record> parse_summary(std::string_view summary) {
  std::vector<Record> out;
  for (const auto& sentence : split_sentences(summary)) {
    Record r;
    r.text = sentence + ".";
    std::string_view s = sentence;
    if (text::starts_with_ci(s, "The scene is ")) {
      std::string rest = text::lower(s.substr(13));
      for (const char* art : {"a ", "an ", "the "}) {
        if (rest.rfind(art, 0) == 0) {
          rest = rest.substr(std::string_view(art).size());
          break;
        }
      }
      r.kind = Record::Kind::Scene;
      r.text = room_from_display(rest);
    } else if (const auto p = s.find(" usually has "); p != std::string_view::npos) {
      if (auto e = entity_with_part(s.substr(p + 13))) {
        r.kind = Record::Kind::Implied;
        r.entity = *e;
        r.entity.outline = Outline::Blue;
      }
    } else if (text::starts_with_ci(s, "User believes there might be ")) {
      if (auto e = entity_with_part(s.substr(29))) {
        r.kind = Record::Kind::Uncertain;
        r.entity = *e;
        r.entity.outline = Outline::Red;
      }
    } else if (text::starts_with_ci(s, "There is ") || text::starts_with_ci(s, "There are ")) {
      if (auto e = entity_with_part(s.substr(text::starts_with_ci(s, "There is ") ? 9 : 10))) {
        r.kind = Record::Kind::Explicit;
        r.entity = *e;
        r.entity.outline = Outline::Black;
      }
    } else if (text::starts_with_ci(s, "The ")) {
      auto in = interpret(s);
      if (!in.entities.empty()) {
        r.kind = Record::Kind::Explicit;
        r.entity = in.entities.front();
        r.entity.outline = Outline::Black;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::string compose_summary(std::string_view delta, const std::optional<std::string>& previous,
                            std::string_view frame_meta) {
  const auto in = interpret(delta);
  std::vector<Record> records;
  std::string room;
  if (previous && !text::trim(*previous).empty()) {
    records = parse_summary(*previous);
    for (const auto& r : records) {
      if (r.kind == Record::Kind::Scene) room = r.text;
    }
  } else {
    room = in.room;
    if (room.empty()) {
      const std::string label = text::trimmed(frame_meta.substr(0, std::min(frame_meta.find(':'), frame_meta.size())));
      if (auto r = find_room(label)) room = *r;
      else room = text::lower(label);
    }
    if (!room.empty()) records.push_back({Record::Kind::Scene, {}, room});
    for (const auto& name : assumed_objects(room)) {
      Record r;
      r.kind = Record::Kind::Implied;
      r.entity.name = name;
      r.entity.outline = Outline::Blue;
      records.push_back(r);
    }
  }

  // Entity records are edited through the same rules as canvas registries.
  std::vector<std::size_t> slots;
  std::vector<Entity> base;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto k = records[i].kind;
    if (k == Record::Kind::Explicit || k == Record::Kind::Implied || k == Record::Kind::Uncertain) {
      slots.push_back(i);
      base.push_back(records[i].entity);
    }
  }
  Workspace ws = workspace_for(base, room, false);
  plan_edits(ws, in);

  std::vector<Record> result;
  std::size_t next_slot = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const bool is_entity = next_slot < slots.size() && slots[next_slot] == i;
    if (!is_entity) {
      result.push_back(records[i]);
      continue;
    }
    // Emit the surviving entity that originated here, if any.
    for (std::size_t c = 0; c < ws.cur.size(); ++c) {
      if (ws.origin[c] == static_cast<std::ptrdiff_t>(next_slot)) result.push_back(records[i]);
    }
    // Replaced entities keep their sentence position.
    for (const auto& op : ws.ops) {
      if (op.kind == EditOp::Kind::Replace && op.before == base[next_slot]) {
        Record r;
        r.kind = op.after.outline == Outline::Red ? Record::Kind::Uncertain : Record::Kind::Explicit;
        r.entity = op.after;
        result.push_back(r);
        break;
      }
    }
    ++next_slot;
  }
  for (const auto& op : ws.ops) {
    if (op.kind == EditOp::Kind::Add || op.kind == EditOp::Kind::Move) {
      Record r;
      r.kind = op.after.outline == Outline::Red ? Record::Kind::Uncertain
               : op.after.outline == Outline::Blue ? Record::Kind::Implied
                                                   : Record::Kind::Explicit;
      r.entity = op.after;
      result.push_back(r);
    }
  }
  std::vector<std::string> sentences;
  for (const auto& r : result) sentences.push_back(render_record(r, room));
  if (sentences.empty()) sentences.push_back("The scene is " + article_phrase(room.empty() ? "room" : room_display(room)) + ".");
  return text::join(sentences, " ");
}

SceneState read_summary(std::string_view summary) {
  SceneState s;
  for (const auto& r : parse_summary(summary)) {
    if (r.kind == Record::Kind::Scene) s.room = r.text;
    else if (r.kind != Record::Kind::Other) s.entities.push_back(r.entity);
  }
  return s;
}

}  // namespace groundmem::scene
