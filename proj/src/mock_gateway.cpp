#include <algorithm>
#include <map>
#include <set>

#include "groundmem/canvas.hpp"
#include "groundmem/error.hpp"
#include "groundmem/gateway.hpp"
#include "groundmem/json_extract.hpp"
#include "groundmem/scene.hpp"
#include "groundmem/text.hpp"
#include "mock_roles.hpp"

namespace groundmem {

namespace mock {

namespace {

std::string sec(const ChatRequest& r, const char* tag) { return text::section(user_text(r), tag); }

std::vector<std::string> nonempty_lines(const std::string& s) {
  std::vector<std::string> out;
  for (auto& l : text::split(s, '\n')) {
    auto t = text::trimmed(l);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

const Canvas& first_attachment(const ChatRequest& r) {
  if (r.attachments.empty() || !r.attachments.front())
    fail(ErrorCode::PreconditionViolation, std::string(to_string(r.role)) + " request needs an image");
  return *r.attachments.front();
}

bool contains_phrase(const std::vector<std::string>& ws, std::string_view phrase) {
  const auto p = text::words(phrase);
  if (p.empty() || p.size() > ws.size()) return false;
  for (std::size_t i = 0; i + p.size() <= ws.size(); ++i) {
    if (std::equal(p.begin(), p.end(), ws.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  }
  return false;
}

const std::set<std::string, std::less<>> kDirections = {"north", "south", "east", "west"};

}  // namespace

bool has_section(const std::string& body, const std::string& tag) {
  return body.find("<" + tag + ">") != std::string::npos && body.find("</" + tag + ">") != std::string::npos;
}

// Observer rule table ----------------------------------------------------------

std::string observer(const ChatRequest& r) {
  const std::string u = sec(r, "utterance");
  const std::string frame = sec(r, "frame");
  const bool active = !frame.empty() && frame != "None";
  const auto ws = text::words(u);
  const auto in = scene::interpret(u);

  Json out = {{"frame_meta", ""}, {"relation", ""}, {"imagery", ""}, {"action", "[SKIP]"}};
  auto decide = [&](const char* action, std::string imagery, std::string meta) {
    out["action"] = action;
    out["imagery"] = std::move(imagery);
    out["frame_meta"] = std::move(meta);
    return out.dump();
  };

  // Talk about the conversation itself, or addressed to the partner.
  for (const char* p : {"let me", "find you", "where are you", "can you", "could you", "do you", "did you", "are you",
                        "have you", "will you"}) {
    if (contains_phrase(ws, p)) return out.dump();
  }
  const bool removal = in.removal;
  const bool negated = std::any_of(ws.begin(), ws.end(), [](const std::string& w) {
    return w == "not" || w == "never" || (w.size() > 3 && w.substr(w.size() - 3) == "n't");
  });
  if (negated && !removal) return out.dump();

  const bool moving = text::has_word(ws, "moved") ||
                      std::any_of(ws.begin(), ws.end(), [](const std::string& w) { return kDirections.contains(w); });
  if (moving) {
    out["relation"] = text::trimmed(u);
    return out.dump();
  }

  if (!in.room.empty()) {
    std::string imagery = std::string(text::article_for(scene::room_display(in.room))) + " " + scene::room_display(in.room);
    if (!in.entities.empty()) {
      std::vector<std::string> items;
      for (const auto& e : in.entities) items.push_back(scene::render_phrase(e));
      imagery += " with " + text::oxford_list(items);
    }
    const bool again = text::has_word(ws, "again");
    return decide(again && active ? "[CONTINUE]" : "[NEW]", imagery, scene::room_display(in.room));
  }
  if (!in.entities.empty() || (!in.dangling.empty() && active)) {
    return decide(active ? "[CONTINUE]" : "[NEW]", text::trimmed(u), active ? "" : "room");
  }
  return out.dump();
}

// Construction ------------------------------------------------------------------

std::string constructor(const ChatRequest& r) {
  const std::string mode = sec(r, "mode");
  const std::string delta = sec(r, "descriptor");
  std::string prompt;
  if (mode == "creation") {
    prompt = scene::compose_creation_prompt(delta, sec(r, "frame_meta"));
  } else if (!r.attachments.empty() && r.attachments.front()) {
    prompt = scene::compose_edit_prompt(delta, scene::state_of(*r.attachments.front()));
  } else {
    prompt = scene::compose_edit_prompt(delta, nonempty_lines(sec(r, "history")));
  }
  return Json{{"scene", prompt}}.dump();
}

std::string summarizer(const ChatRequest& r) {
  const std::string& body = user_text(r);
  std::optional<std::string> previous;
  if (has_section(body, "previous")) previous = text::section(body, "previous");
  return Json{{"scene", scene::compose_summary(sec(r, "descriptor"), previous, sec(r, "frame_meta"))}}.dump();
}

std::string fact_decomposer(const ChatRequest& r) {
  return Json{{"facts", scene::decompose(sec(r, "descriptor"), nonempty_lines(sec(r, "history")))}}.dump();
}

std::string captioner(const ChatRequest& r) { return describe_registry(first_attachment(r)); }

std::string fact_checker(const ChatRequest& r) {
  const Canvas& c = first_attachment(r);
  Json facts = Json::parse(sec(r, "facts"), nullptr, false);
  if (!facts.is_array()) fail(ErrorCode::PreconditionViolation, "fact checker request without a fact list");
  Json out = Json::array();
  for (const auto& f : facts) {
    const std::string fact = f.is_string() ? f.get<std::string>() : std::string();
    const auto box = scene::check_fact(c, fact);
    Json row = {{"fact", fact}, {"box", nullptr}, {"verdict", box.has_value()}};
    if (box) row["box"] = {box->ymin, box->xmin, box->ymax, box->xmax};
    out.push_back(row);
  }
  return out.dump();
}

// Linker --------------------------------------------------------------------------

std::string linker(const ChatRequest& r) {
  const std::string directive = sec(r, "directive");
  std::map<std::string, std::string> slot;  // PREV/CURR/NEXT -> id or None
  for (const auto& l : nonempty_lines(sec(r, "frames"))) {
    const auto colon = l.find(':');
    if (colon == std::string::npos) continue;
    slot[text::trimmed(l.substr(0, colon))] = text::trimmed(l.substr(colon + 1));
  }
  std::map<std::string, std::string> label;  // id -> room label
  for (const auto& l : nonempty_lines(sec(r, "frame_meta"))) {
    const auto colon = l.find(':');
    if (colon == std::string::npos) continue;
    const auto room = scene::find_room(l.substr(colon + 1));
    label[text::trimmed(l.substr(0, colon))] = room ? *room : text::lower(text::trimmed(l.substr(colon + 1)));
  }
  auto id_of = [&](const char* key) -> std::string {
    auto it = slot.find(key);
    return it == slot.end() || it->second == "None" ? std::string() : it->second;
  };
  // A slot whose room matches; an absent slot yields nothing.
  auto frame_for = [&](const std::string& room, std::initializer_list<const char*> keys) -> std::string {
    for (const char* k : keys) {
      const auto id = id_of(k);
      if (!id.empty() && label[id] == room) return id;
    }
    return {};
  };

  Json triplets = Json::array();
  auto emit = [&](const std::string& s, const std::string& p, const std::string& o) {
    if (!s.empty() && !o.empty() && s != o) triplets.push_back({{"subject", s}, {"predicate", p}, {"object", o}});
  };
  const auto ws = text::words(directive);
  std::string dir;
  for (const auto& w : ws) {
    if (kDirections.contains(w)) {
      dir = w;
      break;
    }
  }
  const std::string lower = " " + text::join(ws, " ") + " ";
  const auto rooms_after = [&](std::string_view marker) -> std::optional<std::string> {
    const auto p = lower.find(marker);
    if (p == std::string::npos) return std::nullopt;
    return scene::find_room(lower.substr(p + marker.size()));
  };
  if (!dir.empty()) {
    const std::string curr = id_of("CURR_FRAME");
    if (auto from = rooms_after(" from ")) {
      // Arrived here from X: here lies in `dir` of X.
      emit(curr, dir + "_of", frame_for(*from, {"PREV_FRAME", "NEXT_FRAME"}));
    } else if (auto to = scene::find_room(directive)) {
      if (!curr.empty() && label[curr] == *to) {
        // "west gets me bathroom" said from the bathroom: reached from the previous room.
        emit(curr, dir + "_of", id_of("PREV_FRAME"));
      } else {
        // Leaving the current room towards Y: Y lies in `dir` of here.
        emit(frame_for(*to, {"NEXT_FRAME", "PREV_FRAME"}), dir + "_of", curr);
      }
    }
  } else if (const auto p = lower.find(" next to "); p != std::string::npos) {
    const auto x = scene::find_room(lower.substr(0, p));
    const auto y = scene::find_room(lower.substr(p + 9));
    if (x && y) {
      const auto keys = {"PREV_FRAME", "CURR_FRAME", "NEXT_FRAME"};
      emit(frame_for(*y, keys), "is_next_to", frame_for(*x, keys));
    }
  }
  return Json{{"triplets", triplets}}.dump();
}

}  // namespace mock

namespace {

constexpr int kGrid = 5;
constexpr int kInset = 6;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

Box slot_box(int slot, int size) {
  const int cell = size / kGrid;
  const int r = slot / kGrid;
  const int c = slot % kGrid;
  return {r * cell + kInset, c * cell + kInset, (r + 1) * cell - kInset, (c + 1) * cell - kInset};
}

Box next_free_box(const std::vector<CanvasObject>& objects, int size) {
  for (int s = 0; s < kGrid * kGrid; ++s) {
    const Box b = slot_box(s, size);
    if (std::none_of(objects.begin(), objects.end(), [&](const CanvasObject& o) { return o.box == b; })) return b;
  }
  return slot_box(static_cast<int>(objects.size()) % (kGrid * kGrid), size);
}

Rgb fill_for(std::string_view name) {
  const auto h = fnv1a64(name);
  auto ch = [&](int shift) { return static_cast<std::uint8_t>(40 + ((h >> shift) & 0xFF) % 176); };
  return {ch(0), ch(8), ch(16)};
}

void render(Canvas& c, std::uint64_t noise_seed) {
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      const auto n = static_cast<std::uint8_t>(mix(noise_seed, static_cast<std::uint64_t>(y) * 65536u + x) % 4);
      c.at(y, x) = {static_cast<std::uint8_t>(255 - n), static_cast<std::uint8_t>(255 - n),
                    static_cast<std::uint8_t>(255 - n)};
    }
  }
  constexpr int kStripe = 3;
  for (const auto& o : c.objects) {
    const Rgb fill = fill_for(o.name);
    const Rgb line = outline_color(o.outline);
    for (int y = o.box.ymin; y < o.box.ymax; ++y) {
      for (int x = o.box.xmin; x < o.box.xmax; ++x) {
        const bool edge = y < o.box.ymin + kStripe || y >= o.box.ymax - kStripe || x < o.box.xmin + kStripe ||
                          x >= o.box.xmax - kStripe;
        c.at(y, x) = edge ? line : fill;
      }
    }
  }
}

CanvasObject to_object(const scene::Entity& e, Box box) {
  return CanvasObject{e.name, e.outline, box, scene::to_attributes(e)};
}

class MockGateway final : public Gateway {
 public:
  explicit MockGateway(BackendConfig c) : config_(std::move(c)) {}

  std::string chat(const ChatRequest& r) override {
    if (r.messages.empty()) fail(ErrorCode::PreconditionViolation, "chat request without messages");
    switch (r.role) {
      case Role::Observer: return mock::observer(r);
      case Role::Constructor: return mock::constructor(r);
      case Role::Summarizer: return mock::summarizer(r);
      case Role::FactDecomposer: return mock::fact_decomposer(r);
      case Role::Captioner: return mock::captioner(r);
      case Role::FactChecker: return mock::fact_checker(r);
      case Role::Linker: return mock::linker(r);
      case Role::Planner: return mock::planner(r);
      case Role::Refiner: return mock::refiner(r);
      case Role::Processor: return mock::processor(r);
      case Role::Answerer: return mock::answerer(r);
      case Role::Judge: return mock::judge(r);
      case Role::Annotator: return mock::annotator(r);
    }
    fail(ErrorCode::PreconditionViolation, "unknown role");
  }

  Canvas edit_image(const ImageEditRequest& req) override {
    if (text::trim(req.prompt).empty()) fail(ErrorCode::PreconditionViolation, "image prompt is empty");
    const auto parsed = scene::parse_prompt(req.prompt);
    const int size = config_.canvas_size;
    Canvas out = Canvas::blank(size, size);
    if (!parsed.creation) {
      if (!req.base) fail(ErrorCode::PreconditionViolation, "edit prompt without a base canvas");
      out.scene = req.base->scene;
      out.objects = req.base->objects;
    } else {
      out.scene = parsed.room;
    }

    auto entities = [&] {
      std::vector<scene::Entity> v;
      for (const auto& o : out.objects) v.push_back(scene::from_object(o));
      return v;
    };
    for (const auto& ref : parsed.keep) {
      if (!scene::resolve_ref(entities(), ref))
        fail(ErrorCode::MockKeepViolation, "Keep names '" + ref + "' but the canvas has no such object");
    }

    const std::uint64_t sample_seed = mix(mix(config_.seed, fnv1a64(req.frame_tag)), static_cast<std::uint64_t>(req.sample));
    auto dropped = [&](const scene::Entity& e, std::size_t op) {
      if (e.outline == Outline::Blue || config_.dropout <= 0.0) return false;
      const auto h = mix(mix(sample_seed, fnv1a64(e.name)), op);
      return static_cast<double>(h >> 11) * 0x1.0p-53 < config_.dropout;
    };

    for (std::size_t k = 0; k < parsed.ops.size(); ++k) {
      const auto& op = parsed.ops[k];
      switch (op.kind) {
        case scene::PromptOp::Kind::Add:
          if (!dropped(op.entity, k)) out.objects.push_back(to_object(op.entity, next_free_box(out.objects, size)));
          break;
        case scene::PromptOp::Kind::Remove:
          if (auto i = scene::resolve_ref(entities(), op.ref))
            out.objects.erase(out.objects.begin() + static_cast<std::ptrdiff_t>(*i));
          break;
        case scene::PromptOp::Kind::Replace:
          if (auto i = scene::resolve_ref(entities(), op.ref)) {
            // A dropped replacement leaves the old object as it was.
            if (!dropped(op.entity, k)) out.objects[*i] = to_object(op.entity, out.objects[*i].box);
          } else if (!dropped(op.entity, k)) {
            out.objects.push_back(to_object(op.entity, next_free_box(out.objects, size)));
          }
          break;
      }
    }
    render(out, sample_seed);
    return out;
  }

  Embedding embed_text(std::string_view t) override { return hash_embedding(t, config_.seed); }

  Embedding embed_image(const Canvas& c) override {
    std::string bag;
    for (const auto& o : c.objects) {
      bag += o.name;
      for (const auto& a : o.attributes) bag += " " + a;
      bag += " ";
    }
    if (text::word_tokens(bag).empty()) return Embedding::Zero(kMockEmbeddingDim);
    return hash_embedding(bag, config_.seed);
  }

 private:
  BackendConfig config_;
};

}  // namespace

std::unique_ptr<Gateway> make_mock_gateway(const BackendConfig& c) { return std::make_unique<MockGateway>(c); }

}  // namespace groundmem
