#include "groundmem/core.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>

#include "groundmem/error.hpp"
#include "groundmem/text.hpp"

namespace groundmem {

char speaker_label(Speaker s) noexcept { return s == Speaker::A ? 'A' : 'B'; }

Speaker other_speaker(Speaker s) noexcept { return s == Speaker::A ? Speaker::B : Speaker::A; }

std::optional<Speaker> parse_speaker(std::string_view text) noexcept {
  if (text == "A") return Speaker::A;
  if (text == "B") return Speaker::B;
  return std::nullopt;
}

std::string to_string(const FrameId& id) {
  std::string out;
  out += speaker_label(id.speaker);
  out += '_';
  out += std::to_string(id.ordinal);
  if (id.sequence != 1) {
    out += "_seq";
    out += std::to_string(id.sequence);
  }
  return out;
}

namespace {

// Positive decimal without leading zeros, at most 9 digits.
std::optional<int> parse_positive(std::string_view digits) {
  if (digits.empty() || digits.size() > 9 || digits.front() == '0') return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || value < 1) return std::nullopt;
  return value;
}

}  // namespace

FrameId parse_frame_id(std::string_view text) {
  auto bad = [&](std::string_view why) -> FrameId {
    fail(ErrorCode::MalformedFrameId, "malformed frame id '" + std::string(text) + "': " + std::string(why));
  };
  if (text.size() < 3 || text[1] != '_') return bad("expected <speaker>_<ordinal>");
  const auto speaker = parse_speaker(text.substr(0, 1));
  if (!speaker) return bad("speaker must be A or B");
  std::string_view rest = text.substr(2);
  std::string_view seq_part;
  if (const auto pos = rest.find('_'); pos != std::string_view::npos) {
    seq_part = rest.substr(pos + 1);
    rest = rest.substr(0, pos);
    if (seq_part.substr(0, 3) != "seq") return bad("bad sequence suffix");
    seq_part.remove_prefix(3);
  }
  const auto ordinal = parse_positive(rest);
  if (!ordinal) return bad("ordinal must be a positive integer");
  int sequence = 1;
  if (text.find('_', 2) != std::string_view::npos) {
    const auto seq = parse_positive(seq_part);
    // seq1 is written without a suffix, so an explicit _seq1 is non-canonical.
    if (!seq || *seq == 1) return bad("bad sequence suffix");
    sequence = *seq;
  }
  return FrameId{*speaker, *ordinal, sequence};
}

void validate_dialogue(const Dialogue& d) {
  int last = -1;
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const auto& u = d.turns[i];
    if (u.turn < 0 || u.turn <= last) {
      fail(ErrorCode::FormatError, "dialogue " + d.id + ": turn " + std::to_string(u.turn) +
                                       " is not strictly increasing");
    }
    if (text::trim(u.text).empty()) {
      fail(ErrorCode::FormatError, "dialogue " + d.id + ": turn " + std::to_string(u.turn) + " is empty");
    }
    last = u.turn;
  }
}

std::string_view to_string(EditAction a) noexcept {
  switch (a) {
    case EditAction::New: return "NEW";
    case EditAction::Continue: return "CONTINUE";
    case EditAction::Skip: return "SKIP";
  }
  return "SKIP";
}

EditAction parse_edit_action(std::string_view token) {
  std::string_view t = text::trim(token);
  if (t.size() >= 2 && t.front() == '[' && t.back() == ']') t = text::trim(t.substr(1, t.size() - 2));
  const std::string l = text::lower(t);
  if (l == "new") return EditAction::New;
  if (l == "continue") return EditAction::Continue;
  if (l == "skip") return EditAction::Skip;
  fail(ErrorCode::UnknownAction, "unknown edit action '" + std::string(token) + "'");
}

std::string_view to_string(Outline o) noexcept {
  switch (o) {
    case Outline::Black: return "black";
    case Outline::Red: return "red";
    case Outline::Blue: return "blue";
  }
  return "black";
}

std::optional<Outline> parse_outline(std::string_view text) noexcept {
  const std::string l = text::lower(text::trim(text));
  if (l == "black") return Outline::Black;
  if (l == "red") return Outline::Red;
  if (l == "blue") return Outline::Blue;
  return std::nullopt;
}

Canvas Canvas::blank(int width, int height, Rgb fill) {
  Canvas c;
  c.width = width;
  c.height = height;
  c.pixels.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  return c;
}

void validate_canvas(const Canvas& c) {
  if (c.width <= 0 || c.height <= 0) fail(ErrorCode::PreconditionViolation, "canvas dimensions must be positive");
  if (c.pixels.size() != static_cast<std::size_t>(c.width) * static_cast<std::size_t>(c.height))
    fail(ErrorCode::PreconditionViolation, "canvas pixel count does not match width x height");
  for (const auto& o : c.objects) {
    const auto& b = o.box;
    if (!(b.ymin < b.ymax && b.xmin < b.xmax) || b.ymin < 0 || b.xmin < 0 || b.ymax > c.height ||
        b.xmax > c.width)
      fail(ErrorCode::PreconditionViolation, "object '" + o.name + "' box lies outside the canvas");
  }
}

std::string_view to_string(Condition c) noexcept {
  switch (c) {
    case Condition::Visual: return "visual";
    case Condition::Textual: return "textual";
    case Condition::Both: return "both";
  }
  return "visual";
}

std::optional<Condition> parse_condition(std::string_view text) noexcept {
  const std::string l = text::lower(text::trim(text));
  if (l == "visual" || l == "image") return Condition::Visual;
  if (l == "textual" || l == "text") return Condition::Textual;
  if (l == "both") return Condition::Both;
  return std::nullopt;
}

double faithfulness_ratio(const std::vector<FactVerdict>& verdicts) noexcept {
  if (verdicts.empty()) return 1.0;
  const auto hits = std::count_if(verdicts.begin(), verdicts.end(), [](const FactVerdict& v) { return v.verdict; });
  return static_cast<double>(hits) / static_cast<double>(verdicts.size());
}

std::string_view to_string(Command c) noexcept {
  switch (c) {
    case Command::Pov: return "POV";
    case Command::Rag: return "RAG";
    case Command::Process: return "PROCESS";
    case Command::FinalAnswer: return "FINAL_ANSWER";
  }
  return "PROCESS";
}

std::string_view to_string(Pov p) noexcept {
  switch (p) {
    case Pov::A: return "A";
    case Pov::B: return "B";
    case Pov::Both: return "BOTH";
  }
  return "BOTH";
}

Pov pov_of(Speaker s) noexcept { return s == Speaker::A ? Pov::A : Pov::B; }

bool pov_admits(Pov pov, Speaker s) noexcept { return pov == Pov::Both || pov == pov_of(s); }

std::optional<Pov> resolve_pov(std::string_view instruction) noexcept {
  bool saw_a = false;
  bool saw_b = false;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    std::string l = text::lower(word);
    if (l == "both") saw_a = saw_b = true;
    // "B" alone, or "B's"
    if (word == "A" || word == "A's") saw_a = true;
    if (word == "B" || word == "B's") saw_b = true;
    word.clear();
  };
  for (char c : instruction) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'') {
      word.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  if (saw_a && saw_b) return Pov::Both;
  if (saw_a) return Pov::A;
  if (saw_b) return Pov::B;
  return std::nullopt;
}

std::string render_step(const PlanStep& step) {
  std::string out(to_string(step.command));
  if (step.command == Command::Rag) out += "[" + std::to_string(step.retrieval_count.value_or(0)) + "]";
  if (!step.instruction.empty()) out += " " + step.instruction;
  return out;
}

std::vector<PlanViolation> validate_plan(const Plan& plan) {
  std::vector<PlanViolation> out;
  std::size_t finals = 0;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& s = plan.steps[i];
    switch (s.command) {
      case Command::FinalAnswer:
        ++finals;
        if (finals > 1) out.push_back({i, "multiple-FINAL_ANSWER"});
        if (i + 1 != plan.steps.size()) out.push_back({i, "FINAL_ANSWER-not-last"});
        break;
      case Command::Rag:
        if (!s.retrieval_count || *s.retrieval_count < 1) out.push_back({i, "RAG-count-invalid"});
        break;
      case Command::Pov:
        if (!resolve_pov(s.instruction)) out.push_back({i, "POV-unresolved"});
        break;
      case Command::Process:
        break;
    }
    if (s.command != Command::Rag && s.retrieval_count) out.push_back({i, "count-on-non-RAG"});
  }
  if (finals == 0) out.push_back({plan.steps.size(), "missing-FINAL_ANSWER"});
  return out;
}

std::string_view to_string(RelationType r) noexcept {
  switch (r) {
    case RelationType::Temporal: return "Temporal";
    case RelationType::Spatial: return "Spatial";
    case RelationType::Attributive: return "Attributive";
    case RelationType::Inferred: return "Inferred";
  }
  return "Temporal";
}

RelationType parse_relation_type(std::string_view text) {
  for (auto r : kRelationTypes) {
    if (text == to_string(r)) return r;
  }
  fail(ErrorCode::UnknownRelationType, "unknown relation type '" + std::string(text) + "'");
}

std::string_view to_string(Verdict v) noexcept { return v == Verdict::Same ? "SAME" : "DIFFERENT"; }

std::string_view to_string(Complexity v) noexcept { return v == Complexity::Local ? "local" : "relational"; }
std::string_view to_string(QuestionKind v) noexcept { return v == QuestionKind::Binary ? "binary" : "open"; }
std::string_view to_string(ConstraintKind v) noexcept { return v == ConstraintKind::List ? "list" : "free"; }
std::string_view to_string(Validity v) noexcept { return v == Validity::Valid ? "valid" : "missing"; }

}  // namespace groundmem
