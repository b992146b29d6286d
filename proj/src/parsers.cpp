#include "groundmem/parsers.hpp"

#include <cctype>

#include "groundmem/error.hpp"
#include "groundmem/json_extract.hpp"
#include "groundmem/text.hpp"

namespace groundmem {

namespace {

[[noreturn]] void unparsable(std::string_view what) {
  fail(ErrorCode::UnparsableOutput, std::string(what));
}

bool is_placeholder(std::string_view s) {
  const std::string l = text::lower(text::trim(s));
  return l.empty() || l == "none" || l == "null" || l == "n/a" || l == "[]" || l == "[relation_meta]" ||
         l == "[imagery]";
}

std::string upper_letters(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::vector<std::string_view> tag_spans(std::string_view raw, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto a = raw.find(open, pos);
    if (a == std::string_view::npos) break;
    const auto start = a + open.size();
    const auto b = raw.find(close, start);
    if (b == std::string_view::npos) break;
    out.push_back(raw.substr(start, b - start));
    pos = b + close.size();
  }
  return out;
}

ObserverDecision parse_observer_output(std::string_view raw) {
  const auto obj = find_json(raw, '{', [](const Json& j) { return j.is_object() && j.contains("action"); });
  if (!obj) unparsable("observer output has no JSON object with an action");
  const auto& action_field = (*obj)["action"];
  if (!action_field.is_string()) fail(ErrorCode::UnknownAction, "observer action is not a string");

  ObserverDecision d;
  d.action = parse_edit_action(action_field.get<std::string>());
  const std::string meta = text::trimmed(json_string(*obj, "frame_meta"));
  if (const auto colon = meta.find(':'); colon != std::string::npos) {
    d.frame_meta = text::trimmed(std::string_view(meta).substr(0, colon));
    d.metadata = text::trimmed(std::string_view(meta).substr(colon + 1));
  } else {
    d.frame_meta = meta;
  }
  const std::string relation = json_string(*obj, "relation");
  if (!is_placeholder(relation)) d.relation_hint = text::trimmed(relation);

  std::string imagery = text::trimmed(json_string(*obj, "imagery"));
  if (is_placeholder(imagery)) imagery.clear();
  if (d.action == EditAction::Skip) {
    d.scene_descriptor.clear();
  } else {
    if (imagery.empty()) unparsable("observer chose NEW/CONTINUE without imagery");
    d.scene_descriptor = std::move(imagery);
  }
  return d;
}

Plan parse_planner_output(std::string_view raw) {
  const auto answers = tag_spans(raw, "answer");
  std::vector<std::string_view> items;
  for (auto it = answers.rbegin(); it != answers.rend() && items.empty(); ++it) items = tag_spans(*it, "item");
  if (items.empty()) unparsable("planner output has no <answer> with <item> steps");

  Plan plan;
  for (std::string_view item : items) {
    std::string_view s = text::trim(item);
    // Optional "Step 3:" / "3." numbering.
    if (text::starts_with_ci(s, "step")) {
      std::size_t i = 4;
      while (i < s.size() && (s[i] == ' ' || std::isdigit(static_cast<unsigned char>(s[i])))) ++i;
      if (i < s.size() && (s[i] == ':' || s[i] == '.' || s[i] == ')')) s = text::trim(s.substr(i + 1));
    } else {
      std::size_t i = 0;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')' || s[i] == ':')) s = text::trim(s.substr(i + 1));
    }
    std::size_t n = 0;
    while (n < s.size() && (std::isalpha(static_cast<unsigned char>(s[n])) || s[n] == '_')) ++n;
    const std::string word = upper_letters(s.substr(0, n));
    std::string_view rest = s.substr(n);

    PlanStep step;
    if (word == "POV") {
      step.command = Command::Pov;
    } else if (word == "PROCESS") {
      step.command = Command::Process;
    } else if (word == "FINAL_ANSWER") {
      step.command = Command::FinalAnswer;
    } else if (word == "RAG") {
      step.command = Command::Rag;
      rest = text::trim(rest);
      if (rest.empty() || rest.front() != '[')
        fail(ErrorCode::MalformedRagCount, "RAG step without a [N] count");
      const auto close = rest.find(']');
      if (close == std::string_view::npos) fail(ErrorCode::MalformedRagCount, "unterminated RAG count");
      std::string count(text::trim(rest.substr(1, close - 1)));
      if (text::starts_with_ci(count, "k")) {
        const auto eq = count.find('=');
        if (eq == std::string::npos) fail(ErrorCode::MalformedRagCount, "RAG count '" + count + "'");
        count = text::trimmed(std::string_view(count).substr(eq + 1));
      }
      const bool digits = !count.empty() && count.size() <= 6 &&
                          count.find_first_not_of("0123456789") == std::string::npos;
      const int value = digits ? std::stoi(count) : 0;
      if (value < 1) fail(ErrorCode::MalformedRagCount, "RAG count must be a positive integer, got '" + count + "'");
      step.retrieval_count = value;
      rest = rest.substr(close + 1);
    } else {
      fail(ErrorCode::UnknownCommand, "unknown plan command '" + std::string(s.substr(0, n)) + "'");
    }
    rest = text::trim(rest);
    while (!rest.empty() && (rest.front() == ':' || rest.front() == '-')) rest = text::trim(rest.substr(1));
    step.instruction = std::string(rest);
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

std::vector<TripletCandidate> parse_linker_output(std::string_view raw) {
  const auto obj = find_json(raw, '{', [](const Json& j) {
    if (!j.is_object() || !j.contains("triplets") || !j["triplets"].is_array()) return false;
    for (const auto& t : j["triplets"]) {
      if (!t.is_object() || !t.contains("subject") || !t.contains("predicate") || !t.contains("object"))
        return false;
    }
    return true;
  });
  if (!obj) unparsable("linker output has no {\"triplets\": [...]} object");
  std::vector<TripletCandidate> out;
  for (const auto& t : (*obj)["triplets"]) {
    out.push_back({json_string(t, "subject"), json_string(t, "predicate"), json_string(t, "object")});
  }
  return out;
}

std::vector<FactVerdict> parse_fact_checker_output(std::string_view raw, const std::vector<AtomicFact>& facts) {
  auto verdict_list = [](const Json& j) {
    if (!j.is_array()) return false;
    for (const auto& e : j) {
      if (!e.is_object() || !e.contains("verdict")) return false;
    }
    return true;
  };
  std::optional<Json> list = find_json(raw, '[', verdict_list);
  if (!list) {
    const auto wrapped = find_json(raw, '{', [&](const Json& j) {
      if (!j.is_object()) return false;
      for (const char* key : {"results", "verdicts", "facts"}) {
        if (j.contains(key) && verdict_list(j[key])) return true;
      }
      return false;
    });
    if (wrapped) {
      for (const char* key : {"results", "verdicts", "facts"}) {
        if (wrapped->contains(key) && verdict_list((*wrapped)[key])) {
          list = (*wrapped)[key];
          break;
        }
      }
    }
  }
  if (!list) unparsable("fact checker output has no verdict list");
  if (list->size() != facts.size()) {
    fail(ErrorCode::VerdictCountMismatch, "fact checker returned " + std::to_string(list->size()) +
                                              " verdicts for " + std::to_string(facts.size()) + " facts");
  }
  std::vector<FactVerdict> out;
  out.reserve(facts.size());
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const auto& e = (*list)[i];
    FactVerdict v;
    v.fact = facts[i];
    const auto& verdict = e["verdict"];
    if (verdict.is_boolean()) {
      v.verdict = verdict.get<bool>();
    } else if (verdict.is_string()) {
      const std::string l = text::lower(text::trim(verdict.get<std::string>()));
      if (l == "true") v.verdict = true;
      else if (l == "false") v.verdict = false;
      else unparsable("fact checker verdict '" + l + "' is not a boolean");
    } else {
      unparsable("fact checker verdict is not a boolean");
    }
    if (v.verdict && e.contains("box") && e["box"].is_array() && e["box"].size() == 4) {
      const auto& b = e["box"];
      bool numeric = true;
      for (const auto& x : b) numeric = numeric && x.is_number();
      if (numeric) {
        v.box = Box{static_cast<int>(b[0].get<double>()), static_cast<int>(b[1].get<double>()),
                    static_cast<int>(b[2].get<double>()), static_cast<int>(b[3].get<double>())};
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

JudgeVerdict parse_judge_output(std::string_view raw) {
  JudgeVerdict out;
  bool found = false;
  const auto answers = tag_spans(raw, "answer");
  for (auto it = answers.rbegin(); it != answers.rend() && !found; ++it) {
    const std::string token = upper_letters(*it);
    if (token == "SAME") {
      out.verdict = Verdict::Same;
      found = true;
    } else if (token == "DIFFERENT") {
      out.verdict = Verdict::Different;
      found = true;
    }
  }
  if (!found && answers.empty()) {
    // Untagged reply: accept a lone upper-case verdict word.
    const auto ws = text::word_tokens(raw);
    bool same = false;
    bool different = false;
    std::string word;
    for (std::size_t i = 0; i <= raw.size(); ++i) {
      if (i < raw.size() && std::isalpha(static_cast<unsigned char>(raw[i]))) {
        word.push_back(raw[i]);
        continue;
      }
      if (word == "SAME") same = true;
      if (word == "DIFFERENT") different = true;
      word.clear();
    }
    if (same != different) {
      out.verdict = same ? Verdict::Same : Verdict::Different;
      found = true;
    }
  }
  if (!found) unparsable("judge output has no SAME/DIFFERENT verdict");
  auto reasoning = tag_spans(raw, "reasoning");
  if (reasoning.empty()) reasoning = tag_spans(raw, "think");
  if (!reasoning.empty()) out.reasoning = text::trimmed(reasoning.back());
  return out;
}

Annotation parse_annotator_output(std::string_view raw) {
  static constexpr const char* kKeys[] = {"complexity_type", "question_type", "constraint_type", "validity_type"};
  const auto obj = find_json(raw, '{', [](const Json& j) {
    if (!j.is_object()) return false;
    for (const char* k : kKeys) {
      if (!j.contains(k) || !j[k].is_string()) return false;
    }
    return true;
  });
  if (!obj) unparsable("annotator output lacks one of the four classification keys");
  auto label = [&](const char* key) { return text::lower(text::trim(json_string(*obj, key))); };
  auto unknown = [](const char* key, const std::string& v) {
    fail(ErrorCode::UnknownLabel, std::string("unknown ") + key + " '" + v + "'");
  };
  Annotation a;
  const auto c = label("complexity_type");
  if (c == "local") a.complexity = Complexity::Local;
  else if (c == "relational") a.complexity = Complexity::Relational;
  else unknown("complexity_type", c);
  const auto q = label("question_type");
  if (q == "binary") a.question_kind = QuestionKind::Binary;
  else if (q == "open") a.question_kind = QuestionKind::Open;
  else unknown("question_type", q);
  const auto k = label("constraint_type");
  if (k == "list") a.constraint = ConstraintKind::List;
  else if (k == "free") a.constraint = ConstraintKind::Free;
  else unknown("constraint_type", k);
  const auto v = label("validity_type");
  if (v == "valid") a.validity = Validity::Valid;
  else if (v == "missing") a.validity = Validity::Missing;
  else unknown("validity_type", v);
  return a;
}

std::vector<std::string> parse_fact_list(std::string_view raw) {
  const auto obj = find_json(raw, '{', [](const Json& j) {
    if (!j.is_object() || !j.contains("facts") || !j["facts"].is_array()) return false;
    for (const auto& f : j["facts"]) {
      if (!f.is_string()) return false;
    }
    return true;
  });
  if (!obj) unparsable("decomposer output has no {\"facts\": [...]} object");
  std::vector<std::string> out;
  for (const auto& f : (*obj)["facts"]) {
    auto s = text::trimmed(f.get<std::string>());
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

std::string parse_scene_output(std::string_view raw) {
  const auto obj = find_json(raw, '{', [](const Json& j) { return j.is_object() && j.contains("scene") && j["scene"].is_string(); });
  if (!obj) unparsable("output has no {\"scene\": ...} object");
  auto scene = text::trimmed(json_string(*obj, "scene"));
  if (scene.empty()) unparsable("scene text is empty");
  return scene;
}

std::string extract_answer_text(std::string_view raw) {
  const auto spans = tag_spans(raw, "answer");
  for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
    auto s = text::trimmed(*it);
    if (!s.empty()) return s;
  }
  // Drop a leading think block if the model never closed an answer tag.
  std::string_view body = raw;
  if (const auto end = body.rfind("</think>"); end != std::string_view::npos) body = body.substr(end + 8);
  return text::trimmed(body);
}

}  // namespace groundmem
