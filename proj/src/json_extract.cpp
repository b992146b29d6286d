#include "groundmem/json_extract.hpp"

namespace groundmem {

namespace {

// Index one past the bracket matching raw[start], or npos.
std::size_t match_span(std::string_view raw, std::size_t start, char open, char close) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == open) {
      ++depth;
    } else if (c == close) {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<Json> parse_quiet(std::string_view s) {
  Json j = Json::parse(s.begin(), s.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return std::nullopt;
  return j;
}

}  // namespace

std::string repair_json(std::string_view candidate) {
  std::string s;
  s.reserve(candidate.size());
  // Drop ``` fence lines (with optional language tag).
  std::size_t pos = 0;
  while (pos <= candidate.size()) {
    auto nl = candidate.find('\n', pos);
    if (nl == std::string_view::npos) nl = candidate.size();
    std::string_view line = candidate.substr(pos, nl - pos);
    auto first = line.find_first_not_of(" \t");
    if (!(first != std::string_view::npos && line.substr(first, 3) == "```")) {
      s.append(line);
      if (nl < candidate.size()) s.push_back('\n');
    }
    pos = nl + 1;
  }
  // Trailing commas outside strings.
  std::string out;
  out.reserve(s.size());
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      out.push_back(c);
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < s.size() && (s[j] == ' ' || s[j] == '\n' || s[j] == '\t' || s[j] == '\r')) ++j;
      if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
    }
    out.push_back(c);
  }
  return out;
}

std::optional<Json> find_json(std::string_view raw, char open,
                              const std::function<bool(const Json&)>& accept) {
  const char close = open == '{' ? '}' : ']';
  for (std::size_t i = raw.find(open); i != std::string_view::npos; i = raw.find(open, i + 1)) {
    const std::size_t end = match_span(raw, i, open, close);
    if (end == std::string_view::npos) continue;
    const std::string_view candidate = raw.substr(i, end - i);
    auto parsed = parse_quiet(candidate);
    if (!parsed) parsed = parse_quiet(repair_json(candidate));
    if (parsed && accept(*parsed)) return parsed;
  }
  return std::nullopt;
}

std::string json_string(const Json& obj, const char* key) {
  if (!obj.is_object()) return {};
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

}  // namespace groundmem
