#include "groundmem/text.hpp"

#include <algorithm>
#include <cctype>

namespace groundmem::text {

namespace {
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  auto space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

std::string trimmed(std::string_view s) { return std::string(trim(s)); }

bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::vector<std::string> word_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_alnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool inner_apostrophe = (c == '\'' || c == '`') && !cur.empty() && i + 1 < s.size() &&
                                  is_alnum(s[i + 1]);
    if (is_alnum(c) || inner_apostrophe) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c == '`' ? '\'' : c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool has_word(const std::vector<std::string>& ws, std::string_view w) noexcept {
  return std::find(ws.begin(), ws.end(), w) != ws.end();
}

std::string singular(std::string_view noun) {
  std::string n(noun);
  auto ends = [&](std::string_view suf) {
    return n.size() > suf.size() && n.compare(n.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (n.size() <= 3) return n;
  if (ends("ss") || ends("us") || ends("is")) return n;
  if (ends("ies")) return n.substr(0, n.size() - 3) + "y";
  if (ends("ches") || ends("shes") || ends("xes") || ends("sses")) return n.substr(0, n.size() - 2);
  if (ends("s")) return n.substr(0, n.size() - 1);
  return n;
}

std::string plural(std::string_view noun) {
  std::string n(noun);
  if (n.empty()) return n;
  auto ends = [&](std::string_view suf) {
    return n.size() >= suf.size() && n.compare(n.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends("s") || ends("x") || ends("ch") || ends("sh")) return n + "es";
  if (ends("y") && n.size() > 1 && std::string_view("aeiou").find(n[n.size() - 2]) == std::string_view::npos)
    return n.substr(0, n.size() - 1) + "ies";
  return n + "s";
}

std::string_view article_for(std::string_view word) noexcept {
  if (word.empty()) return "a";
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(word.front())));
  return std::string_view("aeiou").find(c) != std::string_view::npos ? "an" : "a";
}

std::string oxford_list(const std::vector<std::string>& items) {
  if (items.empty()) return {};
  if (items.size() == 1) return items[0];
  if (items.size() == 2) return items[0] + " and " + items[1];
  std::string out;
  for (std::size_t i = 0; i + 1 < items.size(); ++i) out += items[i] + ", ";
  return out + "and " + items.back();
}

std::string section(std::string_view body, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  const auto a = body.find(open);
  if (a == std::string_view::npos) return {};
  const auto start = a + open.size();
  const auto b = body.find(close, start);
  if (b == std::string_view::npos) return {};
  return trimmed(body.substr(start, b - start));
}

std::string tagged(std::string_view tag, std::string_view body) {
  std::string out;
  out.reserve(body.size() + 2 * tag.size() + 8);
  out += "<";
  out += tag;
  out += ">\n";
  out += body;
  out += "\n</";
  out += tag;
  out += ">\n";
  return out;
}

}  // namespace groundmem::text
