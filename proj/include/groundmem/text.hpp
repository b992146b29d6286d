#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace groundmem::text {

std::string lower(std::string_view s);
std::string_view trim(std::string_view s) noexcept;
std::string trimmed(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

/// Lower-cased alphanumeric runs ("I'm in a home-office" -> i, m, in, a, home, office).
std::vector<std::string> word_tokens(std::string_view s);
/// Lower-cased words keeping in-word apostrophes ("i'm", "it's").
std::vector<std::string> words(std::string_view s);
bool has_word(const std::vector<std::string>& ws, std::string_view w) noexcept;

/// Crude English singular: guitars -> guitar, boxes -> box, stairs -> stair.
std::string singular(std::string_view noun);
/// Regular plural for rendering counts.
std::string plural(std::string_view noun);
/// "a" or "an" for the following word.
std::string_view article_for(std::string_view word) noexcept;
/// "a, b, and c" / "a and b" / "a".
std::string oxford_list(const std::vector<std::string>& items);

/// Inner text of the first `<tag>...</tag>` (trimmed), or empty.
std::string section(std::string_view body, std::string_view tag);
/// `<tag>\nbody\n</tag>\n`
std::string tagged(std::string_view tag, std::string_view body);

}  // namespace groundmem::text
