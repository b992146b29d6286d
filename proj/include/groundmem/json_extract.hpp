#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace groundmem {

using Json = nlohmann::json;

/// Locates a JSON value embedded in free-form model output.
///
/// Every balanced `open ... close` span (string-aware) is tried in order of its
/// opening position; a span is parsed strictly, then once more after
/// `repair_json`. The first parse that `accept` approves wins.
std::optional<Json> find_json(std::string_view raw, char open,
                              const std::function<bool(const Json&)>& accept);

/// Strips code fences and trailing commas before `}` / `]`.
std::string repair_json(std::string_view candidate);

/// String-valued member or empty when absent / null / non-string.
std::string json_string(const Json& obj, const char* key);

}  // namespace groundmem
