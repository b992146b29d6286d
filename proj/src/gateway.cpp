#include "groundmem/gateway.hpp"

#include <charconv>
#include <cstdlib>

#include "groundmem/error.hpp"
#include "groundmem/text.hpp"

namespace groundmem {

std::string_view to_string(Role r) noexcept {
  switch (r) {
    case Role::Observer: return "Observer";
    case Role::Constructor: return "Constructor";
    case Role::Summarizer: return "Summarizer";
    case Role::FactDecomposer: return "FactDecomposer";
    case Role::Captioner: return "Captioner";
    case Role::FactChecker: return "FactChecker";
    case Role::Linker: return "Linker";
    case Role::Planner: return "Planner";
    case Role::Refiner: return "Refiner";
    case Role::Processor: return "Processor";
    case Role::Answerer: return "Answerer";
    case Role::Judge: return "Judge";
    case Role::Annotator: return "Annotator";
  }
  return "Observer";
}

BackendConfig apply_environment(BackendConfig c) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto m = env("GROUNDMEM_MODE")) {
    const auto l = text::lower(*m);
    if (l == "mock") c.mode = Mode::Mock;
    else if (l == "live") c.mode = Mode::Live;
    else fail(ErrorCode::ConfigError, "GROUNDMEM_MODE must be live or mock, got '" + *m + "'");
  }
  if (auto s = env("GROUNDMEM_SEED")) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
    if (ec != std::errc{} || p != s->data() + s->size()) fail(ErrorCode::ConfigError, "GROUNDMEM_SEED is not an integer");
    c.seed = v;
  }
  if (auto u = env("GROUNDMEM_CHAT_URL")) c.chat_url = *u;
  if (auto u = env("GROUNDMEM_IMAGE_URL")) c.image_url = *u;
  if (auto u = env("GROUNDMEM_EMBED_URL")) c.embed_url = *u;
  return c;
}

void validate(const BackendConfig& c) {
  if (c.mode == Mode::Live && (c.chat_url.empty() || c.image_url.empty() || c.embed_url.empty()))
    fail(ErrorCode::ConfigError, "live mode needs chat, image and embedding endpoints");
  if (c.timeout_ms <= 0 || c.max_retries < 0 || c.max_in_flight < 1)
    fail(ErrorCode::ConfigError, "timeout, retries and in-flight limit must be positive");
  if (!(c.dropout >= 0.0 && c.dropout <= 1.0)) fail(ErrorCode::ConfigError, "dropout must lie in [0, 1]");
  if (c.canvas_size < 64) fail(ErrorCode::ConfigError, "canvas size must be at least 64");
}

std::unique_ptr<Gateway> make_gateway(const BackendConfig& c) {
  validate(c);
  return c.mode == Mode::Live ? make_live_gateway(c) : make_mock_gateway(c);
}

ChatRequest make_request(Role role, std::string system, std::string user,
                         std::vector<std::shared_ptr<const Canvas>> attachments) {
  ChatRequest r;
  r.role = role;
  r.messages.push_back({"system", std::move(system)});
  r.messages.push_back({"user", std::move(user)});
  r.attachments = std::move(attachments);
  return r;
}

const std::string& user_text(const ChatRequest& r) {
  for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it) {
    if (it->role == "user") return it->text;
  }
  fail(ErrorCode::PreconditionViolation, "chat request has no user message");
}

}  // namespace groundmem
