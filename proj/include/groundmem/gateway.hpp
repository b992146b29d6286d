#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "groundmem/core.hpp"
#include "groundmem/embedding.hpp"

namespace groundmem {

enum class Role : std::uint8_t {
  Observer,
  Constructor,
  Summarizer,
  FactDecomposer,
  Captioner,
  FactChecker,
  Linker,
  Planner,
  Refiner,
  Processor,
  Answerer,
  Judge,
  Annotator,
};

std::string_view to_string(Role r) noexcept;

struct Message {
  std::string role;  // "system" | "user" | "assistant"
  std::string text;
};

struct ChatRequest {
  Role role = Role::Observer;
  std::vector<Message> messages;
  std::vector<std::shared_ptr<const Canvas>> attachments;
};

struct ImageEditRequest {
  std::shared_ptr<const Canvas> base;  // null for creation
  std::string prompt;
  int sample = 0;           // candidate index; only the sampling seed differs
  std::string frame_tag;    // frame id text, mixes into the sampling seed
};

enum class Mode : std::uint8_t { Mock, Live };

struct BackendConfig {
  Mode mode = Mode::Mock;
  std::string chat_url;
  std::string image_url;
  std::string embed_url;
  std::uint64_t seed = 7;
  int timeout_ms = 60000;
  int max_retries = 2;
  int max_in_flight = 4;
  /// Mock image backend: chance that a candidate omits a newly drawn object.
  double dropout = 0.25;
  int canvas_size = 320;
};

/// Reads GROUNDMEM_MODE / _SEED / _CHAT_URL / _IMAGE_URL / _EMBED_URL over `base`.
/// Throws ConfigError on unparsable values.
BackendConfig apply_environment(BackendConfig base);
/// Throws ConfigError when live mode lacks an endpoint.
void validate(const BackendConfig& c);

class Gateway {
 public:
  virtual ~Gateway() = default;
  virtual std::string chat(const ChatRequest& request) = 0;
  virtual Canvas edit_image(const ImageEditRequest& request) = 0;
  virtual Embedding embed_text(std::string_view text) = 0;
  virtual Embedding embed_image(const Canvas& canvas) = 0;
};

std::unique_ptr<Gateway> make_mock_gateway(const BackendConfig& c);
std::unique_ptr<Gateway> make_live_gateway(const BackendConfig& c);
std::unique_ptr<Gateway> make_gateway(const BackendConfig& c);

/// Chat request with one system and one user message.
ChatRequest make_request(Role role, std::string system, std::string user,
                         std::vector<std::shared_ptr<const Canvas>> attachments = {});

/// Text of the last user message, where the tagged sections live.
const std::string& user_text(const ChatRequest& r);

}  // namespace groundmem
