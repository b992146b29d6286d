#include <chrono>
#include <semaphore>
#include <thread>

#include "groundmem/canvas.hpp"
#include "groundmem/error.hpp"
#include "groundmem/gateway.hpp"
#include "groundmem/json_extract.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that clashes with Eigen internals.
#include <httplib.h>
#include <openssl/evp.h>

namespace groundmem {

namespace {

std::string base64(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> unbase64(std::string_view s) {
  std::string clean;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  }
  if (auto comma = clean.find(','); clean.rfind("data:", 0) == 0 && comma != std::string::npos) clean.erase(0, comma + 1);
  if (clean.size() % 4 != 0) fail(ErrorCode::DecodeError, "base64 payload length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * clean.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
  if (n < 0) fail(ErrorCode::DecodeError, "invalid base64 payload");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock counts padding bytes as output.
  if (!clean.empty() && clean.back() == '=') --len;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url, const char* which) {
  if (url.rfind("http://", 0) != 0)
    fail(ErrorCode::ConfigError, std::string(which) + " endpoint must be an http:// URL: " + url);
  const auto slash = url.find('/', 7);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

class LiveGateway final : public Gateway {
 public:
  explicit LiveGateway(const BackendConfig& c)
      : config_(c),
        chat_(split_url(c.chat_url, "chat")),
        image_(split_url(c.image_url, "image")),
        embed_(split_url(c.embed_url, "embed")),
        slots_(c.max_in_flight) {}

  std::string chat(const ChatRequest& request) override {
    Json messages = Json::array();
    for (std::size_t i = 0; i < request.messages.size(); ++i) {
      const auto& m = request.messages[i];
      const bool last_user = m.role == "user" && i + 1 == request.messages.size();
      if (!last_user || request.attachments.empty()) {
        messages.push_back({{"role", m.role}, {"content", m.text}});
        continue;
      }
      Json parts = Json::array();
      parts.push_back({{"type", "text"}, {"text", m.text}});
      for (const auto& a : request.attachments) {
        parts.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:image/png;base64," + base64(encode_png(*a))}}}});
      }
      messages.push_back({{"role", m.role}, {"content", parts}});
    }
    const Json body = {{"model", std::string(to_string(request.role))}, {"messages", messages}, {"seed", config_.seed}};
    const Json reply = post(chat_, body);
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
      fail(ErrorCode::UnparsableOutput, std::string("chat reply lacks choices[0].message.content: ") + e.what());
    }
  }

  Canvas edit_image(const ImageEditRequest& request) override {
    if (request.prompt.empty()) fail(ErrorCode::PreconditionViolation, "edit_image needs a prompt");
    Json body = {{"prompt", request.prompt},
                 {"seed", splitmix64(config_.seed ^ fnv1a64(request.frame_tag)) + static_cast<std::uint64_t>(request.sample)},
                 {"image", nullptr}};
    if (request.base) body["image"] = base64(encode_png(*request.base));
    const Json reply = post(image_, body);
    if (!reply.contains("image") || !reply["image"].is_string())
      fail(ErrorCode::DecodeError, "image reply lacks an 'image' string");
    Canvas c = decode_png(unbase64(reply["image"].get<std::string>()));
    if (reply.contains("objects")) apply_sidecar(c, reply);
    return c;
  }

  Embedding embed_text(std::string_view text) override {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) fail(ErrorCode::EmptyInput, "empty text to embed");
    return vector_from(post(embed_, {{"input", std::string(text)}}));
  }

  Embedding embed_image(const Canvas& canvas) override {
    if (canvas.pixels.empty()) fail(ErrorCode::EmptyInput, "empty canvas to embed");
    return vector_from(post(embed_, {{"image", base64(encode_png(canvas))}}));
  }

 private:
  static Embedding vector_from(const Json& reply) {
    const Json* v = nullptr;
    if (reply.contains("embedding")) v = &reply["embedding"];
    else if (reply.contains("data") && reply["data"].is_array() && !reply["data"].empty())
      v = &reply["data"][0]["embedding"];
    if (!v || !v->is_array() || v->empty()) fail(ErrorCode::UnparsableOutput, "embedding reply lacks a vector");
    Embedding e(static_cast<Eigen::Index>(v->size()));
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) fail(ErrorCode::UnparsableOutput, "embedding holds a non-number");
      e[static_cast<Eigen::Index>(i)] = (*v)[i].get<double>();
    }
    if (!all_finite(e)) fail(ErrorCode::UnparsableOutput, "embedding holds a non-finite value");
    return e;
  }

  Json post(const Endpoint& ep, const Json& body) {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};

    const std::string payload = body.dump();
    ErrorCode last = ErrorCode::BackendUnreachable;
    std::string message;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(200 * (1 << (attempt - 1))));
      httplib::Client client(ep.origin);
      const auto t = std::chrono::milliseconds(config_.timeout_ms);
      client.set_connection_timeout(t);
      client.set_read_timeout(t);
      client.set_write_timeout(t);
      auto res = client.Post(ep.path, payload, "application/json");
      if (!res) {
        last = res.error() == httplib::Error::Read || res.error() == httplib::Error::Write
                   ? ErrorCode::Timeout
                   : ErrorCode::BackendUnreachable;
        message = ep.origin + ep.path + ": " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 200 && res->status < 300) {
        try {
          return Json::parse(res->body);
        } catch (const Json::exception& e) {
          fail(ErrorCode::UnparsableOutput, ep.origin + ep.path + " returned invalid JSON: " + e.what());
        }
      }
      message = ep.origin + ep.path + " returned HTTP " + std::to_string(res->status);
      if (res->status != 429 && res->status < 500) fail(ErrorCode::NonRetryableStatus, message);
      last = ErrorCode::BackendUnreachable;
    }
    fail(last, message + " (after " + std::to_string(config_.max_retries + 1) + " attempts)");
  }

  BackendConfig config_;
  Endpoint chat_;
  Endpoint image_;
  Endpoint embed_;
  std::counting_semaphore<> slots_;
};

}  // namespace

std::unique_ptr<Gateway> make_live_gateway(const BackendConfig& c) {
  validate(c);
  return std::make_unique<LiveGateway>(c);
}

}  // namespace groundmem
