#pragma once

#include <chrono>
#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "glow/llm/chat.hpp"

namespace glow {

struct HttpBackendConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4.1-mini";
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::seconds timeout{120};
  bool operator==(const HttpBackendConfig&) const = default;
};

// Splits "https://host:port/path" into the scheme+authority httplib wants and the path.
inline std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint", "missing scheme in '" + url + "'");
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// OpenAI-style chat-completion client. The bearer credential comes from the
// environment variable named in the config, never from the config file.
class HttpBackend final : public ChatBackend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (!key || !*key) throw ConfigError("api_key_env", "environment variable " + cfg_.api_key_env + " is not set");
    api_key_ = key;
    std::tie(base_, path_) = split_endpoint(cfg_.endpoint);
  }

  std::string id() const override { return "http:" + cfg_.model; }

  ChatResponse complete(const ChatRequest& request) override {
    request.validate();
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : request.messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    nlohmann::json body{{"model", cfg_.model}, {"messages", msgs}, {"temperature", request.temperature}};

    httplib::Client client(base_);
    client.set_connection_timeout(cfg_.timeout);
    client.set_read_timeout(cfg_.timeout);
    client.set_write_timeout(cfg_.timeout);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    auto res = client.Post(path_, headers, safe_dump(body), "application/json");
    if (!res) throw TransientBackendError("transport error: " + httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403)
      throw ConfigError("api_key_env", "credential rejected (HTTP " + std::to_string(res->status) + ")");
    if (res->status == 429 || res->status >= 500)
      throw TransientBackendError("HTTP " + std::to_string(res->status));
    if (res->status != 200) throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body);

    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw BackendError("response body is not JSON");
    ChatResponse out;
    out.backend_id = id();
    try {
      out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
        out.token_usage.prompt_tokens = u->value("prompt_tokens", 0LL);
        out.token_usage.completion_tokens = u->value("completion_tokens", 0LL);
      }
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("unexpected response shape: ") + e.what());
    }
    return out;
  }

 private:
  HttpBackendConfig cfg_;
  std::string api_key_;
  std::string base_;
  std::string path_;
};

}  // namespace glow
