#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <openssl/evp.h>

#include <json.hpp>

#include "glow/core/digest.hpp"
#include "glow/core/errors.hpp"

namespace glow {

enum class Role { system, user, assistant };
enum class Purpose { act, select, analyze_frontier, reflect };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "?";
}

inline std::string_view to_string(Purpose p) {
  switch (p) {
    case Purpose::act: return "act";
    case Purpose::select: return "select";
    case Purpose::analyze_frontier: return "analyze_frontier";
    case Purpose::reflect: return "reflect";
  }
  return "?";
}

struct ChatMessage {
  Role role = Role::user;
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.5;
  Purpose purpose = Purpose::act;

  void validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0))
      throw DomainError("temperature must lie in [0, 2]");
    if (messages.empty()) throw DomainError("chat request without messages");
    for (std::size_t i = 1; i < messages.size(); ++i)
      if (messages[i].role == Role::system) throw DomainError("system message must come first");
  }

  // Whole prompt as one string; what the scripted oracle and cache key see.
  std::string rendered() const {
    std::string out;
    for (const auto& m : messages) {
      out += "[";
      out += to_string(m.role);
      out += "]\n";
      out += m.content;
      out += "\n";
    }
    return out;
  }
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  TokenUsage& operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    return *this;
  }
  bool operator==(const TokenUsage&) const = default;
};

struct ChatResponse {
  std::string text;
  TokenUsage token_usage;
  std::string backend_id;
  bool from_cache = false;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
};

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

// Serializes with invalid UTF-8 replaced rather than throwing; model output
// and game text are untrusted.
inline std::string safe_dump(const nlohmann::json& j, int indent = -1) {
  return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

inline std::string canonical_request(const ChatRequest& r) {
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& m : r.messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  std::ostringstream t;
  t.precision(17);
  t << r.temperature;
  return safe_dump(nlohmann::json{{"messages", msgs}, {"purpose", to_string(r.purpose)},
                                  {"temperature", t.str()}});
}

inline std::string request_digest(const ChatRequest& r) { return sha256_hex(canonical_request(r)); }

// Retries transient failures with exponential backoff. Configuration and
// other non-transient errors propagate immediately.
class RetryingBackend final : public ChatBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RetryingBackend(std::shared_ptr<ChatBackend> inner, int max_retries = 3,
                  std::chrono::milliseconds base_delay = std::chrono::milliseconds(500),
                  Sleeper sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })
      : inner_(std::move(inner)),
        max_retries_(max_retries),
        base_delay_(base_delay),
        sleep_(std::move(sleeper)) {}

  ChatResponse complete(const ChatRequest& request) override {
    for (int attempt = 0;; ++attempt) {
      try {
        return inner_->complete(request);
      } catch (const TransientBackendError& e) {
        if (attempt >= max_retries_)
          throw BackendError("backend failed after " + std::to_string(attempt + 1) +
                             " attempts: " + e.what());
        sleep_(base_delay_ * (1 << attempt));
      }
    }
  }

  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<ChatBackend> inner_;
  int max_retries_;
  std::chrono::milliseconds base_delay_;
  Sleeper sleep_;
};

// Memoizes completions by (backend id, request digest). With a directory,
// each response is one file written via rename, so parallel seed processes
// can share the cache without locking.
class CachingBackend final : public ChatBackend {
 public:
  explicit CachingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path dir = {})
      : inner_(std::move(inner)), dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  ChatResponse complete(const ChatRequest& request) override {
    const std::string key = sha256_hex(inner_->id() + "\n" + canonical_request(request));
    {
      std::lock_guard lock(mu_);
      if (auto it = memory_.find(key); it != memory_.end()) return hit(it->second);
    }
    if (auto text = load(key)) {
      std::lock_guard lock(mu_);
      memory_[key] = *text;
      return hit(*text);
    }
    ChatResponse r = inner_->complete(request);
    store(key, r.text);
    std::lock_guard lock(mu_);
    memory_[key] = r.text;
    ++misses_;
    return r;
  }

  std::string id() const override { return inner_->id(); }
  std::size_t hits() const noexcept { return hits_; }
  std::size_t misses() const noexcept { return misses_; }

 private:
  ChatResponse hit(const std::string& text) {
    ++hits_;
    return ChatResponse{text, TokenUsage{}, inner_->id(), true};
  }

  std::optional<std::string> load(const std::string& key) const {
    if (dir_.empty()) return std::nullopt;
    std::ifstream in(dir_ / (key + ".txt"), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void store(const std::string& key, const std::string& text) const {
    if (dir_.empty()) return;
    std::random_device rd;
    auto tmp = dir_ / (key + ".tmp" + std::to_string(rd()));
    {
      std::ofstream out(tmp, std::ios::binary);
      out << text;
    }
    std::error_code ec;
    std::filesystem::rename(tmp, dir_ / (key + ".txt"), ec);
    if (ec) std::filesystem::remove(tmp, ec);
  }

  std::shared_ptr<ChatBackend> inner_;
  std::filesystem::path dir_;
  std::mutex mu_;
  std::unordered_map<std::string, std::string> memory_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace glow
