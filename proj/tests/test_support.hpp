#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "glow/llm/chat.hpp"

namespace glow::testing {

// Always answers the same action; select/analyze/reflect get an empty reply.
class FixedActionBackend final : public ChatBackend {
 public:
  explicit FixedActionBackend(std::string action = "look") : action_(std::move(action)) {}
  ChatResponse complete(const ChatRequest& r) override {
    ++calls;
    if (r.purpose != Purpose::act) return {"", {}, id(), false};
    return {R"({"thought": "", "action": ")" + action_ + R"("})", {1, 1}, id(), false};
  }
  std::string id() const override { return "fixed:" + action_; }
  int calls = 0;

 private:
  std::string action_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(GLOW_SOURCE_DIR) / "tests" / "fixtures" / name;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

}  // namespace glow::testing
