#pragma once

// Environment served by an external process over line-delimited JSON:
//
//   -> {"request_id": 3, "op": "step", "action": "open mailbox"}
//   <- {"request_id": 3, "observation": "...", "reward": 0, "score": 0,
//       "done": false, "valid_actions": [...], "fingerprint": "9f..."}
//
// Ops are reset (optional game_path, seed), step (action), fingerprint and
// meta. A failed request carries "error": {"code", "message"} instead.

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "glow/env/environment.hpp"
#include "glow/env/subprocess.hpp"

namespace glow {

// A response carrying an error object.
class BridgeError : public ProtocolError {
 public:
  BridgeError(std::string code, const std::string& message)
      : ProtocolError(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class BridgeClient {
 public:
  explicit BridgeClient(const std::string& command,
                        std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : proc_(std::make_unique<LineProcess>(command)), timeout_(timeout), command_(command) {}

  // Sends `request` with the next request_id and returns the matching
  // response. Error responses are returned, not thrown.
  nlohmann::json exchange(nlohmann::json request) {
    const std::int64_t id = next_id_++;
    request["request_id"] = id;
    auto response = send_line(request.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
    auto echoed = response.find("request_id");
    if (echoed == response.end() || !echoed->is_number_integer() || echoed->get<std::int64_t>() != id)
      throw ProtocolError("bridge answered request " + std::to_string(id) + " with request_id " +
                          (echoed == response.end() ? std::string("<missing>") : echoed->dump()));
    return response;
  }

  // Like exchange but throws BridgeError for error responses.
  nlohmann::json call(nlohmann::json request) {
    auto r = exchange(std::move(request));
    if (auto err = r.find("error"); err != r.end() && !err->is_null()) {
      std::string code = err->is_object() ? err->value("code", std::string("unknown")) : "unknown";
      std::string message = err->is_object() ? err->value("message", std::string()) : err->dump();
      throw BridgeError(code, message);
    }
    return r;
  }

  // Writes an arbitrary line (used to probe malformed-input handling) and
  // returns whatever JSON object comes back.
  nlohmann::json send_line(const std::string& line) {
    if (!proc_->write_line(line)) throw EnvironmentUnavailable("bridge process '" + command_ + "' is not accepting input");
    auto reply = proc_->read_line(timeout_);
    if (!reply) {
      if (proc_->timed_out())
        throw ProtocolError("bridge did not answer within " + std::to_string(timeout_.count()) + " ms");
      throw EnvironmentUnavailable("bridge process '" + command_ + "' exited");
    }
    auto j = nlohmann::json::parse(*reply, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError("bridge sent a line that is not a JSON object");
    return j;
  }

  std::int64_t next_request_id() const noexcept { return next_id_; }
  LineProcess& process() noexcept { return *proc_; }

 private:
  std::unique_ptr<LineProcess> proc_;
  std::chrono::milliseconds timeout_;
  std::string command_;
  std::int64_t next_id_ = 1;
};

inline EnvStepResult bridge_result(const nlohmann::json& r) {
  try {
    EnvStepResult out;
    out.observation = r.at("observation").get<std::string>();
    out.reward = r.at("reward").get<Score>();
    out.score = r.at("score").get<Score>();
    out.done = r.at("done").get<bool>();
    out.valid_actions = r.at("valid_actions").get<std::vector<std::string>>();
    out.fingerprint = Digest(r.at("fingerprint").get<std::string>());
    if (auto it = r.find("inventory"); it != r.end() && it->is_string()) out.inventory = it->get<std::string>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed bridge response: ") + e.what());
  }
}

class BridgeEnvironment final : public Environment {
 public:
  explicit BridgeEnvironment(std::string command, std::optional<std::string> game_path = std::nullopt,
                             std::chrono::milliseconds timeout = std::chrono::seconds(10))
      : command_(std::move(command)), game_path_(std::move(game_path)), client_(command_, timeout) {}

  // A failing reset means the game could not be started at all.
  EnvStepResult reset(std::int64_t seed) override {
    nlohmann::json req{{"op", "reset"}, {"seed", seed}};
    if (game_path_) req["game_path"] = *game_path_;
    try {
      return bridge_result(client_.call(std::move(req)));
    } catch (const BridgeError& e) {
      throw EnvironmentUnavailable("bridge reset failed: " + std::string(e.what()));
    }
  }

  EnvStepResult step(const std::string& action) override {
    return bridge_result(client_.call({{"op", "step"}, {"action", action}}));
  }

  Digest fingerprint() override {
    auto r = client_.call({{"op", "fingerprint"}});
    if (!r.contains("fingerprint") || !r["fingerprint"].is_string())
      throw ProtocolError("bridge fingerprint response without fingerprint");
    return Digest(r["fingerprint"].get<std::string>());
  }

  std::string name() const override { return "bridge:" + command_; }

  nlohmann::json meta() override {
    auto r = client_.call({{"op", "meta"}});
    r.erase("request_id");
    r["name"] = name();
    return r;
  }

  BridgeClient& client() noexcept { return client_; }

 private:
  std::string command_;
  std::optional<std::string> game_path_;
  BridgeClient client_;
};

}  // namespace glow
