#pragma once

#include <functional>

#include "glow/llm/chat.hpp"
#include "glow/world/templates.hpp"

namespace glow {

// What every world-model operation needs to talk to the model.
struct ModelContext {
  ChatBackend& backend;
  const PromptTemplates& prompts;
  double temperature = 0.5;
  std::size_t observation_chars = 200;
  std::size_t candidate_cap = 20;
  // Observer for every completed call (event logging, token accounting).
  std::function<void(const ChatRequest&, const ChatResponse&)> on_call;

  ChatResponse call(Purpose purpose, std::vector<ChatMessage> messages) const {
    ChatRequest req{std::move(messages), temperature, purpose};
    ChatResponse res = backend.complete(req);
    if (on_call) on_call(req, res);
    return res;
  }

  ChatResponse ask(Purpose purpose, std::string user_prompt) const {
    return call(purpose, {ChatMessage{Role::user, std::move(user_prompt)}});
  }
};

}  // namespace glow
