#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "glow/core/archive.hpp"
#include "glow/core/config.hpp"
#include "glow/core/trajectory.hpp"

namespace glow {

struct EnvStepResult {
  std::string observation;
  Score reward = 0;
  Score score = 0;
  bool done = false;
  std::vector<std::string> valid_actions;
  Digest fingerprint;
  std::optional<std::string> inventory;

  StateSnapshot snapshot() const { return {fingerprint, observation, inventory, score, done}; }
  bool operator==(const EnvStepResult&) const = default;
};

inline void to_json(nlohmann::json& j, const EnvStepResult& r) {
  j = nlohmann::json{{"observation", r.observation}, {"reward", r.reward},
                     {"score", r.score},             {"done", r.done},
                     {"valid_actions", r.valid_actions},
                     {"fingerprint", r.fingerprint.hex()}};
  if (r.inventory) j["inventory"] = *r.inventory;
}

// The contract every environment honours: deterministic given the action
// sequence since reset, free-form commands accepted, valid actions offered
// as a hint only.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvStepResult reset(std::int64_t seed) = 0;
  // Throws ProtocolError when the session is already done.
  virtual EnvStepResult step(const std::string& action) = 0;
  virtual Digest fingerprint() = 0;
  virtual std::string name() const = 0;
  virtual nlohmann::json meta() { return nlohmann::json{{"name", name()}}; }
};

inline Step make_step(const EnvStepResult& before, const std::string& action,
                      const EnvStepResult& after) {
  return Step{action,     after.observation, after.reward, after.score, after.done,
              before.valid_actions, after.fingerprint, after.inventory};
}

struct Replay {
  EnvStepResult initial;
  std::vector<Step> steps;
  EnvStepResult final_result;
};

// Resets and re-executes `actions`. Charges the replayed steps to
// `budget->used_replay` when a budget is given. Throws ReplayDivergence if
// the episode ends before the last action and NondeterminismError when the
// final fingerprint differs from `expected`.
inline Replay replay_path(Environment& env, const std::vector<std::string>& actions,
                          std::int64_t seed, Budget* budget = nullptr,
                          const std::optional<Digest>& expected = std::nullopt) {
  Replay out;
  out.initial = env.reset(seed);
  EnvStepResult current = out.initial;
  out.steps.reserve(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (current.done)
      throw ReplayDivergence(i, "replay ended before action " + std::to_string(i) + " ('" +
                                    actions[i] + "')");
    EnvStepResult next = env.step(actions[i]);
    out.steps.push_back(make_step(current, actions[i], next));
    current = std::move(next);
  }
  if (budget) budget->charge_replay(static_cast<std::int64_t>(actions.size()));
  if (expected && current.fingerprint != *expected)
    throw NondeterminismError(actions.size(), "replay reached fingerprint " + current.fingerprint.hex() +
                                                  ", expected " + expected->hex());
  out.final_result = std::move(current);
  return out;
}

// Re-executes a recorded trajectory and reports the first step whose
// fingerprint, reward or done flag disagrees with the record.
inline std::optional<std::size_t> first_divergence(Environment& env, const Trajectory& t) {
  EnvStepResult current = env.reset(t.seed);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    if (current.done) return i;
    current = env.step(t.steps[i].action);
    const Step& rec = t.steps[i];
    if (current.fingerprint != rec.fingerprint_after || current.reward != rec.reward ||
        current.done != rec.done)
      return i;
  }
  return std::nullopt;
}

}  // namespace glow
