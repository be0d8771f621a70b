#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glow/core/digest.hpp"
#include "glow/core/errors.hpp"

namespace glow {

using Score = std::int64_t;

struct Step {
  std::string action;
  std::string observation;
  Score reward = 0;
  Score score_after = 0;
  bool done = false;
  std::vector<std::string> valid_actions;  // offered before the action
  Digest fingerprint_after;
  std::optional<std::string> inventory;    // only when the environment reports one

  bool operator==(const Step&) const = default;
};

// Maximum prefix sum of rewards, i.e. the highest cumulative score reached
// at any point of the episode. Negative rewards after the peak do not lower it.
inline Score trajectory_value(std::span<const Step> steps) {
  if (steps.empty()) throw DomainError("empty trajectory");
  Score running = 0;
  Score best = steps.front().reward;
  for (const auto& s : steps) {
    running += s.reward;
    best = std::max(best, running);
  }
  return best;
}

struct Trajectory {
  std::uint64_t id = 0;
  std::int64_t seed = 0;
  std::size_t prefix_len = 0;  // steps replayed from the archive path
  std::vector<Step> steps;
  Score peak_value = 0;
  Score final_value = 0;

  // Builds a trajectory and caches its values. Throws DomainError for an
  // empty step list.
  static Trajectory make(std::uint64_t id, std::int64_t seed, std::size_t prefix_len,
                         std::vector<Step> steps) {
    Trajectory t;
    t.id = id;
    t.seed = seed;
    t.prefix_len = prefix_len;
    t.peak_value = trajectory_value(steps);
    t.final_value = steps.back().score_after;
    t.steps = std::move(steps);
    return t;
  }

  std::size_t exploration_steps() const noexcept {
    return steps.size() > prefix_len ? steps.size() - prefix_len : 0;
  }

  std::vector<std::string> actions() const {
    std::vector<std::string> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.action);
    return out;
  }

  bool operator==(const Trajectory&) const = default;
};

// Checks the score bookkeeping invariant: score_after(t) = score_after(t-1) + reward(t),
// starting from zero, and that only the last step may be terminal.
inline bool scores_consistent(std::span<const Step> steps) noexcept {
  Score running = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    running += steps[i].reward;
    if (steps[i].score_after != running) return false;
    if (steps[i].done && i + 1 != steps.size()) return false;
  }
  return true;
}

}  // namespace glow
