#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "glow/core/errors.hpp"

namespace glow {

enum class SelectionKind { glow, uniform, novelty, ige };
enum class ReflectionKind { mar, reflexion, none };

inline std::string_view to_string(SelectionKind k) {
  switch (k) {
    case SelectionKind::glow: return "glow";
    case SelectionKind::uniform: return "uniform";
    case SelectionKind::novelty: return "novelty";
    case SelectionKind::ige: return "ige";
  }
  return "?";
}

inline std::string_view to_string(ReflectionKind k) {
  switch (k) {
    case ReflectionKind::mar: return "mar";
    case ReflectionKind::reflexion: return "reflexion";
    case ReflectionKind::none: return "none";
  }
  return "?";
}

inline SelectionKind parse_selection_kind(std::string_view s) {
  if (s == "glow") return SelectionKind::glow;
  if (s == "uniform") return SelectionKind::uniform;
  if (s == "novelty") return SelectionKind::novelty;
  if (s == "ige") return SelectionKind::ige;
  throw ConfigError("selection", "unknown strategy '" + std::string(s) + "'");
}

inline ReflectionKind parse_reflection_kind(std::string_view s) {
  if (s == "mar") return ReflectionKind::mar;
  if (s == "reflexion") return ReflectionKind::reflexion;
  if (s == "none") return ReflectionKind::none;
  throw ConfigError("reflection", "unknown strategy '" + std::string(s) + "'");
}

struct SelectionStrategy {
  SelectionKind kind = SelectionKind::glow;
  double alpha = 1.0;  // novelty exponent, only read for SelectionKind::novelty
  bool operator==(const SelectionStrategy&) const = default;
};

// How the GLoW selector turns W_global into a choice: one call returning an
// index over the capped candidate list, or one scoring call per candidate
// followed by argmax.
enum class AlignMode { index, per_state };

struct RunConfig {
  std::int64_t budget = 1000;
  std::int64_t episode_cap = 50;
  std::int64_t n_explorations = 3;
  std::int64_t frontier_k = 5;
  double temperature = 0.5;
  std::int64_t seed = 1;
  SelectionStrategy selection{};
  ReflectionKind reflection = ReflectionKind::mar;
  AlignMode align_mode = AlignMode::index;
  bool use_frontier_in_context = true;
  bool count_replay_toward_total = false;
  bool verify_replay = false;
  std::int64_t candidate_cap = 20;
  std::int64_t observation_chars = 200;

  void validate() const {
    if (budget < 1) throw ConfigError("budget", "must be >= 1");
    if (episode_cap < 1) throw ConfigError("episode_cap", "must be >= 1");
    if (n_explorations < 1) throw ConfigError("n_explorations", "must be >= 1");
    if (frontier_k < 1) throw ConfigError("frontier_k", "must be >= 1");
    if (!(temperature >= 0.0 && temperature <= 2.0))
      throw ConfigError("temperature", "must lie in [0, 2]");
    if (selection.kind == SelectionKind::novelty && !(selection.alpha >= 0.0))
      throw ConfigError("alpha", "must be >= 0");
    if (candidate_cap < 1) throw ConfigError("candidate_cap", "must be >= 1");
    if (observation_chars < 1) throw ConfigError("observation_chars", "must be >= 1");
  }

  bool operator==(const RunConfig&) const = default;
};

// Environment interaction budget. Replay steps are tracked separately and
// only count toward `total` when `count_replay_toward_total` is set.
struct Budget {
  std::int64_t total = 1000;
  std::int64_t used_exploration = 0;
  std::int64_t used_replay = 0;
  bool count_replay_toward_total = false;

  std::int64_t used() const noexcept {
    return used_exploration + (count_replay_toward_total ? used_replay : 0);
  }
  std::int64_t remaining() const noexcept { return total > used() ? total - used() : 0; }
  bool exhausted() const noexcept { return remaining() == 0; }

  // Whether replaying `len` actions and then taking at least one exploration
  // step still fits.
  bool can_replay_then_step(std::int64_t len) const noexcept {
    if (!count_replay_toward_total) return remaining() > 0;
    return remaining() > len;
  }

  void charge_exploration(std::int64_t n = 1) {
    if (n > remaining()) throw DomainError("exploration budget exceeded");
    used_exploration += n;
  }
  void charge_replay(std::int64_t n) {
    if (count_replay_toward_total && n > remaining()) throw DomainError("replay budget exceeded");
    used_replay += n;
  }
};

}  // namespace glow
