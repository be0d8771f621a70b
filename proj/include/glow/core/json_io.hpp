#pragma once

// JSON forms of the core types. Field names match the data model so event
// logs and reports can be read without this library.

#include <json.hpp>

#include "glow/core/archive.hpp"
#include "glow/core/config.hpp"
#include "glow/core/frontier.hpp"

namespace glow {

using json = nlohmann::json;

inline void to_json(json& j, const Digest& d) { j = d.hex(); }
inline void from_json(const json& j, Digest& d) { d = Digest(j.get<std::string>()); }

inline void to_json(json& j, const Step& s) {
  j = json{{"action", s.action},       {"observation", s.observation},
           {"reward", s.reward},       {"score_after", s.score_after},
           {"done", s.done},           {"valid_actions", s.valid_actions},
           {"fingerprint_after", s.fingerprint_after}};
  if (s.inventory) j["inventory"] = *s.inventory;
}

inline void from_json(const json& j, Step& s) {
  j.at("action").get_to(s.action);
  j.at("observation").get_to(s.observation);
  j.at("reward").get_to(s.reward);
  j.at("score_after").get_to(s.score_after);
  j.at("done").get_to(s.done);
  j.at("valid_actions").get_to(s.valid_actions);
  j.at("fingerprint_after").get_to(s.fingerprint_after);
  if (auto it = j.find("inventory"); it != j.end() && !it->is_null())
    s.inventory = it->get<std::string>();
  else
    s.inventory.reset();
}

inline void to_json(json& j, const Trajectory& t) {
  j = json{{"id", t.id},           {"seed", t.seed},
           {"prefix_len", t.prefix_len}, {"steps", t.steps},
           {"peak_value", t.peak_value}, {"final_value", t.final_value}};
}

inline void from_json(const json& j, Trajectory& t) {
  j.at("id").get_to(t.id);
  j.at("seed").get_to(t.seed);
  j.at("prefix_len").get_to(t.prefix_len);
  j.at("steps").get_to(t.steps);
  j.at("peak_value").get_to(t.peak_value);
  j.at("final_value").get_to(t.final_value);
}

inline void to_json(json& j, const ArchiveEntry& e) {
  j = json{{"fingerprint", e.fingerprint}, {"observation", e.observation},
           {"inventory", e.inventory ? json(*e.inventory) : json(nullptr)},
           {"score", e.score},             {"visits", e.visits},
           {"path", e.path},               {"discovery_step", e.discovery_step},
           {"terminal", e.terminal},       {"deaths_from", e.deaths_from}};
}

inline void from_json(const json& j, ArchiveEntry& e) {
  j.at("fingerprint").get_to(e.fingerprint);
  j.at("observation").get_to(e.observation);
  if (j.contains("inventory") && !j["inventory"].is_null())
    e.inventory = j["inventory"].get<std::string>();
  j.at("score").get_to(e.score);
  j.at("visits").get_to(e.visits);
  j.at("path").get_to(e.path);
  j.at("discovery_step").get_to(e.discovery_step);
  e.terminal = j.value("terminal", false);
  e.deaths_from = j.value("deaths_from", std::uint64_t{0});
}

inline void to_json(json& j, const Frontier& f) {
  j = json{{"capacity", f.capacity()}, {"entries", f.entries()}};
}

inline void to_json(json& j, const Budget& b) {
  j = json{{"total", b.total},
           {"used_exploration", b.used_exploration},
           {"used_replay", b.used_replay},
           {"count_replay_toward_total", b.count_replay_toward_total}};
}

inline json selection_to_json(const SelectionStrategy& s) {
  if (s.kind == SelectionKind::novelty)
    return json{{"kind", to_string(s.kind)}, {"alpha", s.alpha}};
  return json(std::string(to_string(s.kind)));
}

inline void to_json(json& j, const RunConfig& c) {
  j = json{{"budget", c.budget},
           {"episode_cap", c.episode_cap},
           {"n_explorations", c.n_explorations},
           {"frontier_k", c.frontier_k},
           {"temperature", c.temperature},
           {"seed", c.seed},
           {"selection_strategy", selection_to_json(c.selection)},
           {"reflection_strategy", to_string(c.reflection)},
           {"align_mode", c.align_mode == AlignMode::index ? "index" : "per_state"},
           {"use_frontier_in_context", c.use_frontier_in_context},
           {"count_replay_toward_total", c.count_replay_toward_total},
           {"verify_replay", c.verify_replay},
           {"candidate_cap", c.candidate_cap},
           {"observation_chars", c.observation_chars}};
}

}  // namespace glow
