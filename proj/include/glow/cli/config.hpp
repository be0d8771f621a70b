#pragma once

// Experiment configuration: one JSON document with a schema_version. The
// run parameters are required so a config file states what it ran; the
// rest has defaults. Credentials are never part of it, only the name of the
// environment variable holding them.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glow/core/config.hpp"
#include "glow/core/json_io.hpp"
#include "glow/llm/chat.hpp"
#include "glow/llm/http_backend.hpp"

namespace glow {

inline constexpr int kConfigSchemaVersion = 1;

enum class BackendKind { scripted, http };

struct BackendConfig {
  BackendKind kind = BackendKind::scripted;
  HttpBackendConfig http{};
  int max_retries = 3;
  std::string cache_dir;  // empty: in-memory cache only
  bool operator==(const BackendConfig&) const = default;
};

struct ExperimentConfig {
  RunConfig run{};
  std::vector<std::int64_t> seeds{1, 2, 3};
  std::string env = "miniquest";  // or "bridge:<command>"
  std::optional<std::string> game_path;
  BackendConfig backend{};
  std::string prompts_dir;  // empty: built-in templates
  bool operator==(const ExperimentConfig&) const = default;

  void validate() const {
    run.validate();
    if (seeds.empty()) throw ConfigError("seeds", "must list at least one seed");
    if (env != "miniquest" && !(env.starts_with("bridge:") && env.size() > 7))
      throw ConfigError("env", "expected 'miniquest' or 'bridge:<command>', got '" + env + "'");
    if (backend.max_retries < 0) throw ConfigError("backend.max_retries", "must be >= 0");
    if (backend.kind == BackendKind::http) {
      if (backend.http.model.empty()) throw ConfigError("backend.model", "must not be empty");
      if (backend.http.api_key_env.empty()) throw ConfigError("backend.api_key_env", "must not be empty");
      split_endpoint(backend.http.endpoint);
    }
  }
};

namespace config_detail {

template <class T>
T required(const nlohmann::json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw ConfigError(field, "required field is missing");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(field, "has the wrong type (" + std::string(it->type_name()) + ")");
  }
}

template <class T>
T field_or(const nlohmann::json& j, const char* field, T fallback) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(field, "has the wrong type (" + std::string(it->type_name()) + ")");
  }
}

inline SelectionStrategy parse_selection(const nlohmann::json& j) {
  auto it = j.find("selection_strategy");
  if (it == j.end()) throw ConfigError("selection_strategy", "required field is missing");
  SelectionStrategy s;
  if (it->is_string()) {
    s.kind = parse_selection_kind(it->get<std::string>());
  } else if (it->is_object()) {
    s.kind = parse_selection_kind(required<std::string>(*it, "kind"));
    s.alpha = field_or<double>(*it, "alpha", 1.0);
  } else {
    throw ConfigError("selection_strategy", "expected a name or {\"kind\", \"alpha\"}");
  }
  return s;
}

}  // namespace config_detail

inline const std::vector<std::string>& known_config_fields() {
  static const std::vector<std::string> fields{
      "schema_version", "budget", "episode_cap", "n_explorations", "frontier_k", "temperature",
      "selection_strategy", "reflection_strategy", "align_mode", "use_frontier_in_context",
      "count_replay_toward_total", "verify_replay", "candidate_cap", "observation_chars", "seeds", "env",
      "game_path", "backend", "prompts_dir"};
  return fields;
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  using namespace config_detail;
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  const auto version = required<int>(j, "schema_version");
  if (version != kConfigSchemaVersion)
    throw ConfigError("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                            std::to_string(kConfigSchemaVersion) + ")");
  for (const auto& [key, _] : j.items()) {
    const auto& known = known_config_fields();
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(key, "unknown field");
  }

  ExperimentConfig c;
  RunConfig& r = c.run;
  r.budget = required<std::int64_t>(j, "budget");
  r.episode_cap = required<std::int64_t>(j, "episode_cap");
  r.n_explorations = required<std::int64_t>(j, "n_explorations");
  r.frontier_k = required<std::int64_t>(j, "frontier_k");
  r.temperature = required<double>(j, "temperature");
  r.selection = parse_selection(j);
  r.reflection = parse_reflection_kind(required<std::string>(j, "reflection_strategy"));
  const auto align = field_or<std::string>(j, "align_mode", "index");
  if (align == "index") r.align_mode = AlignMode::index;
  else if (align == "per_state") r.align_mode = AlignMode::per_state;
  else throw ConfigError("align_mode", "expected 'index' or 'per_state'");
  r.use_frontier_in_context = field_or<bool>(j, "use_frontier_in_context", true);
  r.count_replay_toward_total = field_or<bool>(j, "count_replay_toward_total", false);
  r.verify_replay = field_or<bool>(j, "verify_replay", false);
  r.candidate_cap = field_or<std::int64_t>(j, "candidate_cap", 20);
  r.observation_chars = field_or<std::int64_t>(j, "observation_chars", 200);

  c.seeds = field_or<std::vector<std::int64_t>>(j, "seeds", {1, 2, 3});
  c.env = field_or<std::string>(j, "env", "miniquest");
  if (auto it = j.find("game_path"); it != j.end() && !it->is_null()) c.game_path = required<std::string>(j, "game_path");
  c.prompts_dir = field_or<std::string>(j, "prompts_dir", "");

  if (auto it = j.find("backend"); it != j.end()) {
    const auto& b = *it;
    if (!b.is_object()) throw ConfigError("backend", "expected an object");
    const auto kind = field_or<std::string>(b, "kind", "scripted");
    if (kind == "scripted") c.backend.kind = BackendKind::scripted;
    else if (kind == "http") c.backend.kind = BackendKind::http;
    else throw ConfigError("backend.kind", "expected 'scripted' or 'http'");
    for (const char* forbidden : {"api_key", "key", "token", "authorization"})
      if (b.contains(forbidden))
        throw ConfigError(std::string("backend.") + forbidden,
                          "credentials are read from the environment; name the variable in api_key_env");
    c.backend.http.endpoint = field_or<std::string>(b, "endpoint", c.backend.http.endpoint);
    c.backend.http.model = field_or<std::string>(b, "model", c.backend.http.model);
    c.backend.http.api_key_env = field_or<std::string>(b, "api_key_env", c.backend.http.api_key_env);
    c.backend.http.timeout = std::chrono::seconds(field_or<std::int64_t>(b, "timeout_s", c.backend.http.timeout.count()));
    c.backend.max_retries = field_or<int>(b, "max_retries", c.backend.max_retries);
    c.backend.cache_dir = field_or<std::string>(b, "cache_dir", "");
  }
  c.validate();
  return c;
}

// The canonical form: every field spelled out, keys sorted (nlohmann's
// object ordering), so equal configs serialize to equal bytes.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = c.run;
  j.erase("seed");
  j["schema_version"] = kConfigSchemaVersion;
  j["seeds"] = c.seeds;
  j["env"] = c.env;
  j["game_path"] = c.game_path ? nlohmann::json(*c.game_path) : nlohmann::json(nullptr);
  j["prompts_dir"] = c.prompts_dir;
  j["backend"] = {{"kind", c.backend.kind == BackendKind::http ? "http" : "scripted"},
                  {"endpoint", c.backend.http.endpoint},
                  {"model", c.backend.http.model},
                  {"api_key_env", c.backend.http.api_key_env},
                  {"timeout_s", c.backend.http.timeout.count()},
                  {"max_retries", c.backend.max_retries},
                  {"cache_dir", c.backend.cache_dir}};
  return j;
}

inline std::string canonical_config(const ExperimentConfig& c) { return to_json(c).dump(2); }

// Identifies a configuration independently of which seeds it ran: the
// digest of the canonical run parameters plus environment and backend.
inline std::string config_digest(const ExperimentConfig& c) {
  auto j = to_json(c);
  j.erase("seeds");
  j.erase("prompts_dir");
  j["backend"].erase("cache_dir");
  j["backend"].erase("max_retries");
  j["backend"].erase("timeout_s");
  return sha256_hex(j.dump()).substr(0, 16);
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = nlohmann::json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError("", path.string() + " is not valid JSON");
  return parse_experiment_config(j);
}

}  // namespace glow
