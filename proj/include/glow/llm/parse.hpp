#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "glow/core/errors.hpp"
#include "glow/world/text_parse.hpp"

namespace glow {

struct ActionDecision {
  std::string thought;
  std::string action;
  bool operator==(const ActionDecision&) const = default;
};

struct IndexDecision {
  std::string thought;
  std::size_t index = 0;
  bool operator==(const IndexDecision&) const = default;
};

// Every balanced {...} span that parses as a JSON object, in order of the
// opening brace. Tolerates prose and code fences around the payload.
inline std::vector<nlohmann::json> json_objects_in(std::string_view text) {
  std::vector<nlohmann::json> out;
  for (std::size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        auto j = nlohmann::json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object()) out.push_back(std::move(j));
        break;
      }
    }
  }
  return out;
}

namespace detail {

inline std::string string_field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return {};
  if (it->is_string()) return it->get<std::string>();
  return {};
}

// Integer value of `v`, accepting integral floats and numeric strings.
inline std::optional<long long> lenient_integer(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (std::isfinite(d) && std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
    return std::nullopt;
  }
  if (v.is_string()) {
    std::string s = text::trim(v.get<std::string>());
    if (s.empty() || s.size() > 18) return std::nullopt;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return std::nullopt;
    for (std::size_t k = i; k < s.size(); ++k)
      if (!std::isdigit(static_cast<unsigned char>(s[k]))) return std::nullopt;
    return std::stoll(s);
  }
  return std::nullopt;
}

}  // namespace detail

// First JSON object carrying a non-empty string "action". Objects that also
// carry "thought" are preferred.
inline ActionDecision parse_action(std::string_view text) {
  std::optional<ActionDecision> fallback;
  for (const auto& j : json_objects_in(text)) {
    auto it = j.find("action");
    if (it == j.end() || !it->is_string()) continue;
    std::string action = text::trim(it->get<std::string>());
    if (action.empty()) continue;
    ActionDecision d{detail::string_field(j, "thought"), action};
    if (j.contains("thought")) return d;
    if (!fallback) fallback = d;
  }
  if (fallback) return *fallback;
  throw ParseError("no JSON object with an action found");
}

inline IndexDecision parse_index(std::string_view text, std::size_t candidate_count) {
  if (candidate_count == 0) throw DomainError("parse_index needs at least one candidate");
  bool saw_index = false;
  for (const auto& j : json_objects_in(text)) {
    auto it = j.find("index");
    if (it == j.end()) continue;
    saw_index = true;
    auto v = detail::lenient_integer(*it);
    if (!v) continue;
    if (*v < 0 || static_cast<unsigned long long>(*v) >= candidate_count)
      throw ParseError("index " + std::to_string(*v) + " out of range [0, " +
                       std::to_string(candidate_count - 1) + "]");
    return IndexDecision{detail::string_field(j, "thought"), static_cast<std::size_t>(*v)};
  }
  throw ParseError(saw_index ? "index is not an integer" : "no JSON object with an index found");
}

// {"thought": ..., "score": <number>} as used by per-state alignment scoring.
inline double parse_alignment_score(std::string_view text) {
  for (const auto& j : json_objects_in(text)) {
    auto it = j.find("score");
    if (it == j.end()) continue;
    if (it->is_number()) {
      double d = it->get<double>();
      if (std::isfinite(d)) return d;
    }
    if (auto v = detail::lenient_integer(*it)) return static_cast<double>(*v);
  }
  throw ParseError("no JSON object with a numeric score found");
}

}  // namespace glow
