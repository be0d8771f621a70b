#pragma once

// Text renderings of trajectories, archive candidates and world models as
// they appear inside prompts.

#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "glow/core/archive.hpp"
#include "glow/core/frontier.hpp"

namespace glow::render {

inline constexpr std::string_view kFrontierHeader = "Global frontier trajectories (highest value so far):";
inline constexpr std::string_view kLocalHeader = "Exploration attempts from the selected state:";
inline constexpr std::string_view kPreviousAttemptsHeader = "Previous attempts from this state:";
inline constexpr std::string_view kPreviousWLocalHeader = "Previous key state advantages:";
inline constexpr std::string_view kWLocalHeader = "Key state advantages learned from earlier attempts:";
inline constexpr std::string_view kCurrentHeader = "Current trajectory:";

// One line, at most `max_chars` bytes, never splitting a UTF-8 sequence.
inline std::string clip(std::string_view s, std::size_t max_chars) {
  std::string flat;
  flat.reserve(std::min(s.size(), max_chars + 4));
  for (char c : s) {
    if (flat.size() >= max_chars) break;
    flat.push_back(c == '\n' || c == '\r' || c == '\t' ? ' ' : c);
  }
  if (s.size() > flat.size()) {
    std::size_t cut = flat.size();
    while (cut > 0 && (static_cast<unsigned char>(flat[cut - 1]) & 0xC0) == 0x80) --cut;
    if (cut > 0 && (static_cast<unsigned char>(flat[cut - 1]) & 0x80)) --cut;
    flat.resize(cut);
  }
  return flat;
}

inline std::string signed_value(Score v) { return (v > 0 ? "+" : "") + std::to_string(v); }

// "  [score] action -> observation (reward: +N)" per step, where score is the
// game score before the action.
inline std::string steps(std::span<const Step> steps, Score start_score, std::size_t obs_chars) {
  std::ostringstream os;
  Score before = start_score;
  for (const auto& s : steps) {
    os << "  [" << before << "] " << clip(s.action, 120) << " -> " << clip(s.observation, obs_chars);
    if (s.reward != 0) os << " (reward: " << signed_value(s.reward) << ")";
    os << '\n';
    before = s.score_after;
  }
  return os.str();
}

inline std::string trajectory(const Trajectory& t, std::string_view label, std::size_t number,
                              std::size_t obs_chars, std::size_t from_step = 0) {
  std::ostringstream os;
  os << label << ' ' << number << " (Peak: " << t.peak_value << ", Final: " << t.final_value << "):\n";
  from_step = std::min(from_step, t.steps.size());
  Score start = from_step == 0 ? 0 : t.steps[from_step - 1].score_after;
  os << steps(std::span<const Step>(t.steps).subspan(from_step), start, obs_chars);
  return os.str();
}

// Frontier trajectories, best first, each from the initial state.
inline std::string frontier(const Frontier& f, std::size_t obs_chars) {
  std::string out;
  std::size_t i = 1;
  for (const auto& t : f.entries()) {
    if (i > 1) out += '\n';
    out += trajectory(t, "Trajectory", i++, obs_chars);
  }
  return out;
}

// Phase attempts from a common start state; only the exploration suffix of
// each attempt is shown.
inline std::string attempts(const StateSnapshot& start, std::span<const Trajectory> ts,
                            std::size_t obs_chars) {
  std::ostringstream os;
  os << "Start: [" << start.score << "] " << clip(start.observation, obs_chars) << '\n';
  std::size_t i = 1;
  for (const auto& t : ts) os << trajectory(t, "Attempt", i++, obs_chars, t.prefix_len);
  return os.str();
}

inline std::string archive_candidate(std::size_t index, const ArchiveEntry& e, std::size_t obs_chars) {
  std::ostringstream os;
  os << index << ": [Score: " << e.score << ", Steps: " << e.path.size() << ", Visits: " << e.visits
     << "]\n";
  os << "  Observation: " << clip(e.observation, obs_chars) << '\n';
  os << "  Inventory: " << (e.inventory ? clip(*e.inventory, obs_chars) : std::string("unknown")) << '\n';
  return os.str();
}

inline std::string archive_candidates(std::span<const ArchiveEntry* const> cands, std::size_t obs_chars) {
  std::string out;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (i) out += '\n';
    out += archive_candidate(i, *cands[i], obs_chars);
  }
  // The template adds its own newline after the block.
  if (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

inline std::string comma_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

inline std::string without_trailing_newline(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

}  // namespace glow::render
