#pragma once

// Deterministic stand-in for a language model. Every reply is a pure
// function of (purpose, rendered prompt, seed); it reads the prompt formats
// produced by glow/world and answers with the JSON / section layouts the
// real prompts ask for. Behaviour per purpose:
//
//  act      If a learned advantage's STATE text occurs in the current
//           observation and its recommended command was not yet tried from
//           this place in the current episode, play it. Otherwise play an
//           untried valid action (current episode and the previous attempts
//           shown) in seed-salted hash order, skipping commands the
//           advantages say to avoid and leaving "look" / "drop ..." last;
//           when all were tried, the hash is also salted with the visit count.
//           Memory is per place (room text plus what is carried), not per
//           score, so a reward does not make every room look new again.
//  select   Candidate score = archive score, +50 when the candidate's room
//           occurs in a key state whose potential is marked high. Argmax; ties
//           go to more items carried, fewer visits, the shorter path, then the
//           later candidate.
//  analyze  One key state per frontier trajectory: the state where it first
//           reached its peak, annotated as fatal when the trajectory died
//           straight from there. Potential = achieved + 25, marked high for
//           trajectories at the frontier's best peak, medium otherwise.
//  reflect  Compares trajectories that pass through the same state with
//           different commands and different outcomes (subsequent peak, then
//           final score); reports up to 4 states with the largest gaps.
//
// Outside act, states are identified by the score and the part of the
// observation that starts at "You are in"; observations without it keep the
// previous state.

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "glow/core/digest.hpp"
#include "glow/llm/chat.hpp"
#include "glow/llm/parse.hpp"
#include "glow/world/render.hpp"
#include "glow/world/text_parse.hpp"

namespace glow {

namespace oracle {

inline constexpr std::string_view kRoomMarker = "You are in";
inline constexpr std::string_view kStartKey = "<start>";

inline std::string room_block(std::string_view obs) {
  auto p = obs.find(kRoomMarker);
  if (p == std::string_view::npos) return {};
  return text::trim(obs.substr(p));
}

inline constexpr std::string_view kCarryingMarker = "You are carrying:";

// The room part of a block, without what is being carried.
inline std::string place_of(std::string_view block) {
  return text::trim(block.substr(0, block.find(kCarryingMarker)));
}

inline std::size_t items_carried(std::string_view obs) {
  auto p = obs.find(kCarryingMarker);
  if (p == std::string_view::npos) return 0;
  auto list = text::trim(obs.substr(p + kCarryingMarker.size()));
  if (list.empty() || list.starts_with("nothing")) return 0;
  return 1 + static_cast<std::size_t>(std::count(list.begin(), list.end(), ','));
}

struct ParsedStep {
  Score score_before = 0;
  std::string action;
  std::string observation;
  Score reward = 0;
};

struct ParsedTrajectory {
  std::string start_block;  // empty for trajectories rooted at reset
  Score start_score = 0;
  std::vector<ParsedStep> steps;
  bool local = false;
};

// One position of a trajectory: the state before an action and what followed.
struct Position {
  std::string key;    // "<score>|<room block>"
  std::string block;  // room block or kStartKey
  std::string action;
  Score subsequent_peak = 0;
  Score final_score = 0;  // where the whole trajectory ended

  std::pair<Score, Score> outcome() const { return {subsequent_peak, final_score}; }
};

inline std::optional<ParsedStep> parse_step_line(const std::string& line) {
  static const std::regex re(R"(^  \[(-?[0-9]+)\] (.*?) -> (.*)$)");
  std::smatch m;
  if (!std::regex_match(line, m, re)) return std::nullopt;
  ParsedStep s;
  s.score_before = std::stoll(m[1].str());
  s.action = m[2].str();
  std::string obs = m[3].str();
  static const std::regex reward_re(R"( \(reward: ([+\-]?[0-9]+)\)$)");
  std::smatch rm;
  if (std::regex_search(obs, rm, reward_re)) {
    s.reward = std::stoll(rm[1].str());
    obs = obs.substr(0, static_cast<std::size_t>(rm.position(0)));
  }
  s.observation = obs;
  return s;
}

// Trajectory listings in `section`: "Trajectory N (...)" or "Attempt N (...)"
// headers followed by step lines; an optional "Start: [s] obs" line sets the
// common start of the attempts.
inline std::vector<ParsedTrajectory> parse_trajectories(std::string_view section, bool local) {
  std::vector<ParsedTrajectory> out;
  std::string start_block;
  Score start_score = 0;
  static const std::regex start_re(R"(^Start: \[(-?[0-9]+)\] (.*)$)");
  for (const auto& line : text::lines(section)) {
    std::smatch m;
    if (std::regex_match(line, m, start_re)) {
      start_score = std::stoll(m[1].str());
      start_block = room_block(m[2].str());
      continue;
    }
    if ((line.starts_with("Trajectory ") || line.starts_with("Attempt ")) && line.find("(Peak:") != std::string::npos) {
      ParsedTrajectory t;
      t.local = local;
      if (local) {
        t.start_block = start_block;
        t.start_score = start_score;
      }
      out.push_back(std::move(t));
      continue;
    }
    if (out.empty()) continue;
    if (auto s = parse_step_line(line)) out.back().steps.push_back(*s);
  }
  return out;
}

inline std::vector<Position> positions(const ParsedTrajectory& t) {
  std::vector<Position> out;
  std::string block = t.local ? t.start_block : std::string(kStartKey);
  if (block.empty()) block = std::string(kStartKey);
  std::vector<Score> after;
  for (const auto& s : t.steps) after.push_back(s.score_before + s.reward);
  Score running_max = after.empty() ? 0 : after.back();
  std::vector<Score> suffix_peak(after.size());
  for (std::size_t i = after.size(); i-- > 0;) {
    running_max = std::max(running_max, after[i]);
    suffix_peak[i] = running_max;
  }
  const Score final_score = after.empty() ? 0 : after.back();
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    out.push_back(Position{std::to_string(s.score_before) + "|" + block, block, s.action, suffix_peak[i],
                           final_score});
    if (auto b = room_block(s.observation); !b.empty()) block = b;
  }
  return out;
}

inline std::string_view between(std::string_view text, std::string_view from, std::string_view to) {
  auto a = text.find(from);
  if (a == std::string_view::npos) return {};
  a += from.size();
  auto b = to.empty() ? std::string_view::npos : text.find(to, a);
  return text.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a);
}

// Text following `header` up to the next known context header.
inline std::string_view section_of(std::string_view text, std::string_view header) {
  auto a = text.find(header);
  if (a == std::string_view::npos) return {};
  a += header.size();
  std::size_t b = text.size();
  for (auto h : {render::kWLocalHeader, render::kFrontierHeader, render::kPreviousAttemptsHeader,
                 render::kCurrentHeader, render::kLocalHeader, render::kPreviousWLocalHeader,
                 std::string_view("\n=================================================="),
                 std::string_view("Analyze all trajectories")}) {
    auto p = text.find(h, a);
    if (p != std::string_view::npos) b = std::min(b, p);
  }
  return text.substr(a, b - a);
}

// Text between the first pair of double quotes.
inline std::optional<std::string> first_quoted(std::string_view s) {
  auto a = s.find('"');
  if (a == std::string_view::npos) return std::nullopt;
  auto b = s.find('"', a + 1);
  if (b == std::string_view::npos) return std::nullopt;
  return std::string(s.substr(a + 1, b - a - 1));
}

inline std::string json_reply(std::string_view thought, std::string_view key, const nlohmann::json& value) {
  nlohmann::json j;
  j["thought"] = std::string(thought);
  j[std::string(key)] = value;
  return safe_dump(j);
}

}  // namespace oracle

class ScriptedOracle final : public ChatBackend {
 public:
  explicit ScriptedOracle(std::int64_t seed = 0) : seed_(seed) {}

  std::string id() const override { return "scripted-oracle-v1"; }

  ChatResponse complete(const ChatRequest& request) override {
    request.validate();
    std::string text;
    switch (request.purpose) {
      case Purpose::act: text = act(request); break;
      case Purpose::select: text = select(request.rendered()); break;
      case Purpose::analyze_frontier: text = analyze(request.rendered()); break;
      case Purpose::reflect: text = reflect(request.rendered()); break;
    }
    const auto prompt_chars = static_cast<std::int64_t>(request.rendered().size());
    return ChatResponse{text, TokenUsage{(prompt_chars + 3) / 4, static_cast<std::int64_t>(text.size() + 3) / 4},
                        id(), false};
  }

 private:
  std::uint64_t salted(std::string_view a, std::string_view b, std::uint64_t extra = 0) const {
    std::string s = std::to_string(seed_) + "|" + std::string(a) + "|" + std::string(b) + "|" +
                    std::to_string(extra);
    // FNV alone barely moves the high bits for a changed suffix; finish with
    // a splitmix64 round so salts reorder candidates.
    std::uint64_t z = fnv1a64(s) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Commands that neither move nor acquire anything.
  static bool passive(std::string_view a) { return a == "look" || a.starts_with("drop "); }

  std::string act(const ChatRequest& req) const {
    using namespace oracle;
    // Walk the conversation: each user turn with an Observation defines the
    // current state, each assistant turn records the command tried there.
    std::string key, block, observation;
    std::vector<std::string> valid;
    std::map<std::string, std::map<std::string, int>> tried_episode;
    std::string context;
    std::map<std::string, int> visit_count;
    for (const auto& m : req.messages) {
      if (m.role == Role::user) {
        if (context.empty()) context = m.content;
        auto at = m.content.rfind("Observation: ");
        if (at == std::string::npos) continue;
        auto step = std::string_view(m.content).substr(at);
        observation = text::trim(between(step, "Observation: ", "\n"));
        std::string va = text::trim(between(step, "Valid actions: ", "\n"));
        if (auto b = room_block(observation); !b.empty()) block = b;
        key = block;
        ++visit_count[key];
        valid.clear();
        std::stringstream ss(va);
        for (std::string item; std::getline(ss, item, ',');)
          if (auto t = text::trim(item); !t.empty()) valid.push_back(t);
      } else if (m.role == Role::assistant) {
        try {
          ++tried_episode[key][parse_action(m.content).action];
        } catch (const ParseError&) {
        }
      }
    }
    if (valid.empty()) valid.push_back("look");
    auto& here = tried_episode[key];
    const int visits_here = visit_count[key];

    // Learned advantages first: play an untried recommendation, and never
    // pick a command flagged to avoid unless nothing else is left.
    std::set<std::string> avoided;
    std::string wl(section_of(context, render::kWLocalHeader));
    for (const auto& entry : parse_local_entries(wl)) {
      if (entry.state_descriptor.empty() || observation.find(entry.state_descriptor) == std::string::npos)
        continue;
      for (const auto& adv : entry.advantages) {
        if (adv.action.empty()) continue;
        if (text::contains_icase(adv.action.substr(0, 5), "avoid")) {
          if (auto q = oracle::first_quoted(adv.action)) avoided.insert(*q);
          continue;
        }
        if (here.contains(adv.action)) continue;
        return json_reply("An earlier attempt showed \"" + adv.action + "\" pays off here.", "action", adv.action);
      }
    }

    std::map<std::string, int> tried = here;
    auto prev = section_of(context, render::kPreviousAttemptsHeader);
    for (const auto& t : parse_trajectories(prev, true))
      for (const auto& p : positions(t))
        if (p.block == key) ++tried[p.action];

    std::vector<std::string> pool;
    for (const auto& a : valid)
      if (!avoided.contains(a)) pool.push_back(a);
    if (pool.empty()) pool = valid;

    // Untried commands first in seeded-hash order (passive ones last). Once
    // everything here has been tried, the hash is salted with the number of
    // visits so repeated visits wander.
    const auto visits = static_cast<std::uint64_t>(visits_here);
    const std::string* best = nullptr;
    std::tuple<bool, bool, std::uint64_t> best_rank{};
    for (const auto& a : pool) {
      const bool seen = tried.contains(a);
      std::tuple<bool, bool, std::uint64_t> rank{seen, passive(a) && pool.size() > 1,
                                                 salted(key, a, seen ? visits : 0)};
      if (!best || rank < best_rank) best = &a, best_rank = rank;
    }
    return json_reply(std::get<0>(best_rank) ? "Everything here has been tried; picking again."
                                             : "Trying something new here.",
                      "action", *best);
  }

  std::string select(const std::string& prompt) const {
    using namespace oracle;
    std::vector<std::string> high;
    if (prompt.find("=== STRATEGIC GAME ANALYSIS ===") != std::string::npos) {
      auto analysis = between(prompt, "=== STRATEGIC GAME ANALYSIS ===",
                              "==================================================");
      for (const auto& ks : parse_key_states(analysis))
        if (ks.potential_high()) high.push_back(ks.descriptor);
    }
    static const std::regex cand_re(R"(^([0-9]+): \[Score: (-?[0-9]+), Steps: ([0-9]+), Visits: ([0-9]+)\]$)");
    struct Cand {
      long long index;
      double value;
      std::size_t items;
      long long visits;
      long long steps;

      // Higher value, then more items in hand, then fewer visits, then
      // shorter path; equal ranks go to the later candidate.
      bool at_least(const Cand& o) const {
        if (value != o.value) return value > o.value;
        if (items != o.items) return items > o.items;
        if (visits != o.visits) return visits < o.visits;
        return steps <= o.steps;
      }
    };
    std::vector<Cand> cands;
    const auto ls = text::lines(prompt);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      std::smatch m;
      if (!std::regex_match(ls[i], m, cand_re)) continue;
      std::string obs;
      if (i + 1 < ls.size()) obs = std::string(between(ls[i + 1], "Observation: ", ""));
      double v = static_cast<double>(std::stoll(m[2].str()));
      // A bottleneck is a place; whatever is carried there may differ.
      const std::string place = place_of(room_block(obs));
      for (const auto& d : high) {
        if ((!place.empty() && d.find(place) != std::string::npos) || (!d.empty() && obs.find(d) != std::string::npos)) {
          v += 50;
          break;
        }
      }
      cands.push_back({std::stoll(m[1].str()), v, items_carried(obs), std::stoll(m[4].str()), std::stoll(m[3].str())});
    }
    if (prompt.find("\"score\": <number>") != std::string::npos) {
      double v = cands.empty() ? 0.0 : cands.front().value;
      return json_reply("Alignment follows score and bottleneck proximity.", "score", v);
    }
    if (cands.empty()) return json_reply("No candidates listed.", "index", 0);
    const Cand* best = &cands.front();
    for (const auto& c : cands)
      if (c.at_least(*best)) best = &c;
    return json_reply("Highest score, with a bonus for states near high-potential bottlenecks.", "index",
                      best->index);
  }

  std::string analyze(const std::string& prompt) const {
    using namespace oracle;
    auto section = between(prompt, "", "Based on these trajectories");
    struct Key {
      std::string descriptor;
      Score achieved;
      std::string why;
    };
    std::vector<Key> keys;
    std::set<std::string> seen;
    Score best_peak = 0;
    auto trajs = parse_trajectories(section, false);
    for (const auto& t : trajs) {
      if (t.steps.empty()) continue;
      auto pos = positions(t);
      Score peak = t.steps.front().score_before + t.steps.front().reward;
      for (const auto& s : t.steps) peak = std::max(peak, s.score_before + s.reward);
      best_peak = std::max(best_peak, peak);
      const auto& last = t.steps.back();
      Key k;
      k.achieved = peak;
      std::string block = std::string(kStartKey);
      for (const auto& s : t.steps) {
        if (auto b = room_block(s.observation); !b.empty()) block = b;
        if (s.score_before + s.reward == peak) break;
      }
      if (last.reward < 0 && pos.back().block == block && last.score_before == peak) {
        k.descriptor = block + " | fatal: \"" + last.action + "\" -> " + last.observation;
        k.why = "trajectory died here";
      } else {
        k.descriptor = block;
        k.why = "progress stalled here";
      }
      if (k.descriptor.starts_with(kStartKey)) continue;
      if (seen.insert(k.descriptor).second) keys.push_back(std::move(k));
    }
    std::ostringstream os;
    os << "Strategic Analysis of Game Trajectories\n\n";
    os << "1. FRONTIER & EXPLORATION STATUS\n- " << trajs.size()
       << " frontier trajectories; best peak " << best_peak << ".\n\n";
    os << "3. BOTTLENECKS & CHALLENGES\n";
    for (const auto& k : keys)
      os << "- " << k.descriptor << " (" << k.why << "; achieved: " << k.achieved
         << ", potential: " << (k.achieved + 25) << ", " << (k.achieved == best_peak ? "high" : "medium")
         << ")\n";
    os << "\n5. NEXT INVESTIGATION GOALS\n- Get past the bottleneck states listed above.\n";
    return os.str();
  }

  std::string reflect(const std::string& prompt) const {
    using namespace oracle;
    if (prompt.find("Reflect on this attempt") != std::string::npos) return reflexion(prompt);
    auto frontier = section_of(prompt, render::kFrontierHeader);
    auto local = section_of(prompt, render::kLocalHeader);
    std::vector<ParsedTrajectory> all = parse_trajectories(local, true);
    const std::size_t n_local = all.size();
    for (auto& t : parse_trajectories(frontier, false)) all.push_back(std::move(t));

    struct Finding {
      std::string block;
      std::string better, worse;
      std::pair<Score, Score> better_outcome, worse_outcome;
      std::pair<Score, Score> gap() const {
        return {better_outcome.first - worse_outcome.first, better_outcome.second - worse_outcome.second};
      }
    };
    std::map<std::string, Finding> by_key;
    std::vector<std::map<std::string, Position>> first(all.size());
    for (std::size_t i = 0; i < all.size(); ++i)
      for (const auto& p : positions(all[i])) first[i].emplace(p.key, p);
    for (std::size_t a = 0; a < n_local; ++a) {
      for (std::size_t b = 0; b < all.size(); ++b) {
        if (b == a || (b < n_local && b < a)) continue;
        for (const auto& [key, pa] : first[a]) {
          auto it = first[b].find(key);
          if (it == first[b].end()) continue;
          const Position& pb = it->second;
          if (pa.action == pb.action || pa.outcome() == pb.outcome()) continue;
          if (pa.block == kStartKey) continue;
          const Position& hi = pa.outcome() > pb.outcome() ? pa : pb;
          const Position& lo = pa.outcome() > pb.outcome() ? pb : pa;
          Finding f{pa.block, hi.action, lo.action, hi.outcome(), lo.outcome()};
          auto [slot, inserted] = by_key.emplace(key, f);
          if (!inserted && f.gap() > slot->second.gap()) slot->second = f;
        }
      }
    }
    std::vector<Finding> findings;
    for (auto& [k, f] : by_key) findings.push_back(f);
    std::stable_sort(findings.begin(), findings.end(),
                     [](const Finding& x, const Finding& y) { return x.gap() > y.gap(); });
    std::set<std::string> blocks;
    std::ostringstream os;
    os << "Based on the exploration attempts, here are KEY STATES with discovered advantages:\n";
    std::size_t emitted = 0;
    for (const auto& f : findings) {
      if (emitted == 4) break;
      if (!blocks.insert(f.block).second) continue;
      os << "\nSTATE: " << f.block << "\n- ADVANTAGES:\n";
      const auto [peak_gap, final_gap] = f.gap();
      os << "  \xe2\x80\xa2 \"" << f.better << "\" \xe2\x86\x92 led on to a score of " << f.better_outcome.first
         << " (score impact: " << render::signed_value(peak_gap != 0 ? peak_gap : final_gap) << ")\n";
      os << "  \xe2\x80\xa2 avoid \"" << f.worse << "\" \xe2\x86\x92 peaked at " << f.worse_outcome.first
         << ", ended at " << f.worse_outcome.second << "\n";
      ++emitted;
    }
    if (emitted == 0) os << "\nNo state showed diverging outcomes yet.\n";
    return os.str();
  }

  std::string reflexion(const std::string& prompt) const {
    using namespace oracle;
    auto trajs = parse_trajectories(prompt, false);
    std::ostringstream os;
    if (trajs.empty() || trajs.front().steps.empty()) return "The attempt made no moves.";
    const auto& t = trajs.front();
    Score peak = t.steps.front().score_before + t.steps.front().reward;
    for (const auto& s : t.steps) peak = std::max(peak, s.score_before + s.reward);
    const auto& last = t.steps.back();
    os << "The attempt peaked at " << peak << " and ended at " << (last.score_before + last.reward) << ".\n";
    if (last.reward < 0) os << "The final command \"" << last.action << "\" was fatal; avoid it in that situation.\n";
    else os << "Progress stalled; try commands not used in this attempt.\n";
    return os.str();
  }

  std::int64_t seed_;
};

}  // namespace glow
