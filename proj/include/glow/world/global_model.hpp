#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>

#include "glow/core/archive.hpp"
#include "glow/core/frontier.hpp"
#include "glow/llm/parse.hpp"
#include "glow/world/model_context.hpp"
#include "glow/world/render.hpp"
#include "glow/world/text_parse.hpp"

namespace glow {

// Frontier-level world model: the model's analysis of the best trajectories
// and the key states it singled out, with achieved / potential values when
// the analysis tags them.
struct WGlobal {
  std::string analysis_text;
  std::vector<KeyState> key_states;
  Digest frontier_digest{"empty"};

  bool empty() const noexcept { return analysis_text.empty() && key_states.empty(); }
};

inline WGlobal parse_w_global(std::string analysis, Digest frontier_digest) {
  WGlobal w;
  w.key_states = parse_key_states(analysis);
  w.analysis_text = std::move(analysis);
  w.frontier_digest = std::move(frontier_digest);
  return w;
}

// Caches analyses by frontier digest so an unchanged frontier never costs a
// second model call within a run.
class FrontierAnalyzer {
 public:
  struct Result {
    WGlobal w_global;
    bool cached = false;
  };

  Result analyze(const Frontier& frontier, const ModelContext& ctx) {
    if (frontier.empty()) return {WGlobal{}, false};
    const Digest digest = frontier.digest();
    if (auto it = cache_.find(digest); it != cache_.end()) return {it->second, true};
    const std::string prompt = fill_template(
        ctx.prompts.analyze_frontier,
        {{"frontier_block", render::without_trailing_newline(render::frontier(frontier, ctx.observation_chars))}});
    ChatResponse res = ctx.ask(Purpose::analyze_frontier, prompt);
    WGlobal w = parse_w_global(std::move(res.text), digest);
    cache_.emplace(digest, w);
    ++calls_;
    return {std::move(w), false};
  }

  std::size_t calls() const noexcept { return calls_; }

 private:
  std::map<Digest, WGlobal> cache_;
  std::size_t calls_ = 0;
};

inline WGlobal analyze_frontier(const Frontier& frontier, const ModelContext& ctx) {
  FrontierAnalyzer a;
  return a.analyze(frontier, ctx).w_global;
}

// Highest score among non-terminal states, ties to the most recently
// discovered. Used whenever there is nothing for the model to align with
// and as the fallback when its answer cannot be parsed.
inline std::optional<std::size_t> greedy_by_score(const StateArchive& archive) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < archive.size(); ++i) {
    const auto& e = archive.at(i);
    if (e.terminal) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = archive.at(*best);
    if (e.score > b.score || (e.score == b.score && e.discovery_step >= b.discovery_step)) best = i;
  }
  return best;
}

// Archive indices shown to the selector, in discovery order. Terminal states
// are never candidates. Above `cap`, the list mixes the top scores, the most
// recent discoveries and the states that most often preceded a death, then
// fills up by score.
inline std::vector<std::size_t> capped_candidates(const StateArchive& archive, std::size_t cap) {
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < archive.size(); ++i)
    if (!archive.at(i).terminal) live.push_back(i);
  if (live.size() <= cap) return live;

  std::set<std::size_t> chosen;
  auto take = [&](std::vector<std::size_t> order, std::size_t quota) {
    for (std::size_t i : order) {
      if (quota == 0 || chosen.size() >= cap) break;
      if (chosen.insert(i).second) --quota;
    }
  };
  auto by_score = live;
  std::stable_sort(by_score.begin(), by_score.end(), [&](std::size_t a, std::size_t b) {
    const auto &ea = archive.at(a), &eb = archive.at(b);
    if (ea.score != eb.score) return ea.score > eb.score;
    return a > b;
  });
  auto by_recency = live;
  std::stable_sort(by_recency.begin(), by_recency.end(), [&](std::size_t a, std::size_t b) {
    const auto &ea = archive.at(a), &eb = archive.at(b);
    if (ea.discovery_step != eb.discovery_step) return ea.discovery_step > eb.discovery_step;
    return a > b;
  });
  std::vector<std::size_t> deadly;
  for (std::size_t i : live)
    if (archive.at(i).deaths_from > 0) deadly.push_back(i);
  std::stable_sort(deadly.begin(), deadly.end(), [&](std::size_t a, std::size_t b) {
    return archive.at(a).deaths_from > archive.at(b).deaths_from;
  });

  const std::size_t score_quota = std::max<std::size_t>(1, cap * 2 / 5);
  const std::size_t recent_quota = std::max<std::size_t>(1, cap * 3 / 10);
  take(by_score, score_quota);
  take(by_recency, recent_quota);
  take(deadly, cap - std::min(cap, score_quota + recent_quota));
  take(by_score, cap);
  return {chosen.begin(), chosen.end()};
}

enum class SelectionSource { only_candidate, greedy, model, fallback };

inline std::string_view to_string(SelectionSource s) {
  switch (s) {
    case SelectionSource::only_candidate: return "only_candidate";
    case SelectionSource::greedy: return "greedy";
    case SelectionSource::model: return "model";
    case SelectionSource::fallback: return "fallback";
  }
  return "?";
}

struct Selection {
  std::size_t archive_index = 0;
  SelectionSource source = SelectionSource::greedy;
  std::size_t candidates_shown = 0;
  std::string thought;
};

namespace detail {

inline std::vector<const ArchiveEntry*> candidate_ptrs(const StateArchive& archive,
                                                       const std::vector<std::size_t>& idx) {
  std::vector<const ArchiveEntry*> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(&archive.at(i));
  return out;
}

inline Selection pick_by_index(const StateArchive& archive, const std::vector<std::size_t>& cands,
                               const std::string& prompt, const ModelContext& ctx) {
  ChatResponse res = ctx.ask(Purpose::select, prompt);
  try {
    IndexDecision d = parse_index(res.text, cands.size());
    return {cands[d.index], SelectionSource::model, cands.size(), d.thought};
  } catch (const ParseError&) {
    return {*greedy_by_score(archive), SelectionSource::fallback, cands.size(), {}};
  }
}

}  // namespace detail

// Aligns the archive with W_global. `mode` chooses between one index-answer
// call over the capped candidate list and one scoring call per candidate.
inline Selection select_state(const StateArchive& archive, const WGlobal& w_global, const ModelContext& ctx,
                              AlignMode mode = AlignMode::index) {
  auto cands = capped_candidates(archive, ctx.candidate_cap);
  if (cands.empty()) throw DomainError("select_state: archive has no selectable state");
  if (cands.size() == 1) return {cands.front(), SelectionSource::only_candidate, 1, {}};
  if (w_global.empty()) return {*greedy_by_score(archive), SelectionSource::greedy, 0, {}};

  const std::string analysis = render::without_trailing_newline(w_global.analysis_text);
  if (mode == AlignMode::per_state) {
    std::optional<std::size_t> best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const std::string prompt = fill_template(
          ctx.prompts.align_score,
          {{"analysis_block", analysis},
           {"archive_block", render::without_trailing_newline(
                                 render::archive_candidate(0, archive.at(cands[i]), ctx.observation_chars))}});
      try {
        double s = parse_alignment_score(ctx.ask(Purpose::select, prompt).text);
        if (s >= best_score) best_score = s, best = cands[i];
      } catch (const ParseError&) {
      }
    }
    if (!best) return {*greedy_by_score(archive), SelectionSource::fallback, cands.size(), {}};
    return {*best, SelectionSource::model, cands.size(), {}};
  }

  auto ptrs = detail::candidate_ptrs(archive, cands);
  const std::string prompt =
      fill_template(ctx.prompts.select_state,
                    {{"analysis_block", analysis},
                     {"archive_block", render::archive_candidates(ptrs, ctx.observation_chars)},
                     {"max_index", std::to_string(cands.size() - 1)}});
  return detail::pick_by_index(archive, cands, prompt, ctx);
}

// Ablation selector: asks for the "most promising" state with no frontier
// analysis in the prompt.
inline Selection select_ige(const StateArchive& archive, const ModelContext& ctx) {
  auto cands = capped_candidates(archive, ctx.candidate_cap);
  if (cands.empty()) throw DomainError("select_ige: archive has no selectable state");
  if (cands.size() == 1) return {cands.front(), SelectionSource::only_candidate, 1, {}};
  auto ptrs = detail::candidate_ptrs(archive, cands);
  const std::string prompt =
      fill_template(ctx.prompts.ige_select, {{"archive_block", render::archive_candidates(ptrs, ctx.observation_chars)},
                                             {"max_index", std::to_string(cands.size() - 1)}});
  return detail::pick_by_index(archive, cands, prompt, ctx);
}

}  // namespace glow
