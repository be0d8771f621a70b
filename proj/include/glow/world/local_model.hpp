#pragma once

#include "glow/core/archive.hpp"
#include "glow/core/frontier.hpp"
#include "glow/world/model_context.hpp"
#include "glow/world/render.hpp"
#include "glow/world/text_parse.hpp"

namespace glow {

// Within-phase memory handed to later explorations from the same state.
// MAR fills `entries`; the single-trajectory reflection baseline only has
// free text.
struct WLocal {
  std::string raw_text;
  std::vector<LocalEntry> entries;

  bool empty() const noexcept { return raw_text.empty(); }
};

// Contrasts every attempt of the phase so far (plus the frontier, when
// given) and asks for per-state advantages. The previous W_local is passed
// back in so the model can refine rather than restart.
inline WLocal reflect_mar(const StateSnapshot& start, std::span<const Trajectory> local_trajectories,
                          const Frontier* frontier, const WLocal& previous, const ModelContext& ctx,
                          std::size_t max_entries = 8) {
  std::string prev_block, frontier_block;
  if (!previous.empty())
    prev_block = std::string(render::kPreviousWLocalHeader) + "\n" +
                 render::without_trailing_newline(previous.raw_text);
  if (frontier && !frontier->empty())
    frontier_block = std::string(render::kFrontierHeader) + "\n" +
                     render::without_trailing_newline(render::frontier(*frontier, ctx.observation_chars));
  const std::string local_block =
      std::string(render::kLocalHeader) + "\n" +
      render::without_trailing_newline(render::attempts(start, local_trajectories, ctx.observation_chars));

  const std::string prompt = fill_template(
      ctx.prompts.mar,
      {{"w_local_block", prev_block}, {"frontier_block", frontier_block}, {"local_block", local_block}});
  ChatResponse res = ctx.ask(Purpose::reflect, prompt);
  WLocal w;
  w.entries = parse_local_entries(res.text, max_entries);
  w.raw_text = text::trim(res.text);
  return w;
}

// Ablation: free-form reflection on the latest attempt only.
inline WLocal reflect_reflexion(const Trajectory& latest, const ModelContext& ctx) {
  const std::string block = render::without_trailing_newline(
      render::trajectory(latest, "Trajectory", 1, ctx.observation_chars, latest.prefix_len));
  ChatResponse res = ctx.ask(Purpose::reflect, fill_template(ctx.prompts.reflexion, {{"trajectory_block", block}}));
  return WLocal{text::trim(res.text), {}};
}

}  // namespace glow
