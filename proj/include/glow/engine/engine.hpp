#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "glow/core/archive.hpp"
#include "glow/core/config.hpp"
#include "glow/core/frontier.hpp"
#include "glow/core/json_io.hpp"
#include "glow/engine/event_log.hpp"
#include "glow/engine/selection.hpp"
#include "glow/env/environment.hpp"
#include "glow/llm/chat.hpp"
#include "glow/llm/parse.hpp"
#include "glow/world/global_model.hpp"
#include "glow/world/local_model.hpp"
#include "glow/world/render.hpp"

namespace glow {

struct RunResult {
  std::optional<Trajectory> best;
  Score max_score = 0;
  std::size_t selections = 0;
  std::size_t phases = 0;
  std::size_t trajectories = 0;
  Budget budget;
  TokenUsage tokens;
  std::size_t llm_calls = 0;
  Frontier frontier{1};
  StateArchive archive;
  std::size_t verified_frontier = 0;
  std::size_t verified_archive = 0;
};

// Everything the policy sees before its first move in an episode.
struct ActContext {
  const WLocal* w_local = nullptr;
  const Frontier* frontier = nullptr;
  StateSnapshot start;
  std::span<const Trajectory> previous_attempts;
  std::vector<std::string> start_path;
};

inline std::string render_context(const ActContext& c, std::size_t obs_chars) {
  std::vector<std::string> sections;
  if (c.w_local && !c.w_local->empty())
    sections.push_back(std::string(render::kWLocalHeader) + "\n" + c.w_local->raw_text);
  if (c.frontier && !c.frontier->empty())
    sections.push_back(std::string(render::kFrontierHeader) + "\n" +
                       render::without_trailing_newline(render::frontier(*c.frontier, obs_chars)));
  if (!c.previous_attempts.empty())
    sections.push_back(std::string(render::kPreviousAttemptsHeader) + "\n" +
                       render::without_trailing_newline(render::attempts(c.start, c.previous_attempts, obs_chars)));
  sections.push_back(std::string(render::kCurrentHeader) + "\nActions taken to reach the starting state: " +
                     (c.start_path.empty() ? std::string("none") : render::comma_list(c.start_path)));
  std::string out;
  for (const auto& s : sections) {
    if (!out.empty()) out += "\n\n";
    out += s;
  }
  return out;
}

class Engine {
 public:
  Engine(RunConfig config, Environment& env, ChatBackend& backend, EventLog& log,
         PromptTemplates prompts = {})
      : cfg_(std::move(config)),
        env_(env),
        backend_(backend),
        log_(log),
        prompts_(std::move(prompts)),
        rng_(static_cast<std::uint64_t>(cfg_.seed)),
        ctx_{backend_, prompts_, cfg_.temperature, static_cast<std::size_t>(cfg_.observation_chars),
             static_cast<std::size_t>(cfg_.candidate_cap), {}} {
    cfg_.validate();
    result_.frontier = Frontier(static_cast<std::size_t>(cfg_.frontier_k));
    result_.budget = Budget{cfg_.budget, 0, 0, cfg_.count_replay_toward_total};
    ctx_.on_call = [this](const ChatRequest& req, const ChatResponse& res) {
      result_.tokens += res.token_usage;
      ++result_.llm_calls;
      log_.emit("llm_call", {{"purpose", to_string(req.purpose)},
                             {"prompt_tokens", res.token_usage.prompt_tokens},
                             {"completion_tokens", res.token_usage.completion_tokens},
                             {"from_cache", res.from_cache}});
    };
  }

  RunResult run() {
    log_.emit("run_start", {{"schema_version", kLogSchemaVersion},
                            {"config", cfg_},
                            {"environment", env_.meta()},
                            {"backend", backend_.id()}});
    const EnvStepResult initial = env_.reset(cfg_.seed);
    root_ = initial.snapshot();
    result_.archive.observe(root_, {}, 0);

    Budget& budget = result_.budget;
    while (!budget.exhausted()) {
      std::vector<std::string> path;
      std::optional<Digest> expected;
      if (result_.phases > 0) {
        const std::size_t idx = select();
        const ArchiveEntry& e = result_.archive.at(idx);
        path = e.path;
        expected = e.fingerprint;
      }
      if (!budget.can_replay_then_step(static_cast<std::int64_t>(path.size()))) break;
      explore_phase(path, expected);
    }

    if (cfg_.verify_replay) verify_all();
    if (!result_.frontier.empty()) result_.best = result_.frontier.best();
    log_.emit("run_end", {{"max_score", result_.max_score},
                          {"best_trajectory", result_.best ? nlohmann::json(result_.best->id) : nlohmann::json()},
                          {"selections", result_.selections},
                          {"phases", result_.phases},
                          {"trajectories", result_.trajectories},
                          {"budget", budget},
                          {"llm_calls", result_.llm_calls},
                          {"prompt_tokens", result_.tokens.prompt_tokens},
                          {"completion_tokens", result_.tokens.completion_tokens},
                          {"verified_frontier", result_.verified_frontier},
                          {"verified_archive", result_.verified_archive}});
    return std::move(result_);
  }

 private:
  std::size_t select() {
    const auto& archive = result_.archive;
    std::size_t idx = 0;
    nlohmann::json info;
    switch (cfg_.selection.kind) {
      case SelectionKind::uniform: idx = select_uniform(archive, rng_); info["source"] = "uniform"; break;
      case SelectionKind::novelty:
        idx = select_novelty(archive, cfg_.selection.alpha, rng_);
        info["source"] = "novelty";
        break;
      case SelectionKind::ige: {
        Selection s = select_ige(archive, ctx_);
        idx = s.archive_index;
        info = {{"source", to_string(s.source)}, {"candidates", s.candidates_shown}, {"thought", s.thought}};
        break;
      }
      case SelectionKind::glow: {
        auto analysis = analyzer_.analyze(result_.frontier, ctx_);
        if (!result_.frontier.empty())
          log_.emit("analyze", {{"cached", analysis.cached},
                                {"frontier_digest", analysis.w_global.frontier_digest},
                                {"key_states", analysis.w_global.key_states.size()}});
        Selection s = select_state(archive, analysis.w_global, ctx_, cfg_.align_mode);
        idx = s.archive_index;
        info = {{"source", to_string(s.source)}, {"candidates", s.candidates_shown}, {"thought", s.thought}};
        break;
      }
    }
    const ArchiveEntry& e = archive.at(idx);
    info["strategy"] = to_string(cfg_.selection.kind);
    info["archive_index"] = idx;
    info["fingerprint"] = e.fingerprint;
    info["score"] = e.score;
    info["path"] = e.path;
    log_.emit("select", info);
    ++result_.selections;
    return idx;
  }

  // n sequential episodes from the state reached by `path`; archive and
  // frontier are folded in once the phase is over.
  void explore_phase(const std::vector<std::string>& path, const std::optional<Digest>& expected) {
    Budget& budget = result_.budget;
    const std::size_t phase = result_.phases++;
    log_.emit("phase_start", {{"phase", phase}, {"path", path}, {"budget_used", budget.used()}});

    WLocal w_local;
    std::vector<Trajectory> local;
    std::vector<std::uint64_t> step_bases;
    StateSnapshot start = root_;
    // Attempts from this start state in earlier phases, oldest first.
    std::vector<Trajectory>& history = attempts_from_[expected.value_or(root_.fingerprint)];
    const auto n = static_cast<std::size_t>(cfg_.n_explorations);
    for (std::size_t i = 0; i < n; ++i) {
      if (budget.exhausted() || !budget.can_replay_then_step(static_cast<std::int64_t>(path.size()))) break;
      Replay rp = replay_path(env_, path, cfg_.seed, &budget, expected);
      log_.emit("reset", {{"seed", cfg_.seed}, {"fingerprint", rp.initial.fingerprint}});
      if (!path.empty())
        log_.emit("replay", {{"steps", path.size()}, {"fingerprint", rp.final_result.fingerprint}});
      start = rp.final_result.snapshot();

      step_bases.push_back(static_cast<std::uint64_t>(budget.used_exploration));
      std::vector<Trajectory> previous = recent_attempts(history, local);
      Trajectory t = run_episode(std::move(rp), ActContext{&w_local,
                                                           cfg_.use_frontier_in_context ? &result_.frontier : nullptr,
                                                           start, previous, path});
      local.push_back(std::move(t));
      ++result_.trajectories;

      const bool more = i + 1 < n && !budget.exhausted();
      if (!more) continue;
      if (cfg_.reflection == ReflectionKind::mar) {
        w_local = reflect_mar(start, local, result_.frontier.empty() ? nullptr : &result_.frontier, w_local, ctx_);
        log_.emit("reflect", {{"kind", "mar"}, {"attempts", local.size()}, {"entries", w_local.entries.size()}});
      } else if (cfg_.reflection == ReflectionKind::reflexion) {
        w_local = reflect_reflexion(local.back(), ctx_);
        log_.emit("reflect", {{"kind", "reflexion"}, {"attempts", 1}, {"entries", 0}});
      }
    }

    history.insert(history.end(), local.begin(), local.end());
    if (history.size() > kPreviousAttemptsShown)
      history.erase(history.begin(), history.end() - static_cast<std::ptrdiff_t>(kPreviousAttemptsShown));

    for (std::size_t i = 0; i < local.size(); ++i) {
      const Trajectory& t = local[i];
      if (cfg_.verify_replay) verify_trajectory(t);
      archive_update(result_.archive, t, root_, step_bases[i]);
      const bool inserted = result_.frontier.insert(t);
      result_.max_score = std::max(result_.max_score, t.peak_value);
      log_.emit("frontier_insert", {{"inserted", inserted}, {"trajectory", t}});
    }
    log_.emit("phase_end", {{"phase", phase},
                            {"trajectories", local.size()},
                            {"budget_used", budget.used()},
                            {"max_score", result_.max_score},
                            {"archive_size", result_.archive.size()}});
  }

  // The policy sees every attempt from the same start state: this phase's
  // plus the most recent ones from earlier phases, capped.
  static std::vector<Trajectory> recent_attempts(const std::vector<Trajectory>& history,
                                                 const std::vector<Trajectory>& local) {
    std::vector<Trajectory> out;
    const std::size_t room = kPreviousAttemptsShown > local.size() ? kPreviousAttemptsShown - local.size() : 0;
    const std::size_t skip = history.size() > room ? history.size() - room : 0;
    out.insert(out.end(), history.begin() + static_cast<std::ptrdiff_t>(skip), history.end());
    out.insert(out.end(), local.begin(), local.end());
    return out;
  }

  static constexpr std::size_t kPreviousAttemptsShown = 6;

  Trajectory run_episode(Replay rp, const ActContext& context) {
    Budget& budget = result_.budget;
    const std::size_t prefix_len = rp.steps.size();
    std::vector<Step> steps = std::move(rp.steps);
    EnvStepResult current = std::move(rp.final_result);
    const std::int64_t cap = std::min(cfg_.episode_cap, budget.remaining());
    const std::uint64_t id = next_id_++;
    const auto obs_chars = static_cast<std::size_t>(cfg_.observation_chars);

    std::vector<ChatMessage> messages{{Role::system, prompts_.act_system}};
    const std::string context_block = render_context(context, obs_chars);

    for (std::int64_t t = 0; t < cap && !current.done; ++t) {
      const std::string step_block =
          fill_template(prompts_.act_step, {{"step_number", std::to_string(t + 1)},
                                            {"observation", render::clip(current.observation, obs_chars)},
                                            {"score", std::to_string(current.score)},
                                            {"valid_actions", render::comma_list(current.valid_actions)}});
      if (t == 0)
        messages.push_back({Role::user, fill_template(prompts_.act_first, {{"context_block", context_block},
                                                                             {"step_block", step_block}})});
      else
        messages.push_back({Role::user, step_block});

      auto [decision, reply, attempts] = decide(messages, current.valid_actions);
      messages.push_back({Role::assistant, reply});

      EnvStepResult next = env_.step(decision.action);
      budget.charge_exploration(1);
      steps.push_back(make_step(current, decision.action, next));
      log_.emit("step", {{"trajectory", id},
                         {"t", steps.size()},
                         {"action", decision.action},
                         {"reward", next.reward},
                         {"score", next.score},
                         {"done", next.done},
                         {"fingerprint", next.fingerprint},
                         {"parse_attempts", attempts},
                         {"fallback", attempts > kMaxReasks}});
      current = std::move(next);
    }
    return Trajectory::make(id, cfg_.seed, prefix_len, std::move(steps));
  }

  static constexpr int kMaxReasks = 2;

  struct Decision {
    ActionDecision decision;
    std::string reply;
    int attempts;
  };

  // Asks for an action, re-asking twice on unparsable replies; after that,
  // a uniformly random valid action from the run's generator.
  Decision decide(const std::vector<ChatMessage>& messages, const std::vector<std::string>& valid) {
    std::vector<ChatMessage> convo = messages;
    for (int attempt = 0; attempt <= kMaxReasks; ++attempt) {
      ChatResponse res = ctx_.call(Purpose::act, convo);
      try {
        return {parse_action(res.text), res.text, attempt + 1};
      } catch (const ParseError&) {
        convo.push_back({Role::assistant, res.text});
        convo.push_back({Role::user, prompts_.reask});
      }
    }
    ActionDecision d{"fallback: unparsable replies", "look"};
    if (!valid.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
      d.action = valid[pick(rng_)];
    }
    nlohmann::json j{{"thought", d.thought}, {"action", d.action}};
    return {d, safe_dump(j), kMaxReasks + 2};
  }

  void verify_trajectory(const Trajectory& t) {
    if (auto at = first_divergence(env_, t))
      throw NondeterminismError(*at, "trajectory " + std::to_string(t.id) + " diverges on replay at step " +
                                         std::to_string(*at));
  }

  void verify_all() {
    for (const auto& t : result_.frontier.entries()) {
      verify_trajectory(t);
      ++result_.verified_frontier;
    }
    const auto& entries = result_.archive.entries();
    std::vector<std::size_t> idx(entries.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 pick(static_cast<std::uint64_t>(cfg_.seed) ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(idx.begin(), idx.end(), pick);
    idx.resize(std::min<std::size_t>(idx.size(), 100));
    for (std::size_t i : idx) {
      replay_path(env_, entries[i].path, cfg_.seed, nullptr, entries[i].fingerprint);
      ++result_.verified_archive;
    }
    log_.emit("verify", {{"frontier", result_.verified_frontier}, {"archive", result_.verified_archive}});
  }

  RunConfig cfg_;
  Environment& env_;
  ChatBackend& backend_;
  EventLog& log_;
  PromptTemplates prompts_;
  std::mt19937_64 rng_;
  ModelContext ctx_;
  FrontierAnalyzer analyzer_;
  RunResult result_;
  StateSnapshot root_;
  std::uint64_t next_id_ = 0;
  std::unordered_map<Digest, std::vector<Trajectory>> attempts_from_;
};

inline RunResult run(const RunConfig& config, Environment& env, ChatBackend& backend, EventLog& log,
                     const PromptTemplates& prompts = {}) {
  return Engine(config, env, backend, log, prompts).run();
}

}  // namespace glow
