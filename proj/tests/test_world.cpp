#include <gtest/gtest.h>

#include "glow/core/json_io.hpp"
#include "glow/env/miniquest.hpp"
#include "glow/llm/scripted_oracle.hpp"
#include "glow/world/global_model.hpp"
#include "glow/world/local_model.hpp"

using namespace glow;

namespace {

// Replies with a fixed text per purpose and keeps every request.
class Canned final : public ChatBackend {
 public:
  std::map<Purpose, std::string> replies;
  std::vector<ChatRequest> seen;
  ChatResponse complete(const ChatRequest& r) override {
    seen.push_back(r);
    return {replies[r.purpose], {}, id(), false};
  }
  std::string id() const override { return "canned"; }
};

Trajectory play(MiniQuest& env, std::uint64_t id, const std::vector<std::string>& actions) {
  auto cur = env.reset(0);
  std::vector<Step> steps;
  for (const auto& a : actions) {
    auto next = env.step(a);
    steps.push_back(make_step(cur, a, next));
    cur = next;
  }
  return Trajectory::make(id, 0, 0, steps);
}

StateArchive archive_of(const std::vector<Trajectory>& ts) {
  MiniQuest env;
  StateArchive a;
  for (const auto& t : ts) archive_update(a, t, env.reset(0).snapshot(), 0);
  return a;
}

const std::vector<std::string> kToKitchen{"go north", "go north", "enter"};
const std::vector<std::string> kToAttic{"go north", "go north", "enter", "go up", "take sword"};

}  // namespace

TEST(FrontierAnalyzer, CachesByFrontierContents) {
  MiniQuest env;
  Canned backend;
  backend.replies[Purpose::analyze_frontier] = "1. BOTTLENECKS\n- Attic with the sword (achieved: 0, potential: 50)\n";
  PromptTemplates prompts;
  ModelContext ctx{backend, prompts};
  FrontierAnalyzer analyzer;
  Frontier f(3);
  EXPECT_TRUE(analyzer.analyze(f, ctx).w_global.empty());
  EXPECT_TRUE(backend.seen.empty());

  f.insert(play(env, 1, kToKitchen));
  auto first = analyzer.analyze(f, ctx);
  auto again = analyzer.analyze(f, ctx);
  EXPECT_FALSE(first.cached);
  EXPECT_TRUE(again.cached);
  ASSERT_EQ(first.w_global.key_states.size(), 1u);
  EXPECT_EQ(analyzer.calls(), 1u);

  f.insert(play(env, 2, kToAttic));
  EXPECT_FALSE(analyzer.analyze(f, ctx).cached);
  EXPECT_EQ(backend.seen.size(), 2u);
  EXPECT_NE(backend.seen[1].rendered().find("take sword"), std::string::npos);
}

TEST(SelectState, UsesTheModelIndexOverCandidates) {
  MiniQuest env;
  auto archive = archive_of({play(env, 1, kToAttic)});
  Canned backend;
  backend.replies[Purpose::select] = R"({"thought": "sword", "index": 2})";
  PromptTemplates prompts;
  ModelContext ctx{backend, prompts};
  WGlobal w = parse_w_global("1. GOALS\n- Attic\n", Digest("d"));
  auto s = select_state(archive, w, ctx);
  EXPECT_EQ(s.source, SelectionSource::model);
  EXPECT_EQ(s.archive_index, 2u);
  EXPECT_EQ(s.thought, "sword");
  ASSERT_EQ(backend.seen.size(), 1u);
  EXPECT_NE(backend.seen[0].rendered().find("Attic"), std::string::npos);
}

TEST(SelectState, FallsBackToGreedyOnGarbage) {
  MiniQuest env;
  auto archive = archive_of({play(env, 1, kToAttic)});
  Canned backend;
  backend.replies[Purpose::select] = "I like the attic";
  PromptTemplates prompts;
  ModelContext ctx{backend, prompts};
  WGlobal w = parse_w_global("1. GOALS\n- Attic\n", Digest("d"));
  auto s = select_state(archive, w, ctx);
  EXPECT_EQ(s.source, SelectionSource::fallback);
  EXPECT_EQ(s.archive_index, *greedy_by_score(archive));

  // With no analysis there is nothing to align with: greedy, no model call.
  backend.seen.clear();
  EXPECT_EQ(select_state(archive, WGlobal{}, ctx).source, SelectionSource::greedy);
  EXPECT_TRUE(backend.seen.empty());
}

TEST(SelectState, PerStateModeScoresEveryCandidate) {
  MiniQuest env;
  auto archive = archive_of({play(env, 1, kToKitchen)});
  Canned backend;
  backend.replies[Purpose::select] = R"({"score": 3})";
  PromptTemplates prompts;
  ModelContext ctx{backend, prompts};
  WGlobal w = parse_w_global("1. GOALS\n- Kitchen\n", Digest("d"));
  auto s = select_state(archive, w, ctx, AlignMode::per_state);
  EXPECT_EQ(backend.seen.size(), archive.size());
  EXPECT_EQ(s.source, SelectionSource::model);
}

TEST(CandidateCap, BoundedAndKeepsTheBest) {
  MiniQuest env;
  std::vector<Trajectory> ts;
  // Many different states: wander with various item pickups.
  ts.push_back(play(env, 1, {"go north", "go north", "enter", "take lamp", "go up", "take sword", "go down",
                             "open trapdoor", "go down"}));
  ts.push_back(play(env, 2, kToAttic));
  auto archive = archive_of(ts);
  for (std::size_t cap : {1u, 2u, 3u, 5u}) {
    auto c = capped_candidates(archive, cap);
    EXPECT_LE(c.size(), cap);
    EXPECT_TRUE(std::find(c.begin(), c.end(), *greedy_by_score(archive)) != c.end());
    for (auto i : c) EXPECT_FALSE(archive.at(i).terminal);
  }
}

TEST(ReflectMar, PromptCarriesAttemptsAndPreviousModel) {
  MiniQuest env;
  Canned backend;
  backend.replies[Purpose::reflect] = "STATE: Kitchen\nADVANTAGES:\n- \"take lamp\" -> light (score: +0)\n";
  PromptTemplates prompts;
  ModelContext ctx{backend, prompts};
  std::vector<Trajectory> local{play(env, 1, kToKitchen), play(env, 2, kToAttic)};
  WLocal w = reflect_mar(env.reset(0).snapshot(), local, nullptr, WLocal{}, ctx);
  ASSERT_EQ(w.entries.size(), 1u);
  EXPECT_EQ(w.entries[0].state_descriptor, "Kitchen");
  const auto p1 = backend.seen.back().rendered();
  EXPECT_NE(p1.find("Attempt 2"), std::string::npos);
  EXPECT_EQ(p1.find(render::kPreviousWLocalHeader), std::string::npos);

  reflect_mar(env.reset(0).snapshot(), local, nullptr, w, ctx);
  EXPECT_NE(backend.seen.back().rendered().find(render::kPreviousWLocalHeader), std::string::npos);
}

TEST(ScriptedOracle, DeterministicAndValid) {
  MiniQuest env;
  auto r = env.reset(0);
  PromptTemplates prompts;
  const auto step = fill_template(prompts.act_step, {{"step_number", "1"},
                                                     {"observation", r.observation},
                                                     {"score", "0"},
                                                     {"valid_actions", render::comma_list(r.valid_actions)}});
  ChatRequest req{{{Role::system, prompts.act_system},
                   {Role::user, fill_template(prompts.act_first, {{"context_block", ""}, {"step_block", step}})}},
                  0.5,
                  Purpose::act};
  ScriptedOracle a(1), b(1);
  const auto ra = a.complete(req), rb = b.complete(req);
  EXPECT_EQ(ra.text, rb.text);
  const auto action = parse_action(ra.text).action;
  EXPECT_NE(std::find(r.valid_actions.begin(), r.valid_actions.end(), action), r.valid_actions.end());
  EXPECT_GT(ra.token_usage.prompt_tokens, 0);
}

TEST(ScriptedOracle, SelectAnswersAnIndexInRange) {
  MiniQuest env;
  auto archive = archive_of({play(env, 1, kToAttic)});
  ScriptedOracle oracle(3);
  PromptTemplates prompts;
  ModelContext ctx{oracle, prompts};
  Frontier f(2);
  f.insert(play(env, 1, kToAttic));
  auto w = analyze_frontier(f, ctx);
  EXPECT_FALSE(w.key_states.empty());
  auto s = select_state(archive, w, ctx);
  EXPECT_EQ(s.source, SelectionSource::model);
  EXPECT_LT(s.archive_index, archive.size());
}
