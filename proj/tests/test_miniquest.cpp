#include <gtest/gtest.h>

#include <deque>
#include <map>
#include <random>

#include "glow/env/miniquest.hpp"

using namespace glow;

namespace {

struct Search {
  Score best = 0;
  std::vector<std::string> best_path;
  std::size_t states = 0;
};

// Exhaustive breadth-first search over MiniQuest states using only the
// offered valid actions.
Search explore_all() {
  MiniQuest env;
  env.reset(0);
  Search out;
  std::map<std::string, std::vector<std::string>> seen{{env.state().canonical(), {}}};
  std::deque<MiniQuestState> queue{env.state()};
  while (!queue.empty()) {
    const MiniQuestState s = queue.front();
    queue.pop_front();
    if (s.done) continue;
    const auto path = seen.at(s.canonical());
    for (const auto& a : MiniQuest::valid_actions_of(s, env.data())) {
      env.set_state(s);
      auto r = env.step(a);
      if (r.score > out.best) {
        out.best = r.score;
        out.best_path = path;
        out.best_path.push_back(a);
      }
      auto next_path = path;
      next_path.push_back(a);
      if (seen.emplace(env.state().canonical(), next_path).second) queue.push_back(env.state());
    }
  }
  out.states = seen.size();
  return out;
}

}  // namespace

TEST(MiniQuest, ReachableMaximumIsTheAdvertisedMaximum) {
  const Search s = explore_all();
  MiniQuest env;
  EXPECT_EQ(s.best, 100);
  EXPECT_EQ(s.best, env.meta()["max_score"].get<Score>());
  EXPECT_GT(s.states, 20u);

  // The found path really plays out to a win.
  auto r = env.reset(0);
  for (const auto& a : s.best_path) r = env.step(a);
  EXPECT_EQ(r.score, 100);
  EXPECT_TRUE(r.done);
}

TEST(MiniQuest, DeterministicAcrossInstancesAndSeeds) {
  const std::vector<std::string> script{"north", "go north", "enter", "take lamp", "up", "take sword",
                                        "down", "open trapdoor", "down", "xyzzy", "look"};
  MiniQuest a, b;
  auto ra = a.reset(1), rb = b.reset(999);
  EXPECT_EQ(ra, rb);
  for (const auto& cmd : script) {
    ra = a.step(cmd);
    rb = b.step(cmd);
    ASSERT_EQ(ra, rb) << cmd;
    ASSERT_EQ(a.fingerprint(), ra.fingerprint);
  }
}

TEST(MiniQuest, UnknownCommandChangesNothing) {
  MiniQuest env;
  auto start = env.reset(0);
  auto r = env.step("dance wildly");
  EXPECT_EQ(r.observation, "I don't understand that.");
  EXPECT_EQ(r.reward, 0);
  EXPECT_EQ(r.fingerprint, start.fingerprint);
}

TEST(MiniQuest, CommandsAreNormalized) {
  EXPECT_EQ(normalize_command("  NORTH "), "go north");
  EXPECT_EQ(normalize_command("Take   Lamp"), "take lamp");
  MiniQuest a, b;
  a.reset(0);
  b.reset(0);
  EXPECT_EQ(a.step("North"), b.step("go north"));
}

TEST(MiniQuest, ContractErrors) {
  MiniQuest env;
  EXPECT_THROW(env.step("look"), ProtocolError);
  // Walk into the dark cellar without the lamp: the episode ends.
  env.reset(0);
  EnvStepResult r;
  for (const auto* cmd : {"go north", "go north", "enter", "open trapdoor", "go down"}) r = env.step(cmd);
  EXPECT_TRUE(r.done);
  EXPECT_LT(r.reward, 0);
  EXPECT_THROW(env.step("look"), ProtocolError);
}

TEST(MiniQuest, ValidActionsNeverErrorAndKeepScoresConsistent) {
  MiniQuest env;
  std::mt19937_64 rng(5);
  for (int episode = 0; episode < 300; ++episode) {
    auto r = env.reset(episode);
    Score running = 0;
    for (int t = 0; t < 60 && !r.done; ++t) {
      ASSERT_FALSE(r.valid_actions.empty());
      const auto& a = r.valid_actions[std::uniform_int_distribution<std::size_t>(0, r.valid_actions.size() - 1)(rng)];
      r = env.step(a);
      running += r.reward;
      ASSERT_EQ(r.score, running);
      ASSERT_LE(r.score, 100);
    }
  }
}
