#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "glow/core/archive.hpp"
#include "glow/core/config.hpp"
#include "glow/core/frontier.hpp"
#include "glow/core/json_io.hpp"

using namespace glow;

namespace {

std::vector<Step> steps_from_rewards(const std::vector<Score>& rewards) {
  std::vector<Step> out;
  Score running = 0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    running += rewards[i];
    Step s;
    s.action = "a" + std::to_string(i);
    s.reward = rewards[i];
    s.score_after = running;
    s.fingerprint_after = Digest::of(std::to_string(i));
    out.push_back(s);
  }
  return out;
}

// Highest cumulative reward over the non-empty prefixes, by enumeration.
Score brute_force_value(const std::vector<Score>& rewards) {
  Score best = std::numeric_limits<Score>::min();
  for (std::size_t len = 1; len <= rewards.size(); ++len)
    best = std::max(best, std::accumulate(rewards.begin(), rewards.begin() + static_cast<std::ptrdiff_t>(len), Score{0}));
  return best;
}

Trajectory with_peak(std::uint64_t id, Score peak) { return Trajectory::make(id, 0, 0, steps_from_rewards({peak})); }

}  // namespace

TEST(TrajectoryValue, MatchesPrefixEnumeration) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(1, 40), reward(-25, 25), sparse(0, 4);
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<Score> rewards(static_cast<std::size_t>(len(rng)));
    for (auto& r : rewards) r = sparse(rng) == 0 ? reward(rng) : 0;
    const auto steps = steps_from_rewards(rewards);
    ASSERT_EQ(trajectory_value(steps), brute_force_value(rewards)) << "trial " << trial;
  }
}

TEST(TrajectoryValue, PeakSurvivesLaterLosses) {
  auto t = Trajectory::make(1, 0, 0, steps_from_rewards({0, 10, 25, -10, 0, -25}));
  EXPECT_EQ(t.peak_value, 35);
  EXPECT_EQ(t.final_value, 0);
}

TEST(TrajectoryValue, AllNegativeIsTheFirstReward) {
  EXPECT_EQ(trajectory_value(steps_from_rewards({-5, -1, -3})), -5);
  EXPECT_THROW(trajectory_value(std::vector<Step>{}), DomainError);
}

TEST(Trajectory, ScoreBookkeeping) {
  auto steps = steps_from_rewards({5, 0, -2});
  EXPECT_TRUE(scores_consistent(steps));
  steps[1].score_after = 6;
  EXPECT_FALSE(scores_consistent(steps));
  steps = steps_from_rewards({1, 1});
  steps[0].done = true;
  EXPECT_FALSE(scores_consistent(steps));
}

TEST(Frontier, MatchesSortAndTruncate) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const int n = std::uniform_int_distribution<int>(0, 40)(rng);
    std::uniform_int_distribution<int> peak(-3, 6);  // narrow range forces ties
    Frontier f(k);
    std::vector<Trajectory> all;
    for (int i = 0; i < n; ++i) {
      auto t = with_peak(static_cast<std::uint64_t>(i), peak(rng) * 10);
      all.push_back(t);
      f = frontier_insert(std::move(f), t);

      auto expected = all;
      std::sort(expected.begin(), expected.end(), [](const Trajectory& a, const Trajectory& b) {
        return a.peak_value != b.peak_value ? a.peak_value > b.peak_value : a.id > b.id;
      });
      expected.resize(std::min(expected.size(), k));
      ASSERT_EQ(f.entries(), expected) << "trial " << trial << " after insert " << i;
    }
    EXPECT_LE(f.size(), k);
  }
}

TEST(Frontier, InsertReportsAcceptanceAndCutoff) {
  Frontier f(2);
  EXPECT_FALSE(f.cutoff());
  EXPECT_TRUE(f.insert(with_peak(1, 10)));
  EXPECT_TRUE(f.insert(with_peak(2, 5)));
  EXPECT_EQ(f.cutoff(), 5);
  EXPECT_FALSE(f.insert(with_peak(3, 1)));
  EXPECT_TRUE(f.insert(with_peak(4, 5)));  // newer wins the tie
  EXPECT_EQ(f.entries()[1].id, 4u);
  EXPECT_EQ(f.best().id, 1u);
  EXPECT_THROW(Frontier(0), DomainError);
}

TEST(Frontier, DigestTracksContents) {
  Frontier a(3), b(3);
  EXPECT_EQ(a.digest(), b.digest());
  a.insert(with_peak(1, 10));
  EXPECT_NE(a.digest(), b.digest());
  b.insert(with_peak(1, 10));
  EXPECT_EQ(a.digest(), b.digest());
}

TEST(BudgetMath, MinimumSelectionsFormula) {
  EXPECT_EQ(min_state_selections(1000, 50, 1), 19);
  EXPECT_EQ(min_state_selections(1000, 50, 2), 9);
  EXPECT_EQ(min_state_selections(1000, 50, 3), 5);
  EXPECT_EQ(min_state_selections(1000, 50, 4), 4);
  EXPECT_EQ(min_state_selections(1000, 50, 5), 3);
  EXPECT_THROW(min_state_selections(0, 50, 1), DomainError);
}

// Worst case: every episode runs to the cap, so a phase spends exactly s*n
// steps; count the phases that complete and drop the unselected first one.
TEST(BudgetMath, FormulaMatchesWorstCaseSimulation) {
  for (std::int64_t b = 1; b <= 600; b += 7)
    for (std::int64_t s = 1; s <= 30; s += 3)
      for (std::int64_t n = 1; n <= 5; ++n) {
        std::int64_t used = 0, phases = 0;
        while (used + s * n <= b) used += s * n, ++phases;
        ASSERT_EQ(min_state_selections(b, s, n), phases - 1) << b << " " << s << " " << n;
      }
}

TEST(Budget, ReplayChargedOnlyWhenConfigured) {
  Budget b{10, 0, 0, false};
  b.charge_replay(50);
  EXPECT_EQ(b.remaining(), 10);
  EXPECT_TRUE(b.can_replay_then_step(50));
  b.charge_exploration(10);
  EXPECT_TRUE(b.exhausted());
  EXPECT_THROW(b.charge_exploration(), DomainError);

  Budget c{10, 0, 0, true};
  EXPECT_FALSE(c.can_replay_then_step(10));
  EXPECT_TRUE(c.can_replay_then_step(9));
  c.charge_replay(4);
  EXPECT_EQ(c.remaining(), 6);
  EXPECT_THROW(c.charge_replay(7), DomainError);
}

TEST(Archive, KeepsShortestPathAndCountsVisits) {
  StateArchive a;
  StateSnapshot s{Digest::of("x"), "obs", std::nullopt, 5, false};
  EXPECT_TRUE(a.observe(s, {"a", "b", "c"}, 3));
  EXPECT_FALSE(a.observe(s, {"d"}, 9));
  EXPECT_FALSE(a.observe(s, {"e", "f"}, 12));
  ASSERT_EQ(a.size(), 1u);
  const auto& e = a.at(0);
  EXPECT_EQ(e.visits, 3u);
  EXPECT_EQ(e.path, std::vector<std::string>{"d"});
  EXPECT_EQ(e.discovery_step, 3u);
}

TEST(Archive, UpdateFoldsEveryStateAndDeaths) {
  StateSnapshot root{Digest::of("root"), "start", std::nullopt, 0, false};
  auto steps = steps_from_rewards({0, 10, -10});
  steps.back().done = true;
  const auto t = Trajectory::make(1, 0, 0, steps);
  StateArchive a = archive_updated(StateArchive{}, t, root, 0);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_EQ(a.at(0).fingerprint, root.fingerprint);
  EXPECT_EQ(a.at(3).path, (std::vector<std::string>{"a0", "a1", "a2"}));
  EXPECT_TRUE(a.at(3).terminal);
  EXPECT_EQ(a.at(2).deaths_from, 1u);
  EXPECT_EQ(a.at(2).discovery_step, 2u);
}

TEST(Archive, PathsAreNeverLongerThanFirstDiscovery) {
  std::mt19937_64 rng(3);
  StateArchive a;
  std::map<std::string, std::size_t> shortest;
  for (int i = 0; i < 3000; ++i) {
    const std::string key = std::to_string(std::uniform_int_distribution<int>(0, 30)(rng));
    std::vector<std::string> path(static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 12)(rng)), "x");
    a.observe({Digest::of(key), key, std::nullopt, 0, false}, path, static_cast<std::uint64_t>(i));
    auto [it, fresh] = shortest.emplace(key, path.size());
    if (!fresh) it->second = std::min(it->second, path.size());
  }
  for (const auto& [key, len] : shortest) ASSERT_EQ(a.find(Digest::of(key))->path.size(), len);
}

TEST(Config, ValidationNamesTheField) {
  RunConfig c;
  c.n_explorations = 0;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "n_explorations");
  }
  c = RunConfig{};
  c.temperature = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(parse_selection_kind("greedy"), ConfigError);
  EXPECT_EQ(parse_reflection_kind("reflexion"), ReflectionKind::reflexion);
}

TEST(JsonIo, TrajectoryRoundTrip) {
  auto steps = steps_from_rewards({0, 25, -5});
  steps[1].inventory = "lamp";
  steps[2].valid_actions = {"look", "go north"};
  const auto t = Trajectory::make(42, 7, 1, steps);
  nlohmann::json j = t;
  EXPECT_EQ(j.get<Trajectory>(), t);
}
