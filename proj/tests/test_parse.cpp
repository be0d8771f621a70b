#include <gtest/gtest.h>

#include <random>

#include "glow/llm/parse.hpp"
#include "glow/world/templates.hpp"
#include "glow/world/text_parse.hpp"
#include "test_support.hpp"

using namespace glow;
using glow::testing::fixture;
using glow::testing::read_file;

namespace {

bool icontains(std::string hay, std::string needle) {
  for (auto* s : {&hay, &needle})
    for (auto& c : *s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST(GlobalAnalysisFixture, FindsTheTrollBottleneck) {
  const auto states = parse_key_states(read_file(fixture("zork1_global_analysis.txt")));
  ASSERT_FALSE(states.empty());
  EXPECT_TRUE(std::any_of(states.begin(), states.end(),
                          [](const KeyState& k) { return icontains(k.descriptor, "troll"); }));
  for (const auto& k : states) {
    EXPECT_FALSE(k.descriptor.empty());
    EXPECT_FALSE(k.section.empty());
  }
}

TEST(LocalAdvantagesFixture, FourStatesTrollRoomFirst) {
  const auto entries = parse_local_entries(read_file(fixture("zork1_local_advantages.txt")));
  ASSERT_EQ(entries.size(), 4u);
  EXPECT_EQ(entries[0].state_descriptor, "The Troll Room");
  EXPECT_FALSE(entries[0].advantages.empty());
  for (const auto& e : entries) EXPECT_FALSE(e.advantages.empty()) << e.state_descriptor;
}

TEST(KeyStates, SectionsAndValueTags) {
  const std::string text =
      "1. OVERVIEW\n- not a key state\n"
      "2. **BOTTLENECKS**\n- Dark cellar (achieved: 25, potential: 60)\n• Locked gate, potential high\n"
      "3. SUMMARY\n- also not one\n4. Notes on the goal\n- prose list item, not a header\n";
  const auto ks = parse_key_states(text);
  ASSERT_EQ(ks.size(), 2u);
  EXPECT_TRUE(icontains(ks[0].descriptor, "dark cellar"));
  EXPECT_EQ(ks[0].achieved_value, 25);
  EXPECT_EQ(ks[0].potential_value, 60);
  EXPECT_TRUE(ks[0].potential_high());
  EXPECT_TRUE(icontains(ks[1].descriptor, "locked gate"));
}

TEST(LocalEntries, RespectsTheEntryCap) {
  std::string text;
  for (int i = 0; i < 12; ++i) text += "STATE: Room " + std::to_string(i) + "\nADVANTAGES:\n- \"look\" -> nothing\n\n";
  EXPECT_EQ(parse_local_entries(text, 5).size(), 5u);
  EXPECT_EQ(parse_local_entries(text).size(), 8u);
  EXPECT_TRUE(parse_local_entries("no structure at all").empty());
}

TEST(ActionParse, PrefersObjectsWithThought) {
  EXPECT_EQ(parse_action(R"(sure {"action": "open door"} then {"thought": "x", "action": "go north"})").action,
            "go north");
  EXPECT_EQ(parse_action("```json\n{\"thought\": \"t\", \"action\": \"  take lamp \"}\n```").action, "take lamp");
  EXPECT_EQ(parse_action(R"({"action": "look"})").action, "look");
  EXPECT_THROW(parse_action("go north"), ParseError);
  EXPECT_THROW(parse_action(R"({"action": ""})"), ParseError);
  EXPECT_THROW(parse_action(R"({"action": 3})"), ParseError);
}

TEST(IndexParse, RangeAndLeniency) {
  EXPECT_EQ(parse_index(R"({"thought": "x", "index": 2})", 3).index, 2u);
  EXPECT_EQ(parse_index(R"({"index": "1"})", 3).index, 1u);
  EXPECT_EQ(parse_index(R"({"index": 1.0})", 3).index, 1u);
  EXPECT_THROW(parse_index(R"({"index": 3})", 3), ParseError);
  EXPECT_THROW(parse_index(R"({"index": -1})", 3), ParseError);
  EXPECT_THROW(parse_index(R"({"index": "two"})", 3), ParseError);
  EXPECT_THROW(parse_index("nothing", 3), ParseError);
  EXPECT_THROW(parse_index(R"({"index": 0})", 0), DomainError);
}

TEST(AlignmentParse, NumericScore) {
  EXPECT_DOUBLE_EQ(parse_alignment_score(R"({"thought": "", "score": 7.5})"), 7.5);
  EXPECT_DOUBLE_EQ(parse_alignment_score(R"({"score": "4"})"), 4.0);
  EXPECT_THROW(parse_alignment_score(R"({"score": null})"), ParseError);
}

// Random bytes, and random corruptions of the fixtures, must never crash a
// parser or make it throw anything other than ParseError.
TEST(ParserFuzz, TenThousandInputs) {
  std::mt19937_64 rng(2024);
  const std::string g = read_file(fixture("zork1_global_analysis.txt"));
  const std::string l = read_file(fixture("zork1_local_advantages.txt"));
  const std::string alphabet = "{}[]\":,-*#•→\n 0123456789abcSTATE:ADVANTAGES";
  for (int i = 0; i < 10000; ++i) {
    std::string input;
    switch (i % 3) {
      case 0: {
        input.resize(std::uniform_int_distribution<std::size_t>(0, 512)(rng));
        for (auto& c : input) c = static_cast<char>(std::uniform_int_distribution<int>(0, 255)(rng));
        break;
      }
      case 1: {
        input = (i % 2 ? g : l);
        for (int k = 0; k < 20; ++k)
          input[std::uniform_int_distribution<std::size_t>(0, input.size() - 1)(rng)] =
              static_cast<char>(std::uniform_int_distribution<int>(0, 255)(rng));
        input.resize(std::uniform_int_distribution<std::size_t>(0, input.size())(rng));
        break;
      }
      default: {
        input.resize(std::uniform_int_distribution<std::size_t>(0, 256)(rng));
        for (auto& c : input) c = alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
      }
    }
    ASSERT_NO_THROW(parse_key_states(input)) << i;
    ASSERT_NO_THROW(parse_local_entries(input)) << i;
    auto only_parse_errors = [&](auto&& fn) {
      try {
        fn();
      } catch (const ParseError&) {
      }
    };
    ASSERT_NO_THROW(only_parse_errors([&] { parse_action(input); })) << i;
    ASSERT_NO_THROW(only_parse_errors([&] { parse_index(input, 5); })) << i;
    ASSERT_NO_THROW(only_parse_errors([&] { parse_alignment_score(input); })) << i;
  }
}

TEST(Templates, SubstitutesKnownPlaceholdersOnly) {
  EXPECT_EQ(fill_template("a {x} b {y} {\"json\": 1}", {{"x", "1"}}), "a 1 b {y} {\"json\": 1}");
  EXPECT_EQ(fill_template("{x}{x}", {{"x", "ab"}}), "abab");
}

TEST(Templates, EmptyBlockDropsItsLine) {
  EXPECT_EQ(fill_template("head\n{block}\n\ntail\n", {{"block", ""}}), "head\ntail\n");
  EXPECT_EQ(fill_template("head\n{block}\n\ntail\n", {{"block", "B"}}), "head\nB\n\ntail\n");
}

TEST(Templates, BuiltinsCarryTheirPlaceholders) {
  PromptTemplates t;
  EXPECT_NE(t.act_step.find("{valid_actions}"), std::string::npos);
  EXPECT_NE(t.act_first.find("{context_block}"), std::string::npos);
  EXPECT_FALSE(t.analyze_frontier.empty());
  EXPECT_FALSE(t.mar.empty());
}

TEST(Templates, DirectoryOverridesSomeFiles) {
  glow::testing::TempDir dir("glow_prompts");
  {
    std::ofstream(dir.path / "reask.txt") << "custom reask";
  }
  auto t = PromptTemplates::from_directory(dir.path);
  EXPECT_EQ(t.reask, "custom reask");
  EXPECT_EQ(t.mar, PromptTemplates{}.mar);
  EXPECT_THROW(PromptTemplates::from_directory(dir.path / "missing"), ConfigError);
}
