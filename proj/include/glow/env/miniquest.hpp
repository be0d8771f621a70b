#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "glow/env/environment.hpp"
#include "glow/generated/miniquest_data.hpp"

namespace glow {

// Data-driven model of the MiniQuest game: rooms, exits, items and scripted
// room actions, as loaded from data/miniquest.json.
struct MiniQuestData {
  struct Exit {
    std::string command;
    std::string to;
    std::string requires_flag;
    std::string requires_item;
    std::string blocked_message;
  };
  struct Condition {
    std::string flag;
    std::string then_text;
    std::string else_text;
  };
  struct Room {
    std::string name;
    std::string description;
    std::vector<Exit> exits;
    std::vector<Condition> conditions;
    Score first_entry_reward = 0;
    std::string entry_requires_item;
    std::string entry_failure;
    Score entry_failure_reward = 0;
    std::string entry_message;
    std::string entry_sets_flag;
    bool terminal = false;
  };
  struct Item {
    std::string name;
    std::string room;  // empty when the item never lies in a room
    std::string take_command;
    Score reward = 0;
    std::string room_text;
    bool droppable = false;

    std::string drop_command() const { return "drop " + name; }
  };
  struct RoomAction {
    std::string room;
    std::string command;
    std::string unless_flag;
    std::string sets_flag;
    std::string grants_item;
    Score reward = 0;
    std::string message;
  };

  int schema_version = 0;
  std::string game;
  std::string version;
  std::string start_room;
  Score max_score = 0;
  std::string unknown_command;
  std::vector<Room> rooms;
  std::vector<Item> items;
  std::vector<RoomAction> room_actions;

  const Room& room(const std::string& name) const {
    for (const auto& r : rooms)
      if (r.name == name) return r;
    throw DomainError("MiniQuest: unknown room '" + name + "'");
  }

  static MiniQuestData parse(std::string_view text) {
    auto j = nlohmann::json::parse(text);
    auto str = [](const nlohmann::json& o, const char* key) {
      auto it = o.find(key);
      return it == o.end() || it->is_null() ? std::string{} : it->get<std::string>();
    };
    MiniQuestData d;
    d.schema_version = j.at("schema_version").get<int>();
    if (d.schema_version != 1) throw DomainError("MiniQuest: unsupported schema_version");
    d.game = j.at("game").get<std::string>();
    d.version = j.at("version").get<std::string>();
    d.start_room = j.at("start_room").get<std::string>();
    d.max_score = j.at("max_score").get<Score>();
    d.unknown_command = j.at("unknown_command").get<std::string>();
    for (const auto& r : j.at("rooms")) {
      Room room;
      room.name = str(r, "name");
      room.description = str(r, "description");
      for (const auto& e : r.value("exits", nlohmann::json::array()))
        room.exits.push_back({str(e, "command"), str(e, "to"), str(e, "requires_flag"),
                              str(e, "requires_item"), str(e, "blocked_message")});
      for (const auto& c : r.value("conditions", nlohmann::json::array()))
        room.conditions.push_back({str(c, "flag"), str(c, "then"), str(c, "else")});
      room.first_entry_reward = r.value("first_entry_reward", Score{0});
      room.entry_requires_item = str(r, "entry_requires_item");
      room.entry_failure = str(r, "entry_failure");
      room.entry_failure_reward = r.value("entry_failure_reward", Score{0});
      room.entry_message = str(r, "entry_message");
      room.entry_sets_flag = str(r, "entry_sets_flag");
      room.terminal = r.value("terminal", false);
      d.rooms.push_back(std::move(room));
    }
    for (const auto& i : j.at("items"))
      d.items.push_back({str(i, "name"), str(i, "room"), str(i, "take_command"),
                         i.value("reward", Score{0}), str(i, "room_text"), i.value("droppable", false)});
    for (const auto& a : j.at("room_actions"))
      d.room_actions.push_back({str(a, "room"), str(a, "command"), str(a, "unless_flag"),
                                str(a, "sets_flag"), str(a, "grants_item"),
                                a.value("reward", Score{0}), str(a, "message")});
    return d;
  }

  static std::shared_ptr<const MiniQuestData> builtin() {
    static const auto data = std::make_shared<const MiniQuestData>(parse(kMiniQuestData));
    return data;
  }
};

// Complete MiniQuest world state. Everything the fingerprint covers.
struct MiniQuestState {
  std::string room;
  std::set<std::string> inventory;
  // "visited:<Room>" for rewarded rooms, "taken:<item>" once picked up,
  // "at:<item>:<Room>" while a dropped item lies somewhere.
  std::set<std::string> flags;
  Score score = 0;
  bool done = false;

  std::string canonical() const {
    std::ostringstream os;
    os << "room=" << room << ";inv=";
    for (const auto& i : inventory) os << i << ',';
    os << ";flags=";
    for (const auto& f : flags) os << f << ',';
    os << ";score=" << score << ";done=" << (done ? 1 : 0);
    return os.str();
  }
  bool operator==(const MiniQuestState&) const = default;
};

inline std::string normalize_command(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  static const std::set<std::string> kDirections{"north", "south", "east", "west", "up", "down"};
  if (kDirections.contains(out)) out = "go " + out;
  return out;
}

// Deterministic built-in text game. The seed is accepted for interface
// parity and ignored: MiniQuest has no randomness.
class MiniQuest final : public Environment {
 public:
  explicit MiniQuest(std::shared_ptr<const MiniQuestData> data = MiniQuestData::builtin())
      : data_(std::move(data)) {}

  EnvStepResult reset(std::int64_t /*seed*/) override {
    state_ = MiniQuestState{data_->start_room, {}, {}, 0, false};
    live_ = true;
    return result(room_text(), 0);
  }

  EnvStepResult step(const std::string& action) override {
    if (!live_) throw ProtocolError("step before reset");
    if (state_.done) throw ProtocolError("step after episode end");
    auto [message, reward] = apply(state_, normalize_command(action), *data_);
    return result(std::move(message), reward);
  }

  Digest fingerprint() override { return fingerprint_of(state_); }
  std::string name() const override { return "miniquest"; }
  nlohmann::json meta() override {
    return {{"name", name()}, {"title", data_->game}, {"version", data_->version},
            {"max_score", data_->max_score}};
  }

  const MiniQuestState& state() const noexcept { return state_; }
  void set_state(MiniQuestState s) {
    state_ = std::move(s);
    live_ = true;
  }
  const MiniQuestData& data() const noexcept { return *data_; }

  static Digest fingerprint_of(const MiniQuestState& s) { return Digest::of(s.canonical()); }

  std::vector<std::string> valid_actions() const { return valid_actions_of(state_, *data_); }

  static std::vector<std::string> valid_actions_of(const MiniQuestState& s, const MiniQuestData& d) {
    std::vector<std::string> out;
    if (s.done) return out;
    const auto& room = d.room(s.room);
    for (const auto& e : room.exits)
      if (e.requires_flag.empty() || s.flags.contains(e.requires_flag)) out.push_back(e.command);
    for (const auto& item : d.items)
      if (item_here(s, item)) out.push_back(item.take_command);
    for (const auto& item : d.items)
      if (item.droppable && s.inventory.contains(item.name)) out.push_back(item.drop_command());
    for (const auto& a : d.room_actions)
      if (a.room == s.room && (a.unless_flag.empty() || !s.flags.contains(a.unless_flag)))
        out.push_back(a.command);
    out.push_back("look");
    return out;
  }

  // Applies a normalized command to `s`; returns (observation, reward).
  static std::pair<std::string, Score> apply(MiniQuestState& s, const std::string& cmd,
                                             const MiniQuestData& d) {
    const auto& room = d.room(s.room);
    if (cmd == "look") return {describe(s, d), 0};
    for (const auto& e : room.exits) {
      if (e.command != cmd) continue;
      if (!e.requires_flag.empty() && !s.flags.contains(e.requires_flag))
        return {join(e.blocked_message, describe(s, d)), 0};
      if (!e.requires_item.empty() && !s.inventory.contains(e.requires_item))
        return {join(e.blocked_message, describe(s, d)), 0};
      return enter(s, e.to, d);
    }
    for (const auto& item : d.items) {
      if (item.take_command.empty() || item.take_command != cmd || !item_here(s, item)) continue;
      s.inventory.insert(item.name);
      s.flags.erase(dropped_flag(item.name, s.room));
      const Score reward = s.flags.insert("taken:" + item.name).second ? item.reward : 0;
      s.score += reward;
      return {join("Taken.", describe(s, d)), reward};
    }
    for (const auto& item : d.items) {
      if (!item.droppable || item.drop_command() != cmd || !s.inventory.contains(item.name)) continue;
      s.inventory.erase(item.name);
      s.flags.insert(dropped_flag(item.name, s.room));
      return {join("Dropped.", describe(s, d)), 0};
    }
    for (const auto& a : d.room_actions) {
      if (a.room != s.room || a.command != cmd) continue;
      if (!a.unless_flag.empty() && s.flags.contains(a.unless_flag)) break;
      if (!a.sets_flag.empty()) s.flags.insert(a.sets_flag);
      if (!a.grants_item.empty()) s.inventory.insert(a.grants_item);
      s.score += a.reward;
      return {join(a.message, describe(s, d)), a.reward};
    }
    return {d.unknown_command, 0};
  }

  static std::string describe(const MiniQuestState& s, const MiniQuestData& d) {
    const auto& room = d.room(s.room);
    std::string text = room.description;
    for (const auto& c : room.conditions) {
      const std::string& extra = s.flags.contains(c.flag) ? c.then_text : c.else_text;
      if (!extra.empty()) text += " " + extra;
    }
    for (const auto& item : d.items) {
      if (!item_here(s, item)) continue;
      if (s.flags.contains("taken:" + item.name)) text += " There is a " + item.name + " here.";
      else if (!item.room_text.empty()) text += " " + item.room_text;
    }
    text += " " + inventory_line(s, d);
    return text;
  }

  static std::string inventory_text(const MiniQuestState& s, const MiniQuestData& d) {
    std::string out;
    for (const auto& item : d.items) {
      if (!s.inventory.contains(item.name)) continue;
      if (!out.empty()) out += ", ";
      out += item.name;
    }
    return out.empty() ? "nothing" : out;
  }

 private:
  static std::string dropped_flag(const std::string& item, const std::string& room) {
    return "at:" + item + ":" + room;
  }

  static bool item_here(const MiniQuestState& s, const MiniQuestData::Item& item) {
    if (s.inventory.contains(item.name)) return false;
    if (s.flags.contains("taken:" + item.name)) return s.flags.contains(dropped_flag(item.name, s.room));
    return !item.room.empty() && item.room == s.room;
  }

  static std::string inventory_line(const MiniQuestState& s, const MiniQuestData& d) {
    return "You are carrying: " + inventory_text(s, d) + ".";
  }

  static std::string join(const std::string& a, const std::string& b) {
    if (a.empty()) return b;
    return a + " " + b;
  }

  static std::pair<std::string, Score> enter(MiniQuestState& s, const std::string& to,
                                             const MiniQuestData& d) {
    const auto& target = d.room(to);
    s.room = to;
    if (!target.entry_requires_item.empty() && !s.inventory.contains(target.entry_requires_item)) {
      s.score += target.entry_failure_reward;
      s.done = true;
      return {target.entry_failure, target.entry_failure_reward};
    }
    Score reward = 0;
    std::string message;
    if (!target.entry_sets_flag.empty() && !s.flags.contains(target.entry_sets_flag)) {
      s.flags.insert(target.entry_sets_flag);
      message = target.entry_message;
    }
    // Only rewarded rooms remember a visit; elsewhere revisits are the same state.
    if (target.first_entry_reward != 0 && s.flags.insert("visited:" + to).second)
      reward = target.first_entry_reward;
    s.score += reward;
    if (target.terminal) s.done = true;
    return {join(message, describe(s, d)), reward};
  }

  EnvStepResult result(std::string observation, Score reward) const {
    return EnvStepResult{std::move(observation), reward, state_.score, state_.done,
                         valid_actions_of(state_, *data_), fingerprint_of(state_),
                         inventory_text(state_, *data_)};
  }

  std::string room_text() const { return describe(state_, *data_); }

  std::shared_ptr<const MiniQuestData> data_;
  MiniQuestState state_;
  bool live_ = false;
};

}  // namespace glow
