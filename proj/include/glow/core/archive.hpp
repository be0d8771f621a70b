#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "glow/core/trajectory.hpp"

namespace glow {

// A state as seen right after reset or after a step.
struct StateSnapshot {
  Digest fingerprint;
  std::string observation;
  std::optional<std::string> inventory;
  Score score = 0;
  bool done = false;
};

struct ArchiveEntry {
  Digest fingerprint;
  std::string observation;
  std::optional<std::string> inventory;
  Score score = 0;
  std::uint64_t visits = 0;
  std::vector<std::string> path;  // actions from reset
  std::uint64_t discovery_step = 0;
  bool terminal = false;          // episode ended here; never a selection candidate
  std::uint64_t deaths_from = 0;  // times a step from here ended the episode with a loss

  bool operator==(const ArchiveEntry&) const = default;
};

// Fingerprint-keyed store of every distinct state discovered. Entries are
// kept in discovery order and never evicted.
class StateArchive {
 public:
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<ArchiveEntry>& entries() const noexcept { return entries_; }
  const ArchiveEntry& at(std::size_t i) const { return entries_.at(i); }

  const ArchiveEntry* find(const Digest& fp) const {
    auto it = index_.find(fp);
    return it == index_.end() ? nullptr : &entries_[it->second];
  }
  std::optional<std::size_t> index_of(const Digest& fp) const {
    auto it = index_.find(fp);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Records one visit to a state reached by `path`. Inserts novel states;
  // for known states bumps visits, keeps the shorter path and the higher score.
  // Returns true when the state was new.
  bool observe(const StateSnapshot& s, const std::vector<std::string>& path,
               std::uint64_t global_step) {
    auto it = index_.find(s.fingerprint);
    if (it == index_.end()) {
      index_.emplace(s.fingerprint, entries_.size());
      entries_.push_back(ArchiveEntry{s.fingerprint, s.observation, s.inventory, s.score, 1, path,
                                      global_step, s.done, 0});
      return true;
    }
    auto& e = entries_[it->second];
    ++e.visits;
    if (path.size() < e.path.size()) e.path = path;
    if (s.score > e.score) e.score = s.score;
    return false;
  }

  void note_death_from(const Digest& fp) {
    if (auto it = index_.find(fp); it != index_.end()) ++entries_[it->second].deaths_from;
  }

 private:
  std::vector<ArchiveEntry> entries_;
  std::unordered_map<Digest, std::size_t> index_;
};

// Folds every state of `traj` (including the initial state `root`) into the
// archive. `step_base` is the global environment-step count before the
// trajectory's first exploration step; it dates first discoveries.
inline void archive_update(StateArchive& archive, const Trajectory& traj, const StateSnapshot& root,
                           std::uint64_t step_base = 0) {
  std::vector<std::string> path;
  archive.observe(root, path, step_base);
  Digest previous = root.fingerprint;
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const Step& s = traj.steps[t];
    path.push_back(s.action);
    const std::uint64_t when = t < traj.prefix_len ? step_base : step_base + (t - traj.prefix_len) + 1;
    archive.observe(StateSnapshot{s.fingerprint_after, s.observation, s.inventory, s.score_after, s.done},
                    path, when);
    if (s.done && s.reward < 0) archive.note_death_from(previous);
    previous = s.fingerprint_after;
  }
}

inline StateArchive archive_updated(StateArchive archive, const Trajectory& traj,
                                    const StateSnapshot& root, std::uint64_t step_base = 0) {
  archive_update(archive, traj, root, step_base);
  return archive;
}

}  // namespace glow
