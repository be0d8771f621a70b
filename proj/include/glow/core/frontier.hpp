#pragma once

#include <optional>
#include <sstream>

#include "glow/core/top_k.hpp"
#include "glow/core/trajectory.hpp"

namespace glow {

// Higher peak first; at equal peak the newer trajectory (higher id) wins.
struct FrontierOrder {
  bool operator()(const Trajectory& a, const Trajectory& b) const noexcept {
    if (a.peak_value != b.peak_value) return a.peak_value > b.peak_value;
    return a.id > b.id;
  }
};

// The k highest-value complete episodes discovered so far.
class Frontier {
 public:
  explicit Frontier(std::size_t capacity) : entries_(capacity) {
    if (capacity == 0) throw DomainError("frontier capacity must be positive");
  }

  bool insert(Trajectory t) { return entries_.push(std::move(t)); }

  std::size_t capacity() const noexcept { return entries_.capacity(); }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<Trajectory>& entries() const noexcept { return entries_.items(); }
  const Trajectory& best() const { return entries_.front(); }

  // Lowest peak currently held, or nullopt while the frontier has room.
  std::optional<Score> cutoff() const {
    if (!entries_.full()) return std::nullopt;
    return entries_.back().peak_value;
  }

  // Identity of the contents, used as the cache key for frontier analysis.
  Digest digest() const {
    if (empty()) return Digest("empty");
    std::ostringstream os;
    for (const auto& t : entries()) os << t.id << ':' << t.peak_value << ';';
    return Digest::of(os.str());
  }

 private:
  TopK<Trajectory, FrontierOrder> entries_;
};

// Value-semantics form of the update: top-k(F ∪ {traj}).
inline Frontier frontier_insert(Frontier frontier, Trajectory traj) {
  frontier.insert(std::move(traj));
  return frontier;
}

// Best peak among frontier trajectories that pass through `fp`. Every
// trajectory starts at the environment's initial state, so `initial`
// matches all of them.
inline std::optional<Score> achieved_state_value(const Digest& fp, const Frontier& frontier,
                                                 const std::optional<Digest>& initial = {}) {
  std::optional<Score> best;
  for (const auto& t : frontier.entries()) {
    bool contains = initial && *initial == fp;
    for (const auto& s : t.steps) {
      if (contains) break;
      contains = s.fingerprint_after == fp;
    }
    if (contains && (!best || t.peak_value > *best)) best = t.peak_value;
  }
  return best;
}

// Lower bound on state selections for a run: floor(B / (s * n)) - 1.
inline std::int64_t min_state_selections(std::int64_t budget, std::int64_t episode_cap,
                                         std::int64_t n) {
  if (budget <= 0 || episode_cap <= 0 || n <= 0)
    throw DomainError("min_state_selections requires positive budget, episode cap and n");
  return budget / (episode_cap * n) - 1;
}

}  // namespace glow
