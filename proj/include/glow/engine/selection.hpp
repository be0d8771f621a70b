#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "glow/core/archive.hpp"
#include "glow/core/errors.hpp"

namespace glow {

// Baseline selectors. Terminal states are never drawn: exploring from them
// would take zero steps.

inline std::vector<std::size_t> selectable(const StateArchive& archive) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < archive.size(); ++i)
    if (!archive.at(i).terminal) out.push_back(i);
  if (out.empty()) throw DomainError("archive has no selectable state");
  return out;
}

template <class Rng>
std::size_t select_uniform(const StateArchive& archive, Rng& rng) {
  auto idx = selectable(archive);
  std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
  return idx[pick(rng)];
}

// P(s) proportional to visits(s)^-alpha.
inline std::vector<double> novelty_weights(const StateArchive& archive, double alpha) {
  std::vector<double> w;
  for (std::size_t i : selectable(archive))
    w.push_back(std::pow(static_cast<double>(std::max<std::uint64_t>(1, archive.at(i).visits)), -alpha));
  return w;
}

template <class Rng>
std::size_t select_novelty(const StateArchive& archive, double alpha, Rng& rng) {
  if (!(alpha >= 0.0)) throw DomainError("novelty alpha must be >= 0");
  auto idx = selectable(archive);
  auto w = novelty_weights(archive, alpha);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  return idx[pick(rng)];
}

}  // namespace glow
