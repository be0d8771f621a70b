#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace glow {

// 64-bit FNV-1a. Stable across processes and platforms, which is all the
// fingerprints and the scripted oracle need.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Opaque state fingerprint. MiniQuest produces 16 hex chars; bridge-backed
// engines may hand back any hex digest of their world-state hash.
class Digest {
 public:
  Digest() = default;
  explicit Digest(std::string hex) : hex_(std::move(hex)) {}
  static Digest of(std::string_view canonical) { return Digest(to_hex(fnv1a64(canonical))); }

  const std::string& hex() const noexcept { return hex_; }
  bool empty() const noexcept { return hex_.empty(); }

  friend auto operator<=>(const Digest&, const Digest&) = default;

 private:
  std::string hex_;
};

}  // namespace glow

template <>
struct std::hash<glow::Digest> {
  std::size_t operator()(const glow::Digest& d) const noexcept {
    return std::hash<std::string>{}(d.hex());
  }
};
