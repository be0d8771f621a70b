#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace glow {

inline constexpr int kLogSchemaVersion = 1;

// Line-delimited JSON record stream. Every record carries a monotone `seq`
// and a `type`; payload fields sit beside them at the top level.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::ostream* sink) : sink_(sink) {}

  const nlohmann::json& emit(std::string_view type, nlohmann::json payload = nlohmann::json::object()) {
    nlohmann::json rec = nlohmann::json::object();
    rec["seq"] = seq_++;
    rec["type"] = std::string(type);
    for (auto& [k, v] : payload.items()) rec[k] = std::move(v);
    if (sink_) *sink_ << rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    records_.push_back(std::move(rec));
    return records_.back();
  }

  const std::vector<nlohmann::json>& records() const noexcept { return records_; }

  std::size_t count(std::string_view type) const {
    std::size_t n = 0;
    for (const auto& r : records_)
      if (r["type"] == type) ++n;
    return n;
  }

  std::vector<const nlohmann::json*> of_type(std::string_view type) const {
    std::vector<const nlohmann::json*> out;
    for (const auto& r : records_)
      if (r["type"] == type) out.push_back(&r);
    return out;
  }

 private:
  std::ostream* sink_ = nullptr;
  std::uint64_t seq_ = 0;
  std::vector<nlohmann::json> records_;
};

}  // namespace glow
