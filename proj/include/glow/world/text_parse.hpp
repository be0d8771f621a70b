#pragma once

// Best-effort parsers for free-form model analyses: key states out of a
// frontier analysis and STATE/ADVANTAGES blocks out of a reflection. Both
// must accept arbitrary bytes without throwing.

#include <algorithm>
#include <cctype>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace glow {

struct KeyState {
  std::string descriptor;
  std::optional<double> achieved_value;
  std::optional<double> potential_value;
  std::string section;  // header the bullet appeared under

  // Potential explicitly tagged high, or numerically above the achieved value.
  bool potential_high() const {
    if (potential_value && achieved_value) return *potential_value > *achieved_value;
    return tagged_high;
  }
  bool tagged_high = false;
};

struct Advantage {
  std::string action;
  std::string effect;
  std::optional<std::string> score_note;
};

struct LocalEntry {
  std::string state_descriptor;
  std::vector<Advantage> advantages;
};

namespace text {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) nl = s.size();
    std::string_view line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    start = nl + 1;
  }
  return out;
}

// Removes markdown emphasis and heading markers around a line.
inline std::string strip_markup(std::string_view raw) {
  std::string s = trim(raw);
  auto strip_edges = [&](std::string_view chars) {
    std::size_t b = 0, e = s.size();
    while (b < e && chars.find(s[b]) != std::string_view::npos) ++b;
    while (e > b && chars.find(s[e - 1]) != std::string_view::npos) --e;
    s = trim(std::string_view(s).substr(b, e - b));
  };
  strip_edges("#*_`");
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '*' && i + 1 < s.size() && s[i + 1] == '*') {
      ++i;
      continue;
    }
    out.push_back(s[i]);
  }
  return trim(out);
}

inline bool is_separator(std::string_view line) {
  std::string t = trim(line);
  if (t.size() < 3) return false;
  return std::all_of(t.begin(), t.end(), [](char c) { return c == '=' || c == '-' || c == '_'; });
}

inline std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Strips a leading bullet marker ("-", "*", "+", "•", "1)", ...). Returns
// nullopt when the line is not a bullet.
inline std::optional<std::string> bullet_body(std::string_view raw) {
  std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  static constexpr std::string_view kDot = "\xe2\x80\xa2";  // U+2022
  if (s.starts_with(kDot)) return trim(std::string_view(s).substr(kDot.size()));
  if ((s[0] == '-' || s[0] == '*' || s[0] == '+') && s.size() > 1 && s[1] == ' ')
    return trim(std::string_view(s).substr(2));
  return std::nullopt;
}

// "3. BOTTLENECKS & CHALLENGES" style numbered section header.
inline std::optional<std::string> numbered_header(std::string_view raw) {
  std::string s = strip_markup(raw);
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 0 || i >= s.size() || (s[i] != '.' && s[i] != ')')) return std::nullopt;
  std::string rest = trim(std::string_view(s).substr(i + 1));
  if (rest.empty()) return std::nullopt;
  int letters = 0, caps = 0;
  for (char c : rest) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      ++letters;
      if (std::isupper(static_cast<unsigned char>(c))) ++caps;
    }
  }
  if (letters < 3 || caps * 10 < letters * 8) return std::nullopt;
  if (!rest.empty() && rest.back() == ':') rest.pop_back();
  return trim(rest);
}

inline std::optional<double> tagged_number(const std::string& s, const std::regex& re) {
  std::smatch m;
  if (!std::regex_search(s, m, re)) return std::nullopt;
  try {
    return std::stod(m[1].str());
  } catch (...) {
    return std::nullopt;
  }
}

inline const std::regex& achieved_tag() {
  static const std::regex re(R"(achieved[^0-9+\-\n]{0,12}([+\-]?[0-9]+(?:\.[0-9]+)?))", std::regex::icase);
  return re;
}

inline const std::regex& potential_tag() {
  static const std::regex re(R"(potential[^0-9+\-\n]{0,12}([+\-]?[0-9]+(?:\.[0-9]+)?))", std::regex::icase);
  return re;
}

inline bool contains_icase(std::string_view hay, std::string_view needle) {
  if (needle.empty()) return true;
  auto it = std::search(hay.begin(), hay.end(), needle.begin(), needle.end(), [](char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
  });
  return it != hay.end();
}

}  // namespace text

// Pulls key states from a frontier analysis: every bullet under a
// BOTTLENECKS or NEXT INVESTIGATION GOALS header. Numeric "achieved" and
// "potential" tags are picked up when present.
inline std::vector<KeyState> parse_key_states(std::string_view analysis) {
  std::vector<KeyState> out;
  std::string section;
  bool active = false;
  for (const auto& line : text::lines(analysis)) {
    if (auto header = text::numbered_header(line)) {
      section = text::upper(*header);
      active = section.find("BOTTLENECK") != std::string::npos ||
               section.find("NEXT INVESTIGATION") != std::string::npos ||
               section.find("GOAL") != std::string::npos;
      continue;
    }
    if (!active) continue;
    auto body = text::bullet_body(line);
    if (!body) continue;
    std::string desc = text::strip_markup(*body);
    if (desc.empty()) continue;
    KeyState ks;
    ks.descriptor = desc;
    ks.section = section;
    ks.achieved_value = text::tagged_number(desc, text::achieved_tag());
    ks.potential_value = text::tagged_number(desc, text::potential_tag());
    std::smatch m;
    static const std::regex high_re(R"(potential[^,;)\n]{0,16}\bhigh\b|\(high\)|\bhigh potential\b)",
                                    std::regex::icase);
    ks.tagged_high = std::regex_search(desc, m, high_re);
    out.push_back(std::move(ks));
  }
  return out;
}

namespace text {

inline Advantage parse_advantage(const std::string& body) {
  Advantage adv;
  std::string rest = body;
  static const std::vector<std::string> kArrows{"\xe2\x86\x92", "->", "=>"};
  std::size_t arrow = std::string::npos, arrow_len = 0;
  for (const auto& a : kArrows) {
    auto p = rest.find(a);
    if (p != std::string::npos && p < arrow) {
      arrow = p;
      arrow_len = a.size();
    }
  }
  std::string lhs = arrow == std::string::npos ? rest : rest.substr(0, arrow);
  std::string rhs = arrow == std::string::npos ? "" : rest.substr(arrow + arrow_len);
  lhs = trim(lhs);
  // Prefer the quoted command when the left side is '"cmd" after x'.
  if (auto q1 = lhs.find('"'); q1 != std::string::npos && q1 == 0) {
    auto q2 = lhs.find('"', q1 + 1);
    if (q2 != std::string::npos) lhs = lhs.substr(q1 + 1, q2 - q1 - 1);
  }
  adv.action = trim(lhs);
  rhs = trim(rhs);
  if (!rhs.empty() && rhs.back() == ')') {
    auto open = rhs.rfind('(');
    if (open != std::string::npos) {
      std::string note = rhs.substr(open + 1, rhs.size() - open - 2);
      bool scoreish = contains_icase(note, "score") || contains_icase(note, "point") ||
                      note.find_first_of("+-") != std::string::npos;
      if (scoreish) {
        adv.score_note = trim(note);
        rhs = trim(rhs.substr(0, open));
      }
    }
  }
  adv.effect = rhs;
  return adv;
}

}  // namespace text

// Parses STATE / ADVANTAGES blocks. A separator line or an unrelated header
// closes the current entry so trailing summaries do not leak into it.
// At most `max_entries` entries are returned.
inline std::vector<LocalEntry> parse_local_entries(std::string_view reflection,
                                                   std::size_t max_entries = 8) {
  std::vector<LocalEntry> out;
  bool open = false;
  for (const auto& raw : text::lines(reflection)) {
    std::string line = text::strip_markup(raw);
    if (auto b = text::bullet_body(raw); b && text::upper(text::strip_markup(*b)).starts_with("STATE:"))
      line = text::strip_markup(*b);
    if (text::upper(line).starts_with("STATE:")) {
      if (out.size() >= max_entries) break;
      std::string desc = text::trim(std::string_view(line).substr(6));
      if (desc.size() >= 2 && desc.front() == '[' && desc.back() == ']')
        desc = desc.substr(1, desc.size() - 2);
      out.push_back(LocalEntry{desc, {}});
      open = true;
      continue;
    }
    if (!open) continue;
    if (text::is_separator(raw)) {
      open = false;
      continue;
    }
    auto body = text::bullet_body(raw);
    if (!body) continue;
    std::string b = text::strip_markup(*body);
    if (text::upper(b).starts_with("ADVANTAGES")) continue;
    if (b.empty()) continue;
    out.back().advantages.push_back(text::parse_advantage(b));
  }
  return out;
}

}  // namespace glow
