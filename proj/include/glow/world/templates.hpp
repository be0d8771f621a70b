#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "glow/core/errors.hpp"
#include "glow/generated/prompt_act_first.hpp"
#include "glow/generated/prompt_act_step.hpp"
#include "glow/generated/prompt_act_system.hpp"
#include "glow/generated/prompt_align_score.hpp"
#include "glow/generated/prompt_analyze_frontier.hpp"
#include "glow/generated/prompt_ige_select.hpp"
#include "glow/generated/prompt_mar.hpp"
#include "glow/generated/prompt_reask.hpp"
#include "glow/generated/prompt_reflexion.hpp"
#include "glow/generated/prompt_select_state.hpp"

namespace glow {

// The prompt set. Defaults are the files under prompts/ compiled in; a
// directory with same-named files overrides them at run time.
struct PromptTemplates {
  std::string analyze_frontier{kPrompt_analyze_frontier};
  std::string select_state{kPrompt_select_state};
  std::string mar{kPrompt_mar};
  std::string act_system{kPrompt_act_system};
  std::string act_first{kPrompt_act_first};
  std::string act_step{kPrompt_act_step};
  std::string ige_select{kPrompt_ige_select};
  std::string reflexion{kPrompt_reflexion};
  std::string align_score{kPrompt_align_score};
  std::string reask{kPrompt_reask};

  static PromptTemplates from_directory(const std::filesystem::path& dir) {
    PromptTemplates t;
    auto load = [&](const char* name, std::string& slot) {
      auto p = dir / (std::string(name) + ".txt");
      if (!std::filesystem::exists(p)) return;
      std::ifstream in(p, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      slot = ss.str();
    };
    if (!std::filesystem::is_directory(dir))
      throw ConfigError("prompts_dir", "not a directory: " + dir.string());
    load("analyze_frontier", t.analyze_frontier);
    load("select_state", t.select_state);
    load("mar", t.mar);
    load("act_system", t.act_system);
    load("act_first", t.act_first);
    load("act_step", t.act_step);
    load("ige_select", t.ige_select);
    load("reflexion", t.reflexion);
    load("align_score", t.align_score);
    load("reask", t.reask);
    return t;
  }
};

// Substitutes {name} placeholders. Unknown placeholders and literal braces
// are left alone. A placeholder alone on its line whose value is empty
// removes the line together with one following blank line.
inline std::string fill_template(std::string_view tpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tpl.size() * 2);
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    std::size_t eol = tpl.find('\n', pos);
    std::string_view line = tpl.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    std::size_t next = eol == std::string_view::npos ? tpl.size() : eol + 1;
    if (line.size() > 2 && line.front() == '{' && line.back() == '}') {
      auto it = vars.find(std::string(line.substr(1, line.size() - 2)));
      if (it != vars.end() && it->second.empty()) {
        if (next < tpl.size() && tpl[next] == '\n') ++next;
        pos = next;
        continue;
      }
    }
    for (std::size_t i = 0; i < line.size();) {
      if (line[i] == '{') {
        auto close = line.find('}', i + 1);
        if (close != std::string_view::npos) {
          auto it = vars.find(std::string(line.substr(i + 1, close - i - 1)));
          if (it != vars.end()) {
            out += it->second;
            i = close + 1;
            continue;
          }
        }
      }
      out.push_back(line[i]);
      ++i;
    }
    if (eol != std::string_view::npos) out.push_back('\n');
    pos = next;
  }
  return out;
}

}  // namespace glow
