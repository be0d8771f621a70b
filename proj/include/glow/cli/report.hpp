#pragma once

// Aggregation of event logs into per-configuration score tables. Everything
// is recomputed from the raw records; nothing is read from a side file.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glow/engine/event_log.hpp"
#include "glow/llm/chat.hpp"

namespace glow {

class SchemaError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

struct RunSummary {
  std::string source;
  std::int64_t seed = 0;
  std::string environment;
  std::string config_key;    // digest of the run parameters without the seed
  std::string config_label;  // human-readable row name
  nlohmann::json config;
  std::int64_t max_score = 0;
  std::int64_t selections = 0;
  std::int64_t trajectories = 0;
  bool finished = false;  // a run_end record was present
};

struct MeanStd {
  double mean = 0;
  double std = 0;  // sample standard deviation; 0 for a single run
  std::size_t n = 0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  m.n = xs.size();
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

inline std::string config_label(const nlohmann::json& cfg) {
  std::ostringstream os;
  const auto& sel = cfg.at("selection_strategy");
  if (sel.is_object())
    os << sel.value("kind", std::string("?")) << "(alpha=" << sel.value("alpha", 0.0) << ")";
  else
    os << sel.get<std::string>();
  os << "+" << cfg.value("reflection_strategy", std::string("?")) << " n=" << cfg.value("n_explorations", 0)
     << " k=" << cfg.value("frontier_k", 0) << " B=" << cfg.value("budget", 0)
     << " s=" << cfg.value("episode_cap", 0);
  return os.str();
}

inline RunSummary summarize_records(const std::vector<nlohmann::json>& records, const std::string& source) {
  RunSummary s;
  s.source = source;
  bool started = false;
  for (const auto& r : records) {
    const auto type = r.value("type", std::string());
    if (type == "run_start") {
      const int version = r.value("schema_version", -1);
      if (version != kLogSchemaVersion)
        throw SchemaError(source + ": event log schema " + std::to_string(version) + ", this build reads " +
                          std::to_string(kLogSchemaVersion));
      started = true;
      s.config = r.at("config");
      s.seed = s.config.value("seed", 0);
      const auto& env = r.value("environment", nlohmann::json::object());
      s.environment = env.value("name", std::string("?"));
      nlohmann::json key = s.config;
      key.erase("seed");
      key["environment"] = s.environment;
      key["backend"] = r.value("backend", std::string());
      s.config_key = sha256_hex(key.dump()).substr(0, 16);
      s.config_label = config_label(s.config);
    } else if (type == "frontier_insert") {
      const auto& t = r.at("trajectory");
      s.max_score = std::max<std::int64_t>(s.max_score, t.at("peak_value").get<std::int64_t>());
      ++s.trajectories;
    } else if (type == "select") {
      ++s.selections;
    } else if (type == "run_end") {
      s.finished = true;
    }
  }
  if (!started) throw SchemaError(source + ": no run_start record");
  return s;
}

inline std::vector<nlohmann::json> read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open log " + path.string());
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw SchemaError(path.string() + ":" + std::to_string(n) + ": not a JSON record");
    out.push_back(std::move(j));
  }
  return out;
}

// Files are taken as given; directories contribute every *.jsonl below them.
inline std::vector<std::filesystem::path> expand_log_paths(const std::vector<std::string>& inputs) {
  if (inputs.empty()) throw UsageError("report needs at least one event log or directory");
  std::vector<std::filesystem::path> out;
  for (const auto& in : inputs) {
    std::filesystem::path p(in);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto& e : std::filesystem::recursive_directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".jsonl") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  if (out.empty()) throw UsageError("no event logs found in the given paths");
  return out;
}

struct ReportCell {
  std::vector<std::int64_t> seeds;
  std::vector<double> scores;
  MeanStd stats;
};

struct ReportRow {
  std::string key;
  std::string label;
  std::map<std::string, ReportCell> cells;  // by environment
};

struct Report {
  std::vector<std::string> environments;
  std::vector<ReportRow> rows;
};

inline Report build_report(const std::vector<RunSummary>& runs) {
  Report rep;
  std::map<std::string, std::size_t> row_of;
  for (const auto& r : runs) {
    if (std::find(rep.environments.begin(), rep.environments.end(), r.environment) == rep.environments.end())
      rep.environments.push_back(r.environment);
    auto [it, fresh] = row_of.emplace(r.config_key, rep.rows.size());
    if (fresh) rep.rows.push_back({r.config_key, r.config_label, {}});
    auto& cell = rep.rows[it->second].cells[r.environment];
    cell.seeds.push_back(r.seed);
    cell.scores.push_back(static_cast<double>(r.max_score));
  }
  for (auto& row : rep.rows)
    for (auto& [env, cell] : row.cells) cell.stats = mean_std(cell.scores);
  return rep;
}

inline std::string format_cell(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f ± %.1f (n=%zu)", m.mean, m.std, m.n);
  return buf;
}

inline std::string render_text(const Report& rep) {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"config"};
  header.insert(header.end(), rep.environments.begin(), rep.environments.end());
  table.push_back(header);
  for (const auto& row : rep.rows) {
    std::vector<std::string> line{row.label + " [" + row.key.substr(0, 8) + "]"};
    for (const auto& env : rep.environments) {
      auto it = row.cells.find(env);
      line.push_back(it == row.cells.end() ? "-" : format_cell(it->second.stats));
    }
    table.push_back(line);
  }
  // Column widths in code points so the ± sign does not skew alignment.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : table)
    for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], width(line[i]));
  std::string out;
  for (const auto& line : table) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      out += line[i];
      if (i + 1 < line.size()) out += std::string(widths[i] - width(line[i]) + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::json to_json(const Report& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : rep.rows) {
    nlohmann::json cells = nlohmann::json::object();
    for (const auto& [env, c] : row.cells)
      cells[env] = {{"seeds", c.seeds}, {"max_scores", c.scores}, {"mean", c.stats.mean},
                    {"std", c.stats.std}, {"n", c.stats.n}};
    rows.push_back({{"config_key", row.key}, {"label", row.label}, {"cells", cells}});
  }
  return {{"environments", rep.environments}, {"rows", rows}};
}

}  // namespace glow
