#pragma once

// Glue between an ExperimentConfig and the engine: builds environments and
// backends, runs seeds, writes per-seed event logs, and re-executes logged
// trajectories.

#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "glow/cli/config.hpp"
#include "glow/cli/report.hpp"
#include "glow/engine/engine.hpp"
#include "glow/env/bridge.hpp"
#include "glow/env/miniquest.hpp"
#include "glow/llm/http_backend.hpp"
#include "glow/llm/scripted_oracle.hpp"

namespace glow {

// "miniquest" or "bridge:<command>".
inline std::unique_ptr<Environment> make_environment(const std::string& spec,
                                                     const std::optional<std::string>& game_path = std::nullopt) {
  if (spec == "miniquest") return std::make_unique<MiniQuest>();
  if (spec.starts_with("bridge:") && spec.size() > 7)
    return std::make_unique<BridgeEnvironment>(spec.substr(7), game_path);
  throw ConfigError("env", "expected 'miniquest' or 'bridge:<command>', got '" + spec + "'");
}

inline std::shared_ptr<ChatBackend> make_backend(const BackendConfig& cfg, std::int64_t seed) {
  if (cfg.kind == BackendKind::scripted) return std::make_shared<ScriptedOracle>(static_cast<std::uint64_t>(seed));
  auto http = std::make_shared<HttpBackend>(cfg.http);
  auto retrying = std::make_shared<RetryingBackend>(http, cfg.max_retries);
  return std::make_shared<CachingBackend>(retrying, cfg.cache_dir);
}

inline std::filesystem::path run_directory(const std::filesystem::path& out, const ExperimentConfig& cfg) {
  return out / config_digest(cfg);
}

struct SeedOutcome {
  std::int64_t seed = 0;
  std::filesystem::path log_path;
  RunSummary summary;
  RunResult result;
};

// Runs every seed in order, one event log per seed under
// <out>/<config digest>/seed_<n>.jsonl, plus config.json and summary.json.
inline std::vector<SeedOutcome> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out,
                                               std::ostream* progress = nullptr) {
  cfg.validate();
  const auto dir = run_directory(out, cfg);
  std::filesystem::create_directories(dir);
  {
    std::ofstream c(dir / "config.json");
    c << canonical_config(cfg) << '\n';
  }
  const PromptTemplates prompts =
      cfg.prompts_dir.empty() ? PromptTemplates{} : PromptTemplates::from_directory(cfg.prompts_dir);

  std::vector<SeedOutcome> outcomes;
  for (auto seed : cfg.seeds) {
    RunConfig rc = cfg.run;
    rc.seed = seed;
    auto env = make_environment(cfg.env, cfg.game_path);
    auto backend = make_backend(cfg.backend, seed);
    SeedOutcome o;
    o.seed = seed;
    o.log_path = dir / ("seed_" + std::to_string(seed) + ".jsonl");
    std::ofstream sink(o.log_path);
    if (!sink) throw Error("cannot write " + o.log_path.string());
    EventLog log(&sink);
    o.result = run(rc, *env, *backend, log, prompts);
    o.summary = summarize_records(log.records(), o.log_path.string());
    if (progress)
      *progress << "seed " << seed << ": max score " << o.result.max_score << ", " << o.result.selections
                << " selections, " << o.result.phases << " phases\n";
    outcomes.push_back(std::move(o));
  }

  std::vector<double> scores;
  nlohmann::json per_seed = nlohmann::json::array();
  for (const auto& o : outcomes) {
    scores.push_back(static_cast<double>(o.summary.max_score));
    per_seed.push_back({{"seed", o.seed}, {"max_score", o.summary.max_score}, {"log", o.log_path.filename().string()}});
  }
  const auto stats = mean_std(scores);
  std::ofstream s(dir / "summary.json");
  s << nlohmann::json{{"config_digest", config_digest(cfg)}, {"runs", per_seed}, {"mean", stats.mean},
                      {"std", stats.std}}
           .dump(2)
    << '\n';
  return outcomes;
}

struct LoggedRun {
  nlohmann::json run_start;
  std::vector<Trajectory> trajectories;
  std::optional<std::int64_t> best_id;
};

inline LoggedRun load_logged_run(const std::filesystem::path& path) {
  LoggedRun out;
  bool started = false;
  for (const auto& r : read_log(path)) {
    const auto type = r.value("type", std::string());
    if (type == "run_start") {
      if (r.value("schema_version", -1) != kLogSchemaVersion)
        throw SchemaError(path.string() + ": unsupported event log schema");
      out.run_start = r;
      started = true;
    } else if (type == "frontier_insert") {
      out.trajectories.push_back(r.at("trajectory").get<Trajectory>());
    } else if (type == "run_end" && r.contains("best_trajectory") && r["best_trajectory"].is_number_integer()) {
      out.best_id = r["best_trajectory"].get<std::int64_t>();
    }
  }
  if (!started) throw SchemaError(path.string() + ": no run_start record");
  return out;
}

struct ReplayTranscript {
  std::string text;
  std::optional<std::size_t> divergence;
  Score final_score = 0;
};

// Re-executes trajectory `id` (or the run's best when absent) and renders
// an action/observation transcript. Divergence is reported, not thrown.
inline ReplayTranscript replay_logged(const LoggedRun& run, std::optional<std::int64_t> id, Environment& env) {
  if (!id) id = run.best_id;
  if (!id) throw NotFoundError("the log names no best trajectory; pass an id");
  auto it = std::find_if(run.trajectories.begin(), run.trajectories.end(),
                         [&](const Trajectory& t) { return static_cast<std::int64_t>(t.id) == *id; });
  if (it == run.trajectories.end()) throw NotFoundError("no trajectory with id " + std::to_string(*id) + " in the log");
  const Trajectory& t = *it;

  ReplayTranscript out;
  std::ostringstream os;
  EnvStepResult cur = env.reset(t.seed);
  os << "trajectory " << t.id << " (peak " << t.peak_value << ", " << t.steps.size() << " steps)\n";
  os << "[start] " << cur.observation << "\n";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const Step& rec = t.steps[i];
    if (cur.done) {
      out.divergence = i;
      os << "!! episode ended before step " << i << "\n";
      break;
    }
    cur = env.step(rec.action);
    os << "> " << rec.action << "\n" << cur.observation << "  [score " << cur.score;
    if (cur.reward != 0) os << ", reward " << (cur.reward > 0 ? "+" : "") << cur.reward;
    os << "]\n";
    if (cur.fingerprint != rec.fingerprint_after || cur.reward != rec.reward || cur.done != rec.done) {
      out.divergence = i;
      os << "!! divergence at step " << i << ": recorded fingerprint " << rec.fingerprint_after.hex()
         << ", replayed " << cur.fingerprint.hex() << "\n";
      break;
    }
  }
  out.final_score = cur.score;
  out.text = os.str();
  return out;
}

}  // namespace glow
