// glow: command-line front end.
//
//   glow run [--config FILE] [overrides...]     run seeds, write event logs
//   glow report LOG_OR_DIR...                    mean ± std grid per config
//   glow replay LOG [--id N]                     re-execute a logged trajectory
//   glow variance-lab [...]                      multi-sample variance check
//   glow bridge-check --env bridge:CMD           protocol handshake + smoke test
//
// Exit status: 0 success, 1 run-time failure, 2 usage or configuration error.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "glow/cli/config.hpp"
#include "glow/cli/report.hpp"
#include "glow/cli/runner.hpp"
#include "glow/variance/lab.hpp"

namespace {

using namespace glow;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct RunOptions {
  std::string config_path;
  std::string out_dir = "runs";
  std::string env;
  std::string game_path;
  std::vector<std::int64_t> seeds;
  std::int64_t budget = 0, episode_cap = 0, n = 0, k = 0;
  double temperature = -1;
  std::string selection, reflection, align, backend;
  double alpha = -1;
  std::string model, endpoint, api_key_env, cache_dir, prompts_dir;
  bool verify_replay = false, count_replay = false, no_frontier_context = false;
};

ExperimentConfig resolve_config(const RunOptions& o, CLI::App& cmd) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_experiment_config(o.config_path);
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--env")) c.env = o.env;
  if (given("--game-path")) c.game_path = o.game_path;
  if (given("--seeds")) c.seeds = o.seeds;
  if (given("--budget")) c.run.budget = o.budget;
  if (given("--episode-cap")) c.run.episode_cap = o.episode_cap;
  if (given("--n")) c.run.n_explorations = o.n;
  if (given("--k")) c.run.frontier_k = o.k;
  if (given("--temperature")) c.run.temperature = o.temperature;
  if (given("--selection")) c.run.selection.kind = parse_selection_kind(o.selection);
  if (given("--alpha")) c.run.selection.alpha = o.alpha;
  if (given("--reflection")) c.run.reflection = parse_reflection_kind(o.reflection);
  if (given("--align")) c.run.align_mode = o.align == "per_state" ? AlignMode::per_state : AlignMode::index;
  if (given("--backend")) c.backend.kind = o.backend == "http" ? BackendKind::http : BackendKind::scripted;
  if (given("--model")) c.backend.http.model = o.model;
  if (given("--endpoint")) c.backend.http.endpoint = o.endpoint;
  if (given("--api-key-env")) c.backend.http.api_key_env = o.api_key_env;
  if (given("--cache-dir")) c.backend.cache_dir = o.cache_dir;
  if (given("--prompts-dir")) c.prompts_dir = o.prompts_dir;
  if (o.verify_replay) c.run.verify_replay = true;
  if (o.count_replay) c.run.count_replay_toward_total = true;
  if (o.no_frontier_context) c.run.use_frontier_in_context = false;
  c.validate();
  return c;
}

int cmd_run(const RunOptions& o, CLI::App& cmd) {
  const ExperimentConfig cfg = resolve_config(o, cmd);
  auto outcomes = run_experiment(cfg, o.out_dir, &std::cout);
  std::vector<RunSummary> runs;
  for (auto& oc : outcomes) runs.push_back(oc.summary);
  std::vector<double> scores;
  for (const auto& r : runs) scores.push_back(static_cast<double>(r.max_score));
  const auto stats = mean_std(scores);
  std::cout << "logs: " << run_directory(o.out_dir, cfg).string() << "\n";
  std::cout << "max score: " << format_cell(stats) << "\n";
  if (cfg.run.verify_replay)
    for (const auto& oc : outcomes)
      std::cout << "seed " << oc.seed << ": replay verified " << oc.result.verified_frontier << " frontier and "
                << oc.result.verified_archive << " archive entries\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& json_out) {
  std::vector<RunSummary> runs;
  for (const auto& p : expand_log_paths(inputs)) runs.push_back(summarize_records(read_log(p), p.string()));
  const Report rep = build_report(runs);
  std::cout << render_text(rep);
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    out << to_json(rep).dump(2) << '\n';
  }
  return 0;
}

int cmd_replay(const std::string& log_path, std::optional<std::int64_t> id, const std::string& env_override,
               const std::string& game_path) {
  const LoggedRun run = load_logged_run(log_path);
  std::string env_spec = env_override;
  if (env_spec.empty()) env_spec = run.run_start.at("environment").value("name", std::string("miniquest"));
  auto env = make_environment(env_spec, game_path.empty() ? std::nullopt : std::optional<std::string>(game_path));
  const auto transcript = replay_logged(run, id, *env);
  std::cout << transcript.text;
  if (transcript.divergence)
    throw NondeterminismError(*transcript.divergence,
                              "replay diverged at step " + std::to_string(*transcript.divergence));
  std::cout << "final score " << transcript.final_score << "\n";
  return 0;
}

struct LabOptions {
  std::vector<double> sigmas{1.0};
  std::vector<std::int64_t> ms{2, 4, 8};
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  std::string model = "gaussian";
  double p = 0.1;
  double baseline_noise = -1;
  unsigned threads = 1;
  std::string json_out;
};

int cmd_variance_lab(const LabOptions& o) {
  variance::VarianceExperiment e;
  for (double s : o.sigmas)
    for (auto m : o.ms) {
      e.action_sigmas.push_back(s);
      e.samples_per_action.push_back(m);
      e.action_means.push_back(0.0);
    }
  e.trials = o.trials;
  e.seed = o.seed;
  e.threads = o.threads;
  e.bernoulli_p = o.p;
  e.model = o.model == "bernoulli" ? variance::ReturnModel::bernoulli : variance::ReturnModel::gaussian;
  const auto rep = variance::simulate_estimators(e);
  std::cout << variance::render_table(rep);
  nlohmann::json j = variance::to_json(rep);
  if (o.baseline_noise >= 0) {
    nlohmann::json rows = nlohmann::json::array();
    std::cout << "\nbaseline noise " << o.baseline_noise << ":\naction  inflation\n";
    for (const auto& r : variance::simulate_baseline_stability(e, o.baseline_noise)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%6zu  %9.4f\n", r.action, r.inflation);
      std::cout << buf;
      rows.push_back({{"action", r.action}, {"var_q", r.var_q}, {"var_advantage", r.var_advantage},
                      {"inflation", r.inflation}});
    }
    j["baseline_stability"] = {{"noise", o.baseline_noise}, {"actions", rows}};
  }
  if (!o.json_out.empty()) {
    std::ofstream out(o.json_out);
    out << j.dump(2) << '\n';
  }
  return rep.all_pass() ? 0 : kExitFailure;
}

int cmd_bridge_check(const std::string& env_spec, const std::string& game_path, int timeout_ms, int steps) {
  if (!env_spec.starts_with("bridge:") || env_spec.size() <= 7)
    throw ConfigError("env", "bridge-check needs --env bridge:<command>");
  BridgeEnvironment env(env_spec.substr(7), game_path.empty() ? std::nullopt : std::optional<std::string>(game_path),
                        std::chrono::milliseconds(timeout_ms));
  auto meta = env.meta();
  std::cout << "meta: " << safe_dump(meta) << "\n";
  auto cur = env.reset(0);
  std::cout << "reset: score " << cur.score << ", " << cur.valid_actions.size() << " valid actions\n  "
            << render::clip(cur.observation, 160) << "\n";
  for (int i = 0; i < steps && !cur.done; ++i) {
    if (cur.valid_actions.empty()) throw ProtocolError("bridge offered no valid actions in a live state");
    const std::string action = cur.valid_actions.front();
    cur = env.step(action);
    std::cout << "step " << i + 1 << ": " << action << " -> score " << cur.score << (cur.done ? " (done)" : "")
              << "\n  " << render::clip(cur.observation, 160) << "\n";
  }
  const Digest fp = env.fingerprint();
  if (fp != cur.fingerprint)
    throw ProtocolError("fingerprint op returned " + fp.hex() + " but the last step reported " + cur.fingerprint.hex());
  std::cout << "bridge OK (" << env.client().next_request_id() - 1 << " requests)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Go-Explore with language-model world models"};
  app.require_subcommand(1);

  RunOptions ro;
  auto* run = app.add_subcommand("run", "run one engine per seed and write event logs");
  run->add_option("--config", ro.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  run->add_option("--out", ro.out_dir, "output directory")->capture_default_str();
  run->add_option("--env", ro.env, "miniquest or bridge:<command>");
  run->add_option("--game-path", ro.game_path, "game file handed to the bridge on reset");
  run->add_option("--seeds", ro.seeds, "seeds, e.g. --seeds 1,2,3")->delimiter(',');
  run->add_option("--budget", ro.budget, "environment step budget");
  run->add_option("--episode-cap", ro.episode_cap, "steps per exploration episode");
  run->add_option("--n", ro.n, "explorations per selected state");
  run->add_option("--k", ro.k, "frontier size");
  run->add_option("--temperature", ro.temperature, "sampling temperature");
  run->add_option("--selection", ro.selection, "glow | uniform | novelty | ige")
      ->check(CLI::IsMember({"glow", "uniform", "novelty", "ige"}));
  run->add_option("--alpha", ro.alpha, "novelty exponent");
  run->add_option("--reflection", ro.reflection, "mar | reflexion | none")
      ->check(CLI::IsMember({"mar", "reflexion", "none"}));
  run->add_option("--align", ro.align, "index | per_state")->check(CLI::IsMember({"index", "per_state"}));
  run->add_option("--backend", ro.backend, "scripted | http")->check(CLI::IsMember({"scripted", "http"}));
  run->add_option("--model", ro.model, "model name for the http backend");
  run->add_option("--endpoint", ro.endpoint, "chat-completions URL for the http backend");
  run->add_option("--api-key-env", ro.api_key_env, "environment variable holding the bearer credential");
  run->add_option("--cache-dir", ro.cache_dir, "response cache directory");
  run->add_option("--prompts-dir", ro.prompts_dir, "directory overriding the built-in prompt templates");
  run->add_flag("--verify-replay", ro.verify_replay, "replay frontier and sampled archive entries after the run");
  run->add_flag("--count-replay-steps", ro.count_replay, "charge replay steps to the budget");
  run->add_flag("--no-frontier-context", ro.no_frontier_context, "leave the frontier out of acting prompts");

  std::vector<std::string> report_inputs;
  std::string report_json;
  auto* report = app.add_subcommand("report", "aggregate event logs into a score grid");
  report->add_option("logs", report_inputs, "event logs or directories");
  report->add_option("--json", report_json, "also write the grid as JSON");

  std::string replay_log, replay_env, replay_game;
  std::int64_t replay_id = -1;
  auto* replay = app.add_subcommand("replay", "re-execute a logged trajectory");
  replay->add_option("log", replay_log, "event log")->required();
  replay->add_option("--id", replay_id, "trajectory id (default: the run's best)");
  replay->add_option("--env", replay_env, "override the environment recorded in the log");
  replay->add_option("--game-path", replay_game, "game file for bridge environments");

  LabOptions lo;
  auto* lab = app.add_subcommand("variance-lab", "compare single-return and multi-return advantage variance");
  lab->add_option("--sigmas", lo.sigmas, "return standard deviations")->delimiter(',')->capture_default_str();
  lab->add_option("--m", lo.ms, "returns averaged per action")->delimiter(',')->capture_default_str();
  lab->add_option("--trials", lo.trials, "Monte-Carlo trials")->capture_default_str();
  lab->add_option("--seed", lo.seed, "seed")->capture_default_str();
  lab->add_option("--model", lo.model, "gaussian | bernoulli")->check(CLI::IsMember({"gaussian", "bernoulli"}));
  lab->add_option("--p", lo.p, "success probability of the bernoulli model")->capture_default_str();
  lab->add_option("--baseline-noise", lo.baseline_noise, "also report inflation from a noisy baseline");
  lab->add_option("--threads", lo.threads, "worker threads")->capture_default_str();
  lab->add_option("--json", lo.json_out, "write the report as JSON");

  std::string check_env, check_game;
  int check_timeout = 10000, check_steps = 5;
  auto* check = app.add_subcommand("bridge-check", "handshake and short smoke test against a bridge");
  check->add_option("--env", check_env, "bridge:<command>")->required();
  check->add_option("--game-path", check_game, "game file handed to the bridge on reset");
  check->add_option("--timeout-ms", check_timeout, "per-request timeout")->capture_default_str();
  check->add_option("--steps", check_steps, "steps to take after reset")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(ro, *run);
    if (*report) return cmd_report(report_inputs, report_json);
    if (*replay)
      return cmd_replay(replay_log, replay_id >= 0 ? std::optional<std::int64_t>(replay_id) : std::nullopt,
                        replay_env, replay_game);
    if (*lab) return cmd_variance_lab(lo);
    if (*check) return cmd_bridge_check(check_env, check_game, check_timeout, check_steps);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NondeterminismError& e) {
    std::cerr << "nondeterminism at step " << e.step_index() << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const EnvironmentUnavailable& e) {
    std::cerr << "environment unavailable: " << e.what() << "\n";
    return kExitFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
