#pragma once

// Monte-Carlo check that averaging m returns per action shrinks the variance
// of an advantage estimate by 1/m against using a single return.
//
// For each action a and trial t we draw m_a returns R_1..R_m around Q(a).
// The single-path estimate is R_1 - V, the multi-path one is mean(R) - V,
// with the baseline V held fixed. Every trial has its own generator derived
// from (seed, action, trial), and the per-trial values are reduced in trial
// order, so the result does not depend on how trials are scheduled.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <json.hpp>

#include "glow/core/errors.hpp"

namespace glow::variance {

enum class ReturnModel { gaussian, bernoulli };

struct VarianceExperiment {
  std::vector<double> action_sigmas;
  std::vector<double> action_means;
  std::vector<std::int64_t> samples_per_action;
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  ReturnModel model = ReturnModel::gaussian;
  double bernoulli_p = 0.1;  // success probability of the sparse model
  double confidence = 0.99;
  unsigned threads = 1;

  void validate() const {
    const auto n = action_sigmas.size();
    if (n == 0) throw DomainError("at least one action is required");
    if (action_means.size() != n || samples_per_action.size() != n)
      throw DomainError("action_sigmas, action_means and samples_per_action differ in length");
    for (double s : action_sigmas)
      if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("sigma must be finite and >= 0");
    for (double q : action_means)
      if (!std::isfinite(q)) throw DomainError("action mean must be finite");
    for (auto m : samples_per_action)
      if (m < 1) throw DomainError("samples per action must be >= 1");
    if (trials < 100) throw DomainError("trials must be >= 100");
    if (!(bernoulli_p > 0.0 && bernoulli_p < 1.0)) throw DomainError("bernoulli_p must lie in (0, 1)");
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0, 1)");
  }

  // V(s*) under a uniform policy over the listed actions.
  double state_value() const {
    double s = 0;
    for (double q : action_means) s += q;
    return s / static_cast<double>(action_means.size());
  }
};

struct ActionResult {
  std::size_t action = 0;
  double sigma = 0;
  std::int64_t m = 1;
  double var_single = 0;
  double var_mar = 0;
  double ratio = 1;
  double bound = 1;  // 1/m
  double ci_low = 1;
  double ci_high = 1;
  bool pass = true;
};

struct VarianceReport {
  std::vector<ActionResult> actions;
  bool all_pass() const {
    return std::all_of(actions.begin(), actions.end(), [](const ActionResult& a) { return a.pass; });
  }
};

inline double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  long double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<long double>(xs.size());
  long double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return static_cast<double>(ss / static_cast<long double>(xs.size() - 1));
}

// Two-sided interval for s1²/s2² when both are variance estimates with `dof`
// degrees of freedom and the true ratio is `expected`: each scaled variance
// is chi-square(dof)/dof, so their quotient follows F(dof, dof).
inline std::pair<double, double> variance_ratio_interval(double expected, std::int64_t dof, double confidence) {
  boost::math::fisher_f f(static_cast<double>(dof), static_cast<double>(dof));
  const double tail = (1.0 - confidence) / 2.0;
  return {expected * boost::math::quantile(f, tail), expected * boost::math::quantile(f, 1.0 - tail)};
}

// Interval for one sample variance with `dof` degrees of freedom around a
// known true variance.
inline std::pair<double, double> variance_interval(double true_variance, std::int64_t dof, double confidence) {
  boost::math::chi_squared c(static_cast<double>(dof));
  const double tail = (1.0 - confidence) / 2.0;
  const double d = static_cast<double>(dof);
  return {true_variance * boost::math::quantile(c, tail) / d,
          true_variance * boost::math::quantile(c, 1.0 - tail) / d};
}

namespace detail {

inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t action, std::int64_t trial, std::uint64_t stream) {
  return mix(mix(mix(seed) ^ action) ^ static_cast<std::uint64_t>(trial)) ^ mix(stream);
}

class ReturnSampler {
 public:
  ReturnSampler(const VarianceExperiment& e, std::size_t a) : q_(e.action_means[a]), sigma_(e.action_sigmas[a]),
        model_(e.model), p_(e.bernoulli_p) {}

  // Mean q, standard deviation sigma under either model.
  template <class Rng>
  double operator()(Rng& rng) const {
    if (model_ == ReturnModel::gaussian) return q_ + sigma_ * std::normal_distribution<double>(0.0, 1.0)(rng);
    const double x = std::bernoulli_distribution(p_)(rng) ? 1.0 : 0.0;
    return q_ + sigma_ * (x - p_) / std::sqrt(p_ * (1.0 - p_));
  }

 private:
  double q_, sigma_;
  ReturnModel model_;
  double p_;
};

// Runs fn(trial) for every trial, split over `threads` workers.
template <class Fn>
void for_each_trial(std::int64_t trials, unsigned threads, Fn&& fn) {
  threads = std::max(1u, threads);
  if (threads == 1) {
    for (std::int64_t t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::int64_t t = w; t < trials; t += threads) fn(t);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

struct EstimatorSamples {
  std::vector<double> single;  // R_1 - V per trial
  std::vector<double> mar;     // mean(R) - V per trial
};

inline EstimatorSamples draw_estimates(const VarianceExperiment& e, std::size_t a, double baseline) {
  EstimatorSamples s;
  s.single.resize(static_cast<std::size_t>(e.trials));
  s.mar.resize(static_cast<std::size_t>(e.trials));
  const detail::ReturnSampler sample(e, a);
  const auto m = e.samples_per_action[a];
  detail::for_each_trial(e.trials, e.threads, [&](std::int64_t t) {
    std::mt19937_64 rng(detail::trial_seed(e.seed, a, t, 0));
    double first = sample(rng), sum = first;
    for (std::int64_t j = 1; j < m; ++j) sum += sample(rng);
    s.single[static_cast<std::size_t>(t)] = first - baseline;
    s.mar[static_cast<std::size_t>(t)] = sum / static_cast<double>(m) - baseline;
  });
  return s;
}

inline VarianceReport simulate_estimators(const VarianceExperiment& e) {
  e.validate();
  VarianceReport report;
  const double v = e.state_value();
  for (std::size_t a = 0; a < e.action_sigmas.size(); ++a) {
    ActionResult r;
    r.action = a;
    r.sigma = e.action_sigmas[a];
    r.m = e.samples_per_action[a];
    r.bound = 1.0 / static_cast<double>(r.m);
    auto s = draw_estimates(e, a, v);
    r.var_single = sample_variance(s.single);
    r.var_mar = sample_variance(s.mar);
    if (r.sigma == 0.0 || r.var_single == 0.0) {
      // Both estimators are constant.
      r.ratio = 1.0;
      r.ci_low = r.ci_high = r.bound = 1.0;
      r.pass = true;
    } else {
      r.ratio = r.var_mar / r.var_single;
      if (r.m == 1) {
        // The two estimators are the same numbers.
        r.ci_low = r.ci_high = 1.0;
      } else {
        std::tie(r.ci_low, r.ci_high) = variance_ratio_interval(r.bound, e.trials - 1, e.confidence);
      }
      r.pass = r.ratio >= r.ci_low && r.ratio <= r.ci_high;
    }
    report.actions.push_back(r);
  }
  return report;
}

struct StabilityResult {
  std::size_t action = 0;
  double var_q = 0;          // Var[mean(R)]
  double var_advantage = 0;  // Var[mean(R) - V_hat] with a noisy V_hat
  double inflation = 1;      // var_advantage / var_q
};

// Same draws as simulate_estimators, but the baseline is resampled every
// trial from N(V, baseline_sigma²) independently of the returns.
inline std::vector<StabilityResult> simulate_baseline_stability(const VarianceExperiment& e, double baseline_sigma) {
  e.validate();
  if (!(baseline_sigma >= 0.0) || !std::isfinite(baseline_sigma))
    throw DomainError("baseline noise must be finite and >= 0");
  const double v = e.state_value();
  std::vector<StabilityResult> out;
  for (std::size_t a = 0; a < e.action_sigmas.size(); ++a) {
    auto s = draw_estimates(e, a, 0.0);
    std::vector<double> adv(s.mar.size());
    detail::for_each_trial(e.trials, e.threads, [&](std::int64_t t) {
      std::mt19937_64 rng(detail::trial_seed(e.seed, a, t, 1));
      const double noise = baseline_sigma == 0.0 ? 0.0 : baseline_sigma * std::normal_distribution<double>(0.0, 1.0)(rng);
      adv[static_cast<std::size_t>(t)] = s.mar[static_cast<std::size_t>(t)] - (v + noise);
    });
    StabilityResult r;
    r.action = a;
    r.var_q = sample_variance(s.mar);
    r.var_advantage = sample_variance(adv);
    r.inflation = r.var_q == 0.0 ? 1.0 : r.var_advantage / r.var_q;
    out.push_back(r);
  }
  return out;
}

inline nlohmann::json to_json(const VarianceReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& a : r.actions)
    rows.push_back({{"action", a.action}, {"sigma", a.sigma}, {"m", a.m}, {"var_single", a.var_single},
                    {"var_mar", a.var_mar}, {"ratio", a.ratio}, {"bound", a.bound},
                    {"ci_low", a.ci_low}, {"ci_high", a.ci_high}, {"pass", a.pass}});
  return {{"actions", rows}, {"all_pass", r.all_pass()}};
}

inline std::string render_table(const VarianceReport& r) {
  std::string out = "action  sigma   m   var_single    var_mar      ratio     bound     ci_low    ci_high   result\n";
  char buf[256];
  for (const auto& a : r.actions) {
    std::snprintf(buf, sizeof buf, "%6zu %6.3f %3lld %11.6f %11.6f %9.5f %9.5f %9.5f %9.5f   %s\n", a.action,
                  a.sigma, static_cast<long long>(a.m), a.var_single, a.var_mar, a.ratio, a.bound, a.ci_low,
                  a.ci_high, a.pass ? "PASS" : "FAIL");
    out += buf;
  }
  return out;
}

}  // namespace glow::variance
