#include <gtest/gtest.h>

#include "glow/variance/lab.hpp"

using namespace glow;
using namespace glow::variance;

namespace {

VarianceExperiment single_action(double sigma, std::int64_t m, std::uint64_t seed = 1) {
  VarianceExperiment e;
  e.action_sigmas = {sigma};
  e.action_means = {0.0};
  e.samples_per_action = {m};
  e.seed = seed;
  return e;
}

}  // namespace

TEST(SampleVariance, KnownValues) {
  EXPECT_DOUBLE_EQ(sample_variance({1, 2, 3, 4}), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(sample_variance({7}), 0.0);
  EXPECT_DOUBLE_EQ(sample_variance({1e9 + 1, 1e9 + 2, 1e9 + 3}), 1.0);
}

TEST(Intervals, MatchTabulatedQuantiles) {
  // F(10, 10) upper 2.5% point is 3.717; the lower one is its reciprocal.
  auto [lo, hi] = variance_ratio_interval(1.0, 10, 0.95);
  EXPECT_NEAR(hi, 3.717, 1e-3);
  EXPECT_NEAR(lo, 1.0 / 3.717, 1e-3);
  // chi-square(10): 2.5% and 97.5% points 3.247 and 20.483.
  auto [clo, chi] = variance_interval(1.0, 10, 0.95);
  EXPECT_NEAR(clo * 10, 3.247, 1e-3);
  EXPECT_NEAR(chi * 10, 20.483, 1e-3);
}

TEST(MultiSample, SingleReturnIsTheSameEstimator) {
  auto r = simulate_estimators(single_action(1.0, 1));
  ASSERT_EQ(r.actions.size(), 1u);
  EXPECT_DOUBLE_EQ(r.actions[0].ratio, 1.0);
  EXPECT_DOUBLE_EQ(r.actions[0].ci_low, 1.0);
  EXPECT_DOUBLE_EQ(r.actions[0].ci_high, 1.0);
  EXPECT_TRUE(r.all_pass());
}

TEST(MultiSample, FourSamplesQuarterTheVariance) {
  auto r = simulate_estimators(single_action(1.0, 4));
  const auto& a = r.actions[0];
  EXPECT_DOUBLE_EQ(a.bound, 0.25);
  EXPECT_GE(a.ratio, a.ci_low);
  EXPECT_LE(a.ratio, a.ci_high);
  EXPECT_TRUE(a.pass);
  auto [lo, hi] = variance_interval(1.0, 9999, 0.99);
  EXPECT_GE(a.var_single, lo);
  EXPECT_LE(a.var_single, hi);
}

TEST(MultiSample, EightSamplesAtSigmaTwo) {
  auto r = simulate_estimators(single_action(2.0, 8));
  const auto& a = r.actions[0];
  auto [lo, hi] = variance_interval(0.5, 9999, 0.99);
  EXPECT_GE(a.var_mar, lo);
  EXPECT_LE(a.var_mar, hi);
  EXPECT_NEAR(a.var_mar, 0.5, 0.05);
  EXPECT_TRUE(a.pass);
}

TEST(MultiSample, BernoulliModelHasTheSameMoments) {
  auto e = single_action(1.5, 4);
  e.model = ReturnModel::bernoulli;
  e.bernoulli_p = 0.1;
  auto r = simulate_estimators(e);
  const auto& a = r.actions[0];
  auto [lo, hi] = variance_interval(2.25, 9999, 0.99);
  EXPECT_GE(a.var_single, lo);
  EXPECT_LE(a.var_single, hi);
  EXPECT_TRUE(a.pass);
}

TEST(MultiSample, ZeroNoiseIsExact) {
  auto r = simulate_estimators(single_action(0.0, 5));
  EXPECT_DOUBLE_EQ(r.actions[0].var_single, 0.0);
  EXPECT_DOUBLE_EQ(r.actions[0].ratio, 1.0);
  EXPECT_TRUE(r.all_pass());
}

TEST(MultiSample, SeveralActionsAgainstSharedBaseline) {
  VarianceExperiment e;
  e.action_sigmas = {1.0, 0.5, 3.0};
  e.action_means = {1.0, -2.0, 4.0};
  e.samples_per_action = {2, 4, 8};
  EXPECT_DOUBLE_EQ(e.state_value(), 1.0);
  auto r = simulate_estimators(e);
  ASSERT_EQ(r.actions.size(), 3u);
  EXPECT_TRUE(r.all_pass());
  for (const auto& a : r.actions) EXPECT_DOUBLE_EQ(a.bound, 1.0 / static_cast<double>(a.m));
}

TEST(BaselineNoise, InflationIsOnePlusNoiseOverSignal) {
  auto e = single_action(1.0, 1);
  EXPECT_DOUBLE_EQ(simulate_baseline_stability(e, 0.0)[0].inflation, 1.0);
  EXPECT_NEAR(simulate_baseline_stability(e, 1.0)[0].inflation, 2.0, 0.15);
  EXPECT_NEAR(simulate_baseline_stability(e, 2.0)[0].inflation, 5.0, 0.3);
}

TEST(Determinism, SameSeedSameNumbers) {
  auto e = single_action(1.0, 4, 9);
  auto a = simulate_estimators(e), b = simulate_estimators(e);
  EXPECT_EQ(a.actions[0].var_single, b.actions[0].var_single);
  EXPECT_EQ(a.actions[0].var_mar, b.actions[0].var_mar);
  auto c = simulate_estimators(single_action(1.0, 4, 10));
  EXPECT_NE(a.actions[0].var_mar, c.actions[0].var_mar);
}

TEST(Determinism, ThreadCountDoesNotMatter) {
  auto e = single_action(1.0, 8, 4);
  auto one = simulate_estimators(e);
  e.threads = 4;
  auto four = simulate_estimators(e);
  EXPECT_EQ(one.actions[0].var_single, four.actions[0].var_single);
  EXPECT_EQ(one.actions[0].var_mar, four.actions[0].var_mar);
  e.threads = 3;
  EXPECT_EQ(simulate_baseline_stability(e, 1.0)[0].var_advantage,
            [&] { e.threads = 1; return simulate_baseline_stability(e, 1.0)[0].var_advantage; }());
}

TEST(Validation, RejectsBadExperiments) {
  auto e = single_action(1.0, 0);
  EXPECT_THROW(simulate_estimators(e), DomainError);
  e = single_action(-1.0, 2);
  EXPECT_THROW(simulate_estimators(e), DomainError);
  e = single_action(1.0, 2);
  e.trials = 10;
  EXPECT_THROW(simulate_estimators(e), DomainError);
  e = single_action(1.0, 2);
  e.action_means = {};
  EXPECT_THROW(simulate_estimators(e), DomainError);
  EXPECT_THROW(simulate_baseline_stability(single_action(1.0, 2), -1.0), DomainError);
}

TEST(Report, TableAndJson) {
  auto r = simulate_estimators(single_action(1.0, 2));
  auto j = to_json(r);
  EXPECT_EQ(j["actions"][0]["m"], 2);
  EXPECT_EQ(j["all_pass"], r.all_pass());
  EXPECT_NE(render_table(r).find("PASS"), std::string::npos);
}
