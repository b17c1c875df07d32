#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "conex/model_estimation.hpp"
#include "support.hpp"

namespace conex {
namespace {

const Shape kShape{5, 5, 3};

BonusParams params(double delta_prime, double scale = 1.0) { return {kShape, delta_prime, scale}; }

Trajectory fixed_trajectory() { return {{{0, 1, 2}, {2, 3, 4}, {4, 0, 1}}, 0}; }

TEST(UpdateCounts, SingleTrajectoryTouchesVisitedTuplesOnly) {
  const auto traj = fixed_trajectory();
  const auto counts = update_counts(CountTable(kShape), traj);
  EXPECT_EQ(counts.episodes(), 1u);
  for (std::size_t h = 0; h < 3; ++h)
    for (std::size_t s = 0; s < 5; ++s)
      for (std::size_t a = 0; a < 5; ++a) {
        const auto& st = traj.steps[h];
        const bool visited = st.state == s && st.action == a;
        EXPECT_EQ(counts.visits(h, s, a), visited ? 1u : 0u);
        if (visited) EXPECT_EQ(counts.next_counts(h, s, a)[st.next_state], 1u);
      }
}

TEST(UpdateCounts, ReplayDoublesCounts) {
  auto counts = update_counts(CountTable(kShape), fixed_trajectory());
  counts = update_counts(counts, fixed_trajectory());
  EXPECT_EQ(counts.visits(0, 0, 1), 2u);
  EXPECT_EQ(counts.visits(1, 2, 3), 2u);
  EXPECT_EQ(counts.visits(2, 4, 0), 2u);
  EXPECT_EQ(counts.next_counts(1, 2, 3)[4], 2u);
}

TEST(UpdateCounts, ConservationAndMonotonicity) {
  const auto mdp = generate_random_mdp(kShape, 7);
  const auto pi = StochasticPolicy::uniform(kShape);
  Rng rng(4);
  CountTable counts(kShape);
  for (std::size_t k = 1; k <= 200; ++k) {
    const CountTable before = counts;
    counts.add(rollout(mdp, pi, rng));
    EXPECT_EQ(counts.episodes(), k);
    for (std::size_t h = 0; h < 3; ++h) {
      std::uint64_t per_step = 0;
      for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t a = 0; a < 5; ++a) {
          std::uint64_t next_total = 0;
          for (auto c : counts.next_counts(h, s, a)) next_total += c;
          EXPECT_EQ(next_total, counts.visits(h, s, a));
          EXPECT_GE(counts.visits(h, s, a), before.visits(h, s, a));
          per_step += counts.visits(h, s, a);
        }
      EXPECT_EQ(per_step, k);
    }
  }
}

TEST(UpdateCounts, RejectsMalformedTrajectory) {
  CountTable counts(kShape);
  EXPECT_THROW(counts.add({{{0, 1, 2}}, 0}), std::invalid_argument);
  EXPECT_THROW(counts.add({{{0, 9, 2}, {2, 0, 0}, {0, 0, 0}}, 0}), std::invalid_argument);
}

TEST(EstimateTransitions, UnvisitedRowsAreUniform) {
  const auto model = estimate_transitions(CountTable({3, 2, 2}));
  for (double p : model.transition_row(1, 2, 1)) EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);
}

TEST(EstimateTransitions, FrequencyDefinition) {
  CountTable counts({3, 1, 1});
  const std::vector<std::uint64_t> next{2, 1, 0};
  counts.set_counts(0, 0, 0, next);
  const auto model = estimate_transitions(counts);
  const auto row = model.transition_row(0, 0, 0);
  EXPECT_DOUBLE_EQ(row[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(row[1], 1.0 / 3.0);
  EXPECT_EQ(row[2], 0.0);
  EXPECT_EQ(model.visits(0, 0, 0), 3u);
}

TEST(EstimateTransitions, SingleVisitIsAlreadyAFrequency) {
  CountTable counts({3, 1, 1});
  const std::vector<std::uint64_t> next{0, 1, 0};
  counts.set_counts(0, 0, 0, next);
  const auto model = estimate_transitions(counts);
  EXPECT_EQ(model.transition_row(0, 0, 0)[1], 1.0);
}

TEST(EstimateTransitions, RowsAreDistributionsForRandomCounts) {
  Rng rng(31);
  const Shape sh{4, 3, 2};
  for (int rep = 0; rep < 50; ++rep) {
    CountTable counts(sh);
    for (std::size_t h = 0; h < 2; ++h)
      for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t a = 0; a < 3; ++a) {
          std::vector<std::uint64_t> next(4);
          for (auto& c : next) c = rng.below(3) == 0 ? 0 : rng.below(1000);
          counts.set_counts(h, s, a, next);
        }
    const auto model = estimate_transitions(counts);
    for (std::size_t h = 0; h < 2; ++h)
      for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t a = 0; a < 3; ++a) EXPECT_TRUE(is_probability_vector(model.transition_row(h, s, a)));
  }
}

TEST(Beta, DifferenceIsExtraStateTerm) {
  for (std::uint64_t n : {0ULL, 1ULL, 7ULL, 1000ULL}) {
    const double expected = 4.0 * std::log(8.0 * std::numbers::e * static_cast<double>(n + 1));
    EXPECT_NEAR(beta(n, params(0.05)) - beta_star(n, params(0.05)), expected, 1e-12);
  }
}

TEST(Beta, DegenerateDeltaLeavesOnlyTheCountTerm) {
  // delta' = SAH would be rejected by validation; subtract beta_cnt instead.
  const auto p = params(0.2);
  EXPECT_NEAR(beta_star(0, p) - beta_cnt(p), std::log(8.0 * std::numbers::e), 1e-12);
}

TEST(Beta, MatchesHighPrecisionClosedForm) {
  // S=5, A=5, H=3, delta'=0.01, n=5, evaluated at 50 digits.
  const auto p = params(0.01);
  EXPECT_NEAR(beta(5, p), 33.27866335406385645395362, 1e-12);
  EXPECT_NEAR(beta_star(5, p), 13.79385931043229273769692, 1e-12);
  EXPECT_NEAR(beta_cnt(p), 8.922658299524401808632747, 1e-12);
}

TEST(Beta, ScaleMultipliesEveryTerm) {
  EXPECT_NEAR(beta(9, params(0.1, 0.25)), 0.25 * beta(9, params(0.1)), 1e-12);
  EXPECT_NEAR(beta_star(9, params(0.1, 0.25)), 0.25 * beta_star(9, params(0.1)), 1e-12);
  EXPECT_NEAR(beta_cnt(params(0.1, 0.25)), 0.25 * beta_cnt(params(0.1)), 1e-12);
}

TEST(Beta, MonotonicityOverGrid) {
  const std::vector<double> deltas{0.001, 0.01, 0.1, 0.5};
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const auto p = params(deltas[i]);
    for (std::uint64_t n = 0; n < 500; ++n) {
      EXPECT_LT(beta(n, p), beta(n + 1, p));
      EXPECT_LT(beta_star(n, p), beta_star(n + 1, p));
      if (n >= 1) {
        EXPECT_GT(beta(n, p) / n, beta(n + 1, p) / (n + 1));
        EXPECT_GT(beta_star(n, p) / n, beta_star(n + 1, p) / (n + 1));
      }
      if (i + 1 < deltas.size()) {
        EXPECT_GT(beta(n, p), beta(n, params(deltas[i + 1])));
        EXPECT_GT(beta_star(n, p), beta_star(n, params(deltas[i + 1])));
      }
    }
  }
}

TEST(Beta, RejectsInvalidParameters) {
  EXPECT_THROW(beta(1, params(0.0)), std::invalid_argument);
  EXPECT_THROW(beta(1, params(1.0)), std::invalid_argument);
  EXPECT_THROW(beta_star(1, params(-0.5)), std::invalid_argument);
  EXPECT_THROW(beta_cnt(params(0.1, 0.0)), std::invalid_argument);
}

EmpiricalModel two_state_model(std::uint64_t n0, std::uint64_t n1) {
  CountTable counts({2, 1, 1});
  const std::vector<std::uint64_t> next{n0, n1};
  counts.set_counts(0, 0, 0, next);
  return estimate_transitions(counts);
}

TEST(EmpiricalVariance, ConstantVectorHasNoVariance) {
  const auto model = two_state_model(3, 7);
  const std::vector<double> v{1.7, 1.7};
  EXPECT_EQ(empirical_variance(model, 0, 0, 0, v), 0.0);
}

TEST(EmpiricalVariance, BernoulliCase) {
  const auto model = two_state_model(5, 5);
  const std::vector<double> v{0.0, 3.0};
  EXPECT_DOUBLE_EQ(empirical_variance(model, 0, 0, 0, v), 9.0 / 4.0);
}

TEST(EmpiricalVariance, MatchesTwoPassFormula) {
  Rng rng(12);
  const Shape sh{6, 2, 3};
  for (int rep = 0; rep < 200; ++rep) {
    CountTable counts(sh);
    std::vector<std::uint64_t> next(6);
    for (auto& c : next) c = rng.below(50);
    counts.set_counts(1, 1, 0, next);
    const auto model = estimate_transitions(counts);
    std::vector<double> v(6);
    for (auto& x : v) x = 3.0 * rng.uniform();
    const double var = empirical_variance(model, 1, 1, 0, v);
    EXPECT_NEAR(var, testing::two_pass_variance(model.transition_row(1, 1, 0), v), 1e-12);
    EXPECT_GE(var, 0.0);
    EXPECT_LE(var, 9.0);
  }
}

TEST(KlDivergence, BasicValues) {
  const std::vector<double> p{0.5, 0.5}, q{0.25, 0.75}, r{1.0, 0.0};
  EXPECT_EQ(kl_divergence(p, p), 0.0);
  EXPECT_NEAR(kl_divergence(p, q), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
  EXPECT_TRUE(std::isinf(kl_divergence(p, r)));
  EXPECT_NEAR(kl_divergence(r, p), std::log(2.0), 1e-15);
}

TEST(GoodEventDiagnostics, ExactEstimatePasses) {
  // Counts proportional to a dyadic kernel make P_hat equal P exactly.
  const Shape sh{2, 1, 1};
  const TabularMdp mdp(sh, {0.25, 0.75, 0.5, 0.5}, RewardTable(sh, {0.0, 0.0}), 0);
  CountTable counts(sh);
  const std::vector<std::uint64_t> a{1, 3}, b{2, 2};
  counts.set_counts(0, 0, 0, a);
  counts.set_counts(0, 1, 0, b);
  const auto report = good_event_diagnostics(mdp, estimate_transitions(counts), {sh, 0.1, 1.0});
  EXPECT_EQ(report.checked, 2u);
  EXPECT_EQ(report.skipped_unvisited, 0u);
  EXPECT_TRUE(report.holds());
  EXPECT_EQ(report.violation_fraction(), 0.0);
}

TEST(GoodEventDiagnostics, UnvisitedTuplesAreSkipped) {
  const auto mdp = generate_random_mdp({3, 2, 2}, 1);
  const auto report = good_event_diagnostics(mdp, estimate_transitions(CountTable(mdp.shape())), {mdp.shape(), 0.1, 1.0});
  EXPECT_EQ(report.checked, 0u);
  EXPECT_EQ(report.skipped_unvisited, 12u);
  EXPECT_TRUE(report.holds());
}

TEST(GoodEventDiagnostics, FlagsImpossibleEstimates) {
  // P puts no mass on state 1 but the data saw it: KL is infinite.
  const Shape sh{2, 1, 1};
  const TabularMdp mdp(sh, {1.0, 0.0, 1.0, 0.0}, RewardTable(sh, {0.0, 0.0}), 0);
  CountTable counts(sh);
  const std::vector<std::uint64_t> next{1, 1};
  counts.set_counts(0, 0, 0, next);
  const auto report = good_event_diagnostics(mdp, estimate_transitions(counts), {sh, 0.1, 1.0});
  EXPECT_EQ(report.violations, 1u);
  EXPECT_FALSE(report.holds());
}

}  // namespace
}  // namespace conex
