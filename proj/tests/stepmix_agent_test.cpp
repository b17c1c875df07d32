#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "conex/stepmix_agent.hpp"
#include "support.hpp"

namespace conex {
namespace {

constexpr double kScale = 1e-4;

std::vector<StochasticPolicy> some_candidates(std::size_t horizon) {
  const Shape sh{2, 2, horizon};
  Rng rng(1);
  return build_candidates(testing::random_policy(sh, rng), testing::random_policy(sh, rng));
}

AgentConfig config_for(const TabularMdp& mdp, double gamma, double eta = 10.0) {
  AgentConfig cfg;
  cfg.gamma = gamma;
  cfg.delta = 0.1;
  cfg.bonus_scale = kScale;
  cfg.baseline = boltzmann_baseline(mdp, eta);
  return cfg;
}

TEST(StepmixDeltaPrime, SplitsConfidenceOverSteps) {
  EXPECT_DOUBLE_EQ(stepmix_delta_prime(0.1, 3), 0.1 / 12.0);
}

TEST(BuildCandidates, EndpointsAreOptimisticAndBaseline) {
  const Shape sh{3, 2, 3};
  Rng rng(2);
  const auto opt = testing::random_policy(sh, rng);
  const auto base = testing::random_policy(sh, rng);
  const auto cands = build_candidates(opt, base);
  ASSERT_EQ(cands.size(), 4u);
  EXPECT_EQ(cands.front(), opt);
  EXPECT_EQ(cands.back(), base);
}

TEST(BuildCandidates, NeighboursDifferOnlyAtOneStep) {
  const Shape sh{3, 2, 4};
  Rng rng(3);
  const auto cands = build_candidates(testing::random_policy(sh, rng), testing::random_policy(sh, rng));
  for (std::size_t h0 = 0; h0 < sh.horizon; ++h0) {
    for (std::size_t h = 0; h < sh.horizon; ++h)
      for (std::size_t s = 0; s < sh.states; ++s)
        for (std::size_t a = 0; a < sh.actions; ++a) {
          if (h == h0) continue;
          EXPECT_EQ(cands[h0](h, s, a), cands[h0 + 1](h, s, a));
        }
    // step h0 switches from optimistic to baseline
    for (std::size_t s = 0; s < sh.states; ++s)
      for (std::size_t a = 0; a < sh.actions; ++a) {
        EXPECT_EQ(cands[h0 + 1](h0, s, a), cands.back()(h0, s, a));
        EXPECT_EQ(cands[h0](h0, s, a), cands.front()(h0, s, a));
      }
  }
}

TEST(SelectPolicy, OptimisticWhenFirstCandidateClears) {
  const auto cands = some_candidates(2);
  const std::vector<double> lcbs{2.5, 1.0, 3.0};
  const auto sel = select_policy(lcbs, cands, 2.0);
  EXPECT_EQ(sel.kind, SelectionKind::Optimistic);
  EXPECT_EQ(sel.h_k, 0u);
  EXPECT_FALSE(sel.rho.has_value());
  EXPECT_EQ(sel.executed, cands[0]);
  EXPECT_GE(sel.lcb_value, 2.0);
}

TEST(SelectPolicy, BaselineWhenNothingClears) {
  const auto cands = some_candidates(2);
  const std::vector<double> lcbs{0.5, 1.0, 1.9};
  const auto sel = select_policy(lcbs, cands, 2.0);
  EXPECT_EQ(sel.kind, SelectionKind::Baseline);
  EXPECT_FALSE(sel.rho.has_value());
  EXPECT_FALSE(sel.h_k.has_value());
  EXPECT_EQ(sel.executed, cands.back());
}

TEST(SelectPolicy, MixtureHitsGammaExactly) {
  const auto cands = some_candidates(3);
  const std::vector<double> lcbs{0.2, 1.5, 2.5, 2.9};
  const auto sel = select_policy(lcbs, cands, 2.0);
  EXPECT_EQ(sel.kind, SelectionKind::Mixture);
  EXPECT_EQ(sel.h_k, 2u);
  EXPECT_DOUBLE_EQ(*sel.rho, 0.5);
  EXPECT_DOUBLE_EQ(sel.lcb_value, 2.0);
  EXPECT_EQ(sel.executed, step_mix(cands[1], cands[2], 0.5));
}

TEST(SelectPolicy, SmallestQualifyingCandidateWins) {
  const auto cands = some_candidates(3);
  const std::vector<double> lcbs{1.0, 2.2, 1.0, 3.0};
  const auto sel = select_policy(lcbs, cands, 2.0);
  EXPECT_EQ(sel.h_k, 1u);
  EXPECT_NEAR(*sel.rho * 1.0 + (1.0 - *sel.rho) * 2.2, 2.0, 1e-12);
}

TEST(SelectPolicy, RandomizedPinning) {
  Rng rng(4);
  const auto cands = some_candidates(3);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> lcbs(4);
    for (auto& x : lcbs) x = 3.0 * rng.uniform();
    const double gamma = 3.0 * rng.uniform();
    const auto sel = select_policy(lcbs, cands, gamma);
    if (sel.kind != SelectionKind::Mixture) continue;
    EXPECT_GE(*sel.rho, 0.0);
    EXPECT_LE(*sel.rho, 1.0);
    EXPECT_NEAR(*sel.rho * *sel.lcb_previous + (1.0 - *sel.rho) * *sel.lcb_selected, gamma, 1e-9);
  }
}

TEST(SelectPolicy, DegenerateDenominatorFallsBackToSafeCandidate) {
  const auto cands = some_candidates(2);
  const std::vector<double> lcbs{2.0 - 1e-14, 2.0, 2.5};
  const auto sel = select_policy(lcbs, cands, 2.0);
  EXPECT_EQ(sel.kind, SelectionKind::Mixture);
  EXPECT_EQ(*sel.rho, 0.0);
  EXPECT_EQ(sel.executed, cands[1]);
}

TEST(SelectPolicy, BrokenOrderingIsAnInternalError) {
  const auto cands = some_candidates(2);
  const std::vector<double> lcbs{std::numeric_limits<double>::quiet_NaN(), 2.5, 2.5};
  EXPECT_THROW(select_policy(lcbs, cands, 2.0), std::logic_error);
  const std::vector<double> short_list{1.0};
  EXPECT_THROW(select_policy(short_list, cands, 2.0), std::invalid_argument);
}

TEST(RunStepmix, ZeroThresholdIsAlwaysOptimistic) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  Rng rng(5);
  const auto run = run_stepmix(mdp, config_for(mdp, 0.0), 300, rng);
  for (const auto& r : run.records) EXPECT_EQ(r.kind, SelectionKind::Optimistic);
}

TEST(RunStepmix, FirstEpisodePlaysBaseline) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  Rng rng(6);
  const auto cfg = config_for(mdp, 2.0);
  const auto run = run_stepmix(mdp, cfg, 1, rng);
  ASSERT_EQ(run.records.size(), 1u);
  EXPECT_EQ(run.records[0].kind, SelectionKind::Baseline);
  EXPECT_EQ(run.records[0].episode, 1u);
  EXPECT_DOUBLE_EQ(run.records[0].value, policy_value(mdp, cfg.baseline));
}

TEST(RunStepmix, RecordsAreConsistent) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  Rng rng(7);
  const double gamma = 2.2;
  const auto run = run_stepmix(mdp, config_for(mdp, gamma), 1500, rng);
  const double v_star = solve_optimal(mdp).values.v(0, 0);
  EXPECT_DOUBLE_EQ(run.optimal_value, v_star);
  EXPECT_TRUE(run.warnings.empty());
  double regret = 0.0;
  std::size_t mixtures = 0;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& r = run.records[i];
    EXPECT_EQ(r.episode, i + 1);
    EXPECT_EQ(r.algorithm, Algorithm::StepMix);
    EXPECT_FALSE(r.mixture_value.has_value());
    regret += v_star - r.value;
    EXPECT_NEAR(r.cum_regret, regret, 1e-9);
    EXPECT_GE(v_star - r.value, -1e-9);
    EXPECT_EQ(r.violation, r.value < gamma);
    if (r.kind == SelectionKind::Mixture) {
      ++mixtures;
      ASSERT_TRUE(r.rho && r.h_k && r.lcb_first && r.lcb_second);
      EXPECT_GE(*r.h_k, 1u);
      EXPECT_NEAR(*r.rho * *r.lcb_first + (1.0 - *r.rho) * *r.lcb_second, gamma, 1e-9);
    } else {
      EXPECT_FALSE(r.rho.has_value());
    }
    if (r.kind == SelectionKind::Optimistic) EXPECT_GE(r.lcb, gamma);
  }
  EXPECT_GT(mixtures, 0u);
}

TEST(RunStepmix, BoundsSandwichAfterEveryEpisode) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  const auto cfg = config_for(mdp, 2.2);
  const BonusParams params{mdp.shape(), stepmix_delta_prime(cfg.delta, 3), cfg.bonus_scale};
  std::size_t bad = 0;
  Rng rng(8);
  run_stepmix(mdp, cfg, 400, rng, [&](std::size_t, const EmpiricalModel& model) {
    const auto ob = compute_optimistic_bounds(model, mdp.rewards(), params);
    const auto& b = ob.bounds;
    for (std::size_t h = 0; h < 3; ++h)
      for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t a = 0; a < 5; ++a)
          if (!(0.0 <= b.q_lo(h, s, a) && b.q_lo(h, s, a) <= b.q_up(h, s, a) && b.q_up(h, s, a) <= 3.0)) ++bad;
  });
  EXPECT_EQ(bad, 0u);
}

TEST(RunStepmix, CountsGrowByHorizonEachEpisode) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  std::uint64_t expected = 0;
  Rng rng(9);
  run_stepmix(mdp, config_for(mdp, 2.0), 50, rng, [&](std::size_t k, const EmpiricalModel& model) {
    std::uint64_t total = 0;
    for (std::size_t h = 0; h < 3; ++h)
      for (std::size_t s = 0; s < 5; ++s)
        for (std::size_t a = 0; a < 5; ++a) total += model.visits(h, s, a);
    EXPECT_EQ(total, expected);
    EXPECT_EQ(model.counts().episodes(), k - 1);
    expected += 3;
  });
}

TEST(RunStepmix, NonOptimisticShareShrinks) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  Rng rng(10);
  const auto run = run_stepmix(mdp, config_for(mdp, 2.0), 5000, rng);
  std::size_t first = 0, second = 0;
  for (const auto& r : run.records) {
    if (r.kind == SelectionKind::Optimistic) continue;
    (r.episode <= 2500 ? first : second) += 1;
  }
  EXPECT_GT(first, second);
}

TEST(RunStepmix, WarnsWhenBaselineIsUnsafe) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  Rng rng(11);
  const auto run = run_stepmix(mdp, config_for(mdp, 2.9), 5, rng);
  ASSERT_EQ(run.warnings.size(), 1u);
  EXPECT_NE(run.warnings[0].find("below gamma"), std::string::npos);
}

TEST(RunStepmix, DeterministicForFixedSeed) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  const auto cfg = config_for(mdp, 2.2);
  Rng a(12), b(12);
  const auto ra = run_stepmix(mdp, cfg, 200, a);
  const auto rb = run_stepmix(mdp, cfg, 200, b);
  for (std::size_t i = 0; i < 200; ++i) {
    EXPECT_EQ(ra.records[i].value, rb.records[i].value);
    EXPECT_EQ(ra.records[i].kind, rb.records[i].kind);
  }
}

TEST(RunStepmix, RejectsBadConfig) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  Rng rng(13);
  auto cfg = config_for(mdp, 2.0);
  cfg.delta = 1.5;
  EXPECT_THROW(run_stepmix(mdp, cfg, 1, rng), std::invalid_argument);
  cfg = config_for(mdp, 2.0);
  cfg.bonus_scale = 0.0;
  EXPECT_THROW(run_stepmix(mdp, cfg, 1, rng), std::invalid_argument);
  cfg = config_for(mdp, 2.0);
  cfg.baseline = StochasticPolicy::uniform({5, 4, 3});
  EXPECT_THROW(run_stepmix(mdp, cfg, 1, rng), std::invalid_argument);
}

TEST(RunOptimistic, ExecutesGreedyPolicyRegardlessOfGamma) {
  const auto mdp = generate_random_mdp({5, 5, 3}, 7);
  Rng a(14), b(14);
  const auto low = run_optimistic(mdp, config_for(mdp, 0.0), 300, a);
  const auto high = run_optimistic(mdp, config_for(mdp, 2.2), 300, b);
  std::size_t violations = 0;
  for (std::size_t i = 0; i < 300; ++i) {
    EXPECT_EQ(low.records[i].kind, SelectionKind::Optimistic);
    EXPECT_EQ(low.records[i].value, high.records[i].value);
    EXPECT_FALSE(low.records[i].violation);
    violations += high.records[i].violation ? 1 : 0;
  }
  EXPECT_GT(violations, 0u);
}

}  // namespace
}  // namespace conex
