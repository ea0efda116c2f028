#include <cmath>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "fracval/simengine.hpp"
#include "test_support.hpp"

namespace fracval {
namespace {

using testing::at;
using testing::f6_case;
using testing::fraction;
using testing::never;
using testing::unit;

Architecture single(ReplacementLaw member_law, KiloDollars cost = 1.0) {
  Architecture a;
  a.label = "single";
  a.fractions.push_back(fraction({unit("X", cost, 0.0, std::move(member_law))}, 0.0, never()));
  return a;
}

ScenarioConfig config(Years lifetime, double rate, std::vector<Years> checkpoints, std::size_t trials = 1) {
  ScenarioConfig cfg;
  cfg.lifetime = lifetime;
  cfg.discount_rate = rate;
  cfg.launch_rate = 30.0;
  cfg.trials = trials;
  cfg.master_seed = 42;
  cfg.checkpoints = std::move(checkpoints);
  cfg.threads = 1;
  return cfg;
}

TEST(Renewal, DegenerateLawClosedForm) {
  const auto arch = single(at(10.0));
  const auto s = simulate_trial(arch, config(30, 0.02, {30}), 0);
  EXPECT_NEAR(s.cost_at_checkpoint[0], 1.0 + std::exp(-0.2) + std::exp(-0.4), 1e-9);
  EXPECT_DOUBLE_EQ(s.total, s.cost_at_checkpoint[0]);
}

TEST(Renewal, UndiscountedDegenerateLawIsExactlyThree) {
  const auto s = simulate_trial(single(at(10.0)), config(30, 0.0, {30}), 0);
  EXPECT_EQ(s.cost_at_checkpoint[0], 3.0);
}

TEST(Renewal, ShortLifetimeCostsOnlyTheInitialDeployment) {
  const auto s = simulate_trial(single(at(10.0)), config(5, 0.02, {5}), 0);
  EXPECT_EQ(s.cost_at_checkpoint[0], 1.0);
  EXPECT_EQ(s.total, 1.0);
}

TEST(Renewal, CheckpointCountsReplacementsStrictlyBefore) {
  const auto s = simulate_trial(single(at(10.0)), config(30, 0.0, {0, 10, 10.5, 30}), 0);
  EXPECT_EQ(s.cost_at_checkpoint, (std::vector<double>{1.0, 1.0, 2.0, 3.0}));
}

TEST(Renewal, ExponentialUnitMatchesPoissonCount) {
  // Memoryless renewals: expected replacements before T is T / scale.
  const auto arch = single(testing::weibull(5.0, 1.0));
  auto cfg = config(30, 0.0, {30}, 20000);
  double sum = 0.0;
  for (const auto& s : simulate(arch, cfg)) sum += s.total;
  EXPECT_NEAR(sum / 20000.0, 1.0 + 30.0 / 5.0, 0.1);
}

TEST(Renewal, WholeFractionIsRedeployed) {
  // Y would fire at 12, but X's replacement at 10 resets it to 10 + 12.
  Architecture a;
  a.fractions.push_back(fraction({unit("X", 1, 0, at(10)), unit("Y", 1, 0, at(12))}, 0.0, never()));
  std::vector<ReplacementEvent> ev;
  simulate_trial(a, config(30, 0.0, {30}), 0, &ev);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].time, 10.0);
  EXPECT_EQ(ev[1].time, 20.0);
  EXPECT_EQ(ev[0].triggering_subsystem_id, "X");
}

TEST(Renewal, TiesGoToLowerFractionThenLowerId) {
  Architecture a;
  a.fractions.push_back(fraction({unit("B", 1, 0, at(5)), unit("A", 1, 0, at(5))}, 0.0, never(), "bus0"));
  a.fractions.push_back(fraction({unit("C", 1, 0, at(5))}, 0.0, never(), "bus1"));
  std::vector<ReplacementEvent> ev;
  simulate_trial(a, config(6, 0.0, {6}), 0, &ev);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].fraction_index, 0u);
  EXPECT_EQ(ev[0].triggering_subsystem_id, "A");
  EXPECT_EQ(ev[1].fraction_index, 1u);
  EXPECT_EQ(ev[1].time, 5.0);
}

TEST(Renewal, EventLogReconcilesWithTotals) {
  const auto& sf = f6_case();
  const auto arch = sf.build("four_fraction");
  auto cfg = sf.config;
  for (std::size_t t = 0; t < 200; ++t) {
    std::vector<ReplacementEvent> ev;
    const auto s = simulate_trial(arch, cfg, t, &ev);
    double total = arch.deploy_cost(cfg.launch_rate);
    Years prev = 0.0;
    for (const auto& e : ev) {
      EXPECT_GE(e.time, prev);
      EXPECT_LT(e.time, cfg.lifetime);
      EXPECT_NEAR(e.discounted_cost,
                  fraction_deploy_cost(arch.fractions[e.fraction_index], cfg.launch_rate) *
                      std::exp(-cfg.discount_rate * e.time),
                  1e-9);
      total += e.discounted_cost;
      prev = e.time;
    }
    EXPECT_NEAR(s.total, total, 1e-6);
    EXPECT_EQ(s.total, s.cost_at_checkpoint.back());
  }
}

TEST(Simulate, SingleTrialRuns) {
  const auto& sf = f6_case();
  auto cfg = sf.config;
  cfg.trials = 1;
  const auto out = simulate(sf.build("monolith"), cfg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].cost_at_checkpoint.size(), cfg.checkpoints.size());
}

TEST(Simulate, DeterministicAndThreadIndependent) {
  const auto& sf = f6_case();
  auto cfg = sf.config;
  cfg.trials = 500;
  const auto arch = sf.build("arch_b");
  cfg.threads = 1;
  const auto a = simulate(arch, cfg);
  const auto b = simulate(arch, cfg);
  cfg.threads = 4;
  const auto c = simulate(arch, cfg);
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].cost_at_checkpoint, b[t].cost_at_checkpoint);
    EXPECT_EQ(a[t].cost_at_checkpoint, c[t].cost_at_checkpoint);
    EXPECT_EQ(c[t].trial_index, t);
  }
  cfg.master_seed += 1;
  EXPECT_NE(simulate(arch, cfg)[0].total, a[0].total);
}

TEST(Simulate, CostIsNondecreasingAcrossCheckpoints) {
  const auto& sf = f6_case();
  auto cfg = sf.config;
  cfg.trials = 300;
  for (const auto& s : simulate(sf.build("monolith"), cfg)) {
    for (std::size_t c = 1; c < s.cost_at_checkpoint.size(); ++c) {
      EXPECT_GE(s.cost_at_checkpoint[c], s.cost_at_checkpoint[c - 1]);
    }
  }
}

TEST(Simulate, CostIsNonincreasingInDiscountRate) {
  const auto& sf = f6_case();
  auto cfg = sf.config;
  cfg.trials = 300;
  const auto arch = sf.build("arch_a");
  std::vector<std::vector<TrialCostSeries>> runs;
  for (double r : {0.0, 0.02, 0.05, 0.1}) {
    cfg.discount_rate = r;
    runs.push_back(simulate(arch, cfg));
  }
  for (std::size_t k = 1; k < runs.size(); ++k) {
    for (std::size_t t = 0; t < cfg.trials; ++t) EXPECT_LE(runs[k][t].total, runs[k - 1][t].total);
  }
}

TEST(Simulate, WorkerExceptionsPropagate) {
  EXPECT_THROW(detail::parallel_for(100, 4,
                                    [](std::size_t i) {
                                      if (i == 37) throw std::runtime_error("boom");
                                    }),
               std::runtime_error);
}

TEST(Compare, SelfComparisonIsExactlyZero) {
  const auto& sf = f6_case();
  auto cfg = sf.config;
  cfg.trials = 1000;
  for (const char* label : {"monolith", "four_fraction", "arch_b"}) {
    const auto arch = sf.build(label);
    for (const auto& col : compare(arch, arch, cfg).values) {
      for (double v : col) ASSERT_EQ(v, 0.0);
    }
  }
}

TEST(Compare, FreeImmortalTechPackageChangesNothing) {
  const auto& sf = f6_case();
  Catalog cat = sf.catalog;
  cat.techpackage->build_cost = 0.0;
  cat.techpackage->mass = 0.0;
  cat.techpackage->replacement = never();
  const auto with_tp = build_architecture(sf.find_architecture("four_fraction").partition, cat);
  Architecture without_tp = with_tp;
  for (auto& f : without_tp.fractions) f.techpackage.reset();
  auto cfg = sf.config;
  cfg.trials = 1000;
  for (const auto& col : compare(without_tp, with_tp, cfg).values) {
    for (double v : col) ASSERT_EQ(v, 0.0);
  }
}

TEST(Compare, CostlyImmortalTechPackageIsDominated) {
  const auto& sf = f6_case();
  Catalog free_cat = sf.catalog;
  free_cat.techpackage->build_cost = 0.0;
  free_cat.techpackage->mass = 0.0;
  free_cat.techpackage->replacement = never();
  Catalog paid_cat = free_cat;
  paid_cat.techpackage->build_cost = 2000.0;
  const auto& partition = sf.find_architecture("four_fraction").partition;
  auto cfg = sf.config;
  cfg.trials = 1000;
  const auto dist = compare(build_architecture(partition, free_cat), build_architecture(partition, paid_cat), cfg);
  for (const auto& col : dist.values) {
    for (double v : col) ASSERT_LT(v, 0.0);
  }
}

TEST(Compare, MismatchedSubsystemsAreRejected) {
  const auto& sf = f6_case();
  auto cfg = sf.config;
  cfg.trials = 10;
  EXPECT_THROW(compare(sf.build("monolith"), single(at(10)), cfg), ConfigError);
}

TEST(Compare, ValueIsBaselineMinusAlternative) {
  const auto& sf = f6_case();
  auto cfg = sf.config;
  cfg.trials = 200;
  const auto mono = sf.build("monolith");
  const auto four = sf.build("four_fraction");
  const auto a = simulate(mono, cfg);
  const auto b = simulate(four, cfg);
  const auto dist = compare(mono, four, cfg);
  for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      EXPECT_EQ(dist.values[c][t], a[t].cost_at_checkpoint[c] - b[t].cost_at_checkpoint[c]);
    }
  }
}

TEST(ScenarioConfig, ValidationRejectsBadSettings) {
  auto cfg = config(30, 0.02, {5, 10});
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.trials = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.checkpoints = {10, 5};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.checkpoints = {31};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.lifetime = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.var_probabilities = {1.0};
  EXPECT_THROW(bad.validate(), ConfigError);
}

}  // namespace
}  // namespace fracval
