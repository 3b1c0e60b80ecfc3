#include <gtest/gtest.h>

#include <cmath>

#include "bcr/evaluation.hpp"
#include "test_support.hpp"

namespace bcr {
namespace {

const double kMaxDeviation = 0.8 * std::log2(9.0) + 0.2 * std::log2(1.5);

MixtureAgent pair_agent(UpdateMode mode, std::vector<double> prior = {0.5, 0.5}) {
  return MixtureAgent(biased_pair_suite(), Distribution(std::move(prior)), mode);
}

double kl2(double p0, double q0) {
  return p0 * std::log2(p0 / q0) + (1 - p0) * std::log2((1 - p0) / (1 - q0));
}

//---------------------------------------------------------------------------//
// step / deviation / simulate
//---------------------------------------------------------------------------//
TEST(StepTest, PointMassEnvironmentIsDeterministic) {
  const MemorylessModel env(Distribution({0.5, 0.5}), Distribution({0.0, 1.0}));
  auto agent = pair_agent(UpdateMode::Causal);
  CounterRng rng(3);
  for (int t = 0; t < 20; ++t) EXPECT_EQ(step(agent, env, rng).observation, 1u);
  EXPECT_EQ(agent.history().length(), 20u);
}

TEST(StepTest, CommittedAgentCouplesP0WithQ0) {
  const auto suite = biased_pair_suite();
  CounterRng rng(RunKey{4, 0});
  auto agent = pair_agent(UpdateMode::Naive, {1.0, 0.0});
  constexpr int kSteps = 20000;
  int action_zero = 0;
  int obs_zero = 0;
  for (int t = 0; t < kSteps; ++t) {
    const auto x = step(agent, *suite[0], rng);
    action_zero += x.action == 0;
    obs_zero += x.observation == 0;
  }
  EXPECT_NEAR(action_zero / double(kSteps), 0.9, 4 * std::sqrt(0.09 / kSteps));
  EXPECT_NEAR(obs_zero / double(kSteps), 0.6, 4 * std::sqrt(0.24 / kSteps));
}

TEST(StepTest, ReproducibleOnFreshCopies) {
  const auto suite = biased_pair_suite();
  for (const auto mode : {UpdateMode::Naive, UpdateMode::Causal}) {
    auto a = pair_agent(mode);
    auto b = pair_agent(mode);
    CounterRng ra(RunKey{5, 5});
    CounterRng rb(RunKey{5, 5});
    for (int t = 0; t < 100; ++t) EXPECT_EQ(step(a, *suite[1], ra), step(b, *suite[1], rb));
  }
}

TEST(DeviationTest, Examples) {
  const auto p0 = biased_pair_suite()[0];
  for (const auto mode : {UpdateMode::Naive, UpdateMode::Causal}) {
    for (Symbol a = 0; a < 2; ++a) {
      EXPECT_NEAR(deviation(pair_agent(mode, {1.0, 0.0}), *p0, a), 0.0, 1e-15);
      EXPECT_NEAR(deviation(pair_agent(mode, {0.0, 1.0}), *p0, a), kMaxDeviation, 1e-12);
    }
  }
  // Uniform causal agent: KL((.9,.1)||(.5,.5)) + KL((.6,.4)||(.5,.5)).
  const double want = kl2(0.9, 0.5) + kl2(0.6, 0.5);
  EXPECT_NEAR(want, 0.56005, 1e-5);
  EXPECT_NEAR(deviation(pair_agent(UpdateMode::Causal), *p0, 0), want, 1e-12);

  // Naive uniform agent after a=1: observation term against (0.42, 0.58).
  EXPECT_NEAR(deviation(pair_agent(UpdateMode::Naive), *p0, 1),
              kl2(0.9, 0.5) + kl2(0.6, 0.42), 1e-12);
}

TEST(DeviationTest, ExtremeDeviation) {
  const auto suite = biased_pair_suite();
  EXPECT_NEAR(extreme_deviation(*suite[0], *suite[1]), kMaxDeviation, 1e-12);
  EXPECT_EQ(extreme_deviation(*suite[0], *suite[0]), 0.0);
}

TEST(SimulateTest, HorizonBoundaries) {
  const auto exp = biased_pair_experiment();
  EXPECT_THROW(simulate(exp, UpdateMode::Causal, 0, 0, {1, 0}), InvalidArgument);
  EXPECT_THROW(simulate(exp, UpdateMode::Causal, 2, 10, {1, 0}), InvalidArgument);
  const auto one = simulate(exp, UpdateMode::Causal, 0, 1, {1, 0});
  EXPECT_EQ(one.trace.values.size(), 1u);
  EXPECT_EQ(one.trajectory.steps.size(), 1u);
  EXPECT_EQ(one.posteriors.size(), 2u);
  // The first deviation is that of the uniform prior at the realized action.
  EXPECT_NEAR(one.trace.values[0], kl2(0.9, 0.5) + kl2(0.6, 0.5), 1e-12);
  EXPECT_EQ(one.trajectory.env_id, "p0");
}

TEST(SimulateTest, BitReproducible) {
  const auto exp = biased_pair_experiment();
  for (const auto mode : {UpdateMode::Naive, UpdateMode::Causal}) {
    const auto a = simulate(exp, mode, 0, 300, {9, 2});
    const auto b = simulate(exp, mode, 0, 300, {9, 2});
    EXPECT_EQ(a.trajectory.steps, b.trajectory.steps);
    EXPECT_EQ(a.trace.values, b.trace.values);
    EXPECT_EQ(a.posteriors, b.posteriors);
    const auto c = simulate(exp, mode, 0, 300, {9, 3});
    EXPECT_NE(a.trajectory.steps, c.trajectory.steps);
  }
}

TEST(SimulateTest, DeviationBounds) {
  const auto exp = biased_pair_experiment();
  for (const auto mode : {UpdateMode::Naive, UpdateMode::Causal}) {
    for (std::size_t env = 0; env < 2; ++env) {
      for (std::uint64_t run = 0; run < 40; ++run) {
        const auto r = simulate(exp, mode, env, 150, {77, run});
        for (double d : r.trace.values) {
          ASSERT_GE(d, 0.0);
          ASSERT_LE(d, kMaxDeviation + 1e-9);
        }
      }
    }
  }
}

TEST(SimulateTest, PosteriorColumnsMatchReplay) {
  const auto exp = biased_pair_experiment();
  const auto r = simulate(exp, UpdateMode::Naive, 1, 25, {12, 0});
  MixtureAgent agent(exp.suite, exp.prior, UpdateMode::Naive);
  for (std::size_t t = 0; t < 25; ++t) {
    agent.record_action(r.trajectory.steps[t].action);
    agent.record_observation(r.trajectory.steps[t].observation);
    const auto post = agent.posterior();
    EXPECT_EQ(post[0], r.posteriors[2 * t]);
    EXPECT_EQ(post[1], r.posteriors[2 * t + 1]);
  }
}

//---------------------------------------------------------------------------//
// ensembles
//---------------------------------------------------------------------------//
TEST(BasinSpecTest, ValidationAndClassification) {
  EXPECT_THROW(BasinSpec({}), InvalidArgument);
  EXPECT_THROW(BasinSpec({1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(BasinSpec({2.0, 1.0}), InvalidArgument);
  const BasinSpec b({0.0, kMaxDeviation});
  EXPECT_EQ(b.classify(0.1), 0u);
  EXPECT_EQ(b.classify(2.0), 1u);
  EXPECT_EQ(b.classify(kMaxDeviation / 2), 0u);
  EXPECT_EQ(b.classify(10.0), 1u);
}

TEST(EnsembleTest, SingleRunEchoesTrace) {
  const auto exp = biased_pair_experiment();
  const BasinSpec basins({0.0, kMaxDeviation});
  const auto s = ensemble(exp, UpdateMode::Naive, 0, 60, 1, 31, basins);
  const auto r = simulate(exp, UpdateMode::Naive, 0, 60, {31, 0});
  EXPECT_EQ(s.overall.mean, r.trace.values);
  for (double v : s.overall.stddev) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(s.basin_counts[0] + s.basin_counts[1], 1u);
  EXPECT_THROW(ensemble(exp, UpdateMode::Naive, 0, 60, 0, 31, basins), InvalidArgument);
}

TEST(EnsembleTest, IndependentOfThreadCount) {
  const auto exp = biased_pair_experiment();
  const BasinSpec basins({0.0, kMaxDeviation});
  const auto serial = ensemble(exp, UpdateMode::Naive, 0, 80, 64, 5, basins, 1);
  const auto parallel = ensemble(exp, UpdateMode::Naive, 0, 80, 64, 5, basins, 7);
  EXPECT_EQ(serial.overall.mean, parallel.overall.mean);
  EXPECT_EQ(serial.overall.stddev, parallel.overall.stddev);
  EXPECT_EQ(serial.basin_counts, parallel.basin_counts);
  EXPECT_EQ(serial.final_window_means, parallel.final_window_means);
  EXPECT_EQ(serial.basin_counts[0] + serial.basin_counts[1], 64u);
  EXPECT_EQ(serial.per_basin[0].count, serial.basin_counts[0]);
}

TEST(EnsembleTest, FinalWindowMeansAndClassification) {
  const auto exp = biased_pair_experiment();
  const BasinSpec basins({0.0, kMaxDeviation});
  const std::size_t horizon = 50;
  const auto s = ensemble(exp, UpdateMode::Causal, 0, horizon, 10, 8, basins, 2);
  EXPECT_EQ(final_window_length(horizon), 5u);
  EXPECT_EQ(final_window_length(5), 1u);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto r = simulate(exp, UpdateMode::Causal, 0, horizon, {8, i});
    double acc = 0.0;
    for (std::size_t t = horizon - 5; t < horizon; ++t) acc += r.trace.values[t];
    EXPECT_DOUBLE_EQ(s.final_window_means[i], acc / 5);
    EXPECT_EQ(s.basin_of_run[i], basins.classify(acc / 5));
  }
}

TEST(EnsembleTest, EmptyBasinHasNanColumns) {
  const auto exp = biased_pair_experiment();
  // A far-away third center never attracts anything.
  const BasinSpec basins({0.0, kMaxDeviation, 100.0});
  const auto s = ensemble(exp, UpdateMode::Causal, 0, 20, 4, 1, basins);
  EXPECT_EQ(s.basin_counts[2], 0u);
  EXPECT_TRUE(std::isnan(s.per_basin[2].mean[0]));
}

// Relabeling symbols 0 <-> 1 maps (Q_0, reference P_0) onto (Q_1, reference
// P_1); the two ensembles must agree statistically.
TEST(EnsembleProperty, SymbolRelabelingSymmetry) {
  const BasinSpec basins({0.0, kMaxDeviation});
  auto exp0 = biased_pair_experiment();
  auto exp1 = biased_pair_experiment();
  exp1.reference = 1;
  constexpr std::size_t kRuns = 400;
  constexpr std::size_t kHorizon = 100;
  for (const auto mode : {UpdateMode::Naive, UpdateMode::Causal}) {
    const auto a = ensemble(exp0, mode, 0, kHorizon, kRuns, 100, basins, 4);
    const auto b = ensemble(exp1, mode, 1, kHorizon, kRuns, 200, basins, 4);
    for (std::size_t t = 0; t < kHorizon; t += 10) {
      const double se = std::sqrt((a.overall.stddev[t] * a.overall.stddev[t] +
                                   b.overall.stddev[t] * b.overall.stddev[t]) /
                                  kRuns);
      EXPECT_LE(std::abs(a.overall.mean[t] - b.overall.mean[t]), 3 * se + 1e-12)
          << to_string(mode) << " t=" << t;
    }
  }
}

//---------------------------------------------------------------------------//
// divergence criteria
//---------------------------------------------------------------------------//
TEST(EnumerationGuardTest, Limits) {
  const auto suite = biased_pair_suite();
  EXPECT_NO_THROW(check_enumeration_size(suite, 4));
  EXPECT_THROW(check_enumeration_size(suite, 5), InvalidArgument);
  EXPECT_THROW(check_enumeration_size(suite, 20), InvalidArgument);
  EXPECT_THROW(check_enumeration_size(suite, 0), InvalidArgument);
  const auto p = optimal_agent(Criterion::D, suite, Distribution({0.5, 0.5}));
  EXPECT_THROW(total_divergence_naive(*p, suite, Distribution({0.5, 0.5}), 20),
               InvalidArgument);
}

TEST(TotalDivergenceTest, HorizonOneByHand) {
  const auto suite = biased_pair_suite();
  const Distribution prior({0.5, 0.5});
  // D at t=1: action law (.5,.5); observation law after a uses w(a).
  double want_d = 0.0;
  double want_c = 0.0;
  const double pa[2] = {0.9, 0.1};  // P_m(a = 0)
  const double po[2] = {0.6, 0.4};  // P_m(o = 0)
  for (int m = 0; m < 2; ++m) {
    want_d += 0.5 * kl2(pa[m], 0.5);
    want_c += 0.5 * kl2(pa[m], 0.5);
    for (int a = 0; a < 2; ++a) {
      const double pam = a == 0 ? pa[m] : 1 - pa[m];
      const double w0 = a == 0 ? 0.9 : 0.1;  // w_0(a) from 0.5*P_0(a) normalized
      const double mix = w0 * 0.6 + (1 - w0) * 0.4;
      want_d += 0.5 * pam * kl2(po[m], mix);
      // C: every action branch carries weight one; v stays at the prior.
      want_c += 0.5 * kl2(po[m], 0.5);
    }
  }
  const auto naive = optimal_agent(Criterion::D, suite, prior);
  const auto bcr = optimal_agent(Criterion::C, suite, prior);
  EXPECT_NEAR(total_divergence_naive(*naive, suite, prior, 1), want_d, 1e-12);
  EXPECT_NEAR(total_divergence_causal(*bcr, suite, prior, 1), want_c, 1e-12);
}

TEST(TotalDivergenceTest, SingleModelSuiteIsZero) {
  const auto p0 = biased_pair_suite()[0];
  for (std::size_t h = 1; h <= 4; ++h) {
    EXPECT_EQ(total_divergence_naive(*p0, {p0}, Distribution({1.0}), h), 0.0);
    EXPECT_EQ(total_divergence_causal(*p0, {p0}, Distribution({1.0}), h), 0.0);
  }
}

TEST(TotalDivergenceTest, OneNoisyConditionalIncreasesD) {
  const auto suite = biased_pair_suite();
  const Distribution prior({0.5, 0.5});
  const auto optimum = optimal_agent(Criterion::D, suite, prior);
  // 5% uniform noise in the first action conditional only.
  const testing::LambdaModel noisy(
      2, 2,
      [&](std::span<const Interaction> past) {
        const auto base = optimum->action_dist(past);
        if (!past.empty()) return base;
        return Distribution({0.95 * base[0] + 0.025, 0.95 * base[1] + 0.025});
      },
      [&](std::span<const Interaction> past, Symbol a) {
        return optimum->obs_dist(past, a);
      });
  // The first action law of the mixture is already uniform; noise must not
  // leave it unchanged for this check to be meaningful, so skew it instead.
  const testing::LambdaModel skewed(
      2, 2,
      [&](std::span<const Interaction> past) {
        const auto base = optimum->action_dist(past);
        if (past.size() != 1) return base;
        return Distribution({0.95 * base[0] + 0.025, 0.95 * base[1] + 0.025});
      },
      [&](std::span<const Interaction> past, Symbol a) {
        return optimum->obs_dist(past, a);
      });
  const double best = total_divergence_naive(*optimum, suite, prior, 3);
  EXPECT_NEAR(total_divergence_naive(noisy, suite, prior, 3), best, 1e-15);
  EXPECT_GT(total_divergence_naive(skewed, suite, prior, 3), best + 1e-9);
}

TEST(TotalDivergenceTest, IdenticalObservationLawsFreezeTheControlRule) {
  auto make = [](double p_act0) {
    return std::make_shared<MemorylessModel>(
        make_memoryless(Distribution({p_act0, 1 - p_act0}), Distribution({0.7, 0.3})));
  };
  const std::vector<ModelPtr> suite{make(0.8), make(0.25)};
  const Distribution prior({0.3, 0.7});
  const auto bcr = optimal_agent(Criterion::C, suite, prior);

  // Weights never move, so the action law stays the prior mixture.
  const auto mixture = Distribution::mixture(
      std::vector<Distribution>{Distribution({0.8, 0.2}), Distribution({0.25, 0.75})}, prior);
  CounterRng rng(61);
  MixtureAgent agent(suite, prior, UpdateMode::Causal);
  for (int t = 0; t < 30; ++t) {
    EXPECT_NEAR(agent.posterior()[0], 0.3, 1e-12);
    agent.act(rng);
    agent.record_observation(rng() % 2);
  }

  // C = sum_tau |A|^{tau-1} * sum_m P(m) KL(P_m(a) || mixture): the observation
  // terms vanish and each of the |A|^{tau-1} action prefixes carries unit
  // observation mass.
  const double js = 0.3 * kl2(0.8, mixture[0]) + 0.7 * kl2(0.25, mixture[0]);
  EXPECT_NEAR(total_divergence_causal(*bcr, suite, prior, 3), (1 + 2 + 4) * js, 1e-12);
}

TEST(TotalDivergenceTest, NaiveMixtureIsWorseUnderC) {
  const auto suite = biased_pair_suite();
  const Distribution prior({0.5, 0.5});
  const auto naive = optimal_agent(Criterion::D, suite, prior);
  const auto bcr = optimal_agent(Criterion::C, suite, prior);
  for (std::size_t h = 1; h <= 3; ++h) {
    const double c_naive = total_divergence_causal(*naive, suite, prior, h);
    const double c_bcr = total_divergence_causal(*bcr, suite, prior, h);
    const double d_naive = total_divergence_naive(*naive, suite, prior, h);
    const double d_bcr = total_divergence_naive(*bcr, suite, prior, h);
    EXPECT_GE(c_naive, c_bcr);
    EXPECT_GE(d_bcr, d_naive);
    if (h > 1) {
      EXPECT_GT(c_naive, c_bcr + 1e-9);
      EXPECT_GT(d_bcr, d_naive + 1e-9);
    }
  }
}

TEST(TotalDivergenceProperty, EqualsSumOfIndependentTerms) {
  CounterRng rng(67);
  const auto suite = biased_pair_suite();
  const Distribution prior({0.35, 0.65});
  std::vector<ModelPtr> candidates{optimal_agent(Criterion::D, suite, prior),
                                   optimal_agent(Criterion::C, suite, prior), suite[0]};
  for (int i = 0; i < 3; ++i) {
    candidates.push_back(
        std::make_shared<PerturbedModel>(candidates[i % 2], 0.2 + 0.1 * i, rng()));
  }
  for (const auto criterion : {Criterion::D, Criterion::C}) {
    for (const auto& cand : candidates) {
      for (std::size_t h = 1; h <= 4; ++h) {
        const auto terms = divergence_terms(criterion, *cand, suite, prior, h);
        ASSERT_EQ(terms.size(), h);
        double sum = 0.0;
        for (double v : terms) sum += v;
        const double total = total_divergence(criterion, *cand, suite, prior, h);
        EXPECT_NEAR(total, sum, 1e-12 * std::max(1.0, total));
        // Prefix consistency: a longer horizon only appends terms.
        if (h > 1) {
          const auto shorter = divergence_terms(criterion, *cand, suite, prior, h - 1);
          for (std::size_t k = 0; k + 1 < h; ++k) EXPECT_EQ(shorter[k], terms[k]);
        }
      }
    }
  }
}

TEST(PerturbedModelTest, DeterministicAndValid) {
  const auto base = biased_pair_suite()[0];
  const PerturbedModel a(base, 0.3, 99);
  const PerturbedModel b(base, 0.3, 99);
  const PerturbedModel other(base, 0.3, 100);
  const History h({{0, 1}, {1, 0}});
  EXPECT_EQ(a.action_dist(h.steps()), b.action_dist(h.steps()));
  EXPECT_EQ(a.obs_dist(h.steps(), 1), b.obs_dist(h.steps(), 1));
  EXPECT_NE(a.action_dist(h.steps()), other.action_dist(h.steps()));
  EXPECT_EQ(PerturbedModel(base, 0.0, 5).action_dist(h.steps()), base->action_dist(h.steps()));
  EXPECT_THROW(PerturbedModel(base, 1.5, 1), InvalidArgument);
}

TEST(MinimizerCheckTest, NoPerturbationsIsVacuous) {
  CounterRng rng(1);
  const auto r = minimizer_check(Criterion::D, biased_pair_suite(), Distribution({0.5, 0.5}),
                                 2, 0, rng);
  EXPECT_TRUE(r.perturbed_values.empty());
  EXPECT_EQ(r.beaten(1e-9), 0u);
  EXPECT_TRUE(std::isinf(r.min_margin()));
}

TEST(MinimizerCheckTest, OptimaHoldAgainstRandomPerturbations) {
  CounterRng rng(71);
  CounterRng prior_rng(73);
  for (const auto criterion : {Criterion::D, Criterion::C}) {
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<ModelPtr> suite;
      for (int m = 0; m < 3; ++m) {
        suite.push_back(std::make_shared<MemorylessModel>(
            make_memoryless(testing::random_distribution(prior_rng, 2),
                            testing::random_distribution(prior_rng, 2))));
      }
      const auto prior = testing::random_distribution(prior_rng, 3);
      const auto r = minimizer_check(criterion, suite, prior, 3, 20, rng);
      EXPECT_EQ(r.beaten(1e-9), 0u);
      EXPECT_GT(r.min_margin(), 0.0);
    }
  }
}

}  // namespace
}  // namespace bcr
