#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "bcr/models.hpp"
#include "test_support.hpp"

namespace bcr {
namespace {

using testing::binary_histories;

MemorylessModel biased_p1() {
  return make_memoryless(Distribution({0.1, 0.9}), Distribution({0.4, 0.6}), "p1");
}

History one_step(Symbol a, Symbol o) { return History({{a, o}}); }

TEST(MemorylessModelTest, IgnoresHistory) {
  const auto p1 = biased_p1();
  const History long_history({{0, 0}, {1, 1}, {0, 1}});
  EXPECT_EQ(p1.action_dist({}), Distribution({0.1, 0.9}));
  EXPECT_EQ(p1.action_dist(long_history.steps()), Distribution({0.1, 0.9}));
  EXPECT_EQ(p1.obs_dist(long_history.steps(), 0), Distribution({0.4, 0.6}));
  EXPECT_EQ(p1.obs_dist({}, 1), Distribution({0.4, 0.6}));
  EXPECT_EQ(p1.label(), "p1");
}

TEST(ComplementTest, BiasedPair) {
  const auto p0 = complement(biased_p1(), "p0");
  EXPECT_EQ(p0.pa(), Distribution({0.9, 0.1}));
  EXPECT_EQ(p0.po(), Distribution({0.6, 0.4}));
  EXPECT_EQ(p0.label(), "p0");

  const auto suite = biased_pair_suite();
  ASSERT_EQ(suite.size(), 2u);
  EXPECT_EQ(suite[0]->action_dist({}), Distribution({0.9, 0.1}));
  EXPECT_EQ(suite[0]->obs_dist({}, 0), Distribution({0.6, 0.4}));
  EXPECT_EQ(suite[1]->action_dist({}), Distribution({0.1, 0.9}));
  EXPECT_EQ(suite[1]->obs_dist({}, 0), Distribution({0.4, 0.6}));
}

TEST(ComplementTest, InvolutionAndFixedPoint) {
  const auto p1 = biased_p1();
  const auto twice = complement(complement(p1));
  EXPECT_EQ(twice.pa(), p1.pa());
  EXPECT_EQ(twice.po(), p1.po());

  const auto fair = make_memoryless(Distribution({0.5, 0.5}), Distribution({0.5, 0.5}));
  const auto c = complement(fair);
  EXPECT_EQ(c.pa(), fair.pa());
  EXPECT_EQ(c.po(), fair.po());
}

TEST(ComplementTest, NonBinaryIsUnsupported) {
  const auto ternary = make_memoryless(Distribution::uniform(3), Distribution({0.5, 0.5}));
  EXPECT_THROW(complement(ternary), UnsupportedOperation);
}

TEST(SeqLoglikTest, FullExamples) {
  const auto p1 = biased_p1();
  const auto p0 = complement(p1);
  EXPECT_NEAR(seq_loglik_full(p1, one_step(1, 1)), std::log(0.54), 1e-15);
  EXPECT_NEAR(seq_loglik_full(p0, one_step(1, 1)), std::log(0.04), 1e-15);
  EXPECT_EQ(seq_loglik_full(p1, History()), 0.0);
  // Pending action contributes its action factor only.
  EXPECT_NEAR(seq_loglik_full(p1, History({{1, 1}}, 0)), std::log(0.54 * 0.1), 1e-15);
}

TEST(SeqLoglikTest, DeterministicModel) {
  const auto det = make_memoryless(Distribution({1.0, 0.0}), Distribution({1.0, 0.0}));
  EXPECT_EQ(seq_loglik_full(det, History({{0, 0}, {0, 0}, {0, 0}})), 0.0);
  EXPECT_EQ(seq_loglik_full(det, History({{0, 0}, {1, 0}})),
            -std::numeric_limits<double>::infinity());
  EXPECT_EQ(seq_loglik_intervened(det, History({{1, 1}})),
            -std::numeric_limits<double>::infinity());
}

TEST(SeqLoglikTest, IntervenedExamples) {
  const auto p1 = biased_p1();
  EXPECT_NEAR(seq_loglik_intervened(p1, one_step(1, 1)), std::log(0.6), 1e-15);
  EXPECT_EQ(seq_loglik_intervened(p1, History()), 0.0);
  EXPECT_NEAR(seq_loglik_intervened(p1, History({{0, 1}, {1, 1}})),
              std::log(0.6 * 0.6), 1e-15);
  // The pending action is an intervention too.
  EXPECT_EQ(seq_loglik_intervened(p1, History({}, 1)), 0.0);
}

TEST(SeqLoglikTest, OutOfRangeSymbolThrows) {
  EXPECT_THROW(seq_loglik_full(biased_p1(), one_step(2, 0)), InvalidArgument);
}

TEST(SeqLoglikProperty, FullEqualsIntervenedPlusActionFactors) {
  CounterRng rng(17);
  std::vector<MemorylessModel> models{biased_p1(), complement(biased_p1())};
  for (int i = 0; i < 5; ++i) {
    models.push_back(make_memoryless(testing::random_distribution(rng, 2),
                                     testing::random_distribution(rng, 2)));
  }
  for (const auto& m : models) {
    for (std::size_t len = 0; len <= 4; ++len) {
      for (const auto& h : binary_histories(len)) {
        double action_part = 0.0;
        for (const auto& x : h.steps()) action_part += std::log(m.pa()[x.action]);
        EXPECT_NEAR(seq_loglik_full(m, h),
                    seq_loglik_intervened(m, h) + action_part, 1e-12);
      }
    }
  }
}

TEST(SeqLoglikProperty, IntervenedIsPermutationInvariant) {
  CounterRng rng(23);
  const auto m = make_memoryless(testing::random_distribution(rng, 2),
                                 testing::random_distribution(rng, 2));
  for (const auto& h : binary_histories(4)) {
    std::vector<Interaction> steps(h.steps().begin(), h.steps().end());
    const double base = seq_loglik_intervened(m, h);
    std::sort(steps.begin(), steps.end(), [](const auto& x, const auto& y) {
      return x.observation < y.observation;
    });
    // Reversing also rearranges the (action, observation) pairing.
    std::vector<Interaction> shuffled = steps;
    std::reverse(shuffled.begin(), shuffled.end());
    for (auto& x : shuffled) x.action = 1 - x.action;
    EXPECT_NEAR(seq_loglik_intervened(m, History(steps)), base, 1e-12);
    EXPECT_NEAR(seq_loglik_intervened(m, History(shuffled)), base, 1e-12);
  }
}

TEST(SeqLoglikProperty, ProbabilityConservation) {
  CounterRng rng(29);
  // History-dependent model: acts like the previous observation with 0.8.
  const testing::LambdaModel sticky(
      2, 2,
      [](std::span<const Interaction> past) {
        if (past.empty()) return Distribution({0.5, 0.5});
        return past.back().observation == 0 ? Distribution({0.8, 0.2})
                                            : Distribution({0.2, 0.8});
      },
      [](std::span<const Interaction> past, Symbol a) {
        const double flip = past.size() % 2 == 0 ? 0.3 : 0.6;
        return a == 0 ? Distribution({flip, 1 - flip}) : Distribution({1 - flip, flip});
      });
  const auto random_model = make_memoryless(testing::random_distribution(rng, 2),
                                            testing::random_distribution(rng, 2));
  for (const IOModel* m :
       std::vector<const IOModel*>{&sticky, &random_model}) {
    for (std::size_t len = 0; len <= 4; ++len) {
      double total = 0.0;
      for (const auto& h : binary_histories(len)) total += std::exp(seq_loglik_full(*m, h));
      EXPECT_NEAR(total, 1.0, 1e-12) << "length " << len;
    }
  }
}

TEST(InteractionSystemTest, GenerativeDistribution) {
  const auto suite = biased_pair_suite();
  const InteractionSystem sys(suite[0], suite[1]);
  // G takes actions from the agent (p0) and observations from the env (p1).
  EXPECT_NEAR(sys.log_prob(one_step(0, 1)), std::log(0.9 * 0.6), 1e-15);
  for (std::size_t len = 0; len <= 3; ++len) {
    double total = 0.0;
    for (const auto& h : binary_histories(len)) total += std::exp(sys.log_prob(h));
    EXPECT_NEAR(total, 1.0, 1e-12);
  }

  CounterRng a(RunKey{3, 1});
  CounterRng b(RunKey{3, 1});
  const auto ha = sys.generate(50, a);
  EXPECT_EQ(ha.length(), 50u);
  EXPECT_EQ(ha, sys.generate(50, b));
}

TEST(InteractionSystemTest, AlphabetMismatchRejected) {
  auto binary = std::make_shared<MemorylessModel>(biased_p1());
  auto ternary = std::make_shared<MemorylessModel>(
      make_memoryless(Distribution::uniform(3), Distribution({0.5, 0.5})));
  EXPECT_THROW(InteractionSystem(binary, ternary), InvalidArgument);
}

}  // namespace
}  // namespace bcr
