#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lowertail/builders.hpp"
#include "lowertail/oracles.hpp"
#include "reference.hpp"

using namespace lowertail;

namespace {

// E[prod_A Y | tail, Y_W = y] by direct summation.
double brute_moment(const WeightedHypergraph& H, double p, double t, std::uint64_t W,
                    std::uint64_t y, std::uint64_t A) {
  const std::size_t n = H.vertex_count();
  double num = 0.0;
  double den = 0.0;
  for (std::uint64_t R = 0; R < (std::uint64_t{1} << n); ++R) {
    if ((R & W) != y) continue;
    if (!in_tail(ref::induced(H, R), t)) continue;
    const double w = ref::state_probability(R, n, p);
    den += w;
    if ((R & A) == A) num += w;
  }
  return num / den;
}

}  // namespace

TEST(InTail, RelativeSlack) {
  EXPECT_TRUE(in_tail(3.0, 3.0));
  EXPECT_TRUE(in_tail(3.0 + 1e-10, 3.0));
  EXPECT_FALSE(in_tail(3.001, 3.0));
  EXPECT_TRUE(in_tail(0.0, 0.0));
  EXPECT_FALSE(in_tail(1.0, 0.0));
}

TEST(ExactLowerTail, MatchesDirectSummation) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 40; ++trial) {
    const auto H = ref::random_hypergraph(rng, 4 + trial % 9, 1 + trial % 3, 3 + trial % 11, true);
    const BernoulliParam p(0.1 + 0.02 * trial);
    const auto spec = TailSpec::relative(0.1 * (trial % 11));
    const double t = spec.threshold(H, p);
    const auto est = exact_lower_tail(H, p, spec);
    EXPECT_EQ(est.method, EstimateMethod::exact);
    EXPECT_NEAR(std::exp(est.log_prob), ref::tail_probability(H, p.value(), t), 1e-12);
  }
}

TEST(ExactLowerTail, ShardingIsExact) {
  std::mt19937_64 rng(52);
  const auto H = ref::random_hypergraph(rng, 14, 3, 30, true);
  const BernoulliParam p(0.4);
  const auto spec = TailSpec::relative(0.5);
  const double one = exact_lower_tail(H, p, spec, 1).log_prob;
  EXPECT_EQ(one, exact_lower_tail(H, p, spec, 4).log_prob);
  EXPECT_EQ(one, exact_lower_tail(H, p, spec, 3).log_prob);
}

TEST(ExactLowerTail, KnownValues) {
  const auto K3 = PatternHypergraph::complete_graph(3);
  // A single edge of size 3: Pr(X <= 0) = 1 - p^3.
  const auto single = copy_hypergraph(K3, 3);
  EXPECT_NEAR(exact_lower_tail(single, BernoulliParam(0.5), TailSpec::absolute(0.0)).log_prob,
              std::log(0.875), 1e-15);
  EXPECT_EQ(exact_lower_tail(single, BernoulliParam(0.5), TailSpec::relative(1.0 / 0.125)).log_prob,
            0.0);
  // Triangle-free graphs on 4 labelled vertices: 41 of 64.
  const auto G4 = copy_hypergraph(K3, 4);
  EXPECT_NEAR(exact_lower_tail(G4, BernoulliParam(0.5), TailSpec::absolute(0.0)).log_prob,
              std::log(41.0 / 64.0), 1e-14);
}

TEST(ExactLowerTail, SweepMatchesSingleCalls) {
  const auto G = copy_hypergraph(PatternHypergraph::complete_graph(3), 5);
  const BernoulliParam p(0.3);
  const std::vector<double> ts{0, 1, 2, 3.5, 10};
  const auto sweep = exact_lower_tail_sweep(G, p, ts, 2);
  ASSERT_EQ(sweep.size(), ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_NEAR(sweep[i], exact_lower_tail(G, p, TailSpec::absolute(ts[i])).log_prob, 1e-13);
  }
  EXPECT_NEAR(sweep.back(), 0.0, 1e-12);
}

TEST(ExactLowerTail, BudgetEnforced) {
  const WeightedHypergraph big(kExactVertexBudget + 1, 1, {Edge{{0}, 1.0}});
  EXPECT_THROW((void)exact_lower_tail(big, BernoulliParam(0.5), TailSpec::relative(0.5)),
               BudgetError);
}

TEST(ExactLowerTail, ClosureWithConditionedDivergence) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const auto H = ref::random_hypergraph(rng, 3 + trial % 8, 2, 2 + trial % 9, true);
    const BernoulliParam p(0.2 + 0.03 * trial);
    const auto spec = TailSpec::relative(0.05 * trial);
    const double lp = exact_lower_tail(H, p, spec).log_prob;
    const auto law = tail_conditioned_law(H, p, spec);
    const auto prior = product_law(H.vertex_count(), p);
    EXPECT_NEAR(kl_divergence(law, prior), -lp, 1e-10 * std::max(1.0, -lp));
    EXPECT_NEAR(p_divergence(law, p), -lp, 1e-10 * std::max(1.0, -lp));
  }
}

TEST(MonteCarlo, ReproducibleAcrossWorkers) {
  const auto G = copy_hypergraph(PatternHypergraph::complete_graph(3), 5);
  const BernoulliParam p(0.5);
  const auto spec = TailSpec::relative(0.5);
  const auto a = mc_lower_tail(G, p, spec, 20000, 7, 1);
  const auto b = mc_lower_tail(G, p, spec, 20000, 7, 3);
  EXPECT_EQ(a.log_prob, b.log_prob);
  EXPECT_EQ(a.samples, std::optional<std::uint64_t>(20000));
  EXPECT_EQ(a.seed, std::optional<std::uint64_t>(7));
  ASSERT_TRUE(a.ci_low && a.ci_high);
  EXPECT_LE(*a.ci_low, a.log_prob);
  EXPECT_GE(*a.ci_high, a.log_prob);
  EXPECT_NE(a.log_prob, mc_lower_tail(G, p, spec, 20000, 8).log_prob);
}

TEST(MonteCarlo, CoversExactValue) {
  const auto G = copy_hypergraph(PatternHypergraph::complete_graph(3), 5);
  const BernoulliParam p(0.5);
  const auto spec = TailSpec::relative(0.6);
  const double exact = exact_lower_tail(G, p, spec).log_prob;
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto est = mc_lower_tail(G, p, spec, 2000, seed);
    covered += (*est.ci_low <= exact && exact <= *est.ci_high) ? 1 : 0;
  }
  EXPECT_GE(covered, 93);
}

TEST(MonteCarlo, ZeroCount) {
  const auto G = copy_hypergraph(PatternHypergraph::complete_graph(3), 6);
  const auto est = mc_lower_tail(G, BernoulliParam(0.99), TailSpec::absolute(0.0), 1000, 3);
  EXPECT_EQ(est.log_prob, -std::numeric_limits<double>::infinity());
  EXPECT_NEAR(*est.ci_high, std::log(3.0 / 1000.0), 1e-15);
  EXPECT_THROW((void)mc_lower_tail(G, BernoulliParam(0.5), TailSpec::relative(0.5), 50, 1),
               DomainError);
}

TEST(ImportanceWeight, MatchesDefinition) {
  const ProductMeasure q(std::vector<double>{0.1, 0.3, 0.0});
  const BernoulliParam p(0.4);
  const double expected = std::log(0.1 / 0.4) + std::log(0.7 / 0.6) + std::log(1.0 / 0.6);
  EXPECT_NEAR(importance_weight(q, p, VertexSet{0}), expected, 1e-15);
  EXPECT_EQ(importance_weight(q, p, VertexSet{2}), -std::numeric_limits<double>::infinity());
}

TEST(VarianceConstant, FrozenValuesAndBound) {
  EXPECT_NEAR(variance_bound_constant(0.5), 18.0, 1e-12);
  const double l = std::log(10.0);
  EXPECT_NEAR(variance_bound_constant(0.9), std::max(2.0 * 121.0, 8.0 * (8.0 / std::exp(2.0) + l * l)),
              1e-9);
  EXPECT_EQ(log_ratio_variance(0.0, 0.3), 0.0);
  for (double p0 : {0.5, 0.9}) {
    const double K = variance_bound_constant(p0);
    for (int i = 1; i <= 50; ++i) {
      const double p = p0 * i / 50.0;
      for (int j = 0; j <= 50; ++j) {
        const double q = p * j / 50.0;
        EXPECT_LE(log_ratio_variance(q, p), K * ref::ip(q, p) + 1e-15);
      }
    }
  }
}

TEST(TiltCertificate, BelowExactOnTriangleCopies) {
  for (std::size_t n : {4, 5}) {
    const auto G = copy_hypergraph(PatternHypergraph::complete_graph(3), n);
    for (double p : {0.3, 0.5}) {
      for (double eta : {0.25, 0.5}) {
        const double eps = 0.3;
        const BernoulliParam bp(p);
        const auto spec = TailSpec::relative(eta);
        const auto q = solve_phi(G, bp, TailSpec::relative((1.0 - eps) * eta)).q_star;
        const auto cert = tilted_lower_bound_certificate(G, bp, spec, eps, q);
        EXPECT_TRUE(cert.exact);
        EXPECT_FALSE(cert.confidence.has_value());
        EXPECT_LE(cert.log_lower_bound, exact_lower_tail(G, bp, spec).log_prob);
        EXPECT_NEAR(cert.C, cert.K_var / (2 * eps * eps) + std::log(2 / eps), 1e-12);
        EXPECT_GE(cert.empirical_Y1Y2, 0.0);
        EXPECT_LE(cert.empirical_Y1Y2, 1.0);
      }
    }
  }
}

TEST(TiltCertificate, SampledPathFlagsConfidence) {
  std::mt19937_64 rng(54);
  const auto H = ref::random_hypergraph(rng, 22, 1, 22, false);
  const BernoulliParam p(0.5);
  const auto spec = TailSpec::relative(0.8);
  const auto q = solve_phi(H, p, TailSpec::relative(0.8 * 0.7)).q_star;
  const auto cert = tilted_lower_bound_certificate(H, p, spec, 0.3, q, 20000, 5);
  EXPECT_FALSE(cert.exact);
  ASSERT_TRUE(cert.confidence.has_value());
  EXPECT_NEAR(*cert.confidence, 0.95, 1e-12);
  EXPECT_LE(cert.log_lower_bound, exact_lower_tail(H, p, spec).log_prob);
}

TEST(TiltCertificate, RejectsInfeasibleTilt) {
  const auto G = copy_hypergraph(PatternHypergraph::complete_graph(3), 4);
  const BernoulliParam p(0.5);
  const auto spec = TailSpec::relative(0.5);
  EXPECT_THROW((void)tilted_lower_bound_certificate(G, p, spec, 0.3, ProductMeasure::constant(6, 0.5)),
               DomainError);
  EXPECT_THROW((void)tilted_lower_bound_certificate(G, p, spec, 0.3, ProductMeasure::constant(6, 0.6)),
               DomainError);
}

TEST(ConditionalMoment, MatchesBruteForceAndHarrisBound) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t v = 4 + trial % 7;
    const auto H = ref::random_hypergraph(rng, v, 2 + trial % 2, 3 + trial % 8, true);
    const BernoulliParam p(0.2 + 0.02 * trial);
    const auto spec = TailSpec::relative(0.3);
    const double t = spec.threshold(H, p);
    const std::uint64_t all = (std::uint64_t{1} << v) - 1;
    const std::uint64_t W = rng() & all & 0b111;
    const std::uint64_t A = rng() & all & ~W;
    std::uint64_t y = 0;
    std::vector<int> yW;
    for (Vertex w : VertexSet::from_mask(W)) {
      const int bit = static_cast<int>(rng() % 2);
      yW.push_back(bit);
      if (bit) y |= std::uint64_t{1} << w;
    }
    // Skip conditionings with empty support.
    const double expected = brute_moment(H, p.value(), t, W, y, A);
    if (std::isnan(expected)) continue;
    const double got =
        conditional_moment(H, p, spec, VertexSet::from_mask(W), yW, VertexSet::from_mask(A));
    EXPECT_NEAR(got, expected, 1e-12);
    EXPECT_LE(got, std::pow(p.value(), std::popcount(A)) + 1e-12);
  }
}

TEST(ConditionalMoment, TrivialCases) {
  const auto G = copy_hypergraph(PatternHypergraph::complete_graph(3), 4);
  const BernoulliParam p(0.3);
  const std::vector<int> none;
  EXPECT_NEAR(conditional_moment(G, p, TailSpec::relative(40.0), VertexSet{}, none, VertexSet{0, 1}),
              0.09, 1e-15);
  EXPECT_EQ(conditional_moment(G, p, TailSpec::relative(0.5), VertexSet{}, none, VertexSet{}), 1.0);
}

TEST(DivergenceProfile, BoundedByTailCost) {
  std::mt19937_64 rng(56);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t v = 4 + trial % 6;
    const auto H = ref::random_hypergraph(rng, v, 2, 3 + trial % 7, true);
    const BernoulliParam p(0.3 + 0.02 * trial);
    const auto spec = TailSpec::relative(0.4);
    const double cost = -exact_lower_tail(H, p, spec).log_prob;
    for (std::uint64_t W = 0; W < (std::uint64_t{1} << v); ++W) {
      if (std::popcount(W) > 3) continue;
      EXPECT_LE(conditional_divergence_profile(H, p, spec, VertexSet::from_mask(W)), cost + 1e-10);
    }
    // With W empty the profile is the sum of marginal divergences.
    const auto law = tail_conditioned_law(H, p, spec);
    double sum = 0.0;
    for (Vertex u = 0; u < v; ++u) {
      double m = 0.0;
      for (std::size_t R = 0; R < law.support_size(); ++R) m += ((R >> u) & 1U) ? law[R] : 0.0;
      sum += ref::ip(m, p.value());
    }
    EXPECT_NEAR(conditional_divergence_profile(H, p, spec, VertexSet{}), sum, 1e-10);
    EXPECT_NEAR(conditional_divergence_profile(H, p, spec, VertexSet::from_mask((1u << v) - 1)), 0.0,
                1e-15);
  }
}

TEST(HarrisZeroBound, SingleEdgeIsExactAndTriangleIsBelow) {
  const BernoulliParam p(0.3);
  const auto edge = harris_zero_log_bound(PatternHypergraph::single_edge(2), 6, p);
  EXPECT_NEAR(edge.log_bound, 15.0 * std::log(0.7), 1e-12);
  EXPECT_DOUBLE_EQ(edge.copies, 15.0);
  for (std::size_t n : {4, 5, 6}) {
    const auto K3 = PatternHypergraph::complete_graph(3);
    const auto G = copy_hypergraph(K3, n);
    const auto hb = harris_zero_log_bound(K3, n, p);
    EXPECT_LE(hb.log_bound, exact_lower_tail(G, p, TailSpec::absolute(0.0)).log_prob + 1e-12);
  }
}
