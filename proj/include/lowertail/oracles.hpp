#pragma once

// Reference estimates of Pr(e(H[R]) <= threshold) for R ~ Ber(p)^V, plus the
// exact conditional quantities of the tail-conditioned law used by the
// property checks.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lowertail/builders.hpp"
#include "lowertail/entropy.hpp"
#include "lowertail/hypergraph.hpp"
#include "lowertail/variational.hpp"

namespace lowertail {

/// The tail event test shared by every oracle: value <= threshold, with a
/// relative slack of 1e-9 so that accumulated weights equal to the threshold
/// are counted as inside.
[[nodiscard]] bool in_tail(double value, double threshold) noexcept;

enum class EstimateMethod { exact, mc, tilted_certificate };

[[nodiscard]] std::string to_string(EstimateMethod m);

struct TailEstimate {
  double log_prob;  ///< natural log; -inf when the estimate is 0
  EstimateMethod method;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> seed;
};

inline constexpr std::size_t kExactVertexBudget = 28;
inline constexpr std::size_t kConditionalVertexBudget = 20;

/// Exhaustive sum over all 2^v subsets in Gray-code order. `shards` splits the
/// enumeration over the top bits; counts are integers so the merge is exact.
[[nodiscard]] TailEstimate exact_lower_tail(const WeightedHypergraph& H, BernoulliParam p,
                                            const TailSpec& spec, unsigned shards = 1);

/// log Pr(e(H[R]) <= t) for each absolute threshold t, in one enumeration.
[[nodiscard]] std::vector<double> exact_lower_tail_sweep(const WeightedHypergraph& H,
                                                         BernoulliParam p,
                                                         std::span<const double> thresholds,
                                                         unsigned shards = 1);

/// Plain Monte Carlo with a Wilson 95% interval on the log scale. A zero
/// frequency gives log_prob = -inf and ci_high = log(3 / samples).
[[nodiscard]] TailEstimate mc_lower_tail(const WeightedHypergraph& H, BernoulliParam p,
                                         const TailSpec& spec, std::uint64_t samples,
                                         std::uint64_t seed, unsigned workers = 1);

/// J(y) = sum_{y_v=1} log(q_v/p) + sum_{y_v=0} log((1-q_v)/(1-p)).
[[nodiscard]] double importance_weight(const ProductMeasure& q, BernoulliParam p,
                                       const VertexSet& y);

/// K(p0) = max{2((2-p0)/(1-p0))^2, 8(8/e^2 + log^2(1/(1-p0)))}.
[[nodiscard]] double variance_bound_constant(double p0);

/// Variance of the single-coordinate log likelihood ratio under Ber(q):
/// q(1-q)(log(q/p) - log((1-q)/(1-p)))^2, and 0 at q in {0, 1}.
[[nodiscard]] double log_ratio_variance(double q, double p);

struct TiltCertificate {
  ProductMeasure q_star;
  double epsilon;
  double phi_hat;       ///< sum_v i_p(q*_v)
  double K_var;         ///< variance_bound_constant(p)
  double C_prime;       ///< K_var / (2 eps^2)
  double C;             ///< C_prime + log(2/eps)
  double j_threshold;   ///< (1+eps) phi_hat + C_prime
  double pr_y1;         ///< Pr(Y' in Y1)
  double pr_not_y2;     ///< Pr(Y' not in Y2)
  double empirical_Y1Y2;
  double log_lower_bound;  ///< -inf when vacuous
  bool exact;
  bool vacuous;
  std::optional<double> confidence;  ///< set when the probability was sampled
};

/// Lower bound on log Pr(tail) from tilting towards q_star. Exact enumeration
/// under q_star when v <= 20, otherwise sampling with a one-sided 95%
/// Clopper-Pearson bound. q_star must satisfy f(q*) <= (1-eps) threshold and
/// q* <= p.
[[nodiscard]] TiltCertificate tilted_lower_bound_certificate(
    const WeightedHypergraph& H, BernoulliParam p, const TailSpec& spec, double epsilon,
    const ProductMeasure& q_star, std::uint64_t samples = 100000, std::uint64_t seed = 1);

/// Law of R conditioned on the tail event, over bitmask-indexed states.
/// v <= 20.
[[nodiscard]] FiniteDistribution tail_conditioned_law(const WeightedHypergraph& H,
                                                      BernoulliParam p, const TailSpec& spec);

/// Ber(p)^n over bitmask-indexed states; n <= 20.
[[nodiscard]] FiniteDistribution product_law(std::size_t n, BernoulliParam p);

/// E[prod_{a in A} Y_a | tail, Y_w = y_W[i] for w = W[i]].
[[nodiscard]] double conditional_moment(const WeightedHypergraph& H, BernoulliParam p,
                                        const TailSpec& spec, const VertexSet& W,
                                        std::span<const int> y_W, const VertexSet& A);

/// sum_{v not in W} I_p(Y_v | Y_W) under the tail-conditioned law.
[[nodiscard]] double conditional_divergence_profile(const WeightedHypergraph& H,
                                                    BernoulliParam p, const TailSpec& spec,
                                                    const VertexSet& W);

struct HarrisBound {
  double log_bound;
  std::vector<std::size_t> subpattern_edges;  ///< edges of the maximising F
  double copies;                              ///< copies of F in K_n^(s), enumerated
};

/// max over subpatterns F of N_F log(1 - p^{e_F}), N_F the number of copies of
/// F in the complete s-uniform hypergraph on [n]. A lower bound on
/// log Pr(no copy of H).
[[nodiscard]] HarrisBound harris_zero_log_bound(const PatternHypergraph& H, std::size_t n,
                                                BernoulliParam p);

}  // namespace lowertail
