#pragma once

// Information-theoretic primitives over finite alphabets: Shannon entropy,
// relative entropy (KL divergence), the Bernoulli divergence i_p(q) and its
// conditional forms, plus evaluators that expose both sides of the classical
// inequalities (Pinsker, log-sum, the Bernoulli tail bound) so callers can
// check them numerically.
//
// All logarithms are natural. The convention 0 * log 0 = 0 is applied
// explicitly wherever a mass can vanish.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lowertail {

/// Raised when an argument violates a documented precondition.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when P is not absolutely continuous w.r.t. Q (or when a log-sum
/// term has a_i > 0 with b_i = 0).
class SupportError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kMassTolerance = 1e-12;

/// A success probability in [0, 1].
class BernoulliParam {
 public:
  explicit BernoulliParam(double value);
  [[nodiscard]] double value() const noexcept { return value_; }

 private:
  double value_;
};

/// A probability vector on {0, ..., n-1}.
class FiniteDistribution {
 public:
  explicit FiniteDistribution(std::vector<double> mass);

  static FiniteDistribution uniform(std::size_t n);
  static FiniteDistribution point_mass(std::size_t n, std::size_t at);
  /// Two-point law with mass q at index 1.
  static FiniteDistribution bernoulli(double q);

  [[nodiscard]] std::size_t support_size() const noexcept { return mass_.size(); }
  [[nodiscard]] std::span<const double> mass() const noexcept { return mass_; }
  [[nodiscard]] double operator[](std::size_t i) const { return mass_[i]; }

  /// The law conditioned on landing in `event` (a list of indices).
  [[nodiscard]] FiniteDistribution conditioned_on(std::span<const std::size_t> event) const;
  /// Probability of an event given as a list of indices.
  [[nodiscard]] double probability(std::span<const std::size_t> event) const;

 private:
  std::vector<double> mass_;
};

/// Joint law of (X, Z) with X binary and Z on a finite alphabet {0..m-1}.
class JointBinaryDistribution {
 public:
  /// zero_row[z] = Pr(X = 0, Z = z), one_row[z] = Pr(X = 1, Z = z).
  JointBinaryDistribution(std::vector<double> zero_row, std::vector<double> one_row);

  /// Builds the joint from Pr(Z = z) and Pr(X = 1 | Z = z).
  static JointBinaryDistribution from_conditionals(std::span<const double> z_mass,
                                                   std::span<const double> one_given_z);

  [[nodiscard]] std::size_t alphabet_size() const noexcept { return zero_.size(); }
  [[nodiscard]] double mass(int x, std::size_t z) const { return x == 0 ? zero_[z] : one_[z]; }
  [[nodiscard]] double z_mass(std::size_t z) const { return zero_[z] + one_[z]; }
  /// Pr(X = 1 | Z = z); zero when Pr(Z = z) = 0.
  [[nodiscard]] double conditional_one(std::size_t z) const;
  /// Pr(X = 1).
  [[nodiscard]] double mean() const;

  [[nodiscard]] FiniteDistribution x_marginal() const;
  [[nodiscard]] FiniteDistribution z_marginal() const;
  /// Flattened joint, index x * m + z.
  [[nodiscard]] FiniteDistribution flattened() const;
  /// Law of X x Z (independent copies of the marginals), flattened like above.
  [[nodiscard]] FiniteDistribution product_of_marginals() const;

 private:
  std::vector<double> zero_;
  std::vector<double> one_;
};

struct Derivatives {
  double first;
  double second;
};

/// Both sides of an inequality; which direction holds is documented per call.
struct InequalitySides {
  double lhs;
  double rhs;
};

struct BinomialTail {
  double bound;      ///< exp(-n i_p(q))
  double exact;      ///< Pr(Bin(n, p) <= n q)
  double log_bound;
  double log_exact;
};

/// i_p(q) without argument checks. Requires 0 < p < 1, 0 <= q <= 1.
[[nodiscard]] double bernoulli_divergence(double q, double p) noexcept;

/// x log x with 0 log 0 = 0.
[[nodiscard]] double xlogx(double x) noexcept;

/// log(sum exp(v)) with a running max; -inf for an empty or all -inf input.
[[nodiscard]] double log_sum_exp(std::span<const double> values) noexcept;

// i_p(q) = q log(q/p) + (1-q) log((1-q)/(1-p)). Throws DomainError for p in {0, 1}.
[[nodiscard]] double relative_entropy_bernoulli(BernoulliParam q, BernoulliParam p);

/// (i_p'(q), i_p''(q)); both endpoints of q are rejected.
[[nodiscard]] Derivatives relative_entropy_bernoulli_derivatives(BernoulliParam q,
                                                                 BernoulliParam p);

[[nodiscard]] double kl_divergence(const FiniteDistribution& P, const FiniteDistribution& Q);

[[nodiscard]] double shannon_entropy(const FiniteDistribution& P);

/// H(X | Z).
[[nodiscard]] double conditional_entropy(const JointBinaryDistribution& J);

[[nodiscard]] double total_variation(const FiniteDistribution& P, const FiniteDistribution& Q);

/// lhs = d_TV((X,Z), X x Z)^2, rhs = 2 (H(X) - H(X|Z)). lhs <= rhs.
[[nodiscard]] InequalitySides pinsker_gap(const JointBinaryDistribution& J);

/// sum a_i log(a_i/b_i) - a log(a/b) with a = sum a_i, b = sum b_i.
[[nodiscard]] double log_sum_gap(std::span<const double> a, std::span<const double> b);

/// D_KL(P || Ber(p)^k) for a law on {0,1}^k; index bit j is coordinate j.
[[nodiscard]] double p_divergence(const FiniteDistribution& P, BernoulliParam p);

/// I_p(X | Z) = E_Z[ i_p(Pr(X = 1 | Z)) ].
[[nodiscard]] double conditional_p_divergence(const JointBinaryDistribution& J, BernoulliParam p);

/// Key lemma evaluator. Each event is a subset of the Z alphabet. Requires
/// Pr(X = 1 | Z = z) <= p_prime for every z of positive mass.
///   lhs = I_p(X|Z) - I_p(X)
///   rhs = 1/(2p') sum_i (Pr(X=1|E_i) - mu)^2 Pr(E_i) - p'/2 sum_{i<j} Pr(E_i n E_j)
/// and lhs >= rhs.
[[nodiscard]] InequalitySides key_lemma_gap(const JointBinaryDistribution& J,
                                            const std::vector<std::vector<std::size_t>>& events,
                                            BernoulliParam p, double p_prime);

/// Requires 0 <= q <= p < 1 and p > 0.
[[nodiscard]] BinomialTail binomial_tail_bound(int n, BernoulliParam p, BernoulliParam q);

}  // namespace lowertail
