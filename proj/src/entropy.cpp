#include "lowertail/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace lowertail {

namespace {

void validate_mass(std::span<const double> mass, const char* what) {
  if (mass.empty()) throw DomainError(std::string(what) + ": empty support");
  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw DomainError(std::string(what) + ": masses must be finite and nonnegative");
    }
    total += m;
  }
  if (std::abs(total - 1.0) > kMassTolerance * std::max<double>(1.0, mass.size())) {
    throw DomainError(std::string(what) + ": masses must sum to 1");
  }
}

void require_open_unit(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(std::string(name) + " must lie strictly between 0 and 1");
  }
}

void require_same_support(const FiniteDistribution& P, const FiniteDistribution& Q) {
  if (P.support_size() != Q.support_size()) {
    throw DomainError("distributions have different support sizes");
  }
}

double binary_entropy(double q) noexcept { return -xlogx(q) - xlogx(1.0 - q); }

}  // namespace

BernoulliParam::BernoulliParam(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) throw DomainError("Bernoulli parameter outside [0,1]");
}

FiniteDistribution::FiniteDistribution(std::vector<double> mass) : mass_(std::move(mass)) {
  validate_mass(mass_, "FiniteDistribution");
}

FiniteDistribution FiniteDistribution::uniform(std::size_t n) {
  if (n == 0) throw DomainError("uniform: empty support");
  return FiniteDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

FiniteDistribution FiniteDistribution::point_mass(std::size_t n, std::size_t at) {
  if (at >= n) throw DomainError("point_mass: index out of range");
  std::vector<double> m(n, 0.0);
  m[at] = 1.0;
  return FiniteDistribution(std::move(m));
}

FiniteDistribution FiniteDistribution::bernoulli(double q) {
  BernoulliParam checked(q);
  return FiniteDistribution({1.0 - checked.value(), checked.value()});
}

double FiniteDistribution::probability(std::span<const std::size_t> event) const {
  double total = 0.0;
  for (std::size_t i : event) {
    if (i >= mass_.size()) throw DomainError("event index out of range");
    total += mass_[i];
  }
  return total;
}

FiniteDistribution FiniteDistribution::conditioned_on(std::span<const std::size_t> event) const {
  std::vector<double> m(mass_.size(), 0.0);
  for (std::size_t i : event) {
    if (i >= mass_.size()) throw DomainError("event index out of range");
    m[i] = mass_[i];
  }
  const double total = std::accumulate(m.begin(), m.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("conditioning on an event of probability zero");
  for (double& x : m) x /= total;
  return FiniteDistribution(std::move(m));
}

JointBinaryDistribution::JointBinaryDistribution(std::vector<double> zero_row,
                                                 std::vector<double> one_row)
    : zero_(std::move(zero_row)), one_(std::move(one_row)) {
  if (zero_.size() != one_.size()) throw DomainError("joint rows differ in length");
  std::vector<double> all(zero_);
  all.insert(all.end(), one_.begin(), one_.end());
  validate_mass(all, "JointBinaryDistribution");
}

JointBinaryDistribution JointBinaryDistribution::from_conditionals(
    std::span<const double> z_mass, std::span<const double> one_given_z) {
  if (z_mass.size() != one_given_z.size()) throw DomainError("size mismatch");
  std::vector<double> zero(z_mass.size()), one(z_mass.size());
  for (std::size_t z = 0; z < z_mass.size(); ++z) {
    BernoulliParam c(one_given_z[z]);
    one[z] = z_mass[z] * c.value();
    zero[z] = z_mass[z] - one[z];
  }
  return JointBinaryDistribution(std::move(zero), std::move(one));
}

double JointBinaryDistribution::conditional_one(std::size_t z) const {
  const double total = z_mass(z);
  if (total <= 0.0) return 0.0;
  return std::clamp(one_[z] / total, 0.0, 1.0);
}

double JointBinaryDistribution::mean() const {
  return std::clamp(std::accumulate(one_.begin(), one_.end(), 0.0), 0.0, 1.0);
}

FiniteDistribution JointBinaryDistribution::x_marginal() const {
  const double mu = mean();
  return FiniteDistribution({1.0 - mu, mu});
}

FiniteDistribution JointBinaryDistribution::z_marginal() const {
  std::vector<double> m(alphabet_size());
  for (std::size_t z = 0; z < m.size(); ++z) m[z] = z_mass(z);
  return FiniteDistribution(std::move(m));
}

FiniteDistribution JointBinaryDistribution::flattened() const {
  std::vector<double> m(zero_);
  m.insert(m.end(), one_.begin(), one_.end());
  return FiniteDistribution(std::move(m));
}

FiniteDistribution JointBinaryDistribution::product_of_marginals() const {
  const double mu = mean();
  const std::size_t m = alphabet_size();
  std::vector<double> out(2 * m);
  for (std::size_t z = 0; z < m; ++z) {
    out[z] = (1.0 - mu) * z_mass(z);
    out[m + z] = mu * z_mass(z);
  }
  return FiniteDistribution(std::move(out));
}

double xlogx(double x) noexcept { return x == 0.0 ? 0.0 : x * std::log(x); }

double log_sum_exp(std::span<const double> values) noexcept {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

double bernoulli_divergence(double q, double p) noexcept {
  if (q == 0.0) return -std::log1p(-p);
  if (q == 1.0) return -std::log(p);
  return q * std::log(q / p) + (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
}

double relative_entropy_bernoulli(BernoulliParam q, BernoulliParam p) {
  require_open_unit(p.value(), "p");
  return std::max(0.0, bernoulli_divergence(q.value(), p.value()));
}

Derivatives relative_entropy_bernoulli_derivatives(BernoulliParam q, BernoulliParam p) {
  require_open_unit(p.value(), "p");
  require_open_unit(q.value(), "q");
  const double qv = q.value();
  const double pv = p.value();
  return {std::log(qv / pv) - std::log((1.0 - qv) / (1.0 - pv)), 1.0 / qv + 1.0 / (1.0 - qv)};
}

double kl_divergence(const FiniteDistribution& P, const FiniteDistribution& Q) {
  require_same_support(P, Q);
  double total = 0.0;
  for (std::size_t x = 0; x < P.support_size(); ++x) {
    const double px = P[x];
    if (px == 0.0) continue;
    if (Q[x] == 0.0) throw SupportError("P is not absolutely continuous with respect to Q");
    total += px * std::log(px / Q[x]);
  }
  return std::max(0.0, total);
}

double shannon_entropy(const FiniteDistribution& P) {
  double h = 0.0;
  for (double m : P.mass()) h -= xlogx(m);
  return std::max(0.0, h);
}

double conditional_entropy(const JointBinaryDistribution& J) {
  double h = 0.0;
  for (std::size_t z = 0; z < J.alphabet_size(); ++z) {
    const double w = J.z_mass(z);
    if (w <= 0.0) continue;
    h += w * binary_entropy(J.conditional_one(z));
  }
  return std::max(0.0, h);
}

double total_variation(const FiniteDistribution& P, const FiniteDistribution& Q) {
  require_same_support(P, Q);
  double acc = 0.0;
  for (std::size_t x = 0; x < P.support_size(); ++x) acc += std::abs(P[x] - Q[x]);
  return std::min(1.0, 0.5 * acc);
}

InequalitySides pinsker_gap(const JointBinaryDistribution& J) {
  const double tv = total_variation(J.flattened(), J.product_of_marginals());
  const double gap = shannon_entropy(J.x_marginal()) - conditional_entropy(J);
  return {tv * tv, 2.0 * gap};
}

double log_sum_gap(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("log_sum_gap: size mismatch");
  double lhs = 0.0;
  double asum = 0.0;
  double bsum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] >= 0.0) || !(b[i] >= 0.0)) throw DomainError("log_sum_gap: negative entry");
    asum += a[i];
    bsum += b[i];
    if (a[i] == 0.0) continue;
    if (b[i] == 0.0) throw SupportError("log_sum_gap: a_i > 0 where b_i = 0");
    lhs += a[i] * std::log(a[i] / b[i]);
  }
  const double rhs = asum == 0.0 ? 0.0 : asum * std::log(asum / bsum);
  return lhs - rhs;
}

double p_divergence(const FiniteDistribution& P, BernoulliParam p) {
  require_open_unit(p.value(), "p");
  const std::size_t n = P.support_size();
  if ((n & (n - 1)) != 0) throw DomainError("p_divergence: support size must be a power of two");
  const double log_p = std::log(p.value());
  const double log_1mp = std::log1p(-p.value());
  double total = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const double px = P[x];
    if (px == 0.0) continue;
    const int ones = std::popcount(x);
    const int bits = std::countr_zero(n);
    const double log_q = ones * log_p + (bits - ones) * log_1mp;
    total += px * (std::log(px) - log_q);
  }
  return std::max(0.0, total);
}

double conditional_p_divergence(const JointBinaryDistribution& J, BernoulliParam p) {
  require_open_unit(p.value(), "p");
  double total = 0.0;
  for (std::size_t z = 0; z < J.alphabet_size(); ++z) {
    const double w = J.z_mass(z);
    if (w <= 0.0) continue;
    total += w * bernoulli_divergence(J.conditional_one(z), p.value());
  }
  return total;
}

InequalitySides key_lemma_gap(const JointBinaryDistribution& J,
                              const std::vector<std::vector<std::size_t>>& events,
                              BernoulliParam p, double p_prime) {
  require_open_unit(p.value(), "p");
  if (!(p_prime > 0.0)) throw DomainError("key_lemma_gap: p' must be positive");
  const std::size_t m = J.alphabet_size();
  for (std::size_t z = 0; z < m; ++z) {
    if (J.z_mass(z) > 0.0 && J.conditional_one(z) > p_prime + kMassTolerance) {
      throw DomainError("key_lemma_gap: E[X | Z] exceeds p'");
    }
  }

  const double mu = J.mean();
  const double lhs =
      conditional_p_divergence(J, p) - bernoulli_divergence(mu, p.value());

  std::vector<std::vector<char>> member(events.size(), std::vector<char>(m, 0));
  for (std::size_t i = 0; i < events.size(); ++i) {
    for (std::size_t z : events[i]) {
      if (z >= m) throw DomainError("key_lemma_gap: event outside the Z alphabet");
      member[i][z] = 1;
    }
  }

  double first = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    double mass = 0.0;
    double ones = 0.0;
    for (std::size_t z = 0; z < m; ++z) {
      if (!member[i][z]) continue;
      mass += J.z_mass(z);
      ones += J.mass(1, z);
    }
    if (mass <= 0.0) continue;
    const double d = ones / mass - mu;
    first += d * d * mass;
  }
  double overlap = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    for (std::size_t j = i + 1; j < events.size(); ++j) {
      for (std::size_t z = 0; z < m; ++z) {
        if (member[i][z] && member[j][z]) overlap += J.z_mass(z);
      }
    }
  }
  return {lhs, first / (2.0 * p_prime) - 0.5 * p_prime * overlap};
}

BinomialTail binomial_tail_bound(int n, BernoulliParam p, BernoulliParam q) {
  if (n <= 0) throw DomainError("binomial_tail_bound: n must be positive");
  const double pv = p.value();
  const double qv = q.value();
  require_open_unit(pv, "p");
  if (qv > pv) throw DomainError("binomial_tail_bound: requires q <= p");

  // n*q is compared with a small slack so that grid values like 0.15*20 count as 3.
  const int kmax = std::min(n, static_cast<int>(std::floor(n * qv + 1e-9)));
  const double log_p = std::log(pv);
  const double log_1mp = std::log1p(-pv);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(kmax) + 1);
  for (int k = 0; k <= kmax; ++k) {
    const double log_choose =
        k == 0 ? 0.0 : std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    terms.push_back(log_choose + (k == 0 ? 0.0 : k * log_p) + (n - k) * log_1mp);
  }
  BinomialTail out{};
  out.log_exact = log_sum_exp(terms);
  out.log_bound = -n * bernoulli_divergence(qv, pv);
  out.exact = std::exp(out.log_exact);
  out.bound = std::exp(out.log_bound);
  return out;
}

}  // namespace lowertail
