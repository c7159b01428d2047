#include "lowertail/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <boost/math/special_functions/beta.hpp>

#include "lowertail/rng.hpp"

namespace lowertail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kWilsonZ = 1.959963984540054;

double checked_p(BernoulliParam p) {
  const double v = p.value();
  if (!(v > 0.0 && v < 1.0)) throw DomainError("p must lie strictly between 0 and 1");
  return v;
}

// Visits the subsets R whose top `high_bits` bits equal `prefix`, in Gray-code
// order over the low bits, as visit(mask, |R|, e(H[R])). The induced weight is
// maintained from per-edge counts of vertices still missing from R.
template <typename Visit>
void enumerate_states(const WeightedHypergraph& H, std::uint64_t prefix, std::size_t high_bits,
                      Visit&& visit) {
  const std::size_t n = H.vertex_count();
  const std::size_t low_bits = n - high_bits;
  std::vector<std::uint32_t> missing(H.edge_count(), static_cast<std::uint32_t>(H.uniformity()));
  long double weight = 0.0L;
  std::uint64_t mask = 0;
  int size = 0;
  auto add = [&](Vertex v) {
    for (std::size_t e : H.incident_edges(v)) {
      if (--missing[e] == 0) weight += H.edge(e).weight;
    }
  };
  auto remove = [&](Vertex v) {
    for (std::size_t e : H.incident_edges(v)) {
      if (missing[e]++ == 0) weight -= H.edge(e).weight;
    }
  };
  for (std::size_t j = 0; j < high_bits; ++j) {
    if ((prefix >> j) & 1U) {
      const auto v = static_cast<Vertex>(low_bits + j);
      add(v);
      mask |= std::uint64_t{1} << v;
      ++size;
    }
  }
  visit(mask, size, static_cast<double>(weight));
  const std::uint64_t count = std::uint64_t{1} << low_bits;
  for (std::uint64_t i = 1; i < count; ++i) {
    const auto v = static_cast<Vertex>(std::countr_zero(i));
    const std::uint64_t bit = std::uint64_t{1} << v;
    if (mask & bit) {
      remove(v);
      --size;
    } else {
      add(v);
      ++size;
    }
    mask ^= bit;
    visit(mask, size, static_cast<double>(weight));
  }
}

template <typename Visit>
void enumerate_all_states(const WeightedHypergraph& H, Visit&& visit) {
  enumerate_states(H, 0, 0, std::forward<Visit>(visit));
}

// log of p^k (1-p)^(n-k) for k = 0..n.
std::vector<double> log_state_weights(std::size_t n, double p) {
  std::vector<double> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    out[k] = static_cast<double>(k) * std::log(p) + static_cast<double>(n - k) * std::log1p(-p);
  }
  return out;
}

std::uint64_t vertex_mask(const VertexSet& S, std::size_t n) {
  std::uint64_t m = 0;
  for (Vertex v : S) {
    if (v >= n) throw DomainError("vertex set has a vertex outside the hypergraph");
    m |= std::uint64_t{1} << v;
  }
  return m;
}

void require_conditional_budget(const WeightedHypergraph& H) {
  if (H.vertex_count() > kConditionalVertexBudget) {
    throw BudgetError("conditional enumeration needs v(H) <= 20");
  }
}

std::uint64_t induced_count(const WeightedHypergraph& H, const std::vector<char>& in_r,
                            double& weight) {
  weight = 0.0;
  std::uint64_t edges = 0;
  for (const Edge& e : H.edges()) {
    bool inside = true;
    for (Vertex v : e.vertices) {
      if (!in_r[v]) {
        inside = false;
        break;
      }
    }
    if (inside) {
      weight += e.weight;
      ++edges;
    }
  }
  return edges;
}

}  // namespace

bool in_tail(double value, double threshold) noexcept {
  return value <= threshold + 1e-9 * std::max(1.0, std::abs(threshold));
}

std::string to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::exact: return "exact";
    case EstimateMethod::mc: return "mc";
    case EstimateMethod::tilted_certificate: return "tilted_certificate";
  }
  return "unknown";
}

std::vector<double> exact_lower_tail_sweep(const WeightedHypergraph& H, BernoulliParam p_param,
                                           std::span<const double> thresholds, unsigned shards) {
  const double p = checked_p(p_param);
  const std::size_t n = H.vertex_count();
  if (n > kExactVertexBudget) throw BudgetError("exact enumeration needs v(H) <= 28");
  const std::size_t T = thresholds.size();
  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return thresholds[a] < thresholds[b]; });
  std::vector<double> sorted(T);
  for (std::size_t i = 0; i < T; ++i) sorted[i] = thresholds[order[i]];

  std::size_t high_bits = 0;
  while ((std::size_t{1} << (high_bits + 1)) <= std::max(1U, shards) && high_bits + 1 <= n) {
    ++high_bits;
  }
  const std::size_t shard_count = std::size_t{1} << high_bits;

  // counts[j][k]: states with |R| = k whose smallest admitting threshold is sorted[j].
  using Counts = std::vector<std::vector<std::uint64_t>>;
  std::vector<Counts> per_shard(shard_count, Counts(T, std::vector<std::uint64_t>(n + 1, 0)));
  auto run_shard = [&](std::size_t s) {
    Counts& counts = per_shard[s];
    enumerate_states(H, s, high_bits, [&](std::uint64_t, int size, double w) {
      const auto it = std::partition_point(sorted.begin(), sorted.end(),
                                           [&](double t) { return !in_tail(w, t); });
      if (it != sorted.end()) ++counts[static_cast<std::size_t>(it - sorted.begin())][size];
    });
  };
  if (shard_count == 1) {
    run_shard(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t s = 0; s < shard_count; ++s) pool.emplace_back(run_shard, s);
    for (auto& t : pool) t.join();
  }

  Counts total(T, std::vector<std::uint64_t>(n + 1, 0));
  for (const Counts& c : per_shard) {
    for (std::size_t j = 0; j < T; ++j) {
      for (std::size_t k = 0; k <= n; ++k) total[j][k] += c[j][k];
    }
  }
  const auto log_w = log_state_weights(n, p);
  std::vector<double> out(T, kNegInf);
  std::vector<std::uint64_t> running(n + 1, 0);
  for (std::size_t j = 0; j < T; ++j) {
    std::vector<double> terms;
    for (std::size_t k = 0; k <= n; ++k) {
      running[k] += total[j][k];
      if (running[k] > 0) terms.push_back(std::log(static_cast<double>(running[k])) + log_w[k]);
    }
    out[order[j]] = terms.empty() ? kNegInf : std::min(0.0, log_sum_exp(terms));
  }
  return out;
}

TailEstimate exact_lower_tail(const WeightedHypergraph& H, BernoulliParam p, const TailSpec& spec,
                              unsigned shards) {
  const double t = spec.threshold(H, p);
  const auto values = exact_lower_tail_sweep(H, p, std::span<const double>(&t, 1), shards);
  return TailEstimate{values[0], EstimateMethod::exact, std::nullopt, std::nullopt,
                      std::nullopt, std::nullopt};
}

TailEstimate mc_lower_tail(const WeightedHypergraph& H, BernoulliParam p_param,
                           const TailSpec& spec, std::uint64_t samples, std::uint64_t seed,
                           unsigned workers) {
  const double p = checked_p(p_param);
  if (samples < 100) throw DomainError("mc_lower_tail: need at least 100 samples");
  const double threshold = spec.threshold(H, p_param);
  const std::size_t n = H.vertex_count();
  workers = std::max(1U, workers);

  std::vector<std::uint64_t> hits(workers, 0);
  auto run = [&](unsigned w) {
    std::vector<char> in_r(n);
    const std::uint64_t begin = samples * w / workers;
    const std::uint64_t end = samples * (w + 1) / workers;
    for (std::uint64_t i = begin; i < end; ++i) {
      const CounterRng rng(seed, i);
      for (std::size_t v = 0; v < n; ++v) in_r[v] = rng.uniform(v) < p ? 1 : 0;
      double weight = 0.0;
      (void)induced_count(H, in_r, weight);
      if (in_tail(weight, threshold)) ++hits[w];
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  const std::uint64_t k = std::accumulate(hits.begin(), hits.end(), std::uint64_t{0});
  const double N = static_cast<double>(samples);
  TailEstimate est{kNegInf, EstimateMethod::mc, kNegInf, kNegInf, samples, seed};
  if (k == 0) {
    est.ci_high = std::log(3.0 / N);
    return est;
  }
  const double phat = static_cast<double>(k) / N;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / N;
  const double center = (phat + z2 / (2.0 * N)) / denom;
  const double half = kWilsonZ * std::sqrt(phat * (1.0 - phat) / N + z2 / (4.0 * N * N)) / denom;
  est.log_prob = std::log(phat);
  est.ci_low = std::log(std::max(0.0, center - half));
  est.ci_high = std::min(0.0, std::log(std::min(1.0, center + half)));
  return est;
}

double importance_weight(const ProductMeasure& q, BernoulliParam p_param, const VertexSet& y) {
  const double p = checked_p(p_param);
  double J = 0.0;
  auto it = y.begin();
  for (Vertex v = 0; v < q.size(); ++v) {
    const bool one = it != y.end() && *it == v;
    if (one) ++it;
    if (one) {
      if (q[v] == 0.0) return kNegInf;
      J += std::log(q[v] / p);
    } else {
      J += std::log1p(-q[v]) - std::log1p(-p);
    }
  }
  if (it != y.end()) throw DomainError("importance_weight: y has a vertex outside q");
  return J;
}

double variance_bound_constant(double p0) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("variance_bound_constant: p0 must lie in (0,1)");
  const double a = (2.0 - p0) / (1.0 - p0);
  const double l = -std::log1p(-p0);
  return std::max(2.0 * a * a, 8.0 * (8.0 / std::exp(2.0) + l * l));
}

double log_ratio_variance(double q, double p) {
  if (q <= 0.0 || q >= 1.0) return 0.0;
  const double d = std::log(q / p) - (std::log1p(-q) - std::log1p(-p));
  return q * (1.0 - q) * d * d;
}

TiltCertificate tilted_lower_bound_certificate(const WeightedHypergraph& H, BernoulliParam p_param,
                                               const TailSpec& spec, double epsilon,
                                               const ProductMeasure& q_star,
                                               std::uint64_t samples, std::uint64_t seed) {
  const double p = checked_p(p_param);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0,1)");
  const std::size_t n = H.vertex_count();
  if (q_star.size() != n) throw DomainError("q_star has the wrong length");
  for (double x : q_star.values()) {
    if (x > p + 1e-12) throw DomainError("q_star must satisfy q_v <= p");
  }
  const double threshold = spec.threshold(H, p_param);
  if (expected_induced_weight(H, q_star) > (1.0 - epsilon) * threshold * (1.0 + 1e-8)) {
    throw DomainError("q_star is infeasible: f(q*) > (1 - eps) * threshold");
  }

  TiltCertificate cert{q_star, epsilon, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                       kNegInf, n <= kConditionalVertexBudget, false, std::nullopt};
  cert.phi_hat = mean_field_objective(q_star.values(), p);
  cert.K_var = variance_bound_constant(p);
  cert.C_prime = cert.K_var / (2.0 * epsilon * epsilon);
  cert.C = cert.C_prime + std::log(2.0 / epsilon);
  cert.j_threshold = (1.0 + epsilon) * cert.phi_hat + cert.C_prime;

  std::vector<double> log_ratio_one(n);
  std::vector<double> log_ratio_zero(n);
  for (std::size_t v = 0; v < n; ++v) {
    log_ratio_one[v] = q_star[v] > 0.0 ? std::log(q_star[v] / p) : kNegInf;
    log_ratio_zero[v] = std::log1p(-q_star[v]) - std::log1p(-p);
  }

  double probability_used = 0.0;
  if (cert.exact) {
    double pr_y1 = 0.0;
    double pr_not_y2 = 0.0;
    double pr_both = 0.0;
    enumerate_all_states(H, [&](std::uint64_t mask, int, double weight) {
      double log_q = 0.0;
      double J = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        if ((mask >> v) & 1U) {
          if (q_star[v] == 0.0) return;
          log_q += std::log(q_star[v]);
          J += log_ratio_one[v];
        } else {
          log_q += std::log1p(-q_star[v]);
          J += log_ratio_zero[v];
        }
      }
      const double prob = std::exp(log_q);
      const bool y1 = in_tail(weight, threshold);
      const bool y2 = J <= cert.j_threshold;
      if (y1) pr_y1 += prob;
      if (!y2) pr_not_y2 += prob;
      if (y1 && y2) pr_both += prob;
    });
    cert.pr_y1 = pr_y1;
    cert.pr_not_y2 = pr_not_y2;
    cert.empirical_Y1Y2 = pr_both;
    probability_used = pr_both;
  } else {
    if (samples == 0) throw DomainError("sampling certificate needs samples > 0");
    std::uint64_t y1 = 0;
    std::uint64_t not_y2 = 0;
    std::uint64_t both = 0;
    std::vector<char> in_r(n);
    for (std::uint64_t i = 0; i < samples; ++i) {
      const CounterRng rng(seed, i);
      double J = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        in_r[v] = rng.uniform(v) < q_star[v] ? 1 : 0;
        J += in_r[v] ? log_ratio_one[v] : log_ratio_zero[v];
      }
      double weight = 0.0;
      (void)induced_count(H, in_r, weight);
      const bool a = in_tail(weight, threshold);
      const bool b = J <= cert.j_threshold;
      y1 += a ? 1 : 0;
      not_y2 += b ? 0 : 1;
      both += (a && b) ? 1 : 0;
    }
    const double N = static_cast<double>(samples);
    cert.pr_y1 = static_cast<double>(y1) / N;
    cert.pr_not_y2 = static_cast<double>(not_y2) / N;
    cert.empirical_Y1Y2 = static_cast<double>(both) / N;
    cert.confidence = 0.95;
    probability_used =
        both == 0 ? 0.0
                  : boost::math::ibeta_inv(static_cast<double>(both),
                                           static_cast<double>(samples - both) + 1.0, 0.05);
  }
  cert.vacuous = !(probability_used > 0.0);
  if (!cert.vacuous) cert.log_lower_bound = std::log(probability_used) - cert.j_threshold;
  return cert;
}

FiniteDistribution tail_conditioned_law(const WeightedHypergraph& H, BernoulliParam p_param,
                                        const TailSpec& spec) {
  const double p = checked_p(p_param);
  require_conditional_budget(H);
  const std::size_t n = H.vertex_count();
  const double threshold = spec.threshold(H, p_param);
  const auto log_w = log_state_weights(n, p);
  std::vector<double> mass(std::size_t{1} << n, 0.0);
  double total = 0.0;
  enumerate_all_states(H, [&](std::uint64_t mask, int size, double weight) {
    if (!in_tail(weight, threshold)) return;
    mass[mask] = std::exp(log_w[size]);
    total += mass[mask];
  });
  for (double& m : mass) m /= total;
  return FiniteDistribution(std::move(mass));
}

FiniteDistribution product_law(std::size_t n, BernoulliParam p_param) {
  const double p = checked_p(p_param);
  if (n > kConditionalVertexBudget) throw BudgetError("product_law needs n <= 20");
  const auto log_w = log_state_weights(n, p);
  std::vector<double> mass(std::size_t{1} << n);
  for (std::uint64_t m = 0; m < mass.size(); ++m) mass[m] = std::exp(log_w[std::popcount(m)]);
  return FiniteDistribution(std::move(mass));
}

double conditional_moment(const WeightedHypergraph& H, BernoulliParam p_param,
                          const TailSpec& spec, const VertexSet& W, std::span<const int> y_W,
                          const VertexSet& A) {
  const double p = checked_p(p_param);
  require_conditional_budget(H);
  const std::size_t n = H.vertex_count();
  if (y_W.size() != W.size()) throw DomainError("conditional_moment: y_W must match W");
  const std::uint64_t w_mask = vertex_mask(W, n);
  const std::uint64_t a_mask = vertex_mask(A, n);
  if (w_mask & a_mask) throw DomainError("conditional_moment: A must be disjoint from W");
  std::uint64_t ones = 0;
  for (std::size_t i = 0; i < W.size(); ++i) {
    if (y_W[i] != 0 && y_W[i] != 1) throw DomainError("conditional_moment: y_W must be 0/1");
    if (y_W[i] == 1) ones |= std::uint64_t{1} << W.items()[i];
  }
  const double threshold = spec.threshold(H, p_param);
  const auto log_w = log_state_weights(n, p);
  double den = 0.0;
  double num = 0.0;
  enumerate_all_states(H, [&](std::uint64_t mask, int size, double weight) {
    if ((mask & w_mask) != ones || !in_tail(weight, threshold)) return;
    const double prob = std::exp(log_w[size]);
    den += prob;
    if ((mask & a_mask) == a_mask) num += prob;
  });
  if (!(den > 0.0)) throw DomainError("conditional_moment: conditioning event has probability 0");
  return num / den;
}

double conditional_divergence_profile(const WeightedHypergraph& H, BernoulliParam p_param,
                                      const TailSpec& spec, const VertexSet& W) {
  const double p = checked_p(p_param);
  require_conditional_budget(H);
  const std::size_t n = H.vertex_count();
  (void)vertex_mask(W, n);
  const std::size_t z_count = std::size_t{1} << W.size();
  const double threshold = spec.threshold(H, p_param);
  const auto log_w = log_state_weights(n, p);

  std::vector<Vertex> rest;
  for (Vertex v = 0; v < n; ++v) {
    if (!W.contains(v)) rest.push_back(v);
  }
  // one[i][z], zero[i][z]: joint masses of (Y_rest[i], Y_W = z).
  std::vector<std::vector<double>> one(rest.size(), std::vector<double>(z_count, 0.0));
  std::vector<std::vector<double>> zero(rest.size(), std::vector<double>(z_count, 0.0));
  double total = 0.0;
  enumerate_all_states(H, [&](std::uint64_t mask, int size, double weight) {
    if (!in_tail(weight, threshold)) return;
    const double prob = std::exp(log_w[size]);
    total += prob;
    std::size_t z = 0;
    for (std::size_t j = 0; j < W.size(); ++j) z |= ((mask >> W.items()[j]) & 1U) << j;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      ((mask >> rest[i]) & 1U ? one : zero)[i][z] += prob;
    }
  });
  double h = 0.0;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    for (std::size_t z = 0; z < z_count; ++z) {
      zero[i][z] /= total;
      one[i][z] /= total;
    }
    h += conditional_p_divergence(JointBinaryDistribution(zero[i], one[i]), p_param);
  }
  return h;
}

HarrisBound harris_zero_log_bound(const PatternHypergraph& H, std::size_t n,
                                  BernoulliParam p_param) {
  const double p = checked_p(p_param);
  const std::size_t e_H = H.edge_count();
  if (e_H > 20) throw BudgetError("harris_zero_log_bound: too many pattern edges");
  HarrisBound best{kNegInf, {}, 0.0};
  for (std::uint64_t subset = 1; subset < (std::uint64_t{1} << e_H); ++subset) {
    std::vector<std::size_t> chosen;
    std::vector<Vertex> relabel(H.vertex_count(), std::numeric_limits<Vertex>::max());
    Vertex next = 0;
    std::vector<std::vector<Vertex>> edges;
    for (std::size_t i = 0; i < e_H; ++i) {
      if (!((subset >> i) & 1U)) continue;
      chosen.push_back(i);
      std::vector<Vertex> e;
      for (Vertex x : H.edges()[i]) {
        if (relabel[x] == std::numeric_limits<Vertex>::max()) relabel[x] = next++;
        e.push_back(relabel[x]);
      }
      edges.push_back(std::move(e));
    }
    const PatternHypergraph F(H.uniformity(), next, std::move(edges));
    const double copies =
        n < F.vertex_count() ? 0.0 : static_cast<double>(copy_hypergraph(F, n).edge_count());
    const double value =
        copies * std::log1p(-std::pow(p, static_cast<double>(F.edge_count())));
    if (value > best.log_bound) best = {value, chosen, copies};
  }
  return best;
}

}  // namespace lowertail
