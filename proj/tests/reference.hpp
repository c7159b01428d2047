#pragma once

// Test-side reference computations. These are deliberately naive and share
// no code paths with the library beyond the hypergraph container.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lowertail/builders.hpp"
#include "lowertail/hypergraph.hpp"

namespace ref {

using lowertail::Edge;
using lowertail::PatternHypergraph;
using lowertail::Rational;
using lowertail::Vertex;
using lowertail::WeightedHypergraph;

inline std::uint64_t mask_of(const std::vector<Vertex>& vs) {
  std::uint64_t m = 0;
  for (Vertex v : vs) m |= std::uint64_t{1} << v;
  return m;
}

/// e(H[R]) for R given as a bitmask.
inline double induced(const WeightedHypergraph& H, std::uint64_t R) {
  double w = 0.0;
  for (const Edge& e : H.edges()) {
    const std::uint64_t m = mask_of(e.vertices);
    if ((m & R) == m) w += e.weight;
  }
  return w;
}

inline double state_probability(std::uint64_t R, std::size_t n, double p) {
  const int k = std::popcount(R);
  return std::pow(p, k) * std::pow(1.0 - p, static_cast<double>(n) - k);
}

/// Pr(e(H[R]) <= t) by direct summation over all subsets.
inline double tail_probability(const WeightedHypergraph& H, double p, double t) {
  const std::size_t n = H.vertex_count();
  long double total = 0.0L;
  for (std::uint64_t R = 0; R < (std::uint64_t{1} << n); ++R) {
    if (induced(H, R) <= t + 1e-9 * std::max(1.0, t)) total += state_probability(R, n, p);
  }
  return static_cast<double>(total);
}

inline std::size_t independence_number(const WeightedHypergraph& H) {
  const std::size_t n = H.vertex_count();
  std::size_t best = 0;
  for (std::uint64_t R = 0; R < (std::uint64_t{1} << n); ++R) {
    const auto size = static_cast<std::size_t>(std::popcount(R));
    if (size > best && induced(H, R) == 0.0) best = size;
  }
  return best;
}

/// max over edge subsets F with e_F >= 2 of (e_F - 1)/(v_F - s); 1/s if e_H = 1.
inline Rational density(const PatternHypergraph& H) {
  const auto s = static_cast<std::int64_t>(H.uniformity());
  const std::size_t m = H.edge_count();
  if (m == 1) return Rational(1, s);
  Rational best(-1);
  for (std::uint64_t F = 1; F < (std::uint64_t{1} << m); ++F) {
    const int e_F = std::popcount(F);
    if (e_F < 2) continue;
    std::uint64_t verts = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if ((F >> i) & 1U) verts |= mask_of(H.edges()[i]);
    }
    best = std::max(best, Rational(e_F - 1, std::popcount(verts) - s));
  }
  return best;
}

inline double binomial_cdf(int n, double p, double x) {
  double total = 0.0;
  double coeff = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) coeff = coeff * (n - k + 1) / k;
    if (k <= x + 1e-9) total += coeff * std::pow(p, k) * std::pow(1.0 - p, n - k);
  }
  return total;
}

inline double kl(const std::vector<double>& P, const std::vector<double>& Q) {
  double d = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (P[i] > 0.0) d += P[i] * std::log(P[i] / Q[i]);
  }
  return d;
}

inline double ip(double q, double p) {
  double v = 0.0;
  if (q > 0.0) v += q * std::log(q / p);
  if (q < 1.0) v += (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
  return v;
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n,
                                          double zero_chance = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  double total = 0.0;
  for (auto& v : x) {
    v = u(rng) < zero_chance ? 0.0 : -std::log(1.0 - u(rng));
    total += v;
  }
  if (total == 0.0) {
    x[0] = 1.0;
    total = 1.0;
  }
  for (auto& v : x) v /= total;
  return x;
}

/// Random r-uniform hypergraph with up to m distinct edges.
inline WeightedHypergraph random_hypergraph(std::mt19937_64& rng, std::size_t v, std::size_t r,
                                            std::size_t m, bool weighted) {
  std::vector<Vertex> all(v);
  for (Vertex i = 0; i < v; ++i) all[i] = i;
  std::uniform_real_distribution<double> w(0.25, 3.0);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m; ++i) {
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<Vertex> e(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(r));
    std::sort(e.begin(), e.end());
    edges.push_back(Edge{e, weighted ? w(rng) : 1.0});
  }
  return WeightedHypergraph(v, r, std::move(edges));
}

}  // namespace ref
