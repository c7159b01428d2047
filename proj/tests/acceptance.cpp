// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lowertail/builders.hpp"
#include "lowertail/entropy.hpp"
#include "lowertail/harness.hpp"
#include "lowertail/hypergraph.hpp"
#include "lowertail/io.hpp"
#include "lowertail/oracles.hpp"
#include "lowertail/variational.hpp"
#include "reference.hpp"

using namespace lowertail;

namespace {

struct Outcome {
  bool pass = true;
  std::size_t cases = 0;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    ++cases;
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

std::vector<double> random_row(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(m);
  for (auto& v : x) v = u(rng) < 0.15 ? 0.0 : u(rng);
  return x;
}

JointBinaryDistribution random_joint(std::mt19937_64& rng, std::size_t m) {
  auto zero = random_row(rng, m);
  auto one = random_row(rng, m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) total += zero[i] + one[i];
  if (total == 0.0) {
    zero[0] = 1.0;
    total = 1.0;
  }
  for (std::size_t i = 0; i < m; ++i) {
    zero[i] /= total;
    one[i] /= total;
  }
  return JointBinaryDistribution(zero, one);
}

// 1. Conditioning identity, Pinsker, key lemma and log-sum gaps.
Outcome information_suite() {
  Outcome out;
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 1 + trial % 6;
    const std::size_t size = std::size_t{1} << k;
    std::vector<std::size_t> event;
    while (event.empty()) {
      for (std::size_t i = 0; i < size; ++i) {
        if (u(rng) < 0.5) event.push_back(i);
      }
    }
    double divergence = 0.0;
    double log_mass = 0.0;
    if (trial % 2 == 0) {
      const BernoulliParam p(0.05 + 0.9 * u(rng));
      const auto prior = product_law(k, p);
      divergence = p_divergence(prior.conditioned_on(event), p);
      log_mass = std::log(prior.probability(event));
    } else {
      const FiniteDistribution prior(ref::random_simplex(rng, size));
      if (prior.probability(event) == 0.0) continue;
      divergence = kl_divergence(prior.conditioned_on(event), prior);
      log_mass = std::log(prior.probability(event));
    }
    out.expect(std::abs(divergence + log_mass) <= 1e-10 * std::max(1.0, std::abs(log_mass)),
               format("conditioning identity: D = %.17g vs -log Q(E) = %.17g", divergence,
                      -log_mass));
  }

  for (int trial = 0; trial < 1000; ++trial) {
    const auto J = random_joint(rng, 1 + trial % 12);
    const auto g = pinsker_gap(J);
    out.expect(g.lhs <= g.rhs + 1e-12, format("pinsker: %.17g > %.17g", g.lhs, g.rhs));
  }

  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + trial % 9;
    const auto z = ref::random_simplex(rng, m, 0.1);
    std::vector<double> cond(m);
    for (auto& c : cond) c = 0.95 * u(rng);
    const double p_prime = std::min(1.0, *std::max_element(cond.begin(), cond.end()) + 0.05 * u(rng));
    std::vector<std::vector<std::size_t>> events(1 + trial % 5);
    for (auto& e : events) {
      for (std::size_t i = 0; i < m; ++i) {
        if (u(rng) < 0.35) e.push_back(i);
      }
    }
    const double p = 0.02 + 0.96 * u(rng);
    const auto g = key_lemma_gap(JointBinaryDistribution::from_conditionals(z, cond), events,
                                 BernoulliParam(p), p_prime);
    out.expect(g.lhs + 1e-12 >= g.rhs, format("key lemma: %.17g < %.17g", g.lhs, g.rhs));
  }

  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 1 + trial % 10;
    std::vector<double> a(m);
    std::vector<double> b(m);
    for (std::size_t i = 0; i < m; ++i) {
      a[i] = u(rng) < 0.1 ? 0.0 : 5.0 * u(rng);
      b[i] = 0.01 + 5.0 * u(rng);
    }
    const double gap = log_sum_gap(a, b);
    out.expect(gap >= -1e-12, format("log-sum gap %.17g < 0", gap));
    const double c = 0.1 + 3.0 * u(rng);
    std::vector<double> scaled(m);
    for (std::size_t i = 0; i < m; ++i) scaled[i] = c * b[i];
    const double eq = log_sum_gap(scaled, b);
    out.expect(std::abs(eq) <= 1e-12, format("proportional log-sum gap %.17g", eq));
  }
  return out;
}

// 2. Binomial lower tail against exp(-n i_p(q)).
Outcome binomial_suite() {
  Outcome out;
  for (int n = 1; n <= 30; ++n) {
    for (int pi = 1; pi <= 9; ++pi) {
      const double p = pi / 10.0;
      for (int qi = 0; 0.05 * qi <= p + 1e-12; ++qi) {
        const double q = std::min(0.05 * qi, p);
        const auto t = binomial_tail_bound(n, BernoulliParam(p), BernoulliParam(q));
        out.expect(t.exact <= t.bound * (1.0 + 1e-12),
                   format("n=%g: exact %.17g > bound %.17g", n, t.exact, t.bound));
        if (qi == 0) {
          out.expect(std::abs(t.exact - t.bound) <= 1e-12 * t.bound,
                     format("q=0 equality: %.17g vs %.17g", t.exact, t.bound));
        }
      }
    }
  }
  return out;
}

// 3. Telescoping identity for random set functions.
Outcome telescoping_suite() {
  Outcome out;
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + trial % 5;
    std::vector<double> F(std::size_t{1} << k);
    for (auto& x : F) x = u(rng);
    const double r = telescoping_identity_residual(F);
    out.expect(std::abs(r) <= 1e-9, format("residual %.3g", r));
  }
  return out;
}

// 4. Conditional moments of the tail-conditioned law never exceed p^|A|.
Outcome harris_moment_suite() {
  Outcome out;
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t done = 0;
  while (done < 200) {
    const std::size_t v = 4 + rng() % 11;
    const std::size_t r = 1 + rng() % 3;
    const std::size_t m = 2 + rng() % (2 * v);
    const bool weighted = u(rng) < 0.5;
    const auto H = ref::random_hypergraph(rng, v, r, m, weighted);
    const BernoulliParam p(0.05 + 0.9 * u(rng));
    const auto spec = TailSpec::relative(u(rng));
    const std::uint64_t all = (std::uint64_t{1} << v) - 1;
    const std::uint64_t W = rng() & rng() & all;
    const std::uint64_t A = rng() & all & ~W;
    std::vector<int> y;
    for (std::size_t i = 0; i < static_cast<std::size_t>(std::popcount(W)); ++i) {
      y.push_back(u(rng) < 0.3 ? 1 : 0);
    }
    double value = 0.0;
    try {
      value = conditional_moment(H, p, spec, VertexSet::from_mask(W), y, VertexSet::from_mask(A));
    } catch (const DomainError&) {
      continue;  // conditioning event of probability zero
    }
    const double bound = std::pow(p.value(), std::popcount(A));
    out.expect(value <= bound + 1e-12, format("moment %.17g > p^|A| = %.17g", value, bound));
    ++done;
  }
  return out;
}

// 5. H(W) <= -log Pr(tail) for every |W| <= 3.
Outcome divergence_profile_suite() {
  Outcome out;
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t v = 4 + trial % 7;
    const std::size_t r = 1 + trial % 3;
    const std::size_t m = 2 + rng() % (2 * v);
    const auto H = ref::random_hypergraph(rng, v, r, m, trial % 2 == 0);
    const BernoulliParam p(0.05 + 0.9 * u(rng));
    const auto spec = TailSpec::relative(u(rng));
    const double cost = -exact_lower_tail(H, p, spec).log_prob;
    for (std::uint64_t W = 0; W < (std::uint64_t{1} << v); ++W) {
      if (std::popcount(W) > 3) continue;
      const double h = conditional_divergence_profile(H, p, spec, VertexSet::from_mask(W));
      out.expect(h <= cost + 1e-10, format("H(W) = %.17g > %.17g", h, cost));
    }
  }
  return out;
}

// 6. Solver against the grid oracle, the mean-field certificate, the binomial
// closed form and the zero-level identity.
Outcome solver_suite() {
  Outcome out;
  std::vector<std::pair<std::string, WeightedHypergraph>> small;
  for (const auto& entry : std::filesystem::directory_iterator(std::string(FIXTURE_DIR) + "/small")) {
    small.emplace_back(entry.path().stem().string(), read_hypergraph(entry.path().string()));
  }
  for (const auto& [name, H] : small) {
    if (H.vertex_count() > 4) continue;
    for (double p : {0.3, 0.5}) {
      const BernoulliParam bp(p);
      for (double eta : {0.1, 0.25, 0.5, 0.75}) {
        const auto spec = TailSpec::relative(eta);
        const double phi = solve_phi(H, bp, spec).phi;
        const double grid = phi_grid_oracle(H, bp, spec, 0.01);
        out.expect(phi <= grid + 2e-3,
                   name + format(": solver %.17g above grid %.17g (p=%g)", phi, grid, p));
      }
      for (int k = 1; k <= 9; ++k) {
        const double eps = k / 10.0;
        const double phi = solve_phi(H, bp, TailSpec::relative(1.0 - eps)).phi;
        const double cert = phi_lower_certificate(H, bp, eps);
        out.expect(phi >= cert - 1e-8, name + format(": solver %.17g below certificate %.17g", phi, cert));
      }
    }
  }

  for (int n : {5, 10, 20}) {
    std::vector<Edge> edges;
    for (Vertex v = 0; v < static_cast<Vertex>(n); ++v) edges.push_back(Edge{{v}, 1.0});
    const WeightedHypergraph H(n, 1, std::move(edges));
    for (double p : {0.2, 0.5}) {
      for (double eta : {0.25, 0.5, 0.75}) {
        const double phi = solve_phi(H, BernoulliParam(p), TailSpec::relative(eta)).phi;
        const double closed = n * ref::ip(eta * p, p);
        out.expect(std::abs(phi - closed) <= 1e-8,
                   format("binomial n=%g: %.17g vs %.17g", n, phi, closed));
      }
    }
  }

  std::vector<WeightedHypergraph> zero_cases;
  for (const auto& [name, H] : small) zero_cases.push_back(H);
  for (std::size_t n : {4, 5, 6}) {
    zero_cases.push_back(copy_hypergraph(PatternHypergraph::complete_graph(3), n));
  }
  zero_cases.push_back(copy_hypergraph(PatternHypergraph(2, 3, {{0, 1}, {1, 2}}), 5));
  zero_cases.push_back(ap_hypergraph(3, 12));
  zero_cases.push_back(ap_hypergraph(4, 20));
  std::mt19937_64 rng(1006);
  for (int trial = 0; trial < 20; ++trial) {
    zero_cases.push_back(ref::random_hypergraph(rng, 8 + trial % 13, 2 + trial % 3, 5 + trial, true));
  }
  for (const auto& H : zero_cases) {
    for (double p : {0.2, 0.5, 0.8}) {
      const BernoulliParam bp(p);
      const double phi = solve_phi(H, bp, TailSpec::relative(0.0)).phi;
      const double expected = static_cast<double>(H.vertex_count() - ref::independence_number(H)) *
                              -std::log1p(-p);
      out.expect(std::abs(phi - expected) <= 1e-6,
                 format("zero level: %.17g vs %.17g (p=%g)", phi, expected, p));
    }
  }
  return out;
}

double ip_long(double q, double p) {
  const long double Q = q;
  const long double P = p;
  long double v = 0.0L;
  if (Q > 0.0L) v += Q * std::log(Q / P);
  if (Q < 1.0L) v += (1.0L - Q) * std::log((1.0L - Q) / (1.0L - P));
  return static_cast<double>(v);
}

// 7. Var(X) <= K(p0) i_p(q) on a grid.
Outcome variance_suite() {
  Outcome out;
  for (double p0 : {0.5, 0.9}) {
    const double K = variance_bound_constant(p0);
    for (int i = 1; i <= 200; ++i) {
      const double p = p0 * i / 200.0;
      for (int j = 0; j < 200; ++j) {
        const double q = p * j / 199.0;
        const double var = log_ratio_variance(q, p);
        const double rhs = K * ip_long(q, p);
        // Absolute slack covers cancellation in i_p when q is within an ulp of p.
        out.expect(var <= rhs * (1.0 + 1e-12) + 1e-15,
                   format("Var %.17g > K i_p %.17g (p=%g)", var, rhs, p));
      }
    }
  }
  return out;
}

// 8. Tilted certificate on triangle copies.
Outcome certificate_suite() {
  Outcome out;
  const double eps = 0.3;
  for (std::size_t n : {4, 5}) {
    const auto G = copy_hypergraph(PatternHypergraph::complete_graph(3), n);
    for (double p : {0.3, 0.5}) {
      const BernoulliParam bp(p);
      for (double eta : {0.25, 0.5}) {
        const auto spec = TailSpec::relative(eta);
        const auto sol = solve_phi(G, bp, TailSpec::relative((1.0 - eps) * eta));
        const auto cert = tilted_lower_bound_certificate(G, bp, spec, eps, sol.q_star);
        const double exact = exact_lower_tail(G, bp, spec).log_prob;
        out.expect(cert.exact, "certificate not exact");
        out.expect(cert.log_lower_bound <= exact,
                   format("bound %.17g > exact %.17g (p=%g)", cert.log_lower_bound, exact, p));
        const double f = expected_induced_weight(G, sol.q_star);
        if (f <= (1.0 - eps) * spec.threshold(G, bp)) {
          out.expect(cert.empirical_Y1Y2 >= eps / 2.0,
                     format("Pr(Y1 and Y2) = %.17g < eps/2 (n=%g, p=%g)", cert.empirical_Y1Y2,
                            static_cast<double>(n), p));
        }
      }
    }
  }
  return out;
}

// 9. Triangle-count tail bound at p = 1/2.
Outcome triangle_suite() {
  Outcome out;
  for (std::size_t n : {5, 6, 7}) {
    const double total = static_cast<double>(n * (n - 1) * (n - 2) / 6);
    std::vector<double> ts;
    for (double t = 0; t <= total; t += 1.0) ts.push_back(t);
    const auto rep = theorem_triangles_check(n, ts);
    for (const auto& r : rep.rows) {
      out.expect(r.pass, format("n=%g t=%g: %.17g above rhs", static_cast<double>(n), r.t, r.log_prob));
      out.expect(r.log_prob <= r.rhs, "pass flag disagrees with row");
      out.expect(r.vacuous == (r.rhs >= 0.0), "vacuity label disagrees with rhs");
      out.expect(r.phi_arg > total && r.vacuous, format("n=%g t=%g expected vacuous", static_cast<double>(n), r.t));
    }
  }
  return out;
}

// 10. Builder facts.
Outcome builder_suite() {
  Outcome out;
  const auto K3 = PatternHypergraph::complete_graph(3);
  const auto G = copy_hypergraph(K3, 4);
  out.expect(G.vertex_count() == 6 && G.edge_count() == 4, "copy_hypergraph(K3, 4) size");
  for (std::size_t n : {4, 5, 6}) {
    const auto audit = degree_bound_audit(K3, n);
    const auto H = copy_hypergraph(K3, n);
    out.expect(audit.delta1_identity, format("delta1 identity fails at n=%g", static_cast<double>(n)));
    out.expect(max_degree(H, 1) * static_cast<double>(H.vertex_count()) ==
                   3.0 * total_weight(H),
               format("Delta1 v != e_H e at n=%g", static_cast<double>(n)));
  }
  out.expect(two_density(K3).value == Rational(2), "m2(K3) != 2");
  out.expect(two_density(PatternHypergraph::single_edge(2)).value == Rational(1, 2),
             "m2(edge) != 1/2");
  out.expect(two_density(PatternHypergraph::complete_graph(4)).value == Rational(5, 2),
             "m2(K4) != 5/2");
  const auto ap = ap_hypergraph(3, 5);
  out.expect(ap.edge_count() == 4, "AP(3,5) edge count");
  out.expect(max_degree(ap, 1) == 4.0, "AP(3,5) max degree");
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "information-theoretic inequalities", 10.0, information_suite},
      {2, "binomial lower tail bound", 5.0, binomial_suite},
      {3, "telescoping identity", 5.0, telescoping_suite},
      {4, "conditional moments below p^|A|", 60.0, harris_moment_suite},
      {5, "divergence profile below tail cost", 60.0, divergence_profile_suite},
      {6, "variational solver", 120.0, solver_suite},
      {7, "variance constant", 5.0, variance_suite},
      {8, "tilted lower bound certificate", 120.0, certificate_suite},
      {9, "triangle tail bound at p = 1/2", 600.0, triangle_suite},
      {10, "builders", 5.0, builder_suite},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_seconds) {
      if (o.pass) o.detail = format("runtime %.1f s exceeds %.0f s", secs, c.limit_seconds);
      o.pass = false;
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  criterion %2d  %-40s %7zu cases  %8.2f s%s%s\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name, o.cases, secs, o.detail.empty() ? "" : "  ", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
