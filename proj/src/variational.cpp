#include "lowertail/variational.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "lowertail/rng.hpp"

namespace lowertail {

namespace {

double logit(double x) { return std::log(x) - std::log1p(-x); }

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double checked_p(BernoulliParam p) {
  const double v = p.value();
  if (!(v > 0.0 && v < 1.0)) throw DomainError("p must lie strictly between 0 and 1");
  return v;
}

struct Problem {
  const WeightedHypergraph& H;
  double p;
  double logit_p;
  double threshold;
  double scale;  // p^r e(H); the constraint is normalised by it
};

// Coordinate-wise exact minimisation of sum i_p(q_v) + theta f(q) at a fixed
// multiplier. Each update is the stationarity equation for q_v, and f is
// affine in q_v, so every sweep decreases the Lagrangian.
void lagrangian_sweeps(const Problem& P, double theta, std::vector<double>& q, int max_sweeps,
                       double tol) {
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (Vertex v = 0; v < q.size(); ++v) {
      const double next = logistic(P.logit_p - theta * vertex_partial(P.H, q, v));
      change = std::max(change, std::abs(next - q[v]));
      q[v] = next;
    }
    if (change < tol) return;
  }
}

// Dual bisection: smallest theta (to bisection accuracy) whose Lagrangian
// minimiser from q0 satisfies the constraint. Returns that minimiser and theta
// in normalised units.
std::pair<std::vector<double>, double> dual_bisection(const Problem& P,
                                                      const std::vector<double>& q0,
                                                      const SolverOptions& opt) {
  auto solve_at = [&](double theta_n) {
    std::vector<double> q = q0;
    lagrangian_sweeps(P, theta_n / P.scale, q, opt.max_sweeps, 1e-10);
    return q;
  };
  auto feasible = [&](const std::vector<double>& q) {
    return expected_induced_weight(P.H, q) <= P.threshold;
  };
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> q_hi = solve_at(hi);
  for (int grow = 0; grow < 200 && !feasible(q_hi); ++grow) {
    lo = hi;
    hi *= 2.0;
    q_hi = solve_at(hi);
  }
  for (int it = 0; it < 100 && hi - lo > 1e-8 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    std::vector<double> q_mid = solve_at(mid);
    if (feasible(q_mid)) {
      hi = mid;
      q_hi = std::move(q_mid);
    } else {
      lo = mid;
    }
  }
  return {std::move(q_hi), hi};
}

// argmin over x in (0, p] of i_p(x) + (rho/2) max(0, a + b x + theta/rho)^2,
// solved in z = logit(x) where the derivative
//   h(z) = z - logit p + b max(0, rho (a + b sigma(z)) + theta)
// is increasing.
double coordinate_minimiser(const Problem& P, double current, double a, double b, double rho,
                            double theta) {
  if (b <= 0.0) return P.p;
  auto h = [&](double z) {
    return z - P.logit_p + b * std::max(0.0, rho * (a + b * logistic(z)) + theta);
  };
  double hi = P.logit_p;
  if (h(hi) <= 0.0) return P.p;
  double lo = P.logit_p - b * std::max(0.0, rho * (a + b * P.p) + theta) - 1.0;
  double z = current > 0.0 ? std::clamp(logit(std::min(current, P.p)), lo, hi) : lo;
  for (int it = 0; it < 200; ++it) {
    const double hz = h(z);
    if (hz == 0.0) break;
    if (hz > 0.0) {
      hi = z;
    } else {
      lo = z;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(z))) break;
    const double s = logistic(z);
    const bool active = rho * (a + b * s) + theta > 0.0;
    const double slope = 1.0 + (active ? rho * b * b * s * (1.0 - s) : 0.0);
    double next = z - hz / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    z = next;
  }
  return std::min(P.p, logistic(z));
}

// Augmented-Lagrangian polish of a feasible-ish point: converges to a KKT
// point of the constrained problem even where the dual function has a gap.
void augmented_lagrangian(const Problem& P, std::vector<double>& q, double& theta_n,
                          const SolverOptions& opt) {
  double rho = 10.0;
  double previous_defect = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    bool inner_converged = false;
    for (int sweep = 0; sweep < opt.max_sweeps && !inner_converged; ++sweep) {
      double f = expected_induced_weight(P.H, q);
      double change = 0.0;
      for (Vertex v = 0; v < q.size(); ++v) {
        const double d = vertex_partial(P.H, q, v);
        const double a = (f - q[v] * d - P.threshold) / P.scale;
        const double x = coordinate_minimiser(P, q[v], a, d / P.scale, rho, theta_n);
        change = std::max(change, std::abs(x - q[v]));
        f += d * (x - q[v]);
        q[v] = x;
      }
      inner_converged = change < 1e-15;
    }
    const double g = (expected_induced_weight(P.H, q) - P.threshold) / P.scale;
    const double next_theta = std::max(0.0, theta_n + rho * g);
    const double step = std::abs(next_theta - theta_n);
    theta_n = next_theta;
    const double defect = std::max(std::max(0.0, g), std::abs(theta_n * g));
    if (inner_converged && step <= 1e-14 * std::max(1.0, theta_n) && defect <= 1e-14) return;
    if (defect > 0.25 * previous_defect) rho = std::min(rho * 10.0, 1e12);
    previous_defect = defect;
  }
}

// f is homogeneous of degree r, so scaling q by (c/f)^{1/r} lands on f = c.
void restore_feasibility(const Problem& P, std::vector<double>& q) {
  const double r = static_cast<double>(P.H.uniformity());
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double f = expected_induced_weight(P.H, q);
    if (f <= P.threshold) return;
    const double factor = std::pow(P.threshold / f, 1.0 / r) * (1.0 - 1e-15);
    for (double& x : q) x *= factor;
  }
}

VariationalSolution finish(const Problem& P, const TailSpec& spec, std::vector<double> q,
                           double theta, int start, const SolverOptions& opt) {
  VariationalSolution sol{ProductMeasure(std::move(q)), theta, 0.0, 0.0, P.threshold, 0.0,
                          SolveStatus::optimal, start};
  sol.phi = mean_field_objective(sol.q_star.values(), P.p);
  sol.constraint_value = expected_induced_weight(P.H, sol.q_star);
  sol.kkt_residual = kkt_residual(P.H, BernoulliParam(P.p), spec, sol);
  if (sol.kkt_residual > opt.residual_tolerance) sol.status = SolveStatus::not_converged;
  return sol;
}

VariationalSolution solve_from(const Problem& P, const TailSpec& spec, std::vector<double> q0,
                               int start, const SolverOptions& opt) {
  auto [q, theta_n] = dual_bisection(P, q0, opt);
  augmented_lagrangian(P, q, theta_n, opt);
  restore_feasibility(P, q);
  return finish(P, spec, std::move(q), theta_n / P.scale, start, opt);
}

std::vector<Vertex> greedy_independent_set(const WeightedHypergraph& H) {
  const std::size_t n = H.vertex_count();
  std::vector<Vertex> order(n);
  for (Vertex v = 0; v < n; ++v) order[v] = v;
  std::stable_sort(order.begin(), order.end(), [&](Vertex a, Vertex b) {
    return H.incident_edges(a).size() < H.incident_edges(b).size();
  });
  std::vector<std::size_t> chosen_in_edge(H.edge_count(), 0);
  std::vector<Vertex> out;
  for (Vertex v : order) {
    bool ok = true;
    for (std::size_t e : H.incident_edges(v)) {
      if (chosen_in_edge[e] + 1 == H.uniformity()) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (std::size_t e : H.incident_edges(v)) ++chosen_in_edge[e];
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TailSpec TailSpec::relative(double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("eta must be a finite value >= 0");
  return TailSpec(Mode::relative, eta);
}

TailSpec TailSpec::absolute(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("t must be a finite value >= 0");
  return TailSpec(Mode::absolute, t);
}

double expected_total(const WeightedHypergraph& H, BernoulliParam p) {
  return std::pow(p.value(), static_cast<double>(H.uniformity())) * total_weight(H);
}

double TailSpec::threshold(const WeightedHypergraph& H, BernoulliParam p) const {
  return mode_ == Mode::absolute ? value_ : value_ * expected_total(H, p);
}

TailSpec TailSpec::as_relative(const WeightedHypergraph& H, BernoulliParam p) const {
  if (mode_ == Mode::relative) return *this;
  return relative(value_ / expected_total(H, p));
}

TailSpec TailSpec::as_absolute(const WeightedHypergraph& H, BernoulliParam p) const {
  if (mode_ == Mode::absolute) return *this;
  return absolute(threshold(H, p));
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::boundary_zero: return "boundary_zero";
    case SolveStatus::infeasibility_trivial: return "infeasibility_trivial";
    case SolveStatus::not_converged: return "not_converged";
  }
  return "unknown";
}

double mean_field_objective(std::span<const double> q, double p) {
  double total = 0.0;
  for (double x : q) total += bernoulli_divergence(x, p);
  return total;
}

VariationalSolution solve_phi(const WeightedHypergraph& H, BernoulliParam p_param,
                              const TailSpec& spec, const SolverOptions& options) {
  const double p = checked_p(p_param);
  if (H.empty()) throw DomainError("solve_phi: hypergraph has no edges");
  const std::size_t n = H.vertex_count();
  const Problem P{H, p, logit(p), spec.threshold(H, p_param), expected_total(H, p_param)};

  if (P.threshold >= P.scale) {
    std::vector<double> q(n, p);
    VariationalSolution sol{ProductMeasure(q), 0.0, 0.0, P.scale, P.threshold, 0.0,
                            SolveStatus::infeasibility_trivial, -1};
    sol.kkt_residual = kkt_residual(H, p_param, spec, sol);
    return sol;
  }

  if (P.threshold == 0.0) {
    // f(q) = 0 forces the support of q to be independent; the cheapest such q
    // keeps p on a maximum independent set and 0 elsewhere.
    std::vector<Vertex> keep;
    if (n <= kIndependenceBudget) {
      const VertexSet mis = maximum_independent_set(H);
      keep.assign(mis.begin(), mis.end());
    } else {
      keep = greedy_independent_set(H);
    }
    std::vector<double> q(n, 0.0);
    for (Vertex v : keep) q[v] = p;
    VariationalSolution sol{ProductMeasure(std::move(q)), 0.0, 0.0, 0.0, 0.0, 0.0,
                            SolveStatus::boundary_zero, -1};
    sol.phi = mean_field_objective(sol.q_star.values(), p);
    sol.constraint_value = expected_induced_weight(H, sol.q_star);
    sol.kkt_residual = kkt_residual(H, p_param, spec, sol);
    return sol;
  }

  const double r = static_cast<double>(H.uniformity());
  const double ratio = P.threshold / P.scale;
  std::vector<std::vector<double>> starts;
  starts.emplace_back(n, p);
  starts.emplace_back(n, p * std::pow(ratio, 1.0 / r));
  const CounterRng rng(options.seed, 0);
  for (std::size_t s = 0; s < options.random_starts; ++s) {
    std::vector<double> q(n);
    for (std::size_t v = 0; v < n; ++v) q[v] = p * rng.uniform(s * n + v);
    starts.push_back(std::move(q));
  }
  if (n <= kIndependenceBudget) {
    std::vector<double> q(n, 1e-2 * p);
    for (Vertex v : maximum_independent_set(H)) q[v] = p;
    starts.push_back(std::move(q));
  }

  std::vector<VariationalSolution> results;
  if (options.parallel && starts.size() > 1) {
    std::vector<std::future<VariationalSolution>> jobs;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      jobs.push_back(std::async(std::launch::async, [&, i] {
        return solve_from(P, spec, starts[i], static_cast<int>(i), options);
      }));
    }
    for (auto& j : jobs) results.push_back(j.get());
  } else {
    for (std::size_t i = 0; i < starts.size(); ++i) {
      results.push_back(solve_from(P, spec, starts[i], static_cast<int>(i), options));
    }
  }

  const VariationalSolution* best = nullptr;
  for (const auto& s : results) {
    if (s.constraint_value > P.threshold * (1.0 + 1e-8)) continue;
    if (best == nullptr || s.phi < best->phi) best = &s;
  }

  // The symmetric point is feasible by construction; keep it as a fallback so
  // the result never exceeds the symmetric upper bound.
  const SymmetricSolution sym = solve_phi_symmetric(H, p_param, spec);
  if (best == nullptr || sym.phi_upper < best->phi - 1e-12) {
    std::vector<double> q(n, sym.q);
    restore_feasibility(P, q);
    return finish(P, spec, std::move(q), 0.0, static_cast<int>(starts.size()), options);
  }
  return *best;
}

SymmetricSolution solve_phi_symmetric(const WeightedHypergraph& H, BernoulliParam p_param,
                                      const TailSpec& spec) {
  const double p = checked_p(p_param);
  if (H.empty()) throw DomainError("solve_phi_symmetric: hypergraph has no edges");
  const double c = spec.threshold(H, p_param);
  const double e = total_weight(H);
  const double q = std::min(p, std::pow(c / e, 1.0 / static_cast<double>(H.uniformity())));
  return {q, static_cast<double>(H.vertex_count()) * bernoulli_divergence(q, p)};
}

double phi_grid_oracle(const WeightedHypergraph& H, BernoulliParam p_param, const TailSpec& spec,
                       double grid_step) {
  const double p = checked_p(p_param);
  const std::size_t n = H.vertex_count();
  if (n > 4) throw BudgetError("phi_grid_oracle: v(H) must be at most 4");
  if (!(grid_step >= 0.005)) throw DomainError("phi_grid_oracle: grid step must be >= 0.005");
  const double c = spec.threshold(H, p_param);

  std::vector<double> levels;
  for (int k = 0; k * grid_step < p - 1e-12; ++k) levels.push_back(k * grid_step);
  levels.push_back(p);
  std::vector<double> cost;
  for (double x : levels) cost.push_back(bernoulli_divergence(x, p));

  double total_points = std::pow(static_cast<double>(levels.size()), static_cast<double>(n));
  if (total_points > 2e8) throw BudgetError("phi_grid_oracle: grid too large");

  std::vector<std::size_t> idx(n, 0);
  std::vector<double> q(n, levels[0]);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double objective = 0.0;
    for (std::size_t v = 0; v < n; ++v) objective += cost[idx[v]];
    if (objective < best && expected_induced_weight(H, q) <= c * (1.0 + 1e-12)) best = objective;
    std::size_t v = 0;
    while (v < n && ++idx[v] == levels.size()) {
      idx[v] = 0;
      q[v] = levels[0];
      ++v;
    }
    if (v == n) break;
    q[v] = levels[idx[v]];
  }
  return best;
}

double phi_zero(const WeightedHypergraph& H, BernoulliParam p_param) {
  const double p = checked_p(p_param);
  const auto alpha = independence_number(H);
  return static_cast<double>(H.vertex_count() - alpha) * -std::log1p(-p);
}

double phi_lower_certificate(const WeightedHypergraph& H, BernoulliParam p_param,
                             double epsilon) {
  const double p = checked_p(p_param);
  if (H.empty()) throw DomainError("phi_lower_certificate: hypergraph has no edges");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0,1]");
  const double v = static_cast<double>(H.vertex_count());
  const double K = v * max_degree(H, 1) / total_weight(H);
  return epsilon * epsilon / (2.0 * K * K) * v * p;
}

double kkt_residual(const WeightedHypergraph& H, BernoulliParam p_param, const TailSpec& spec,
                    const VariationalSolution& sol) {
  const double p = checked_p(p_param);
  const auto q = sol.q_star.values();
  if (q.size() != H.vertex_count()) throw DomainError("kkt_residual: solution size mismatch");
  const double lp = logit(p);
  double worst = 0.0;
  for (Vertex v = 0; v < q.size(); ++v) {
    if (q[v] <= 1e-14) continue;
    const double target = logistic(lp - sol.theta * vertex_partial(H, q, v));
    worst = std::max(worst, std::abs(q[v] - target));
  }
  const double f = expected_induced_weight(H, q);
  return worst + std::abs(sol.theta * (f - spec.threshold(H, p_param)));
}

}  // namespace lowertail
