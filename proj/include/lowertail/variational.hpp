#pragma once

// Mean-field rate
//   Phi_p^H = min { sum_v i_p(q_v) : f(q) <= threshold, q in [0,p]^V },
// with f(q) = sum_A d_A prod_{v in A} q_v.

#include <cstdint>
#include <string>
#include <vector>

#include "lowertail/hypergraph.hpp"

namespace lowertail {

class TailSpec {
 public:
  enum class Mode { relative, absolute };

  static TailSpec relative(double eta);
  static TailSpec absolute(double t);

  [[nodiscard]] Mode mode() const noexcept { return mode_; }
  [[nodiscard]] double value() const noexcept { return value_; }

  /// eta * p^r * e(H) in relative mode, t in absolute mode.
  [[nodiscard]] double threshold(const WeightedHypergraph& H, BernoulliParam p) const;

  /// The same tail expressed in the other mode.
  [[nodiscard]] TailSpec as_relative(const WeightedHypergraph& H, BernoulliParam p) const;
  [[nodiscard]] TailSpec as_absolute(const WeightedHypergraph& H, BernoulliParam p) const;

 private:
  TailSpec(Mode mode, double value) : mode_(mode), value_(value) {}
  Mode mode_;
  double value_;
};

/// p^r * e(H) = f(p, ..., p).
[[nodiscard]] double expected_total(const WeightedHypergraph& H, BernoulliParam p);

enum class SolveStatus { optimal, boundary_zero, infeasibility_trivial, not_converged };

[[nodiscard]] std::string to_string(SolveStatus s);

struct VariationalSolution {
  ProductMeasure q_star;
  double theta;
  double phi;
  double constraint_value;
  double threshold;
  double kkt_residual;
  SolveStatus status;
  int start_index;  ///< which multi-start produced q_star (-1 for closed-form paths)
};

struct SolverOptions {
  std::size_t random_starts = 8;
  std::uint64_t seed = 0x6c6f7765727461ULL;
  int max_sweeps = 20000;
  int max_outer = 200;
  /// A solution whose KKT residual exceeds this is reported as not_converged.
  double residual_tolerance = 1e-7;
  bool parallel = true;
};

/// Best KKT point over a deterministic multi-start. Throws DomainError for an
/// empty H or p outside (0,1).
[[nodiscard]] VariationalSolution solve_phi(const WeightedHypergraph& H, BernoulliParam p,
                                            const TailSpec& spec, const SolverOptions& options = {});

struct SymmetricSolution {
  double q;
  double phi_upper;
};

/// Restricted to q = c * (1, ..., 1); since f(c * 1) = c^r e(H) the best c is
/// min(p, (threshold / e(H))^{1/r}).
[[nodiscard]] SymmetricSolution solve_phi_symmetric(const WeightedHypergraph& H, BernoulliParam p,
                                                    const TailSpec& spec);

/// Brute-force minimum over grid points {0, step, 2 step, ...} u {p} in each
/// coordinate. v(H) <= 4 and step >= 0.005.
[[nodiscard]] double phi_grid_oracle(const WeightedHypergraph& H, BernoulliParam p,
                                     const TailSpec& spec, double grid_step);

/// (v(H) - alpha(H)) * log(1/(1-p)).
[[nodiscard]] double phi_zero(const WeightedHypergraph& H, BernoulliParam p);

/// eps^2 / (2 K^2) * v(H) * p with K = v(H) Delta_1(H) / e(H).
[[nodiscard]] double phi_lower_certificate(const WeightedHypergraph& H, BernoulliParam p,
                                           double epsilon);

/// max over interior v of |q_v - logistic(logit p - theta d_v f(q))| plus
/// |theta (f(q) - threshold)|.
[[nodiscard]] double kkt_residual(const WeightedHypergraph& H, BernoulliParam p,
                                  const TailSpec& spec, const VariationalSolution& sol);

/// sum_v i_p(q_v).
[[nodiscard]] double mean_field_objective(std::span<const double> q, double p);

}  // namespace lowertail
