#pragma once

// Experiment driver: runs the solver and oracles over grids of (instance, p,
// level) and records each inequality as an explicit check whose verdict can
// be recomputed from the row.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lowertail/builders.hpp"
#include "lowertail/io.hpp"
#include "lowertail/oracles.hpp"
#include "lowertail/variational.hpp"

namespace lowertail {

struct InstanceSpec {
  enum class Kind { pattern, ap, hypergraph };
  Kind kind = Kind::hypergraph;
  std::string id;
  std::optional<PatternHypergraph> pattern;  ///< Kind::pattern
  std::size_t n = 0;                         ///< pattern host size, or AP range
  std::size_t k = 0;                         ///< AP length
  std::optional<WeightedHypergraph> hypergraph;

  static InstanceSpec from_pattern(std::string id, PatternHypergraph H, std::size_t n);
  static InstanceSpec from_ap(std::size_t k, std::size_t n);
  static InstanceSpec from_hypergraph(std::string id, WeightedHypergraph H);

  [[nodiscard]] WeightedHypergraph build() const;
};

enum class OracleChoice { exact, mc, both };

[[nodiscard]] OracleChoice parse_oracle(const std::string& s);

struct ExperimentConfig {
  std::vector<InstanceSpec> instances;
  std::vector<double> p_grid;
  TailSpec::Mode mode = TailSpec::Mode::relative;
  std::vector<double> levels;  ///< eta values (relative) or t values (absolute)
  double epsilon = 0.3;
  OracleChoice oracle = OracleChoice::exact;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  std::optional<double> p0;  ///< defaults to max(p_grid)
  unsigned workers = 1;

  /// Throws DomainError on empty grids or out-of-range values.
  void validate() const;
  [[nodiscard]] double effective_p0() const;
};

/// One inequality lhs <= rhs + tolerance.
struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool asserted = true;  ///< false for diagnostics and statistical comparisons
  bool vacuous = false;  ///< holds for trivial reasons at this scale
  bool pass = true;
  std::string note;
};

[[nodiscard]] Check make_check(std::string name, double lhs, double rhs, double tolerance,
                               bool asserted = true);

struct SandwichReport {
  double eta;
  double epsilon;
  double log_prob;  ///< exact when available, otherwise the MC estimate
  bool log_prob_exact;
  // lower side: -log Pr >= (1-eps) Phi(eta+eps) - C
  double phi_eta_plus_eps;
  double K;
  double lambda;
  double C_lower;
  DegreeCondition degree;
  bool lower_applicable;
  // upper side: log Pr >= tilted certificate
  std::optional<TiltCertificate> tilt;
  std::vector<Check> checks;
};

struct SandwichOptions {
  double p0;
  OracleChoice oracle = OracleChoice::exact;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
};

[[nodiscard]] SandwichReport sandwich_check(const WeightedHypergraph& H, BernoulliParam p,
                                            double eta, double epsilon,
                                            const SandwichOptions& options);

struct ReportRow {
  std::string instance_id;
  double p = 0.0;
  TailSpec::Mode mode = TailSpec::Mode::relative;
  double level = 0.0;
  double threshold = 0.0;
  std::size_t v = 0;
  double e = 0.0;
  std::optional<VariationalSolution> solution;
  double phi_symmetric = 0.0;
  std::optional<double> phi_zero;
  std::optional<double> lower_certificate;
  std::optional<double> exact_log_prob;
  std::optional<TailEstimate> mc;
  std::optional<SandwichReport> sandwich;
  std::vector<Check> checks;
  std::string error;

  [[nodiscard]] bool passed() const;
};

[[nodiscard]] std::vector<ReportRow> run_experiment(const ExperimentConfig& config);

[[nodiscard]] bool all_passed(const std::vector<ReportRow>& rows);

/// One CSV line per (row, check); verdicts are recomputable from lhs, rhs, tol.
void write_csv(std::ostream& out, const std::vector<ReportRow>& rows);
[[nodiscard]] Json rows_to_json(const std::vector<ReportRow>& rows);

struct TriangleRow {
  double t;
  double log_prob;    ///< exact log Pr(X_n <= t)
  double phi_arg;     ///< t + n^{23/8}
  double phi_at_arg;  ///< Phi_n(t + n^{23/8})
  double rhs;         ///< -Phi_n(t + n^{23/8}) + 2 n^{15/8}
  double phi_at_t;    ///< Phi_n(t), gap diagnostic only
  bool vacuous;       ///< rhs >= 0
  bool pass;
};

struct TriangleReport {
  std::size_t n;
  double triangle_count;  ///< C(n,3)
  std::vector<TriangleRow> rows;
  [[nodiscard]] bool passed() const;
};

/// log Pr(X_n <= t) <= -Phi_n(t + n^{23/8}) + 2 n^{15/8} at p = 1/2 for each
/// t, with exact probabilities over all 2^{C(n,2)} graphs. 3 <= n <= 7.
[[nodiscard]] TriangleReport theorem_triangles_check(std::size_t n, const std::vector<double>& t_grid);

void write_csv(std::ostream& out, const TriangleReport& report);

struct ApDemoReport {
  std::size_t k;
  std::size_t n;
  double p;
  double delta1;
  double delta1_bound;  ///< k n
  std::vector<double> max_degrees;  ///< Delta_s for s = 1..k
  std::vector<SandwichReport> rows;
  [[nodiscard]] bool passed() const;
};

[[nodiscard]] ApDemoReport ap_demo(std::size_t k, std::size_t n, BernoulliParam p,
                                   const std::vector<double>& eta_grid, double epsilon,
                                   const SandwichOptions& options);

void write_csv(std::ostream& out, const ApDemoReport& report);

}  // namespace lowertail
