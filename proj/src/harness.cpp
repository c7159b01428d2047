#include "lowertail/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>

namespace lowertail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : std::string(); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json check_to_json(const Check& c) {
  return {{"name", c.name},         {"lhs", number_or_null(c.lhs)},
          {"rhs", number_or_null(c.rhs)}, {"tolerance", c.tolerance},
          {"asserted", c.asserted}, {"vacuous", c.vacuous},
          {"pass", c.pass},         {"note", c.note}};
}

SandwichReport sandwich_from(const WeightedHypergraph& H, BernoulliParam p, double eta,
                             double epsilon, const SandwichOptions& options, double log_prob,
                             bool exact) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0,1)");
  SandwichReport rep{};
  rep.eta = eta;
  rep.epsilon = epsilon;
  rep.log_prob = log_prob;
  rep.log_prob_exact = exact;

  const double v = static_cast<double>(H.vertex_count());
  rep.K = v * max_degree(H, 1) / total_weight(H);
  const TheoremConstants tc = theorem_constants(H.uniformity(), options.p0, epsilon, rep.K);
  rep.lambda = tc.lambda;
  rep.C_lower = tc.C;
  rep.degree = degree_condition_check(H, p, rep.K, rep.lambda);
  rep.lower_applicable = rep.degree.holds && p.value() <= options.p0;
  rep.phi_eta_plus_eps = solve_phi(H, p, TailSpec::relative(eta + epsilon)).phi;

  Check lower = make_check("lower_tail_rate_lower_bound",
                           (1.0 - epsilon) * rep.phi_eta_plus_eps - rep.C_lower, -log_prob, 1e-9,
                           rep.lower_applicable && exact);
  lower.vacuous = lower.lhs <= 0.0;
  if (!rep.degree.holds) {
    lower.note = "not applicable: degree condition fails at s=" +
                 std::to_string(rep.degree.worst_s);
  } else if (p.value() > options.p0) {
    lower.note = "not applicable: p > p0";
  }
  rep.checks.push_back(lower);

  const VariationalSolution tilted = solve_phi(H, p, TailSpec::relative((1.0 - epsilon) * eta));
  rep.tilt = tilted_lower_bound_certificate(H, p, TailSpec::relative(eta), epsilon,
                                            tilted.q_star, options.samples, options.seed);
  const TiltCertificate& cert = *rep.tilt;

  Check tilt = make_check("tilt_certificate", cert.log_lower_bound, log_prob, 1e-9,
                          exact && cert.exact);
  tilt.vacuous = cert.vacuous;
  if (cert.vacuous) tilt.note = "certificate vacuous: Pr(Y1 and Y2) = 0";
  if (!cert.exact) tilt.note = "sampled certificate at 95% confidence";
  rep.checks.push_back(tilt);

  Check upper = make_check("lower_tail_rate_upper_bound", -log_prob,
                           (1.0 + epsilon) * cert.phi_hat + cert.C, 1e-9, exact);
  upper.vacuous = -log_prob <= cert.C;
  rep.checks.push_back(upper);

  Check half = make_check("tilt_mass_half_eps", epsilon / 2.0, cert.empirical_Y1Y2, 1e-12, false);
  half.note = "diagnostic; guaranteed only for an exact minimiser";
  rep.checks.push_back(half);
  return rep;
}

ReportRow run_row(const InstanceSpec& inst, const WeightedHypergraph& H, double p_value,
                  double level, const ExperimentConfig& config) {
  ReportRow row;
  row.instance_id = inst.id;
  row.p = p_value;
  row.mode = config.mode;
  row.level = level;
  row.v = H.vertex_count();
  row.e = total_weight(H);
  try {
    const BernoulliParam p(p_value);
    const TailSpec spec = config.mode == TailSpec::Mode::relative ? TailSpec::relative(level)
                                                                   : TailSpec::absolute(level);
    row.threshold = spec.threshold(H, p);
    const double eta = spec.as_relative(H, p).value();

    row.solution = solve_phi(H, p, spec);
    const VariationalSolution& sol = *row.solution;
    row.phi_symmetric = solve_phi_symmetric(H, p, spec).phi_upper;

    row.checks.push_back(make_check("symmetric_domination", sol.phi, row.phi_symmetric, 1e-8));
    double max_q = 0.0;
    for (double x : sol.q_star.values()) max_q = std::max(max_q, x);
    row.checks.push_back(make_check("minimizer_clipping", max_q, p_value, 1e-12));
    row.checks.push_back(make_check("feasibility", sol.constraint_value, row.threshold,
                                    1e-8 * std::max(row.threshold, 1e-300)));
    row.checks.push_back(make_check("kkt_residual", sol.kkt_residual, 0.0, 1e-8));
    if (eta > 0.0 && eta < 1.0) {
      row.lower_certificate = phi_lower_certificate(H, p, 1.0 - eta);
      row.checks.push_back(
          make_check("mean_field_lower_certificate", *row.lower_certificate, sol.phi, 1e-8));
    }
    if (row.threshold == 0.0 && H.vertex_count() <= kIndependenceBudget) {
      row.phi_zero = phi_zero(H, p);
      row.checks.push_back(
          make_check("zero_threshold_identity", std::abs(sol.phi - *row.phi_zero), 0.0, 1e-6));
    }

    const bool want_exact = config.oracle != OracleChoice::mc;
    const bool want_mc = config.oracle != OracleChoice::exact;
    if (want_exact && H.vertex_count() <= kExactVertexBudget) {
      row.exact_log_prob = exact_lower_tail(H, p, spec).log_prob;
    }
    if (want_mc || (want_exact && !row.exact_log_prob)) {
      row.mc = mc_lower_tail(H, p, spec, config.samples, config.seed);
    }
    if (row.exact_log_prob && row.mc) {
      Check cover = make_check("mc_interval_covers_exact", *row.mc->ci_low, *row.exact_log_prob,
                               0.0, false);
      cover.pass = cover.pass && *row.exact_log_prob <= *row.mc->ci_high;
      cover.note = "statistical; expected to hold in about 95% of seeds";
      row.checks.push_back(cover);
    }

    const double log_prob = row.exact_log_prob ? *row.exact_log_prob : row.mc->log_prob;
    SandwichOptions opts{config.effective_p0(), config.oracle, config.samples, config.seed};
    row.sandwich = sandwich_from(H, p, eta, config.epsilon, opts, log_prob,
                                 row.exact_log_prob.has_value());
    for (const Check& c : row.sandwich->checks) row.checks.push_back(c);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::string mode_name(TailSpec::Mode m) {
  return m == TailSpec::Mode::relative ? "eta" : "t";
}

}  // namespace

InstanceSpec InstanceSpec::from_pattern(std::string id, PatternHypergraph H, std::size_t n) {
  InstanceSpec s;
  s.kind = Kind::pattern;
  s.id = std::move(id);
  s.pattern = std::move(H);
  s.n = n;
  return s;
}

InstanceSpec InstanceSpec::from_ap(std::size_t k, std::size_t n) {
  InstanceSpec s;
  s.kind = Kind::ap;
  s.id = "ap_k" + std::to_string(k) + "_n" + std::to_string(n);
  s.k = k;
  s.n = n;
  return s;
}

InstanceSpec InstanceSpec::from_hypergraph(std::string id, WeightedHypergraph H) {
  InstanceSpec s;
  s.kind = Kind::hypergraph;
  s.id = std::move(id);
  s.hypergraph = std::move(H);
  return s;
}

WeightedHypergraph InstanceSpec::build() const {
  switch (kind) {
    case Kind::pattern: return copy_hypergraph(*pattern, n);
    case Kind::ap: return ap_hypergraph(k, n);
    case Kind::hypergraph: return *hypergraph;
  }
  throw DomainError("unknown instance kind");
}

OracleChoice parse_oracle(const std::string& s) {
  if (s == "exact") return OracleChoice::exact;
  if (s == "mc") return OracleChoice::mc;
  if (s == "both") return OracleChoice::both;
  throw DomainError("oracle must be exact, mc or both");
}

void ExperimentConfig::validate() const {
  if (instances.empty()) throw DomainError("config: no instances");
  if (p_grid.empty()) throw DomainError("config: empty p grid");
  if (levels.empty()) throw DomainError("config: empty eta/t grid");
  for (double p : p_grid) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("config: p values must lie in (0,1)");
  }
  for (double x : levels) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("config: levels must be >= 0");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("config: epsilon must lie in (0,1)");
  if (oracle != OracleChoice::exact && samples < 100) {
    throw DomainError("config: Monte Carlo needs at least 100 samples");
  }
  if (p0 && !(*p0 > 0.0 && *p0 < 1.0)) throw DomainError("config: p0 must lie in (0,1)");
}

double ExperimentConfig::effective_p0() const {
  return p0 ? *p0 : *std::max_element(p_grid.begin(), p_grid.end());
}

Check make_check(std::string name, double lhs, double rhs, double tolerance, bool asserted) {
  Check c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.tolerance = tolerance;
  c.asserted = asserted;
  c.pass = lhs <= rhs + tolerance;
  return c;
}

SandwichReport sandwich_check(const WeightedHypergraph& H, BernoulliParam p, double eta,
                              double epsilon, const SandwichOptions& options) {
  const TailSpec spec = TailSpec::relative(eta);
  if (options.oracle != OracleChoice::mc && H.vertex_count() <= kExactVertexBudget) {
    return sandwich_from(H, p, eta, epsilon, options, exact_lower_tail(H, p, spec).log_prob,
                         true);
  }
  if (options.oracle == OracleChoice::exact) {
    throw BudgetError("sandwich_check: exact oracle needs v(H) <= 28");
  }
  return sandwich_from(H, p, eta, epsilon, options,
                       mc_lower_tail(H, p, spec, options.samples, options.seed).log_prob, false);
}

bool ReportRow::passed() const {
  if (!error.empty()) return false;
  return std::all_of(checks.begin(), checks.end(),
                     [](const Check& c) { return !c.asserted || c.pass; });
}

std::vector<ReportRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  struct Task {
    const InstanceSpec* inst;
    std::size_t graph;
    double p;
    double level;
  };
  std::vector<std::optional<WeightedHypergraph>> graphs;
  std::vector<std::string> build_errors;
  std::vector<Task> tasks;
  for (const auto& inst : config.instances) {
    try {
      graphs.emplace_back(inst.build());
      build_errors.emplace_back();
    } catch (const std::exception& e) {
      graphs.emplace_back(std::nullopt);
      build_errors.emplace_back(e.what());
    }
    for (double p : config.p_grid) {
      for (double level : config.levels) tasks.push_back({&inst, graphs.size() - 1, p, level});
    }
  }

  auto run = [&](const Task& t) {
    if (!graphs[t.graph]) {
      ReportRow row;
      row.instance_id = t.inst->id;
      row.p = t.p;
      row.mode = config.mode;
      row.level = t.level;
      row.error = build_errors[t.graph];
      return row;
    }
    return run_row(*t.inst, *graphs[t.graph], t.p, t.level, config);
  };

  std::vector<ReportRow> rows;
  rows.reserve(tasks.size());
  const std::size_t workers = std::max(1U, config.workers);
  for (std::size_t begin = 0; begin < tasks.size(); begin += workers) {
    const std::size_t end = std::min(tasks.size(), begin + workers);
    if (workers == 1) {
      rows.push_back(run(tasks[begin]));
      continue;
    }
    std::vector<std::future<ReportRow>> batch;
    for (std::size_t i = begin; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, run, std::cref(tasks[i])));
    }
    for (auto& f : batch) rows.push_back(f.get());
  }
  return rows;
}

bool all_passed(const std::vector<ReportRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.passed(); });
}

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "instance,p,mode,level,threshold,v,e,phi,phi_symmetric,phi_zero,lower_certificate,"
         "status,kkt_residual,exact_log_prob,mc_log_prob,mc_ci_low,mc_ci_high,"
         "tilt_log_lower_bound,check,lhs,rhs,tol,asserted,vacuous,pass,note,error\n";
  for (const auto& r : rows) {
    std::string prefix = csv_field(r.instance_id) + "," + fmt(r.p) + "," + mode_name(r.mode) +
                         "," + fmt(r.level) + "," + fmt(r.threshold) + "," +
                         std::to_string(r.v) + "," + fmt(r.e) + ",";
    prefix += (r.solution ? fmt(r.solution->phi) : "") + "," + fmt(r.phi_symmetric) + "," +
              fmt(r.phi_zero) + "," + fmt(r.lower_certificate) + ",";
    prefix += (r.solution ? to_string(r.solution->status) : "") + "," +
              (r.solution ? fmt(r.solution->kkt_residual) : "") + ",";
    prefix += fmt(r.exact_log_prob) + ",";
    prefix += r.mc ? fmt(r.mc->log_prob) + "," + fmt(r.mc->ci_low) + "," + fmt(r.mc->ci_high)
                   : std::string(",,");
    prefix += ",";
    prefix += (r.sandwich && r.sandwich->tilt) ? fmt(r.sandwich->tilt->log_lower_bound) : "";
    prefix += ",";
    if (r.checks.empty()) {
      out << prefix << "none,,,,,,,," << csv_field(r.error) << "\n";
      continue;
    }
    for (const auto& c : r.checks) {
      out << prefix << c.name << "," << fmt(c.lhs) << "," << fmt(c.rhs) << ","
          << fmt(c.tolerance) << "," << (c.asserted ? 1 : 0) << "," << (c.vacuous ? 1 : 0)
          << "," << (c.pass ? 1 : 0) << "," << csv_field(c.note) << "," << csv_field(r.error)
          << "\n";
    }
  }
}

Json rows_to_json(const std::vector<ReportRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    Json j = {{"instance", r.instance_id},
              {"p", r.p},
              {"mode", mode_name(r.mode)},
              {"level", r.level},
              {"threshold", r.threshold},
              {"v", r.v},
              {"e", r.e},
              {"phi_symmetric", number_or_null(r.phi_symmetric)},
              {"phi_zero", r.phi_zero ? Json(*r.phi_zero) : Json(nullptr)},
              {"lower_certificate",
               r.lower_certificate ? Json(*r.lower_certificate) : Json(nullptr)},
              {"error", r.error},
              {"passed", r.passed()}};
    j["solution"] = r.solution ? to_json(*r.solution) : Json(nullptr);
    Json estimates = Json::array();
    if (r.exact_log_prob) {
      estimates.push_back(to_json(TailEstimate{*r.exact_log_prob, EstimateMethod::exact,
                                               std::nullopt, std::nullopt, std::nullopt,
                                               std::nullopt}));
    }
    if (r.mc) estimates.push_back(to_json(*r.mc));
    j["estimates"] = estimates;
    if (r.sandwich) {
      const auto& s = *r.sandwich;
      j["sandwich"] = {{"eta", s.eta},
                       {"epsilon", s.epsilon},
                       {"phi_eta_plus_eps", s.phi_eta_plus_eps},
                       {"K", s.K},
                       {"lambda", s.lambda},
                       {"C_lower", s.C_lower},
                       {"degree_condition_holds", s.degree.holds},
                       {"degree_ratio", number_or_null(s.degree.ratio)},
                       {"lower_applicable", s.lower_applicable},
                       {"tilt", s.tilt ? to_json(*s.tilt) : Json(nullptr)}};
    }
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(check_to_json(c));
    j["checks"] = checks;
    out.push_back(std::move(j));
  }
  return out;
}

bool TriangleReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const TriangleRow& r) { return r.pass; });
}

TriangleReport theorem_triangles_check(std::size_t n, const std::vector<double>& t_grid) {
  if (n < 3 || n > 7) throw DomainError("theorem_triangles_check: n must lie in [3, 7]");
  if (t_grid.empty()) throw DomainError("theorem_triangles_check: empty t grid");
  const WeightedHypergraph G = copy_hypergraph(PatternHypergraph::complete_graph(3), n);
  const BernoulliParam half(0.5);
  const double nd = static_cast<double>(n);
  const double shift = std::pow(nd, 23.0 / 8.0);
  const double additive = 2.0 * std::pow(nd, 15.0 / 8.0);

  TriangleReport rep{n, total_weight(G), {}};
  const auto log_probs = exact_lower_tail_sweep(G, half, t_grid);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    TriangleRow row{};
    row.t = t_grid[i];
    row.log_prob = log_probs[i];
    row.phi_arg = row.t + shift;
    row.phi_at_arg = solve_phi(G, half, TailSpec::absolute(row.phi_arg)).phi;
    row.rhs = -row.phi_at_arg + additive;
    row.phi_at_t = solve_phi(G, half, TailSpec::absolute(row.t)).phi;
    row.vacuous = row.rhs >= 0.0;
    row.pass = row.log_prob <= row.rhs + 1e-9;
    rep.rows.push_back(row);
  }
  return rep;
}

void write_csv(std::ostream& out, const TriangleReport& report) {
  out << "n,t,log_prob,phi_arg,phi_at_arg,rhs,phi_at_t,gap,vacuous,pass\n";
  for (const auto& r : report.rows) {
    out << report.n << "," << fmt(r.t) << "," << fmt(r.log_prob) << "," << fmt(r.phi_arg) << ","
        << fmt(r.phi_at_arg) << "," << fmt(r.rhs) << "," << fmt(r.phi_at_t) << ","
        << fmt(-r.log_prob - r.phi_at_t) << "," << (r.vacuous ? "vacuous" : "") << ","
        << (r.pass ? 1 : 0) << "\n";
  }
}

bool ApDemoReport::passed() const {
  if (delta1 > delta1_bound) return false;
  for (const auto& r : rows) {
    for (const auto& c : r.checks) {
      if (c.asserted && !c.pass) return false;
    }
  }
  return true;
}

ApDemoReport ap_demo(std::size_t k, std::size_t n, BernoulliParam p,
                     const std::vector<double>& eta_grid, double epsilon,
                     const SandwichOptions& options) {
  const WeightedHypergraph H = ap_hypergraph(k, n);
  ApDemoReport rep{k, n, p.value(), max_degree(H, 1), static_cast<double>(k * n), {}, {}};
  for (std::size_t s = 1; s <= k; ++s) rep.max_degrees.push_back(max_degree(H, s));
  for (double eta : eta_grid) rep.rows.push_back(sandwich_check(H, p, eta, epsilon, options));
  return rep;
}

void write_csv(std::ostream& out, const ApDemoReport& report) {
  out << "k,n,p,eta,epsilon,log_prob,exact,check,lhs,rhs,tol,asserted,vacuous,pass,note\n";
  for (const auto& r : report.rows) {
    for (const auto& c : r.checks) {
      out << report.k << "," << report.n << "," << fmt(report.p) << "," << fmt(r.eta) << ","
          << fmt(r.epsilon) << "," << fmt(r.log_prob) << "," << (r.log_prob_exact ? 1 : 0)
          << "," << c.name << "," << fmt(c.lhs) << "," << fmt(c.rhs) << ","
          << fmt(c.tolerance) << "," << (c.asserted ? 1 : 0) << "," << (c.vacuous ? 1 : 0)
          << "," << (c.pass ? 1 : 0) << "," << csv_field(c.note) << "\n";
    }
  }
  out << report.k << "," << report.n << "," << fmt(report.p) << ",,,,,degree_one_bound,"
      << fmt(report.delta1) << "," << fmt(report.delta1_bound) << ",0,1,0,"
      << (report.delta1 <= report.delta1_bound ? 1 : 0) << ",\n";
}

}  // namespace lowertail
