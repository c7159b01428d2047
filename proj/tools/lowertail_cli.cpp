// lowertail: command-line front end for the solver, oracles and checks.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lowertail/builders.hpp"
#include "lowertail/harness.hpp"
#include "lowertail/io.hpp"
#include "lowertail/oracles.hpp"
#include "lowertail/variational.hpp"

using namespace lowertail;

namespace {

struct Options {
  std::string pattern_file;
  std::size_t n = 0;
  std::vector<std::size_t> ap;
  std::string hypergraph_file;
  std::vector<double> p{0.5};
  std::vector<double> eta;
  std::vector<double> t;
  double epsilon = 0.3;
  std::string oracle = "exact";
  std::uint64_t samples = 100000;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  std::optional<double> p0;
  std::size_t triangles = 0;
};

void add_instance_options(CLI::App* app, Options& o) {
  auto* pattern = app->add_option("--pattern", o.pattern_file, "pattern JSON file")
                      ->check(CLI::ExistingFile);
  app->add_option("--n", o.n, "host size for --pattern");
  auto* ap = app->add_option("--ap", o.ap, "arithmetic progressions: K,N")
                 ->delimiter(',')
                 ->expected(2);
  auto* hyper = app->add_option("--hypergraph", o.hypergraph_file, "hypergraph JSON file")
                    ->check(CLI::ExistingFile);
  pattern->excludes(ap)->excludes(hyper);
  ap->excludes(hyper);
}

void add_grid_options(CLI::App* app, Options& o) {
  app->add_option("--p", o.p, "comma-separated p values")->delimiter(',');
  auto* eta = app->add_option("--eta", o.eta, "comma-separated eta values")->delimiter(',');
  auto* t = app->add_option("--t", o.t, "comma-separated absolute thresholds")->delimiter(',');
  eta->excludes(t);
}

void add_output_options(CLI::App* app, Options& o) {
  app->add_option("--out", o.out, "output path (default stdout)");
  app->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

InstanceSpec instance_from(const Options& o) {
  if (!o.pattern_file.empty()) {
    if (o.n == 0) throw DomainError("--pattern needs --n");
    return InstanceSpec::from_pattern(o.pattern_file, read_pattern(o.pattern_file), o.n);
  }
  if (!o.ap.empty()) return InstanceSpec::from_ap(o.ap[0], o.ap[1]);
  if (!o.hypergraph_file.empty()) {
    return InstanceSpec::from_hypergraph(o.hypergraph_file, read_hypergraph(o.hypergraph_file));
  }
  throw DomainError("one of --pattern, --ap or --hypergraph is required");
}

TailSpec::Mode mode_of(const Options& o) {
  return o.t.empty() ? TailSpec::Mode::relative : TailSpec::Mode::absolute;
}

std::vector<double> levels_of(const Options& o) {
  if (!o.t.empty()) return o.t;
  if (!o.eta.empty()) return o.eta;
  return {0.5};
}

TailSpec spec_of(TailSpec::Mode mode, double level) {
  return mode == TailSpec::Mode::relative ? TailSpec::relative(level) : TailSpec::absolute(level);
}

std::string num(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int cmd_solve(const Options& o) {
  const InstanceSpec inst = instance_from(o);
  const WeightedHypergraph H = inst.build();
  Output out(o.out);
  Json rows = Json::array();
  if (o.format == "csv") out.stream() << "instance,p,mode,level,threshold,phi,theta,status,kkt_residual,phi_symmetric,q\n";
  for (double p : o.p) {
    for (double level : levels_of(o)) {
      const TailSpec spec = spec_of(mode_of(o), level);
      const BernoulliParam bp(p);
      const auto sol = solve_phi(H, bp, spec);
      const auto sym = solve_phi_symmetric(H, bp, spec);
      if (o.format == "json") {
        rows.push_back({{"instance", inst.id}, {"p", p}, {"level", level},
                        {"mode", o.t.empty() ? "eta" : "t"}, {"threshold", sol.threshold},
                        {"solution", to_json(sol)}, {"phi_symmetric", sym.phi_upper}});
      } else {
        std::string q;
        for (double x : sol.q_star.values()) q += (q.empty() ? "" : " ") + num(x);
        out.stream() << inst.id << "," << num(p) << "," << (o.t.empty() ? "eta" : "t") << ","
                     << num(level) << "," << num(sol.threshold) << "," << num(sol.phi) << ","
                     << num(sol.theta) << "," << to_string(sol.status) << ","
                     << num(sol.kkt_residual) << "," << num(sym.phi_upper) << "," << q << "\n";
      }
    }
  }
  if (o.format == "json") out.stream() << rows.dump(2) << "\n";
  return 0;
}

int cmd_tail(const Options& o) {
  const InstanceSpec inst = instance_from(o);
  const WeightedHypergraph H = inst.build();
  const OracleChoice oracle = parse_oracle(o.oracle);
  Output out(o.out);
  Json rows = Json::array();
  if (o.format == "csv") out.stream() << "instance,p,mode,level,method,log_prob,ci_low,ci_high,samples,seed\n";
  for (double p : o.p) {
    for (double level : levels_of(o)) {
      const TailSpec spec = spec_of(mode_of(o), level);
      std::vector<TailEstimate> estimates;
      if (oracle != OracleChoice::mc) estimates.push_back(exact_lower_tail(H, BernoulliParam(p), spec));
      if (oracle != OracleChoice::exact) {
        estimates.push_back(mc_lower_tail(H, BernoulliParam(p), spec, o.samples, o.seed));
      }
      for (const auto& e : estimates) {
        if (o.format == "json") {
          Json j = to_json(e);
          j["instance"] = inst.id;
          j["p"] = p;
          j["level"] = level;
          rows.push_back(j);
        } else {
          out.stream() << inst.id << "," << num(p) << "," << (o.t.empty() ? "eta" : "t") << ","
                       << num(level) << "," << to_string(e.method) << "," << num(e.log_prob)
                       << "," << (e.ci_low ? num(*e.ci_low) : "") << ","
                       << (e.ci_high ? num(*e.ci_high) : "") << ","
                       << (e.samples ? std::to_string(*e.samples) : "") << ","
                       << (e.seed ? std::to_string(*e.seed) : "") << "\n";
        }
      }
    }
  }
  if (o.format == "json") out.stream() << rows.dump(2) << "\n";
  return 0;
}

int cmd_certify(const Options& o) {
  const InstanceSpec inst = instance_from(o);
  const WeightedHypergraph H = inst.build();
  Output out(o.out);
  bool ok = true;
  Json rows = Json::array();
  if (o.format == "csv") out.stream() << "instance,p,eta,epsilon,phi_hat,C_prime,C,empirical_Y1Y2,log_lower_bound,exact_log_prob,vacuous,pass\n";
  for (double p : o.p) {
    const BernoulliParam bp(p);
    for (double level : levels_of(o)) {
      const double eta = spec_of(mode_of(o), level).as_relative(H, bp).value();
      const auto q = solve_phi(H, bp, TailSpec::relative((1.0 - o.epsilon) * eta)).q_star;
      const auto cert = tilted_lower_bound_certificate(H, bp, TailSpec::relative(eta), o.epsilon,
                                                       q, o.samples, o.seed);
      std::optional<double> exact;
      if (H.vertex_count() <= kExactVertexBudget) {
        exact = exact_lower_tail(H, bp, TailSpec::relative(eta)).log_prob;
      }
      const bool pass = !exact || cert.log_lower_bound <= *exact + 1e-9;
      ok = ok && pass;
      if (o.format == "json") {
        Json j = to_json(cert);
        j["instance"] = inst.id;
        j["p"] = p;
        j["eta"] = eta;
        j["exact_log_prob"] = exact ? number_or_null(*exact) : Json(nullptr);
        j["pass"] = pass;
        rows.push_back(j);
      } else {
        out.stream() << inst.id << "," << num(p) << "," << num(eta) << "," << num(o.epsilon)
                     << "," << num(cert.phi_hat) << "," << num(cert.C_prime) << ","
                     << num(cert.C) << "," << num(cert.empirical_Y1Y2) << ","
                     << num(cert.log_lower_bound) << "," << (exact ? num(*exact) : "") << ","
                     << (cert.vacuous ? 1 : 0) << "," << (pass ? 1 : 0) << "\n";
      }
    }
  }
  if (o.format == "json") out.stream() << rows.dump(2) << "\n";
  return ok ? 0 : 1;
}

int cmd_check(const Options& o) {
  Output out(o.out);
  if (o.triangles > 0) {
    std::vector<double> grid = o.t;
    if (grid.empty()) {
      const double count = static_cast<double>(o.triangles * (o.triangles - 1) * (o.triangles - 2) / 6);
      for (double t = 0; t <= count; t += 1.0) grid.push_back(t);
    }
    const auto rep = theorem_triangles_check(o.triangles, grid);
    write_csv(out.stream(), rep);
    return rep.passed() ? 0 : 1;
  }

  const OracleChoice oracle = parse_oracle(o.oracle);
  if (!o.ap.empty()) {
    const double p0 = o.p0 ? *o.p0 : *std::max_element(o.p.begin(), o.p.end());
    bool ok = true;
    bool header = true;
    for (double p : o.p) {
      const auto rep = ap_demo(o.ap[0], o.ap[1], BernoulliParam(p), levels_of(o), o.epsilon,
                               {p0, oracle, o.samples, o.seed});
      std::ostringstream s;
      write_csv(s, rep);
      std::string text = s.str();
      if (!header) text = text.substr(text.find('\n') + 1);
      header = false;
      out.stream() << text;
      ok = ok && rep.passed();
    }
    return ok ? 0 : 1;
  }

  ExperimentConfig cfg;
  cfg.instances.push_back(instance_from(o));
  cfg.p_grid = o.p;
  cfg.mode = mode_of(o);
  cfg.levels = levels_of(o);
  cfg.epsilon = o.epsilon;
  cfg.oracle = oracle;
  cfg.samples = o.samples;
  cfg.seed = o.seed;
  cfg.p0 = o.p0;
  const auto rows = run_experiment(cfg);
  if (o.format == "json") {
    out.stream() << rows_to_json(rows).dump(2) << "\n";
  } else {
    write_csv(out.stream(), rows);
    if (!o.out.empty()) {
      std::ofstream side(o.out + ".json");
      side << rows_to_json(rows).dump(2) << "\n";
    }
  }
  return all_passed(rows) ? 0 : 1;
}

int cmd_audit(const Options& o) {
  Output out(o.out);
  if (!o.pattern_file.empty()) {
    if (o.n == 0) throw DomainError("--pattern needs --n");
    const PatternHypergraph H = read_pattern(o.pattern_file);
    const DegreeAudit a = degree_bound_audit(H, o.n);
    const DensityReport d = s_density(H);
    Json j = {{"pattern", to_json(H)},
              {"n", o.n},
              {"density", std::to_string(d.value.numerator()) + "/" +
                              std::to_string(d.value.denominator())},
              {"vertex_count", a.vertex_count},
              {"total_weight", a.total_weight},
              {"delta1", a.delta1},
              {"delta1_identity", a.delta1_identity}};
    Json rows = Json::array();
    for (const auto& r : a.rows) {
      rows.push_back({{"u", r.u}, {"max_degree", r.max_degree}, {"bound", r.bound},
                      {"slack", number_or_null(r.slack)}, {"holds", r.holds}});
    }
    j["rows"] = rows;
    out.stream() << j.dump(2) << "\n";
    return a.all_hold() ? 0 : 1;
  }
  if (!o.ap.empty()) {
    const WeightedHypergraph H = ap_hypergraph(o.ap[0], o.ap[1]);
    Json degrees = Json::array();
    for (std::size_t s = 1; s <= H.uniformity(); ++s) degrees.push_back(max_degree(H, s));
    const double bound = static_cast<double>(o.ap[0] * o.ap[1]);
    const bool holds = max_degree(H, 1) <= bound;
    out.stream() << Json{{"k", o.ap[0]}, {"n", o.ap[1]}, {"edges", H.edge_count()},
                         {"max_degrees", degrees}, {"delta1_bound", bound}, {"holds", holds}}
                        .dump(2)
                 << "\n";
    return holds ? 0 : 1;
  }
  const WeightedHypergraph H = instance_from(o).build();
  Json degrees = Json::array();
  for (std::size_t s = 1; s <= H.uniformity(); ++s) degrees.push_back(max_degree(H, s));
  out.stream() << Json{{"v", H.vertex_count()}, {"r", H.uniformity()}, {"e", total_weight(H)},
                       {"max_degrees", degrees},
                       {"K", static_cast<double>(H.vertex_count()) * max_degree(H, 1) / total_weight(H)}}
                      .dump(2)
               << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field lower-tail rates, tail oracles and inequality checks"};
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "variational rate for one instance");
  auto* tail = app.add_subcommand("tail", "lower-tail probability estimates");
  auto* certify = app.add_subcommand("certify", "tilted-measure lower bound");
  auto* check = app.add_subcommand("check", "theorem-level inequality suites");
  auto* audit = app.add_subcommand("audit", "degree and density report");

  for (auto* cmd : {solve, tail, certify, check, audit}) {
    add_instance_options(cmd, o);
    add_output_options(cmd, o);
  }
  for (auto* cmd : {solve, tail, certify, check}) add_grid_options(cmd, o);
  for (auto* cmd : {certify, check}) cmd->add_option("--epsilon", o.epsilon, "epsilon in (0,1)");
  for (auto* cmd : {tail, check}) {
    cmd->add_option("--oracle", o.oracle, "exact, mc or both")
        ->check(CLI::IsMember({"exact", "mc", "both"}));
  }
  for (auto* cmd : {tail, certify, check}) {
    cmd->add_option("--samples", o.samples, "Monte Carlo sample count");
    cmd->add_option("--seed", o.seed, "random seed");
  }
  check->add_option("--p0", o.p0, "p0 for the theorem constants (default: max p)");
  check->add_option("--triangles", o.triangles, "run the triangle suite on K_n, n <= 7");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return cmd_solve(o);
    if (*tail) return cmd_tail(o);
    if (*certify) return cmd_certify(o);
    if (*check) return cmd_check(o);
    if (*audit) return cmd_audit(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
