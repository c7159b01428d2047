#include "lowertail/io.hpp"

#include <cmath>
#include <fstream>

namespace lowertail {

namespace {

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(std::string("missing field \"") + key + "\"");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad field \"") + key + "\": " + e.what());
  }
}

}  // namespace

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

WeightedHypergraph hypergraph_from_json(const Json& j) {
  const auto r = required<std::size_t>(j, "r");
  const auto v = required<std::size_t>(j, "v");
  const auto edges = required<Json>(j, "edges");
  if (!edges.is_array()) throw FormatError("\"edges\" must be an array");
  std::vector<Edge> out;
  for (const auto& e : edges) {
    out.push_back(Edge{required<std::vector<Vertex>>(e, "A"), required<double>(e, "d")});
  }
  return WeightedHypergraph(v, r, std::move(out));
}

Json to_json(const WeightedHypergraph& H) {
  Json edges = Json::array();
  for (const Edge& e : H.edges()) edges.push_back({{"A", e.vertices}, {"d", e.weight}});
  return {{"r", H.uniformity()}, {"v", H.vertex_count()}, {"edges", edges}};
}

WeightedHypergraph read_hypergraph(const std::string& path) {
  return hypergraph_from_json(read_json_file(path));
}

PatternHypergraph pattern_from_json(const Json& j) {
  return PatternHypergraph(required<std::size_t>(j, "s"), required<std::size_t>(j, "v"),
                           required<std::vector<std::vector<Vertex>>>(j, "edges"));
}

Json to_json(const PatternHypergraph& H) {
  return {{"s", H.uniformity()}, {"v", H.vertex_count()}, {"edges", H.edges()}};
}

PatternHypergraph read_pattern(const std::string& path) {
  return pattern_from_json(read_json_file(path));
}

Json to_json(const VariationalSolution& s) {
  Json q = Json::array();
  for (double x : s.q_star.values()) q.push_back(x);
  return {{"phi", number_or_null(s.phi)},
          {"theta", number_or_null(s.theta)},
          {"q", q},
          {"status", to_string(s.status)},
          {"kkt_residual", number_or_null(s.kkt_residual)}};
}

Json to_json(const TailEstimate& e) {
  Json ci = nullptr;
  if (e.ci_low && e.ci_high) ci = Json::array({number_or_null(*e.ci_low), number_or_null(*e.ci_high)});
  return {{"method", to_string(e.method)},
          {"log_prob", number_or_null(e.log_prob)},
          {"ci", ci},
          {"samples", e.samples ? Json(*e.samples) : Json(nullptr)},
          {"seed", e.seed ? Json(*e.seed) : Json(nullptr)}};
}

Json to_json(const TiltCertificate& c) {
  Json q = Json::array();
  for (double x : c.q_star.values()) q.push_back(x);
  return {{"method", to_string(EstimateMethod::tilted_certificate)},
          {"q_star", q},
          {"epsilon", c.epsilon},
          {"phi_hat", c.phi_hat},
          {"K_var", c.K_var},
          {"C_prime", c.C_prime},
          {"C", c.C},
          {"j_threshold", c.j_threshold},
          {"pr_Y1", c.pr_y1},
          {"pr_not_Y2", c.pr_not_y2},
          {"empirical_Y1Y2", c.empirical_Y1Y2},
          {"log_lower_bound", number_or_null(c.log_lower_bound)},
          {"exact", c.exact},
          {"vacuous", c.vacuous},
          {"confidence", c.confidence ? Json(*c.confidence) : Json(nullptr)}};
}

}  // namespace lowertail
