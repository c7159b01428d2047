#pragma once

// JSON formats:
//   hypergraph  {"r": int, "v": int, "edges": [{"A": [ints], "d": float}]}
//   pattern     {"s": int, "v": int, "edges": [[ints]]}
//   solution    {"phi", "theta", "q", "status", "kkt_residual"}
//   estimate    {"method", "log_prob", "ci", "samples", "seed"}
// Non-finite floats are written as null.

#include <string>

#include <json.hpp>

#include "lowertail/builders.hpp"
#include "lowertail/hypergraph.hpp"
#include "lowertail/oracles.hpp"
#include "lowertail/variational.hpp"

namespace lowertail {

using Json = nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[nodiscard]] WeightedHypergraph hypergraph_from_json(const Json& j);
[[nodiscard]] Json to_json(const WeightedHypergraph& H);
[[nodiscard]] WeightedHypergraph read_hypergraph(const std::string& path);

[[nodiscard]] PatternHypergraph pattern_from_json(const Json& j);
[[nodiscard]] Json to_json(const PatternHypergraph& H);
[[nodiscard]] PatternHypergraph read_pattern(const std::string& path);

[[nodiscard]] Json to_json(const VariationalSolution& s);
[[nodiscard]] Json to_json(const TailEstimate& e);
[[nodiscard]] Json to_json(const TiltCertificate& c);

/// A double as JSON, or null when it is not finite.
[[nodiscard]] Json number_or_null(double x);

[[nodiscard]] Json read_json_file(const std::string& path);

}  // namespace lowertail
