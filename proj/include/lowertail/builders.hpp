#pragma once

// Application hypergraphs: copies of a fixed pattern in the complete
// s-uniform hypergraph on [n], and k-term arithmetic progressions in [n].
// Also the s-density m_s of a pattern and the degree audits used to check
// the max-degree hypotheses on these hypergraphs.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/rational.hpp>

#include "lowertail/hypergraph.hpp"

namespace lowertail {

using Rational = boost::rational<std::int64_t>;

/// An unweighted s-uniform pattern H on vertices 0..v-1. Every vertex must lie
/// in some edge.
class PatternHypergraph {
 public:
  PatternHypergraph(std::size_t s, std::size_t v, std::vector<std::vector<Vertex>> edges);

  static PatternHypergraph complete_graph(std::size_t k);
  static PatternHypergraph single_edge(std::size_t s);

  [[nodiscard]] std::size_t uniformity() const noexcept { return s_; }
  [[nodiscard]] std::size_t vertex_count() const noexcept { return v_; }
  [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }
  [[nodiscard]] const std::vector<std::vector<Vertex>>& edges() const noexcept { return edges_; }

  /// Same pattern with vertex i renamed perm[i].
  [[nodiscard]] PatternHypergraph relabelled(const std::vector<Vertex>& perm) const;

 private:
  std::size_t s_;
  std::size_t v_;
  std::vector<std::vector<Vertex>> edges_;
};

struct DensityReport {
  Rational value;
  /// Edge indices (into the pattern) of a subpattern attaining the maximum;
  /// the whole pattern when e_H = 1.
  std::vector<std::size_t> achieving_edges;
};

/// m_s(H) = max over F in H with e_F >= 2 of (e_F - 1)/(v_F - s); 1/s if e_H = 1.
[[nodiscard]] DensityReport s_density(const PatternHypergraph& H);

/// m_2 for graph patterns (s = 2).
[[nodiscard]] DensityReport two_density(const PatternHypergraph& H);

/// |Aut(H)| by brute force over vertex permutations; v_H <= 10.
[[nodiscard]] std::uint64_t automorphism_count(const PatternHypergraph& H);

/// Rank/unrank of s-subsets of {0..n-1} in colexicographic order.
class SubsetIndexer {
 public:
  SubsetIndexer(std::size_t n, std::size_t s);
  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  [[nodiscard]] Vertex rank(std::span<const Vertex> sorted_subset) const;
  [[nodiscard]] std::vector<Vertex> unrank(Vertex index) const;

 private:
  std::size_t n_;
  std::size_t s_;
  std::size_t count_;
  std::vector<std::vector<std::uint64_t>> binom_;
};

inline constexpr std::size_t kDefaultEdgeBudget = 10'000'000;

/// Hypergraph on the s-subsets of [n] whose unit-weight edges are the edge
/// sets of all copies of H in the complete s-uniform hypergraph on [n].
/// Vertex i of the result is the s-subset SubsetIndexer(n, s).unrank(i).
[[nodiscard]] WeightedHypergraph copy_hypergraph(const PatternHypergraph& H, std::size_t n,
                                                 std::size_t edge_budget = kDefaultEdgeBudget);

/// Expected number of copies v_H!/|Aut(H)| * C(n, v_H).
[[nodiscard]] double copy_count_formula(const PatternHypergraph& H, std::size_t n);

/// Number of (unlabelled) copies of H in the host G, an s-uniform hypergraph
/// on [n] given by its edge list. Counted by backtracking over injective maps
/// and dividing by |Aut(H)|.
[[nodiscard]] std::uint64_t count_copies(const PatternHypergraph& H, std::size_t n,
                                         const std::vector<std::vector<Vertex>>& host,
                                         std::uint64_t map_budget = 100'000'000);

/// Converts a host edge list into the vertex set of copy_hypergraph(H, n).
[[nodiscard]] VertexSet host_as_vertex_set(std::size_t n, std::size_t s,
                                           const std::vector<std::vector<Vertex>>& host);

/// k-term arithmetic progressions in [n]; vertex i stands for the integer i+1.
[[nodiscard]] WeightedHypergraph ap_hypergraph(std::size_t k, std::size_t n);

/// Number of k-term progressions inside I (integers >= 1).
[[nodiscard]] std::uint64_t count_aps(std::size_t k, const std::vector<std::int64_t>& I);

struct DegreeAuditRow {
  std::size_t u;
  double max_degree;
  double bound;  ///< (n^{-1/m_s})^{u-1} n^{v_H - s}
  double slack;  ///< bound / max_degree (inf when max_degree = 0)
  bool holds;
};

struct DegreeAudit {
  double vertex_count;
  double total_weight;
  double delta1;
  bool delta1_identity;  ///< Delta_1 * v(H) == e_H * e(H), exactly
  Rational density;
  std::vector<DegreeAuditRow> rows;  ///< u = 2..e_H
  [[nodiscard]] bool all_hold() const;
};

[[nodiscard]] DegreeAudit degree_bound_audit(const PatternHypergraph& H, std::size_t n);

struct TheoremConstants {
  double lambda;
  double C;
};

/// lambda = 1e-5 K^-2 r^-4 eps^9 (1-p0),  C = 1e6 K^2 r^5 eps^-9 (1-p0)^-1 log(1/(1-p0)).
[[nodiscard]] TheoremConstants theorem_constants(std::size_t r, double p0, double epsilon, double K);

}  // namespace lowertail
