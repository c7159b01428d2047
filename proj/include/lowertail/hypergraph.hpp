#pragma once

// Weighted r-uniform hypergraphs on dense vertex indices 0..v-1.
//
// An edge A carries a weight d_A > 0. Edges with the same vertex set are
// merged at construction by adding their weights. For v <= 64 every edge
// also carries a bitmask so that subset tests against a state word are O(1).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lowertail/entropy.hpp"

namespace lowertail {

using Vertex = std::uint32_t;

/// A sorted, duplicate-free list of vertex indices.
class VertexSet {
 public:
  VertexSet() = default;
  VertexSet(std::initializer_list<Vertex> vs);
  explicit VertexSet(std::vector<Vertex> vs);

  static VertexSet from_mask(std::uint64_t mask);
  static VertexSet range(std::size_t n);

  [[nodiscard]] std::span<const Vertex> items() const noexcept { return items_; }
  [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
  [[nodiscard]] bool empty() const noexcept { return items_.empty(); }
  [[nodiscard]] bool contains(Vertex v) const;
  /// Bitmask of the set; requires every element < 64.
  [[nodiscard]] std::uint64_t mask() const;
  [[nodiscard]] auto begin() const noexcept { return items_.begin(); }
  [[nodiscard]] auto end() const noexcept { return items_.end(); }

  friend bool operator==(const VertexSet&, const VertexSet&) = default;

 private:
  std::vector<Vertex> items_;
};

struct Edge {
  std::vector<Vertex> vertices;  // sorted
  double weight = 1.0;
};

class WeightedHypergraph {
 public:
  /// Validates uniformity, ranges and weights; merges duplicate vertex sets.
  WeightedHypergraph(std::size_t vertex_count, std::size_t uniformity, std::vector<Edge> edges);

  [[nodiscard]] std::size_t vertex_count() const noexcept { return vertex_count_; }
  [[nodiscard]] std::size_t uniformity() const noexcept { return uniformity_; }
  [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }
  [[nodiscard]] bool empty() const noexcept { return edges_.empty(); }
  [[nodiscard]] std::span<const Edge> edges() const noexcept { return edges_; }
  [[nodiscard]] const Edge& edge(std::size_t i) const { return edges_[i]; }
  [[nodiscard]] std::span<const std::size_t> incident_edges(Vertex v) const;

  [[nodiscard]] bool has_masks() const noexcept { return vertex_count_ <= 64; }
  [[nodiscard]] std::uint64_t edge_mask(std::size_t i) const { return masks_[i]; }

  /// True when every weight equals 1.
  [[nodiscard]] bool unit_weights() const noexcept;

 private:
  std::size_t vertex_count_;
  std::size_t uniformity_;
  std::vector<Edge> edges_;
  std::vector<std::uint64_t> masks_;
  std::vector<std::size_t> incidence_offsets_;
  std::vector<std::size_t> incidence_;
};

/// Independent retention probabilities q_v in [0,1].
class ProductMeasure {
 public:
  explicit ProductMeasure(std::vector<double> q);
  static ProductMeasure constant(std::size_t n, double value);

  [[nodiscard]] std::size_t size() const noexcept { return q_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept { return q_; }
  [[nodiscard]] double operator[](std::size_t v) const { return q_[v]; }

 private:
  std::vector<double> q_;
};

/// e(H).
[[nodiscard]] double total_weight(const WeightedHypergraph& H);

/// deg_H B, the weight of edges containing B.
[[nodiscard]] double degree(const WeightedHypergraph& H, const VertexSet& B);

/// Delta_s(H). Enumerates the size-s subsets of edges only.
[[nodiscard]] double max_degree(const WeightedHypergraph& H, std::size_t s);

/// e(H[R]).
[[nodiscard]] double induced_weight(const WeightedHypergraph& H, const VertexSet& R);

/// f(q) = sum_A d_A prod_{v in A} q_v.
[[nodiscard]] double expected_induced_weight(const WeightedHypergraph& H, std::span<const double> q);
[[nodiscard]] double expected_induced_weight(const WeightedHypergraph& H, const ProductMeasure& q);

/// d f / d q_v at q; does not depend on q_v itself.
[[nodiscard]] double vertex_partial(const WeightedHypergraph& H, std::span<const double> q, Vertex v);

/// Gradient of f at q.
[[nodiscard]] std::vector<double> vertex_partials(const WeightedHypergraph& H,
                                                  std::span<const double> q);

/// d_B f(1) obtained by differentiating each monomial of f.
[[nodiscard]] double partial_derivative_at_one(const WeightedHypergraph& H, const VertexSet& B);

/// H - W. Surviving vertices are relabelled 0..|V\W|-1 in increasing order of
/// their original index.
[[nodiscard]] WeightedHypergraph restriction(const WeightedHypergraph& H, const VertexSet& W);

struct DegreeCondition {
  bool holds;
  std::size_t worst_s;
  double ratio;                  ///< max_s Delta_s / ((lambda p)^{s-1} e/v)
  std::vector<double> ratios;    ///< per s = 1..r (index s-1)
};

/// Checks Delta_s(H) <= K (lambda p)^{s-1} e(H)/v(H) for all s in [1, r].
[[nodiscard]] DegreeCondition degree_condition_check(const WeightedHypergraph& H, BernoulliParam p,
                                                     double K, double lambda);

inline constexpr std::size_t kIndependenceBudget = 40;

/// alpha(H), the largest R with e(H[R]) = 0. Exact branch and bound; throws
/// BudgetError when v(H) exceeds kIndependenceBudget.
[[nodiscard]] std::size_t independence_number(const WeightedHypergraph& H);

/// A maximum independent set witnessing independence_number.
[[nodiscard]] VertexSet maximum_independent_set(const WeightedHypergraph& H);

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// For F on the power set of A (|A| = k, F indexed by bitmask over k bits),
/// returns the difference between the two sides of
///   F(A) - prod_a F({a})
///     = sum_{|B|>=2} sum_{b in B} (F(B) - F(B\b)F({b})) prod_{A\B} F({a}) / (C(k,|B|) |B|).
[[nodiscard]] double telescoping_identity_residual(std::span<const double> F);

}  // namespace lowertail
