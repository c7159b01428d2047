#include "lowertail/builders.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>

namespace lowertail {

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

template <typename Fn>
void for_each_subset_of_size(std::size_t n, std::size_t k, Fn&& fn) {
  if (k > n) return;
  std::vector<Vertex> idx(k);
  std::iota(idx.begin(), idx.end(), Vertex{0});
  while (true) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::vector<std::uint64_t> pattern_edge_masks(const PatternHypergraph& H) {
  std::vector<std::uint64_t> masks;
  for (const auto& e : H.edges()) {
    std::uint64_t m = 0;
    for (Vertex v : e) m |= std::uint64_t{1} << v;
    masks.push_back(m);
  }
  return masks;
}

}  // namespace

PatternHypergraph::PatternHypergraph(std::size_t s, std::size_t v,
                                     std::vector<std::vector<Vertex>> edges)
    : s_(s), v_(v), edges_(std::move(edges)) {
  if (s_ == 0) throw DomainError("pattern uniformity must be positive");
  if (edges_.empty()) throw DomainError("pattern must have at least one edge");
  if (v_ > 32) throw DomainError("pattern has too many vertices (max 32)");
  std::vector<char> covered(v_, 0);
  for (auto& e : edges_) {
    std::sort(e.begin(), e.end());
    if (e.size() != s_) throw DomainError("pattern edge size differs from s");
    if (std::adjacent_find(e.begin(), e.end()) != e.end()) {
      throw DomainError("pattern edge has repeated vertices");
    }
    for (Vertex x : e) {
      if (x >= v_) throw DomainError("pattern edge vertex out of range");
      covered[x] = 1;
    }
  }
  std::vector<std::vector<Vertex>> sorted = edges_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("pattern edges must be distinct");
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
    throw DomainError("pattern has an isolated vertex");
  }
}

PatternHypergraph PatternHypergraph::complete_graph(std::size_t k) {
  std::vector<std::vector<Vertex>> edges;
  for (Vertex a = 0; a < k; ++a) {
    for (Vertex b = a + 1; b < k; ++b) edges.push_back({a, b});
  }
  return PatternHypergraph(2, k, std::move(edges));
}

PatternHypergraph PatternHypergraph::single_edge(std::size_t s) {
  std::vector<Vertex> e(s);
  std::iota(e.begin(), e.end(), Vertex{0});
  return PatternHypergraph(s, s, {e});
}

PatternHypergraph PatternHypergraph::relabelled(const std::vector<Vertex>& perm) const {
  if (perm.size() != v_) throw DomainError("relabelled: permutation size mismatch");
  std::vector<std::vector<Vertex>> edges;
  for (const auto& e : edges_) {
    std::vector<Vertex> m;
    for (Vertex x : e) m.push_back(perm[x]);
    edges.push_back(std::move(m));
  }
  return PatternHypergraph(s_, v_, std::move(edges));
}

DensityReport s_density(const PatternHypergraph& H) {
  const std::size_t s = H.uniformity();
  const std::size_t e_H = H.edge_count();
  if (e_H == 1) {
    return {Rational(1, static_cast<std::int64_t>(s)), {0}};
  }
  // For a fixed vertex set U the ratio is maximised by taking every edge
  // inside U, so it suffices to scan induced subpatterns H[U].
  const auto masks = pattern_edge_masks(H);
  const std::uint64_t full = (std::uint64_t{1} << H.vertex_count()) - 1;
  Rational best(-1);
  std::uint64_t best_set = 0;
  for (std::uint64_t U = 1; U <= full; ++U) {
    const auto u_size = static_cast<std::int64_t>(std::popcount(U));
    if (u_size <= static_cast<std::int64_t>(s)) continue;
    std::int64_t e_F = 0;
    for (std::uint64_t m : masks) e_F += (m & ~U) == 0 ? 1 : 0;
    if (e_F < 2) continue;
    const Rational ratio(e_F - 1, u_size - static_cast<std::int64_t>(s));
    if (ratio > best) {
      best = ratio;
      best_set = U;
    }
  }
  DensityReport out{best, {}};
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if ((masks[i] & ~best_set) == 0) out.achieving_edges.push_back(i);
  }
  return out;
}

DensityReport two_density(const PatternHypergraph& H) {
  if (H.uniformity() != 2) throw DomainError("two_density: pattern must be a graph (s = 2)");
  return s_density(H);
}

std::uint64_t automorphism_count(const PatternHypergraph& H) {
  const std::size_t v = H.vertex_count();
  if (v > 10) throw BudgetError("automorphism_count: v_H > 10");
  std::set<std::vector<Vertex>> edge_set(H.edges().begin(), H.edges().end());
  std::vector<Vertex> perm(v);
  std::iota(perm.begin(), perm.end(), Vertex{0});
  std::uint64_t count = 0;
  do {
    bool ok = true;
    for (const auto& e : H.edges()) {
      std::vector<Vertex> img;
      for (Vertex x : e) img.push_back(perm[x]);
      std::sort(img.begin(), img.end());
      if (!edge_set.contains(img)) {
        ok = false;
        break;
      }
    }
    count += ok ? 1 : 0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count;
}

SubsetIndexer::SubsetIndexer(std::size_t n, std::size_t s) : n_(n), s_(s) {
  if (s == 0 || s > n) throw DomainError("SubsetIndexer: need 1 <= s <= n");
  binom_.assign(n + 1, std::vector<std::uint64_t>(s + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= s; ++j) binom_[i][j] = binomial(i, j);
  }
  const std::uint64_t c = binom_[n][s];
  if (c > std::numeric_limits<Vertex>::max()) throw BudgetError("SubsetIndexer: too many subsets");
  count_ = static_cast<std::size_t>(c);
}

Vertex SubsetIndexer::rank(std::span<const Vertex> sorted_subset) const {
  if (sorted_subset.size() != s_) throw DomainError("SubsetIndexer::rank: wrong subset size");
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < s_; ++i) {
    if (sorted_subset[i] >= n_ || (i > 0 && sorted_subset[i] <= sorted_subset[i - 1])) {
      throw DomainError("SubsetIndexer::rank: subset must be sorted and inside [n]");
    }
    r += binom_[sorted_subset[i]][i + 1];
  }
  return static_cast<Vertex>(r);
}

std::vector<Vertex> SubsetIndexer::unrank(Vertex index) const {
  std::vector<Vertex> out(s_);
  std::uint64_t r = index;
  std::size_t top = n_;
  for (std::size_t i = s_; i-- > 0;) {
    std::size_t c = i;
    // largest c < top with C(c, i+1) <= r
    std::size_t lo = i;
    std::size_t hi = top - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (binom_[mid][i + 1] <= r) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    c = lo;
    out[i] = static_cast<Vertex>(c);
    r -= binom_[c][i + 1];
    top = c;
  }
  return out;
}

double copy_count_formula(const PatternHypergraph& H, std::size_t n) {
  const std::size_t v = H.vertex_count();
  double factorial = 1.0;
  for (std::size_t i = 2; i <= v; ++i) factorial *= static_cast<double>(i);
  return factorial / static_cast<double>(automorphism_count(H)) *
         static_cast<double>(binomial(n, v));
}

WeightedHypergraph copy_hypergraph(const PatternHypergraph& H, std::size_t n,
                                   std::size_t edge_budget) {
  const std::size_t v_H = H.vertex_count();
  const std::size_t s = H.uniformity();
  if (n < v_H) throw DomainError("copy_hypergraph: n must be at least v_H");
  const double expected = copy_count_formula(H, n);
  if (expected > static_cast<double>(edge_budget)) {
    throw BudgetError("copy_hypergraph: " + std::to_string(expected) +
                      " copies exceed the edge budget");
  }
  const SubsetIndexer indexer(n, s);

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(expected));
  std::vector<Vertex> perm(v_H);
  std::vector<Vertex> image(s);
  std::set<std::vector<Vertex>> local;
  // Each copy has vertex support exactly S (no isolated pattern vertices), so
  // duplicates can only arise within a single support S.
  for_each_subset_of_size(n, v_H, [&](const std::vector<Vertex>& S) {
    local.clear();
    std::iota(perm.begin(), perm.end(), Vertex{0});
    do {
      std::vector<Vertex> copy;
      copy.reserve(H.edge_count());
      for (const auto& e : H.edges()) {
        for (std::size_t i = 0; i < s; ++i) image[i] = S[perm[e[i]]];
        std::sort(image.begin(), image.end());
        copy.push_back(indexer.rank(image));
      }
      std::sort(copy.begin(), copy.end());
      local.insert(std::move(copy));
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (const auto& c : local) edges.push_back(Edge{c, 1.0});
  });
  return WeightedHypergraph(indexer.count(), H.edge_count(), std::move(edges));
}

namespace {

class CopyCounter {
 public:
  CopyCounter(const PatternHypergraph& H, std::size_t n,
              const std::vector<std::vector<Vertex>>& host, std::uint64_t budget)
      : H_(H), n_(n), budget_(budget) {
    for (auto e : host) {
      std::sort(e.begin(), e.end());
      if (e.size() != H.uniformity()) throw DomainError("count_copies: host edge size differs");
      for (Vertex x : e) {
        if (x >= n) throw DomainError("count_copies: host vertex out of range");
      }
      host_.insert(std::move(e));
    }
    // Check each pattern edge as soon as its last vertex (in label order) is assigned.
    closing_.resize(H.vertex_count());
    for (const auto& e : H.edges()) closing_[e.back()].push_back(&e);
    assignment_.assign(H.vertex_count(), 0);
    used_.assign(n, 0);
  }

  std::uint64_t maps() {
    extend(0);
    return maps_;
  }

 private:
  void extend(std::size_t depth) {
    if (++nodes_ > budget_) throw BudgetError("count_copies: search budget exceeded");
    if (depth == H_.vertex_count()) {
      ++maps_;
      return;
    }
    for (Vertex x = 0; x < n_; ++x) {
      if (used_[x]) continue;
      assignment_[depth] = x;
      bool ok = true;
      for (const auto* e : closing_[depth]) {
        std::vector<Vertex> img;
        for (Vertex u : *e) img.push_back(assignment_[u]);
        std::sort(img.begin(), img.end());
        if (!host_.contains(img)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      used_[x] = 1;
      extend(depth + 1);
      used_[x] = 0;
    }
  }

  const PatternHypergraph& H_;
  std::size_t n_;
  std::uint64_t budget_;
  std::set<std::vector<Vertex>> host_;
  std::vector<std::vector<const std::vector<Vertex>*>> closing_;
  std::vector<Vertex> assignment_;
  std::vector<char> used_;
  std::uint64_t maps_ = 0;
  std::uint64_t nodes_ = 0;
};

}  // namespace

std::uint64_t count_copies(const PatternHypergraph& H, std::size_t n,
                           const std::vector<std::vector<Vertex>>& host,
                           std::uint64_t map_budget) {
  if (n < H.vertex_count()) return 0;
  CopyCounter counter(H, n, host, map_budget);
  return counter.maps() / automorphism_count(H);
}

VertexSet host_as_vertex_set(std::size_t n, std::size_t s,
                             const std::vector<std::vector<Vertex>>& host) {
  const SubsetIndexer indexer(n, s);
  std::vector<Vertex> out;
  for (auto e : host) {
    std::sort(e.begin(), e.end());
    out.push_back(indexer.rank(e));
  }
  return VertexSet(std::move(out));
}

WeightedHypergraph ap_hypergraph(std::size_t k, std::size_t n) {
  if (k < 3) throw DomainError("ap_hypergraph: k must be at least 3");
  if (n < k) throw DomainError("ap_hypergraph: n must be at least k");
  std::vector<Edge> edges;
  for (std::size_t d = 1; (k - 1) * d <= n - 1; ++d) {
    for (std::size_t x = 1; x + (k - 1) * d <= n; ++x) {
      Edge e{{}, 1.0};
      for (std::size_t j = 0; j < k; ++j) e.vertices.push_back(static_cast<Vertex>(x + j * d - 1));
      edges.push_back(std::move(e));
    }
  }
  return WeightedHypergraph(n, k, std::move(edges));
}

std::uint64_t count_aps(std::size_t k, const std::vector<std::int64_t>& I) {
  if (k == 0) throw DomainError("count_aps: k must be positive");
  std::set<std::int64_t> members(I.begin(), I.end());
  if (k == 1) return members.size();
  if (members.size() < k) return 0;
  const std::int64_t top = *members.rbegin();
  const auto steps = static_cast<std::int64_t>(k - 1);
  std::uint64_t count = 0;
  for (std::int64_t x : members) {
    for (std::int64_t d = 1; x + steps * d <= top; ++d) {
      bool all = true;
      for (std::int64_t j = 1; j <= steps && all; ++j) all = members.contains(x + j * d);
      count += all ? 1 : 0;
    }
  }
  return count;
}

bool DegreeAudit::all_hold() const {
  return delta1_identity &&
         std::all_of(rows.begin(), rows.end(), [](const DegreeAuditRow& r) { return r.holds; });
}

DegreeAudit degree_bound_audit(const PatternHypergraph& H, std::size_t n) {
  const WeightedHypergraph G = copy_hypergraph(H, n);
  DegreeAudit audit{};
  audit.vertex_count = static_cast<double>(G.vertex_count());
  audit.total_weight = total_weight(G);
  audit.delta1 = max_degree(G, 1);
  audit.delta1_identity =
      audit.delta1 * audit.vertex_count == static_cast<double>(H.edge_count()) * audit.total_weight;
  audit.density = s_density(H).value;
  const double m = boost::rational_cast<double>(audit.density);
  const double nd = static_cast<double>(n);
  const double base = std::pow(nd, static_cast<double>(H.vertex_count() - H.uniformity()));
  for (std::size_t u = 2; u <= H.edge_count(); ++u) {
    DegreeAuditRow row{};
    row.u = u;
    row.max_degree = max_degree(G, u);
    row.bound = std::pow(nd, -static_cast<double>(u - 1) / m) * base;
    row.slack = row.max_degree > 0.0 ? row.bound / row.max_degree
                                     : std::numeric_limits<double>::infinity();
    row.holds = row.max_degree <= row.bound * (1.0 + 1e-12);
    audit.rows.push_back(row);
  }
  return audit;
}

TheoremConstants theorem_constants(std::size_t r, double p0, double epsilon, double K) {
  if (r < 1) throw DomainError("theorem_constants: r must be positive");
  if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("theorem_constants: p0 must lie in (0,1)");
  if (!(epsilon > 0.0)) throw DomainError("theorem_constants: epsilon must be positive");
  if (!(K > 0.0)) throw DomainError("theorem_constants: K must be positive");
  const double rd = static_cast<double>(r);
  const double one_minus = 1.0 - p0;
  TheoremConstants c{};
  c.lambda = 1e-5 * std::pow(K, -2.0) * std::pow(rd, -4.0) * std::pow(epsilon, 9.0) * one_minus;
  c.C = 1e6 * K * K * std::pow(rd, 5.0) * std::pow(epsilon, -9.0) / one_minus *
        std::log(1.0 / one_minus);
  return c;
}

}  // namespace lowertail
