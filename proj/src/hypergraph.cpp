#include "lowertail/hypergraph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>

namespace lowertail {

namespace {

struct VectorHash {
  std::size_t operator()(const std::vector<Vertex>& v) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (Vertex x : v) {
      h ^= x;
      h *= 0x100000001b3ULL;
    }
    return h;
  }
};

void check_in_range(const WeightedHypergraph& H, const VertexSet& S, const char* what) {
  for (Vertex v : S) {
    if (v >= H.vertex_count()) {
      throw DomainError(std::string(what) + ": vertex " + std::to_string(v) + " out of range");
    }
  }
}

// Calls fn(subset) for every size-s subset of `items` (in lexicographic order).
template <typename Fn>
void for_each_combination(std::span<const Vertex> items, std::size_t s, Fn&& fn) {
  const std::size_t n = items.size();
  if (s > n) return;
  std::vector<std::size_t> idx(s);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<Vertex> subset(s);
  while (true) {
    for (std::size_t i = 0; i < s; ++i) subset[i] = items[idx[i]];
    fn(subset);
    std::size_t i = s;
    while (i > 0 && idx[i - 1] == n - s + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

VertexSet::VertexSet(std::initializer_list<Vertex> vs) : VertexSet(std::vector<Vertex>(vs)) {}

VertexSet::VertexSet(std::vector<Vertex> vs) : items_(std::move(vs)) {
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

VertexSet VertexSet::from_mask(std::uint64_t mask) {
  std::vector<Vertex> out;
  while (mask != 0) {
    out.push_back(static_cast<Vertex>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return VertexSet(std::move(out));
}

VertexSet VertexSet::range(std::size_t n) {
  std::vector<Vertex> out(n);
  std::iota(out.begin(), out.end(), Vertex{0});
  return VertexSet(std::move(out));
}

bool VertexSet::contains(Vertex v) const {
  return std::binary_search(items_.begin(), items_.end(), v);
}

std::uint64_t VertexSet::mask() const {
  std::uint64_t m = 0;
  for (Vertex v : items_) {
    if (v >= 64) throw DomainError("VertexSet::mask: vertex index >= 64");
    m |= std::uint64_t{1} << v;
  }
  return m;
}

WeightedHypergraph::WeightedHypergraph(std::size_t vertex_count, std::size_t uniformity,
                                       std::vector<Edge> edges)
    : vertex_count_(vertex_count), uniformity_(uniformity) {
  if (uniformity_ == 0) throw DomainError("hypergraph uniformity must be positive");
  std::map<std::vector<Vertex>, double> merged;
  for (Edge& e : edges) {
    std::sort(e.vertices.begin(), e.vertices.end());
    if (std::adjacent_find(e.vertices.begin(), e.vertices.end()) != e.vertices.end()) {
      throw DomainError("hyperedge has repeated vertices");
    }
    if (e.vertices.size() != uniformity_) throw DomainError("hyperedge size differs from r");
    if (!e.vertices.empty() && e.vertices.back() >= vertex_count_) {
      throw DomainError("hyperedge vertex out of range");
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw DomainError("hyperedge weights must be positive and finite");
    }
    merged[e.vertices] += e.weight;
  }
  edges_.reserve(merged.size());
  for (auto& [verts, w] : merged) edges_.push_back(Edge{verts, w});

  if (has_masks()) {
    masks_.reserve(edges_.size());
    for (const Edge& e : edges_) {
      std::uint64_t m = 0;
      for (Vertex v : e.vertices) m |= std::uint64_t{1} << v;
      masks_.push_back(m);
    }
  }

  incidence_offsets_.assign(vertex_count_ + 1, 0);
  for (const Edge& e : edges_) {
    for (Vertex v : e.vertices) ++incidence_offsets_[v + 1];
  }
  std::partial_sum(incidence_offsets_.begin(), incidence_offsets_.end(),
                   incidence_offsets_.begin());
  incidence_.resize(incidence_offsets_.back());
  std::vector<std::size_t> fill(incidence_offsets_.begin(), incidence_offsets_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    for (Vertex v : edges_[i].vertices) incidence_[fill[v]++] = i;
  }
}

std::span<const std::size_t> WeightedHypergraph::incident_edges(Vertex v) const {
  return std::span<const std::size_t>(incidence_).subspan(
      incidence_offsets_[v], incidence_offsets_[v + 1] - incidence_offsets_[v]);
}

bool WeightedHypergraph::unit_weights() const noexcept {
  return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.weight == 1.0; });
}

ProductMeasure::ProductMeasure(std::vector<double> q) : q_(std::move(q)) {
  for (double x : q_) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("product measure entries must lie in [0,1]");
  }
}

ProductMeasure ProductMeasure::constant(std::size_t n, double value) {
  return ProductMeasure(std::vector<double>(n, value));
}

double total_weight(const WeightedHypergraph& H) {
  double total = 0.0;
  for (const Edge& e : H.edges()) total += e.weight;
  return total;
}

double degree(const WeightedHypergraph& H, const VertexSet& B) {
  if (B.empty()) throw DomainError("degree: B must be nonempty");
  check_in_range(H, B, "degree");
  double total = 0.0;
  for (std::size_t i : H.incident_edges(B.items().front())) {
    const Edge& e = H.edge(i);
    if (std::includes(e.vertices.begin(), e.vertices.end(), B.begin(), B.end())) {
      total += e.weight;
    }
  }
  return total;
}

double max_degree(const WeightedHypergraph& H, std::size_t s) {
  if (s < 1 || s > H.uniformity()) throw DomainError("max_degree: s must lie in [1, r]");
  std::unordered_map<std::vector<Vertex>, double, VectorHash> deg;
  for (const Edge& e : H.edges()) {
    for_each_combination(e.vertices, s,
                         [&](const std::vector<Vertex>& sub) { deg[sub] += e.weight; });
  }
  double best = 0.0;
  for (const auto& [key, w] : deg) best = std::max(best, w);
  return best;
}

double induced_weight(const WeightedHypergraph& H, const VertexSet& R) {
  check_in_range(H, R, "induced_weight");
  std::vector<char> in(H.vertex_count(), 0);
  for (Vertex v : R) in[v] = 1;
  double total = 0.0;
  for (const Edge& e : H.edges()) {
    if (std::all_of(e.vertices.begin(), e.vertices.end(), [&](Vertex v) { return in[v] != 0; })) {
      total += e.weight;
    }
  }
  return total;
}

double expected_induced_weight(const WeightedHypergraph& H, std::span<const double> q) {
  if (q.size() != H.vertex_count()) throw DomainError("measure size differs from v(H)");
  double total = 0.0;
  for (const Edge& e : H.edges()) {
    double term = e.weight;
    for (Vertex v : e.vertices) term *= q[v];
    total += term;
  }
  return total;
}

double expected_induced_weight(const WeightedHypergraph& H, const ProductMeasure& q) {
  return expected_induced_weight(H, q.values());
}

double vertex_partial(const WeightedHypergraph& H, std::span<const double> q, Vertex v) {
  double total = 0.0;
  for (std::size_t i : H.incident_edges(v)) {
    const Edge& e = H.edge(i);
    double term = e.weight;
    for (Vertex u : e.vertices) {
      if (u != v) term *= q[u];
    }
    total += term;
  }
  return total;
}

std::vector<double> vertex_partials(const WeightedHypergraph& H, std::span<const double> q) {
  if (q.size() != H.vertex_count()) throw DomainError("measure size differs from v(H)");
  std::vector<double> grad(H.vertex_count(), 0.0);
  for (Vertex v = 0; v < H.vertex_count(); ++v) grad[v] = vertex_partial(H, q, v);
  return grad;
}

double partial_derivative_at_one(const WeightedHypergraph& H, const VertexSet& B) {
  if (B.empty() || B.size() > H.uniformity()) {
    throw DomainError("partial_derivative_at_one: need 1 <= |B| <= r");
  }
  check_in_range(H, B, "partial_derivative_at_one");
  // Differentiate each monomial d_A prod_{A} y_v by every variable of B in turn;
  // a monomial survives iff it contains all of B, leaving d_A prod_{A\B} y_v.
  double total = 0.0;
  for (const Edge& e : H.edges()) {
    std::vector<Vertex> remaining = e.vertices;
    bool alive = true;
    for (Vertex b : B) {
      auto it = std::find(remaining.begin(), remaining.end(), b);
      if (it == remaining.end()) {
        alive = false;
        break;
      }
      remaining.erase(it);
    }
    if (alive) total += e.weight;  // remaining monomial evaluated at 1
  }
  return total;
}

WeightedHypergraph restriction(const WeightedHypergraph& H, const VertexSet& W) {
  check_in_range(H, W, "restriction");
  std::vector<Vertex> relabel(H.vertex_count(), 0);
  std::size_t next = 0;
  for (Vertex v = 0; v < H.vertex_count(); ++v) {
    relabel[v] = W.contains(v) ? static_cast<Vertex>(-1) : static_cast<Vertex>(next++);
  }
  std::vector<Edge> kept;
  for (const Edge& e : H.edges()) {
    Edge mapped{{}, e.weight};
    bool survives = true;
    for (Vertex v : e.vertices) {
      if (relabel[v] == static_cast<Vertex>(-1)) {
        survives = false;
        break;
      }
      mapped.vertices.push_back(relabel[v]);
    }
    if (survives) kept.push_back(std::move(mapped));
  }
  return WeightedHypergraph(next, H.uniformity(), std::move(kept));
}

DegreeCondition degree_condition_check(const WeightedHypergraph& H, BernoulliParam p, double K,
                                       double lambda) {
  if (!(p.value() > 0.0 && p.value() < 1.0)) throw DomainError("degree_condition_check: p in (0,1)");
  if (H.empty() || H.vertex_count() == 0) throw DomainError("degree_condition_check: empty H");
  const double avg = total_weight(H) / static_cast<double>(H.vertex_count());
  DegreeCondition out{true, 1, 0.0, {}};
  for (std::size_t s = 1; s <= H.uniformity(); ++s) {
    const double scale = std::pow(lambda * p.value(), static_cast<double>(s - 1)) * avg;
    const double ratio = max_degree(H, s) / scale;
    out.ratios.push_back(ratio);
    if (s == 1 || ratio > out.ratio) {
      out.ratio = ratio;
      out.worst_s = s;
    }
  }
  out.holds = out.ratio <= K;
  return out;
}

namespace {

// Branch and bound over (included, excluded) bitmasks.
class IndependentSetSearch {
 public:
  explicit IndependentSetSearch(const WeightedHypergraph& H) : n_(H.vertex_count()) {
    masks_.reserve(H.edge_count());
    for (std::size_t i = 0; i < H.edge_count(); ++i) masks_.push_back(H.edge_mask(i));
    all_ = n_ == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n_) - 1);
  }

  std::uint64_t run() {
    best_mask_ = 0;
    best_size_ = -1;
    branch(0, 0);
    return best_mask_;
  }

 private:
  void branch(std::uint64_t inc, std::uint64_t exc) {
    // Propagate: a live edge with a single undecided vertex and the rest
    // included forces that vertex out.
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::uint64_t a : masks_) {
        if (a & exc) continue;
        const std::uint64_t open = a & ~inc;
        if (open == 0) return;  // edge fully included
        if (std::has_single_bit(open)) {
          exc |= open;
          changed = true;
        }
      }
    }
    std::uint64_t undecided = all_ & ~inc & ~exc;

    // Vertices in no live edge can be included for free.
    std::vector<int> live_deg(n_, 0);
    std::uint64_t touched = 0;
    for (std::uint64_t a : masks_) {
      if (a & exc) continue;
      std::uint64_t u = a & undecided;
      touched |= u;
      while (u) {
        ++live_deg[std::countr_zero(u)];
        u &= u - 1;
      }
    }
    inc |= undecided & ~touched;
    undecided &= touched;

    // Bound: live edges with pairwise-disjoint undecided parts each cost one exclusion.
    std::uint64_t used = 0;
    int forced = 0;
    for (std::uint64_t a : masks_) {
      if (a & exc) continue;
      const std::uint64_t u = a & undecided;
      if ((u & used) == 0) {
        used |= u;
        ++forced;
      }
    }
    const int optimistic = std::popcount(inc) + std::popcount(undecided) - forced;
    if (optimistic <= best_size_) return;
    if (undecided == 0) {
      best_size_ = std::popcount(inc);
      best_mask_ = inc;
      return;
    }

    int pick = -1;
    int pick_deg = -1;
    for (std::uint64_t u = undecided; u; u &= u - 1) {
      const int v = std::countr_zero(u);
      if (live_deg[v] > pick_deg) {
        pick_deg = live_deg[v];
        pick = v;
      }
    }
    const std::uint64_t bit = std::uint64_t{1} << pick;
    branch(inc | bit, exc);
    branch(inc, exc | bit);
  }

  std::size_t n_;
  std::vector<std::uint64_t> masks_;
  std::uint64_t all_ = 0;
  std::uint64_t best_mask_ = 0;
  int best_size_ = -1;
};

}  // namespace

VertexSet maximum_independent_set(const WeightedHypergraph& H) {
  if (H.vertex_count() > kIndependenceBudget) {
    throw BudgetError("independence_number: instance too large (v(H) = " +
                      std::to_string(H.vertex_count()) + " > " +
                      std::to_string(kIndependenceBudget) + ")");
  }
  if (H.empty()) return VertexSet::range(H.vertex_count());
  IndependentSetSearch search(H);
  return VertexSet::from_mask(search.run());
}

std::size_t independence_number(const WeightedHypergraph& H) {
  return maximum_independent_set(H).size();
}

double telescoping_identity_residual(std::span<const double> F) {
  const std::size_t size = F.size();
  if (size < 2 || !std::has_single_bit(size)) {
    throw DomainError("telescoping_identity_residual: F must cover the power set of A");
  }
  const int k = std::countr_zero(size);
  if (k > 12) throw DomainError("telescoping_identity_residual: |A| must be at most 12");
  const std::size_t full = size - 1;

  std::vector<double> single(k);
  for (int a = 0; a < k; ++a) single[a] = F[std::size_t{1} << a];

  double lhs = F[full];
  double prod_all = 1.0;
  for (double x : single) prod_all *= x;
  lhs -= prod_all;

  // binom[n][m]
  std::vector<std::vector<double>> binom(k + 1, std::vector<double>(k + 1, 0.0));
  for (int n = 0; n <= k; ++n) {
    binom[n][0] = 1.0;
    for (int m = 1; m <= n; ++m) binom[n][m] = binom[n - 1][m - 1] + binom[n - 1][m];
  }

  double rhs = 0.0;
  for (std::size_t B = 1; B <= full; ++B) {
    const int b_size = std::popcount(B);
    if (b_size < 2) continue;
    double outside = 1.0;
    for (int a = 0; a < k; ++a) {
      if (!(B >> a & 1U)) outside *= single[a];
    }
    double inner = 0.0;
    for (int b = 0; b < k; ++b) {
      if (!(B >> b & 1U)) continue;
      inner += F[B] - F[B & ~(std::size_t{1} << b)] * single[b];
    }
    rhs += inner * outside / (binom[k][b_size] * b_size);
  }
  return lhs - rhs;
}

}  // namespace lowertail
