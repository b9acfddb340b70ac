// Exact max-flow / min-cut with {0, rational, inf} capacities, the
// capacity-then-cardinality optimal cut, and the flow quantities through
// cylinders and slabs.
#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "fppflow/capacity_field.hpp"
#include "fppflow/geometry.hpp"
#include "fppflow/maxflow.hpp"
#include "fppflow/rational.hpp"
#include "fppflow/zero_clusters.hpp"

namespace fppflow {

/// Undirected capacitated graph with terminal sets. The lattice-level
/// FlowProblem lowers to this.
struct FlowGraph {
  int vertex_count = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<Capacity> capacities;
  VertexSet sources;
  VertexSet sinks;

  void validate() const {
    if (edges.size() != capacities.size()) throw ValidationError("edge/capacity count mismatch");
    if (sources.empty() || sinks.empty()) throw DegenerateRegion("empty source or sink set");
    std::vector<char> mark(static_cast<std::size_t>(vertex_count), 0);
    for (int s : sources) {
      if (s < 0 || s >= vertex_count) throw ValidationError("source out of range");
      mark[s] = 1;
    }
    for (int t : sinks) {
      if (t < 0 || t >= vertex_count) throw ValidationError("sink out of range");
      if (mark[t]) throw DegenerateRegion("sources and sinks intersect");
    }
    for (auto [u, v] : edges)
      if (u < 0 || v < 0 || u >= vertex_count || v >= vertex_count) throw ValidationError("edge endpoint out of range");
  }
};

/// Flow instance on a lattice region; capacities indexed by region edge id.
struct FlowProblem {
  MarkedRegion marked;
  std::vector<Capacity> capacities;

  FlowGraph graph() const {
    FlowGraph g;
    g.vertex_count = static_cast<int>(marked.region.vertex_count());
    g.edges.reserve(marked.region.edge_count());
    for (const auto& e : marked.region.edges()) g.edges.emplace_back(e.u, e.v);
    g.capacities = capacities;
    g.sources = marked.sources;
    g.sinks = marked.sinks;
    return g;
  }
};

template <EdgeField F>
FlowProblem make_problem(LatticeRegion region, VertexSet sources, VertexSet sinks, const F& field) {
  FlowProblem p{{std::move(region), std::move(sources), std::move(sinks)}, {}};
  const LatticeRegion& r = p.marked.region;
  p.capacities.reserve(r.edge_count());
  for (int e = 0; e < static_cast<int>(r.edge_count()); ++e) p.capacities.push_back(field.capacity(r.edge_key(e)));
  return p;
}

struct CutResult {
  Capacity flow_value;
  std::vector<int> cut_edges;  ///< edge ids, ascending
  Capacity cut_capacity;
  std::int64_t cut_cardinality = 0;
  VertexSet source_side;       ///< residual-reachable side, ascending
  bool lexicographic = false;
};

/// Whether removing `cut_edges` leaves no path from sources to sinks.
inline bool cut_separates(const FlowGraph& g, std::span<const int> cut_edges) {
  std::vector<char> removed(g.edges.size(), 0);
  for (int e : cut_edges) removed[e] = 1;
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(g.vertex_count));
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    if (removed[e]) continue;
    adj[g.edges[e].first].emplace_back(g.edges[e].second, e);
    adj[g.edges[e].second].emplace_back(g.edges[e].first, e);
  }
  std::vector<char> seen(static_cast<std::size_t>(g.vertex_count), 0), sink(static_cast<std::size_t>(g.vertex_count), 0);
  for (int t : g.sinks) sink[t] = 1;
  std::vector<int> stack;
  for (int s : g.sources)
    if (!seen[s]) {
      seen[s] = 1;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (sink[v]) return false;
    for (auto [w, e] : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  return true;
}

namespace detail {

struct Scaling {
  std::int64_t denominator = 1;
  std::vector<int128> scaled;  ///< per edge; -1 marks infinity
  int128 finite_total = 0;
};

inline Scaling scale_capacities(std::span<const Capacity> caps) {
  Scaling s;
  for (const Capacity& c : caps)
    if (!c.is_infinite()) s.denominator = lcm_checked(s.denominator, c.value().den());
  s.scaled.reserve(caps.size());
  for (const Capacity& c : caps) {
    if (c.is_infinite()) {
      s.scaled.push_back(-1);
      continue;
    }
    int128 v = int128(c.value().num()) * (s.denominator / c.value().den());
    s.scaled.push_back(v);
    s.finite_total += v;
  }
  return s;
}

struct RawCut {
  int128 flow = 0;
  std::vector<char> source_side;
};

template <typename Cap>
RawCut run_dinic(const FlowGraph& g, std::span<const int128> weights, int128 terminal) {
  const int n = g.vertex_count;
  Dinic<Cap> net(n + 2);
  const int S = n, T = n + 1;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    auto w = static_cast<Cap>(weights[e]);
    if (w > 0) net.add_edge(g.edges[e].first, g.edges[e].second, w, w);
  }
  for (int s : g.sources) net.add_edge(S, s, static_cast<Cap>(terminal));
  for (int t : g.sinks) net.add_edge(t, T, static_cast<Cap>(terminal));
  RawCut out;
  out.flow = net.run(S, T);
  auto reach = net.reachable(S);
  out.source_side.assign(reach.begin(), reach.begin() + n);
  return out;
}

/// Min cut for integer edge weights; int64 arithmetic when the total fits.
inline RawCut solve_weights(const FlowGraph& g, std::span<const int128> weights) {
  long double approx = 1.0L;
  int128 total = 1;
  for (int128 w : weights) {
    approx += static_cast<long double>(w);
    total += w;
  }
  if (approx > 1e36L) throw std::overflow_error("flow weights exceed 128-bit range");
  int128 terminal = total;
  if (approx * 4 < static_cast<long double>(INT64_MAX)) return run_dinic<std::int64_t>(g, weights, terminal);
  return run_dinic<int128>(g, weights, terminal);
}

inline CutResult assemble(const FlowGraph& g, const RawCut& raw) {
  CutResult r;
  for (int v = 0; v < g.vertex_count; ++v)
    if (raw.source_side[v]) r.source_side.push_back(v);
  Capacity total(0);
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    auto [u, v] = g.edges[e];
    if (raw.source_side[u] != raw.source_side[v]) {
      r.cut_edges.push_back(e);
      total += g.capacities[e];
    }
  }
  r.cut_capacity = total;
  r.cut_cardinality = static_cast<std::int64_t>(r.cut_edges.size());
  FPPFLOW_CHECK(cut_separates(g, r.cut_edges), "cut does not separate sources from sinks");
  return r;
}

inline Capacity rational_of(int128 scaled, std::int64_t den) { return Capacity(Rational::from_wide(scaled, den)); }

}  // namespace detail

/// Max flow and its canonical min cut (residual-reachable source side).
/// Infinite edges carry weight W = (sum of finite scaled capacities) + 1,
/// so a flow reaching W means every cut contains an infinite edge.
inline CutResult max_flow(const FlowGraph& g) {
  g.validate();
  auto sc = detail::scale_capacities(g.capacities);
  const int128 w_inf = sc.finite_total + 1;
  std::vector<int128> w(sc.scaled.size());
  for (std::size_t e = 0; e < w.size(); ++e) w[e] = sc.scaled[e] < 0 ? w_inf : sc.scaled[e];
  auto raw = detail::solve_weights(g, w);
  CutResult r = detail::assemble(g, raw);
  int128 cut_weight = 0;
  for (int e : r.cut_edges) cut_weight += w[e];
  FPPFLOW_CHECK(cut_weight == raw.flow, "max-flow/min-cut duality violated");
  r.flow_value = raw.flow >= w_inf ? Capacity::infinity() : detail::rational_of(raw.flow, sc.denominator);
  FPPFLOW_CHECK(r.flow_value == r.cut_capacity, "flow value differs from cut capacity");
  return r;
}

/// Among the cuts of minimal capacity, one of minimal cardinality.
///
/// Composite weights c(e)(m+1) + 1 (m = edge count) order cuts by capacity
/// first and cardinality second; infinite edges weigh W(m+1) and enter the
/// cut only when no finite cut exists, which is reported as an infinite flow
/// with `lexicographic == false`.
inline CutResult lexi_min_cut(const FlowGraph& g) {
  g.validate();
  auto sc = detail::scale_capacities(g.capacities);
  const int128 m1 = static_cast<int128>(g.edges.size()) + 1;
  const int128 w_inf = (sc.finite_total + 1) * m1;
  std::vector<int128> w(sc.scaled.size());
  for (std::size_t e = 0; e < w.size(); ++e) w[e] = sc.scaled[e] < 0 ? w_inf : sc.scaled[e] * m1 + 1;
  auto raw = detail::solve_weights(g, w);
  CutResult r = detail::assemble(g, raw);
  int128 cut_weight = 0;
  for (int e : r.cut_edges) cut_weight += w[e];
  FPPFLOW_CHECK(cut_weight == raw.flow, "max-flow/min-cut duality violated");
  if (raw.flow >= w_inf) {
    r.flow_value = Capacity::infinity();
    r.lexicographic = false;
    FPPFLOW_CHECK(r.cut_capacity.is_infinite(), "forced infinite cut without infinite edge");
    return r;
  }
  const int128 cap_scaled = raw.flow / m1;
  const auto card = static_cast<std::int64_t>(raw.flow % m1);
  FPPFLOW_CHECK(card == r.cut_cardinality, "composite weight decodes to a different cardinality");
  r.flow_value = detail::rational_of(cap_scaled, sc.denominator);
  FPPFLOW_CHECK(r.flow_value == r.cut_capacity, "composite weight decodes to a different capacity");
  r.lexicographic = true;
  return r;
}

inline CutResult max_flow(const FlowProblem& p) { return max_flow(p.graph()); }
inline CutResult lexi_min_cut(const FlowProblem& p) { return lexi_min_cut(p.graph()); }

//---------------------------------------------------------------------------//
// Positive-cluster contraction
//---------------------------------------------------------------------------//

/// Quotient of a graph by its positive-capacity edges. Cuts of capacity
/// zero never separate the endpoints of a positive edge, so zero-capacity
/// cuts of the original and unit-weight cuts of the quotient coincide.
struct Contraction {
  FlowGraph graph;            ///< every remaining edge has capacity 1
  std::vector<int> edge_map;  ///< quotient edge -> original edge
  bool terminals_merged = false;  ///< a source and a sink share a cluster
};

inline Contraction contract_positive(const FlowGraph& g) {
  std::vector<int> parent(static_cast<std::size_t>(g.vertex_count));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (g.capacities[e].is_positive()) {
      int a = find(g.edges[e].first), b = find(g.edges[e].second);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::vector<int> id(static_cast<std::size_t>(g.vertex_count), -1);
  Contraction c;
  for (int v = 0; v < g.vertex_count; ++v) {
    int r = find(v);
    if (id[r] < 0) id[r] = c.graph.vertex_count++;
    id[v] = id[r];
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    int a = id[g.edges[e].first], b = id[g.edges[e].second];
    if (a == b) continue;
    c.graph.edges.emplace_back(a, b);
    c.graph.capacities.emplace_back(1);
    c.edge_map.push_back(static_cast<int>(e));
  }
  std::vector<char> src(static_cast<std::size_t>(c.graph.vertex_count), 0), snk(static_cast<std::size_t>(c.graph.vertex_count), 0);
  for (int s : g.sources) src[id[s]] = 1;
  for (int t : g.sinks) snk[id[t]] = 1;
  for (int v = 0; v < c.graph.vertex_count; ++v) {
    if (src[v] && snk[v]) c.terminals_merged = true;
    if (src[v]) c.graph.sources.push_back(v);
    if (snk[v] && !src[v]) c.graph.sinks.push_back(v);
  }
  return c;
}

/// Minimal cardinality of a zero-capacity cut, via contraction; nullopt if
/// no zero-capacity cut exists.
inline std::optional<std::int64_t> min_zero_cut_cardinality(const FlowGraph& g) {
  g.validate();
  Contraction c = contract_positive(g);
  if (c.terminals_merged) return std::nullopt;
  if (c.graph.sinks.empty() || c.graph.sources.empty()) return 0;
  CutResult r = max_flow(c.graph);
  return static_cast<std::int64_t>(r.cut_cardinality);
}

//---------------------------------------------------------------------------//
// Flow quantities
//---------------------------------------------------------------------------//

/// Top-to-bottom flow problem of cyl(A,h): sources T(A,h), sinks B(A,h).
template <EdgeField F>
FlowProblem cylinder_problem(const HyperRectangle& a, double h, const F& field) {
  LatticeRegion cyl = build_cylinder(a, h);
  BottomTop bt = bottom_top_sets(a, h, cyl);
  FlowProblem p = make_problem(std::move(cyl), std::move(bt.top), std::move(bt.bottom), field);
  p.marked.validate();
  return p;
}

/// Max flow from the top to the bottom of cyl(A,h).
template <EdgeField F>
CutResult phi(const HyperRectangle& a, double h, const F& field) {
  return max_flow(cylinder_problem(a, h, field));
}

/// Max flow between the upper and lower half boundaries of cyl'(A,h).
template <EdgeField F>
CutResult tau(const HyperRectangle& a, double h, const F& field) {
  CylPrime c = build_cyl_prime(a, h);
  FlowProblem p = make_problem(std::move(c.region), std::move(c.upper), std::move(c.lower), field);
  p.marked.validate();
  return max_flow(p);
}

struct PsiResult {
  std::int64_t cardinality = 0;
  CutResult cut;
};

/// Minimal cardinality among minimal-capacity top-bottom cutsets.
template <EdgeField F>
PsiResult psi(const HyperRectangle& a, double h, const F& field) {
  CutResult r = lexi_min_cut(cylinder_problem(a, h, field));
  return {r.cut_cardinality, std::move(r)};
}

//---------------------------------------------------------------------------//
// Null-capacity cutsets in slabs
//---------------------------------------------------------------------------//

struct ChiOptions {
  HeightOptions height;
  double initial_margin = 2.0;
  double max_margin = 1024.0;
};

struct ChiResult {
  std::int64_t cardinality = 0;
  CutResult cut;
  RandomHeight height;
  SlabWindow window;
  std::vector<EdgeKey> cut_keys;  ///< cut edges as lattice edges
};

namespace detail {

inline bool touches_escape(const SlabWindow& w, const CutResult& r) {
  for (int e : r.cut_edges) {
    const auto& ed = w.region.edges()[e];
    if (w.is_escape[ed.u] || w.is_escape[ed.v]) return true;
  }
  return false;
}

}  // namespace detail

/// Minimal cardinality of a null-capacity set cutting the thickened base
/// from hyp(A + H v) inside slab(A,H,v), H = H_{G,h}(A).
///
/// The infinite slab is truncated laterally; vertices on the window's
/// lateral boundary act as sinks, so every window cut is valid in the full
/// slab. The margin doubles until the optimal cut avoids the lateral
/// boundary.
template <EdgeField F>
ChiResult chi(const HyperRectangle& a, double h, const F& field, const ChiOptions& opt = {}) {
  RandomHeight H = random_height(a, h, field, opt.height);
  Prism base = thicken(a);
  double margin = std::max(1.0, opt.initial_margin);
  while (true) {
    if (margin > opt.max_margin)
      throw WindowOverflow("slab window margin exceeded " + std::to_string(opt.max_margin));
    SlabWindow w = slab_window(a, H.value, margin);
    const LatticeRegion& r = w.region;
    VertexSet sources, sinks;
    std::vector<char> is_sink(r.vertex_count(), 0);
    for (int v : w.top) is_sink[v] = 1;
    for (int v : w.escape) is_sink[v] = 1;
    bool overlap = false;
    for (int v = 0; v < static_cast<int>(r.vertex_count()); ++v) {
      bool src = base.contains(r.vertex(v));
      if (src) sources.push_back(v);
      if (is_sink[v]) {
        if (src) overlap = true;
        sinks.push_back(v);
      }
    }
    if (overlap) {
      margin *= 2.0;
      continue;
    }
    // Null-capacity cuts only: positive edges are uncuttable.
    FlowGraph g;
    g.vertex_count = static_cast<int>(r.vertex_count());
    for (int e = 0; e < static_cast<int>(r.edge_count()); ++e) {
      g.edges.emplace_back(r.edges()[e].u, r.edges()[e].v);
      g.capacities.push_back(edge_positive(field, r.edge_key(e)) ? Capacity::infinity() : Capacity(0));
    }
    g.sources = std::move(sources);
    g.sinks = std::move(sinks);
    CutResult cut = lexi_min_cut(g);
    if (cut.flow_value.is_infinite() || detail::touches_escape(w, cut)) {
      margin *= 2.0;
      continue;
    }
    std::vector<EdgeKey> keys;
    for (int e : cut.cut_edges) {
      EdgeKey k = r.edge_key(e);
      FPPFLOW_CHECK(Capacity(field.capacity(k)).is_zero(), "slab cut contains a positive edge");
      keys.push_back(k);
    }
    std::int64_t card = cut.cut_cardinality;
    return {card, std::move(cut), std::move(H), std::move(w), std::move(keys)};
  }
}

}  // namespace fppflow
