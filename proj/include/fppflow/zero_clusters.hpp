// Clusters of the positive-capacity percolation 1{t(e) > 0}, their exterior
// edge boundaries, the random height of a slab and the null cutset built
// from the clusters of the thickened base.
#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fppflow/capacity_field.hpp"
#include "fppflow/geometry.hpp"
#include "fppflow/seeds.hpp"

namespace fppflow {

inline constexpr std::size_t kDefaultClusterCap = 1'000'000;

struct ClusterReport {
  Point root{};
  std::vector<Point> vertices;     ///< sorted
  double diameter = 0.0;           ///< max pairwise euclidean distance
  std::vector<EdgeKey> boundary;   ///< exterior edge boundary, sorted
  bool truncated = false;

  std::size_t card_v() const noexcept { return vertices.size(); }
};

/// Vertices of the positive cluster of x, explored over the whole lattice.
/// Stops once more than `cap` vertices are found and sets `truncated`.
template <EdgeField F>
std::vector<Point> cluster_vertices(const Point& x, int dim, const F& field, std::size_t cap, bool& truncated) {
  std::vector<Point> out{x};
  std::unordered_set<Point, PointHash> seen{x};
  truncated = false;
  for (std::size_t head = 0; head < out.size(); ++head) {
    const Point p = out[head];
    for (int a = 0; a < dim; ++a) {
      for (int s : {-1, +1}) {
        Point q = unit_step(p, a, s);
        if (seen.contains(q)) continue;
        if (!edge_positive(field, s > 0 ? EdgeKey{p, a} : EdgeKey{q, a})) continue;
        seen.insert(q);
        out.push_back(q);
        if (out.size() > cap) {
          truncated = true;
          return out;
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Edges <x,y> with x in C and y in the unbounded component of Z^d \ C.
/// Flood-fills the complement inside the bounding box of C inflated by one.
inline std::vector<EdgeKey> exterior_boundary(std::span<const Point> cluster, int dim) {
  if (cluster.empty()) return {};
  Point lo = cluster.front(), hi = cluster.front();
  for (const Point& p : cluster)
    for (int k = 0; k < dim; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  std::array<std::int64_t, kMaxDim> ext{};
  std::int64_t vol = 1;
  for (int k = 0; k < dim; ++k) {
    lo[k] -= 1;
    hi[k] += 1;
    ext[k] = hi[k] - lo[k] + 1;
    vol *= ext[k];
  }
  auto offset = [&](const Point& p) {
    std::int64_t off = 0;
    for (int k = 0; k < dim; ++k) off = off * ext[k] + (p[k] - lo[k]);
    return off;
  };
  auto inside = [&](const Point& p) {
    for (int k = 0; k < dim; ++k)
      if (p[k] < lo[k] || p[k] > hi[k]) return false;
    return true;
  };
  // 0 = free, 1 = cluster, 2 = reached from outside
  std::vector<std::uint8_t> cell(static_cast<std::size_t>(vol), 0);
  for (const Point& p : cluster) cell[offset(p)] = 1;
  std::vector<Point> queue{lo};
  cell[offset(lo)] = 2;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for_each_neighbor(queue[head], dim, [&](const Point& q) {
      if (!inside(q)) return;
      auto& c = cell[offset(q)];
      if (c != 0) return;
      c = 2;
      queue.push_back(q);
    });
  }
  std::vector<EdgeKey> out;
  for (const Point& p : cluster)
    for_each_neighbor(p, dim, [&](const Point& q) {
      if (cell[offset(q)] == 2) out.push_back(edge_between(p, q, dim));
    });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline double point_set_diameter(std::span<const Point> pts, int dim) {
  std::int64_t best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      std::int64_t s = 0;
      for (int k = 0; k < dim; ++k) {
        std::int64_t dlt = pts[i][k] - pts[j][k];
        s += dlt * dlt;
      }
      best = std::max(best, s);
    }
  return std::sqrt(static_cast<double>(best));
}

/// C_{G,0}(x) with its exterior boundary. Diameter and boundary are only
/// filled in for untruncated clusters.
template <EdgeField F>
ClusterReport cluster_of(const Point& x, int dim, const F& field, std::size_t cap = kDefaultClusterCap) {
  if (cap < 1) throw ValidationError("cluster cap must be >= 1");
  ClusterReport r;
  r.root = x;
  r.vertices = cluster_vertices(x, dim, field, cap, r.truncated);
  if (!r.truncated) {
    r.diameter = point_set_diameter(r.vertices, dim);
    r.boundary = exterior_boundary(r.vertices, dim);
  }
  return r;
}

//---------------------------------------------------------------------------//
// Random height H_{G,h}(A)
//---------------------------------------------------------------------------//

struct HeightOptions {
  std::size_t cluster_cap = kDefaultClusterCap;
  /// Accept h == 2d. Strictly smaller heights are always rejected.
  bool allow_boundary_height = false;
};

/// Distinct clusters met by a set of start vertices, plus the cluster index
/// of every start.
struct ClusterCover {
  std::vector<ClusterReport> clusters;
  std::unordered_map<Point, int, PointHash> owner;
};

template <EdgeField F>
ClusterCover cover_clusters(std::span<const Point> starts, int dim, const F& field, std::size_t cap) {
  ClusterCover cover;
  for (const Point& x : starts) {
    if (cover.owner.contains(x)) continue;
    ClusterReport r = cluster_of(x, dim, field, cap);
    if (r.truncated)
      throw RegimeError("positive cluster exceeds " + std::to_string(cap) +
                        " vertices; positive edges appear to percolate");
    int id = static_cast<int>(cover.clusters.size());
    for (const Point& p : r.vertices) cover.owner.emplace(p, id);
    cover.clusters.push_back(std::move(r));
  }
  return cover;
}

struct RandomHeight {
  HyperRectangle base;
  double h;
  double value;
  std::vector<ClusterReport> contributing_clusters;
  std::unordered_map<Point, int, PointHash> owner;  ///< vertex -> cluster index
};

namespace detail {

inline void check_height_hypothesis(const HyperRectangle& a, double h, const HeightOptions& opt) {
  double two_d = 2.0 * a.dim();
  if (h > two_d) return;
  if (opt.allow_boundary_height && h == two_d) return;
  throw ValidationError("random height needs h > 2d (h = " + std::to_string(h) + ", d = " +
                        std::to_string(a.dim()) + ")");
}

}  // namespace detail

/// Smallest t >= h such that W(A,t,v) avoids every cluster in `clusters`,
/// from cluster vertex heights: x lies in W(A,t,v) exactly when
/// t_x <= t < t_x + rise, rise being the largest height step of an edge.
inline double height_from_extents(const HyperRectangle& a, double h, std::span<const ClusterReport> clusters) {
  const double rise = a.direction().max_edge_rise();
  std::vector<double> heights;
  for (const auto& c : clusters)
    for (const Point& p : c.vertices) {
      double t = a.height(p);
      if (t >= -kGeomTol) heights.push_back(t);
    }
  std::sort(heights.begin(), heights.end());
  double t = h;
  bool moved = true;
  while (moved) {
    moved = false;
    // heights with t_x <= t + tol; among those the ones still covering t
    auto end = std::upper_bound(heights.begin(), heights.end(), t + kGeomTol);
    for (auto it = heights.begin(); it != end; ++it) {
      if (*it + rise > t + kGeomTol) {
        t = *it + rise;
        moved = true;
      }
    }
  }
  return t;
}

/// The same infimum by scanning candidate heights and testing W membership
/// through the neighbour rule directly.
inline double height_by_scan(const HyperRectangle& a, double h, std::span<const ClusterReport> clusters) {
  const double rise = a.direction().max_edge_rise();
  std::vector<double> candidates{h};
  for (const auto& c : clusters)
    for (const Point& p : c.vertices) {
      double t = a.height(p) + rise;
      if (t > h) candidates.push_back(t);
    }
  std::sort(candidates.begin(), candidates.end());
  for (double t : candidates) {
    bool hit = false;
    for (const auto& c : clusters) {
      for (const Point& p : c.vertices)
        if (in_top_layer(a, t, p)) {
          hit = true;
          break;
        }
      if (hit) break;
    }
    if (!hit) return t;
  }
  throw AssertionFailure("height scan found no admissible height");
}

/// H_{G,h}(A): clusters of every lattice point of cyl(A,h/2), then the
/// smallest t >= h whose top layer W(A,t,v) misses all of them.
template <EdgeField F>
RandomHeight random_height(const HyperRectangle& a, double h, const F& field, const HeightOptions& opt = {}) {
  detail::check_height_hypothesis(a, h, opt);
  std::vector<Point> starts = cylinder_prism(a, 0.0, h / 2.0).lattice_points();
  ClusterCover cover = cover_clusters(starts, a.dim(), field, opt.cluster_cap);
  double value = height_from_extents(a, h, cover.clusters);
  std::size_t total = 0;
  for (const auto& c : cover.clusters) total += c.card_v();
  if (value > h + static_cast<double>(total) + 2.0 * a.dim())
    throw AssertionFailure("random height exceeds h + total cluster size + 2d");
  return {a, h, value, std::move(cover.clusters), std::move(cover.owner)};
}

//---------------------------------------------------------------------------//
// Null cutset from the clusters of the thickened base
//---------------------------------------------------------------------------//

struct LemmaCutset {
  std::vector<EdgeKey> edges;  ///< sorted, unique
  RandomHeight height;
  std::size_t cluster_vertex_total = 0;  ///< sum of card_v over the clusters of the thickened base's vertices
};

/// Union of the exterior boundaries of C_{G,0}(x) over x in the thickened
/// base. Every edge has capacity 0 and the set separates the thickened base
/// from W(A,H,v) inside slab(A,H,v).
template <EdgeField F>
LemmaCutset lemma_cutset(const HyperRectangle& a, double h, const F& field, const HeightOptions& opt = {}) {
  RandomHeight H = random_height(a, h, field, opt);
  std::vector<Point> base = thicken(a).lattice_points();
  std::vector<char> used(H.contributing_clusters.size(), 0);
  std::vector<EdgeKey> edges;
  std::size_t vertex_total = 0;
  for (const Point& x : base) {
    auto it = H.owner.find(x);
    int id;
    if (it == H.owner.end()) {
      // Thickened base outside cyl(A,h/2); only reachable with h == 2d.
      ClusterReport r = cluster_of(x, a.dim(), field, opt.cluster_cap);
      if (r.truncated) throw RegimeError("positive cluster exceeds cap");
      id = static_cast<int>(H.contributing_clusters.size());
      for (const Point& p : r.vertices) H.owner.emplace(p, id);
      H.contributing_clusters.push_back(std::move(r));
      used.push_back(0);
    } else {
      id = it->second;
    }
    vertex_total += H.contributing_clusters[id].card_v();
    if (used[id]) continue;
    used[id] = 1;
    const auto& b = H.contributing_clusters[id].boundary;
    edges.insert(edges.end(), b.begin(), b.end());
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const EdgeKey& e : edges)
    FPPFLOW_CHECK(!Capacity(field.capacity(e)).is_positive(), "exterior boundary edge with positive capacity");
  return {std::move(edges), std::move(H), vertex_total};
}

/// Whether removing `cut` leaves no path from `sources` to W(A,t,v) that
/// stays inside slab(A,t,v). The search runs over the infinite slab and
/// gives up (returning false) once `limit` vertices are reached.
inline bool separates_in_slab(const HyperRectangle& a, double t, std::span<const Point> sources,
                              std::span<const EdgeKey> cut, std::size_t limit = 20'000'000) {
  const int d = a.dim();
  std::unordered_set<EdgeKey, EdgeKeyHash> removed(cut.begin(), cut.end());
  std::unordered_set<Point, PointHash> seen;
  std::vector<Point> queue;
  auto in_slab = [&](const Point& p) {
    double tp = a.height(p);
    return tp >= -kGeomTol && tp <= t + kGeomTol;
  };
  for (const Point& s : sources)
    if (in_slab(s) && seen.insert(s).second) queue.push_back(s);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Point p = queue[head];
    if (in_top_layer(a, t, p)) return false;
    if (queue.size() > limit) return false;
    for_each_neighbor(p, d, [&](const Point& q) {
      if (!in_slab(q) || seen.contains(q)) return;
      if (removed.contains(edge_between(p, q, d))) return;
      seen.insert(q);
      queue.push_back(q);
    });
  }
  return true;
}

//---------------------------------------------------------------------------//
// Cluster-size tails
//---------------------------------------------------------------------------//

struct SurvivalPoint {
  std::size_t size;
  double empirical;  ///< P[card_v > size]
  double fitted;
};

struct TailFit {
  double kappa1_hat = std::numeric_limits<double>::quiet_NaN();
  double kappa2_hat = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
  std::size_t samples = 0;
  std::size_t fit_lo = 0;
  std::size_t fit_hi = 0;
  std::vector<std::size_t> sizes;
  std::vector<SurvivalPoint> points;
};

/// Empirical P[card_v > k] for k = 0..max(sizes).
inline std::vector<double> survival_curve(std::span<const std::size_t> sizes) {
  std::size_t mx = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
  std::vector<std::size_t> count(mx + 2, 0);
  for (std::size_t s : sizes) ++count[s];
  std::vector<double> out(mx + 1, 0.0);
  std::size_t above = sizes.size();
  for (std::size_t k = 0; k <= mx; ++k) {
    above -= count[k];
    out[k] = static_cast<double>(above) / static_cast<double>(sizes.size());
  }
  return out;
}

/// Fits log P[card_v > k] = log kappa1 - kappa2 k by least squares over
/// k in [5, 95th percentile of sizes] with positive survival.
inline TailFit fit_tail(std::vector<std::size_t> sizes) {
  TailFit fit;
  fit.samples = sizes.size();
  fit.sizes = sizes;
  if (sizes.empty()) return fit;
  std::vector<std::size_t> sorted = sizes;
  std::sort(sorted.begin(), sorted.end());
  std::size_t q95 = sorted[static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size()))) - 1];
  fit.fit_lo = 5;
  fit.fit_hi = q95;
  std::vector<double> surv = survival_curve(sizes);
  std::vector<double> xs, ys;
  for (std::size_t k = fit.fit_lo; k <= fit.fit_hi && k < surv.size(); ++k)
    if (surv[k] > 0.0) {
      xs.push_back(static_cast<double>(k));
      ys.push_back(std::log(surv[k]));
    }
  if (xs.size() >= 3) {
    double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    double slope = sxy / sxx;
    fit.kappa2_hat = -slope;
    fit.kappa1_hat = std::exp(my - slope * mx);
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.valid = true;
  }
  for (std::size_t k = 0; k < surv.size(); ++k) {
    double fitted = fit.valid ? fit.kappa1_hat * std::exp(-fit.kappa2_hat * static_cast<double>(k))
                              : std::numeric_limits<double>::quiet_NaN();
    fit.points.push_back({k, surv[k], fitted});
  }
  return fit;
}

/// Samples the origin cluster under G_p over independent seeds and fits the
/// exponential tail. Requires p < p_c(d).
inline TailFit tail_fit(const Rational& p, int d, std::size_t samples, std::uint64_t seed,
                        const RegimeConstants& k = {}, std::size_t cap = kDefaultClusterCap) {
  RegimeConstants rc = k.d == d ? k : RegimeConstants::defaults(d);
  if (p.to_double() >= rc.pc)
    throw RegimeError("tail fit needs p < p_c(" + std::to_string(d) + ")");
  CapacityDistribution law = CapacityDistribution::bernoulli(p);
  std::vector<std::size_t> sizes;
  sizes.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    CapacityField field(derive_seed(seed, i, 0), law);
    bool truncated = false;
    auto c = cluster_vertices(Point{}, d, field, cap, truncated);
    if (truncated) throw RegimeError("origin cluster exceeds cap in tail sampling");
    sizes.push_back(c.size());
  }
  return fit_tail(std::move(sizes));
}

}  // namespace fppflow
