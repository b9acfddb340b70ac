// Discrete geometry: directions, hyperrectangles, cylinders, slabs and their
// lattice discretizations.
#pragma once

#include <algorithm>
#include <initializer_list>
#include <limits>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fppflow/core.hpp"

namespace fppflow {

/// Tolerance for point-membership tests. Points on the closed boundary
/// count as inside.
inline constexpr double kGeomTol = 1e-9;

using Vec = std::array<double, kMaxDim>;

inline double dot(const Vec& a, const Vec& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

inline Vec to_vec(const Point& p) {
  Vec v{};
  for (std::size_t i = 0; i < kMaxDim; ++i) v[i] = static_cast<double>(p[i]);
  return v;
}

inline Point unit_step(const Point& p, int axis, int sign) {
  Point q = p;
  q[axis] += sign;
  return q;
}

/// Calls f(neighbour) for each of the 2d lattice neighbours of p.
template <class F>
void for_each_neighbor(const Point& p, int dim, F&& f) {
  for (int a = 0; a < dim; ++a) {
    f(unit_step(p, a, -1));
    f(unit_step(p, a, +1));
  }
}

//---------------------------------------------------------------------------//
/// Rational direction given by a primitive integer normal vector.
class Direction {
 public:
  explicit Direction(std::span<const int> normal) : dim_(static_cast<int>(normal.size())) {
    if (dim_ < kMinDim || dim_ > kMaxDim)
      throw InvalidGeometry("dimension must be in [2,5], got " + std::to_string(dim_));
    int g = 0;
    for (int c : normal) g = std::gcd(g, std::abs(c));
    if (g == 0) throw InvalidGeometry("normal vector is zero");
    double sq = 0.0;
    for (int i = 0; i < dim_; ++i) {
      normal_[i] = normal[i] / g;
      sq += double(normal_[i]) * normal_[i];
    }
    norm_ = std::sqrt(sq);
    for (int i = 0; i < dim_; ++i)
      unit_[i] = normal_[i] / norm_;
  }
  Direction(std::initializer_list<int> normal)
      : Direction(std::span<const int>(normal.begin(), normal.size())) {}

  /// Straight direction e_d.
  static Direction straight(int dim) {
    std::vector<int> n(dim, 0);
    n.back() = 1;
    return Direction(n);
  }

  int dim() const noexcept { return dim_; }
  const Point& normal() const noexcept { return normal_; }
  const Vec& unit() const noexcept { return unit_; }
  double norm() const noexcept { return norm_; }

  bool is_axis_aligned() const noexcept {
    int nonzero = 0;
    for (int i = 0; i < dim_; ++i) nonzero += normal_[i] != 0;
    return nonzero == 1;
  }

  /// Largest change of the height coordinate across one lattice edge.
  double max_edge_rise() const noexcept {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(unit_[i]));
    return m;
  }

  Direction negated() const {
    std::vector<int> n(normal_.begin(), normal_.begin() + dim_);
    for (int& c : n) c = -c;
    return Direction(n);
  }

  friend bool operator==(const Direction& a, const Direction& b) {
    return a.dim_ == b.dim_ && a.normal_ == b.normal_;
  }

 private:
  int dim_;
  Point normal_{};
  Vec unit_{};
  double norm_ = 1.0;
};

/// Orthonormal frame of the hyperplane normal to `dir`: Gram-Schmidt on the
/// canonical basis e_1..e_d in order, skipping vectors that collapse.
inline std::vector<Vec> hyperplane_frame(const Direction& dir) {
  const int d = dir.dim();
  std::vector<Vec> basis{dir.unit()};
  for (int i = 0; i < d && static_cast<int>(basis.size()) < d; ++i) {
    Vec w{};
    w[i] = 1.0;
    for (const Vec& q : basis) {
      double c = dot(w, q, d);
      for (int k = 0; k < d; ++k) w[k] -= c * q[k];
    }
    double len = std::sqrt(dot(w, w, d));
    if (len < 1e-6) continue;
    for (int k = 0; k < d; ++k) w[k] /= len;
    basis.push_back(w);
  }
  basis.erase(basis.begin());
  return basis;
}

//---------------------------------------------------------------------------//
/// Non-degenerate (d-1)-dimensional rectangle normal to a direction.
///
/// Side vectors come from hyperplane_frame(); callers supply the base
/// corner and one length per side. For the straight direction e_d the sides
/// are e_1..e_{d-1}, so A = base + prod [0, L_i] x {0}.
class HyperRectangle {
 public:
  HyperRectangle(Direction dir, const Vec& base, std::vector<double> side_lengths)
      : dir_(std::move(dir)), base_(base), lengths_(std::move(side_lengths)) {
    const int d = dir_.dim();
    if (static_cast<int>(lengths_.size()) != d - 1)
      throw InvalidGeometry("expected " + std::to_string(d - 1) + " side lengths");
    for (double l : lengths_)
      if (!(l > 0.0) || !std::isfinite(l)) throw InvalidGeometry("degenerate hyperrectangle: side length must be positive");
    sides_ = hyperplane_frame(dir_);
  }

  const Direction& direction() const noexcept { return dir_; }
  int dim() const noexcept { return dir_.dim(); }
  const Vec& base() const noexcept { return base_; }
  std::span<const Vec> sides() const noexcept { return sides_; }
  std::span<const double> side_lengths() const noexcept { return lengths_; }

  /// (d-1)-dimensional Hausdorff measure.
  double area() const {
    return std::accumulate(lengths_.begin(), lengths_.end(), 1.0, std::multiplies<>());
  }

  /// nA = {n x : x in A}.
  HyperRectangle scaled(double n) const {
    Vec b = base_;
    for (double& c : b) c *= n;
    std::vector<double> l = lengths_;
    for (double& c : l) c *= n;
    return {dir_, b, l};
  }

  /// A + t v.
  HyperRectangle shifted(double t) const {
    Vec b = base_;
    for (int i = 0; i < dim(); ++i) b[i] += t * dir_.unit()[i];
    return {dir_, b, lengths_};
  }

  /// Signed distance of x above hyp(A) along v.
  double height(const Vec& x) const {
    double s = 0.0;
    for (int k = 0; k < dim(); ++k) s += (x[k] - base_[k]) * dir_.unit()[k];
    return s;
  }
  double height(const Point& x) const { return height(to_vec(x)); }

  /// Coordinate of x along side i, measured from the base corner.
  double lateral(const Vec& x, int i) const {
    const Vec& u = sides_[i];
    double s = 0.0;
    for (int k = 0; k < dim(); ++k) s += (x[k] - base_[k]) * u[k];
    return s;
  }
  double lateral(const Point& x, int i) const { return lateral(to_vec(x), i); }

 private:
  Direction dir_;
  Vec base_;
  std::vector<double> lengths_;
  std::vector<Vec> sides_;
};

//---------------------------------------------------------------------------//
/// Closed right prism over A: lateral coordinates in [lo_i, hi_i] and height
/// in [t_lo, t_hi]. Covers cyl(A,h), cyl'(A,h), the thickened base and
/// lateral windows of slabs.
class Prism {
 public:
  Prism(HyperRectangle base, std::vector<double> lateral_lo, std::vector<double> lateral_hi,
        double t_lo, double t_hi)
      : rect_(std::move(base)), lo_(std::move(lateral_lo)), hi_(std::move(lateral_hi)), t_lo_(t_lo), t_hi_(t_hi) {}

  const HyperRectangle& rect() const noexcept { return rect_; }
  int dim() const noexcept { return rect_.dim(); }
  double t_lo() const noexcept { return t_lo_; }
  double t_hi() const noexcept { return t_hi_; }
  double lateral_lo(int i) const { return lo_[i]; }
  double lateral_hi(int i) const { return hi_[i]; }

  bool contains(const Vec& x) const {
    double t = rect_.height(x);
    if (t < t_lo_ - kGeomTol || t > t_hi_ + kGeomTol) return false;
    return laterally_contains(x);
  }
  bool contains(const Point& p) const { return contains(to_vec(p)); }

  bool laterally_contains(const Vec& x) const {
    for (int i = 0; i + 1 < dim(); ++i) {
      double s = rect_.lateral(x, i);
      if (s < lo_[i] - kGeomTol || s > hi_[i] + kGeomTol) return false;
    }
    return true;
  }
  bool laterally_contains(const Point& p) const { return laterally_contains(to_vec(p)); }

  /// Integer bounding box [lo, hi] (inclusive) containing every lattice
  /// point of the prism.
  std::pair<Point, Point> lattice_bounds() const {
    const int d = dim();
    Vec mn, mx;
    mn.fill(std::numeric_limits<double>::infinity());
    mx.fill(-std::numeric_limits<double>::infinity());
    const int corners = 1 << d;  // d-1 lateral choices and one height choice
    for (int mask = 0; mask < corners; ++mask) {
      Vec c = rect_.base();
      for (int i = 0; i + 1 < d; ++i) {
        double s = (mask >> i) & 1 ? hi_[i] : lo_[i];
        for (int k = 0; k < d; ++k) c[k] += s * rect_.sides()[i][k];
      }
      double t = (mask >> (d - 1)) & 1 ? t_hi_ : t_lo_;
      for (int k = 0; k < d; ++k) c[k] += t * rect_.direction().unit()[k];
      for (int k = 0; k < d; ++k) {
        mn[k] = std::min(mn[k], c[k]);
        mx[k] = std::max(mx[k], c[k]);
      }
    }
    Point lo{}, hi{};
    for (int k = 0; k < d; ++k) {
      lo[k] = static_cast<int>(std::ceil(mn[k] - 1e-6));
      hi[k] = static_cast<int>(std::floor(mx[k] + 1e-6));
    }
    return {lo, hi};
  }

  /// Lattice points inside the prism, lexicographically sorted.
  std::vector<Point> lattice_points() const {
    auto [lo, hi] = lattice_bounds();
    std::vector<Point> out;
    const int d = dim();
    for (int k = 0; k < d; ++k)
      if (lo[k] > hi[k]) return out;
    Point p = lo;
    while (true) {
      if (contains(p)) out.push_back(p);
      int k = d - 1;
      while (k >= 0 && p[k] == hi[k]) {
        p[k] = lo[k];
        --k;
      }
      if (k < 0) break;
      ++p[k];
    }
    return out;
  }

 private:
  HyperRectangle rect_;
  std::vector<double> lo_, hi_;
  double t_lo_, t_hi_;
};

inline Prism cylinder_prism(const HyperRectangle& a, double t_lo, double t_hi, double margin = 0.0) {
  std::vector<double> lo(a.side_lengths().size(), -margin);
  std::vector<double> hi(a.side_lengths().begin(), a.side_lengths().end());
  for (double& x : hi) x += margin;
  return Prism(a, lo, hi, t_lo, t_hi);
}

//---------------------------------------------------------------------------//
/// Finite induced subgraph of Z^d with canonical vertex and edge numbering.
///
/// Vertices are sorted lexicographically; edge k is the k-th pair in the
/// order (smaller endpoint, axis).
class LatticeRegion {
 public:
  struct Edge {
    int u;
    int v;
    int axis;
  };

  LatticeRegion() = default;
  LatticeRegion(int dim, std::vector<Point> vertices) : dim_(dim), vertices_(std::move(vertices)) {
    std::sort(vertices_.begin(), vertices_.end());
    vertices_.erase(std::unique(vertices_.begin(), vertices_.end()), vertices_.end());
    build_index();
    for (int i = 0; i < static_cast<int>(vertices_.size()); ++i) {
      for (int a = 0; a < dim_; ++a) {
        int j = index_of(unit_step(vertices_[i], a, +1));
        if (j >= 0) edges_.push_back({i, j, a});
      }
    }
  }

  int dim() const noexcept { return dim_; }
  std::span<const Point> vertices() const noexcept { return vertices_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::size_t vertex_count() const noexcept { return vertices_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const Point& vertex(int i) const { return vertices_[i]; }
  bool empty() const noexcept { return vertices_.empty(); }

  int index_of(const Point& p) const {
    if (vertices_.empty()) return -1;
    std::int64_t off = 0;
    for (int k = 0; k < dim_; ++k) {
      int c = p[k] - lo_[k];
      if (c < 0 || c >= extent_[k]) return -1;
      off = off * extent_[k] + c;
    }
    return dense_[off];
  }
  bool contains(const Point& p) const { return index_of(p) >= 0; }

  EdgeKey edge_key(int e) const {
    const Edge& ed = edges_[e];
    return {vertices_[ed.u], ed.axis};
  }

  /// Index of the edge between two region vertices, or -1.
  int edge_index(int u, int v) const {
    if (u > v) std::swap(u, v);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), u, [](const Edge& e, int x) { return e.u < x; });
    for (; it != edges_.end() && it->u == u; ++it)
      if (it->v == v) return static_cast<int>(it - edges_.begin());
    return -1;
  }

  /// Neighbour indices of vertex i inside the region.
  template <class F>
  void for_each_region_neighbor(int i, F&& f) const {
    for_each_neighbor(vertices_[i], dim_, [&](const Point& q) {
      int j = index_of(q);
      if (j >= 0) f(j);
    });
  }

 private:
  void build_index() {
    if (vertices_.empty()) return;
    lo_ = vertices_.front();
    Point hi = vertices_.front();
    for (const Point& p : vertices_)
      for (int k = 0; k < dim_; ++k) {
        lo_[k] = std::min(lo_[k], p[k]);
        hi[k] = std::max(hi[k], p[k]);
      }
    std::int64_t vol = 1;
    for (int k = 0; k < dim_; ++k) {
      extent_[k] = hi[k] - lo_[k] + 1;
      vol *= extent_[k];
    }
    if (vol > (std::int64_t{1} << 31)) throw InvalidGeometry("region bounding box too large");
    dense_.assign(vol, -1);
    for (int i = 0; i < static_cast<int>(vertices_.size()); ++i) {
      std::int64_t off = 0;
      for (int k = 0; k < dim_; ++k) {
        off = off * extent_[k] + (vertices_[i][k] - lo_[k]);
      }
      dense_[off] = i;
    }
  }

  int dim_ = 0;
  std::vector<Point> vertices_;
  std::vector<Edge> edges_;
  Point lo_{};
  std::array<int, kMaxDim> extent_{};
  std::vector<int> dense_;
};

/// Sorted vertex indices into a LatticeRegion.
using VertexSet = std::vector<int>;

/// Region with disjoint source and sink vertex sets.
struct MarkedRegion {
  LatticeRegion region;
  VertexSet sources;
  VertexSet sinks;

  void validate() const {
    if (sources.empty() || sinks.empty()) throw DegenerateRegion("empty source or sink set");
    std::vector<char> mark(region.vertex_count(), 0);
    for (int s : sources) {
      if (s < 0 || s >= static_cast<int>(region.vertex_count())) throw ValidationError("source index out of range");
      mark[s] = 1;
    }
    for (int t : sinks) {
      if (t < 0 || t >= static_cast<int>(region.vertex_count())) throw ValidationError("sink index out of range");
      if (mark[t]) throw DegenerateRegion("sources and sinks intersect");
    }
  }
};

//---------------------------------------------------------------------------//
// Operations
//---------------------------------------------------------------------------//

namespace detail {

/// Whether the closed segment [x, y] meets the rectangle A + t v (t = level).
inline bool segment_meets_level(const HyperRectangle& a, double level, const Vec& x, const Vec& y) {
  const int d = a.dim();
  double lam_lo = 0.0, lam_hi = 1.0;
  // constraint: lo <= f0 + lam * f1 <= hi
  auto clip = [&](double f0, double f1, double lo, double hi) {
    if (std::abs(f1) < 1e-15) {
      if (f0 < lo || f0 > hi) lam_hi = -1.0;
      return;
    }
    double l1 = (lo - f0) / f1, l2 = (hi - f0) / f1;
    if (l1 > l2) std::swap(l1, l2);
    lam_lo = std::max(lam_lo, l1);
    lam_hi = std::min(lam_hi, l2);
  };
  double tx = a.height(x), ty = a.height(y);
  clip(tx, ty - tx, level - kGeomTol, level + kGeomTol);
  for (int i = 0; i + 1 < d; ++i) {
    double sx = a.lateral(x, i), sy = a.lateral(y, i);
    clip(sx, sy - sx, -kGeomTol, a.side_lengths()[i] + kGeomTol);
  }
  return lam_lo <= lam_hi + 1e-12;
}

}  // namespace detail

/// Z^d ∩ cyl(A,h) with its induced nearest-neighbour edges.
inline LatticeRegion build_cylinder(const HyperRectangle& a, double h) {
  if (!(h > 0.0)) throw InvalidGeometry("cylinder height must be positive");
  return LatticeRegion(a.dim(), cylinder_prism(a, 0.0, h).lattice_points());
}

struct BottomTop {
  VertexSet bottom;
  VertexSet top;
};

/// Discretized bottom B(A,h) and top T(A,h) of a cylinder region built by
/// build_cylinder(a, h): vertices with an outside neighbour y such that the
/// edge <x,y> crosses A (resp. A + h v).
inline BottomTop bottom_top_sets(const HyperRectangle& a, double h, const LatticeRegion& cyl) {
  BottomTop out;
  const int d = a.dim();
  for (int i = 0; i < static_cast<int>(cyl.vertex_count()); ++i) {
    const Point& x = cyl.vertex(i);
    bool in_b = false, in_t = false;
    for_each_neighbor(x, d, [&](const Point& y) {
      if (cyl.contains(y)) return;
      Vec xv = to_vec(x), yv = to_vec(y);
      in_b = in_b || detail::segment_meets_level(a, 0.0, xv, yv);
      in_t = in_t || detail::segment_meets_level(a, h, xv, yv);
    });
    if (in_b) out.bottom.push_back(i);
    if (in_t) out.top.push_back(i);
  }
  if (out.bottom.empty() || out.top.empty()) throw DegenerateRegion("cylinder has empty top or bottom");
  return out;
}

inline BottomTop bottom_top_sets(const HyperRectangle& a, double h) {
  return bottom_top_sets(a, h, build_cylinder(a, h));
}

struct CylPrime {
  LatticeRegion region;
  VertexSet upper;  ///< C'_1: boundary vertices strictly above A
  VertexSet lower;  ///< C'_2: boundary vertices strictly below A
};

/// Z^d ∩ cyl'(A,h), t in [-h,h], with its two discretized half-boundaries.
inline CylPrime build_cyl_prime(const HyperRectangle& a, double h) {
  if (!(h > 0.0)) throw InvalidGeometry("cylinder height must be positive");
  CylPrime out{LatticeRegion(a.dim(), cylinder_prism(a, -h, h).lattice_points()), {}, {}};
  const LatticeRegion& r = out.region;
  for (int i = 0; i < static_cast<int>(r.vertex_count()); ++i) {
    const Point& x = r.vertex(i);
    bool boundary = false;
    for_each_neighbor(x, a.dim(), [&](const Point& y) { boundary = boundary || !r.contains(y); });
    if (!boundary) continue;
    double t = a.height(x);
    if (t > kGeomTol) out.upper.push_back(i);
    else if (t < -kGeomTol) out.lower.push_back(i);
  }
  return out;
}

/// The thickened base cyl(A,d), as a region predicate.
inline Prism thicken(const HyperRectangle& a) { return cylinder_prism(a, 0.0, a.dim()); }

/// Finite lateral window of slab(A,t,v).
struct SlabWindow {
  LatticeRegion region;
  VertexSet top;       ///< W(A,t,v) restricted to the window
  VertexSet escape;    ///< vertices with a slab neighbour outside the window
  std::vector<char> is_escape;
  double margin = 0.0;
};

/// Vertices of slab(A,t,v) whose lateral coordinates lie within the extent
/// of A inflated by `lateral_margin` on every side.
///
/// A vertex belongs to W when it has a neighbour in slab(A,inf,v) above
/// height t. A vertex is flagged as escape when it has a neighbour inside
/// the infinite slab (height in [0,t]) that the window excludes.
inline SlabWindow slab_window(const HyperRectangle& a, double t, double lateral_margin) {
  if (t < 0.0) throw InvalidGeometry("slab height must be non-negative");
  if (lateral_margin < 0.0) throw InvalidGeometry("lateral margin must be non-negative");
  Prism window = cylinder_prism(a, 0.0, t, lateral_margin);
  SlabWindow out{LatticeRegion(a.dim(), window.lattice_points()), {}, {}, {}, lateral_margin};
  const LatticeRegion& r = out.region;
  out.is_escape.assign(r.vertex_count(), 0);
  for (int i = 0; i < static_cast<int>(r.vertex_count()); ++i) {
    bool top = false, escape = false;
    for_each_neighbor(r.vertex(i), a.dim(), [&](const Point& y) {
      double ty = a.height(y);
      if (ty > t + kGeomTol) top = true;
      else if (ty >= -kGeomTol && !r.contains(y)) escape = true;
    });
    if (top) out.top.push_back(i);
    if (escape) {
      out.escape.push_back(i);
      out.is_escape[i] = 1;
    }
  }
  return out;
}

/// W(A,t,v) membership for an arbitrary lattice point (no window).
inline bool in_top_layer(const HyperRectangle& a, double t, const Point& x) {
  double tx = a.height(x);
  if (tx < -kGeomTol || tx > t + kGeomTol) return false;
  bool hit = false;
  for_each_neighbor(x, a.dim(), [&](const Point& y) { hit = hit || a.height(y) > t + kGeomTol; });
  return hit;
}

}  // namespace fppflow
