#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "fppflow/zero_clusters.hpp"
#include "oracles.hpp"

using namespace fppflow;

namespace {

const CapacityDistribution kZero = CapacityDistribution::point_mass(Capacity(0));
const CapacityDistribution kOne = CapacityDistribution::point_mass(Capacity(1));

HyperRectangle box3(double side) { return HyperRectangle(Direction::straight(3), Vec{}, {side, side}); }

// Independent BFS inside the slab 0 <= z <= t over a generous lateral box.
bool slab_path_exists(const HyperRectangle& a, double t, const std::vector<Point>& sources,
                      const std::vector<EdgeKey>& cut, int lateral_pad) {
  std::set<EdgeKey> removed(cut.begin(), cut.end());
  const int lo = -lateral_pad, hi = static_cast<int>(a.side_lengths()[0]) + lateral_pad;
  std::set<Point> seen(sources.begin(), sources.end());
  std::vector<Point> stack(sources.begin(), sources.end());
  while (!stack.empty()) {
    Point p = stack.back();
    stack.pop_back();
    if (p[2] + 1 > t + 1e-9) return true;  // has a neighbour above t: in W
    for (int ax = 0; ax < 3; ++ax)
      for (int s : {-1, 1}) {
        Point q = p;
        q[ax] += s;
        if (q[2] < 0 || q[2] > t + 1e-9) continue;
        if (q[0] < lo || q[0] > hi || q[1] < lo || q[1] > hi) continue;
        if (removed.contains(edge_between(p, q, 3))) continue;
        if (seen.insert(q).second) stack.push_back(q);
      }
  }
  return false;
}

}  // namespace

TEST(ClusterOf, ZeroFieldGivesSingletons) {
  CapacityField f(1, kZero);
  ClusterReport r = cluster_of(Point{2, -1, 4}, 3, f);
  EXPECT_EQ(r.card_v(), 1u);
  EXPECT_EQ(r.diameter, 0.0);
  EXPECT_EQ(r.boundary.size(), 6u);
  EXPECT_FALSE(r.truncated);
  EXPECT_THROW(cluster_of(Point{}, 3, f, 0), ValidationError);
}

TEST(ClusterOf, FullFieldTruncates) {
  CapacityField f(1, kOne);
  ClusterReport r = cluster_of(Point{}, 3, f, 1000);
  EXPECT_TRUE(r.truncated);
  EXPECT_GT(r.card_v(), 1000u);
}

TEST(ClusterOf, MatchesFloodFillOracle) {
  CapacityDistribution g = CapacityDistribution::bernoulli(Rational(15, 100));
  for (std::uint64_t seed : {42ull, 1ull, 2ull, 3ull, 4ull, 5ull, 6ull, 7ull}) {
    CapacityField f(seed, g);
    for (Point x : {Point{}, Point{3, 1, -2}, Point{-5, 0, 7}}) {
      ClusterReport r = cluster_of(x, 3, f);
      auto expect = oracle::flood_cluster(x, 3, f, 1'000'000);
      EXPECT_EQ(r.vertices, expect);
      EXPECT_TRUE(std::binary_search(r.vertices.begin(), r.vertices.end(), x));
      auto bd = oracle::far_boundary(expect, 3);
      EXPECT_EQ(std::set<EdgeKey>(r.boundary.begin(), r.boundary.end()), bd);
      EXPECT_LE(r.boundary.size(), 6 * r.card_v());
      for (const EdgeKey& e : r.boundary) {
        EXPECT_TRUE(f.capacity(e).is_zero());
        bool lo_in = std::binary_search(r.vertices.begin(), r.vertices.end(), e.lo);
        bool hi_in = std::binary_search(r.vertices.begin(), r.vertices.end(), e.hi());
        EXPECT_NE(lo_in, hi_in);
      }
    }
  }
}

TEST(ExteriorBoundary, SmallShapes) {
  EXPECT_EQ(exterior_boundary(std::vector<Point>{Point{}}, 3).size(), 6u);
  EXPECT_EQ(exterior_boundary(std::vector<Point>{Point{}, Point{1, 0, 0}}, 3).size(), 10u);
  std::vector<Point> shell;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      for (int z = 0; z < 3; ++z)
        if (!(x == 1 && y == 1 && z == 1)) shell.push_back(Point{x, y, z});
  auto bd = exterior_boundary(shell, 3);
  for (const EdgeKey& e : bd) {
    EXPECT_NE(e.lo, (Point{1, 1, 1}));
    EXPECT_NE(e.hi(), (Point{1, 1, 1}));
  }
  EXPECT_EQ(std::set<EdgeKey>(bd.begin(), bd.end()), oracle::far_boundary(shell, 3, 5));
  EXPECT_EQ(bd.size(), 6u * 9u);
}

TEST(ExteriorBoundary, EqualsFullBoundaryWithoutHoles) {
  // an L-shaped tromino has no holes: exterior boundary = full edge boundary
  std::vector<Point> c{Point{0, 0}, Point{1, 0}, Point{0, 1}};
  EXPECT_EQ(exterior_boundary(c, 2).size(), 4u * 3u - 2u * 2u);
  // a ring in the plane has a hole: the four inner edges are excluded
  std::vector<Point> ring;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      if (!(x == 1 && y == 1)) ring.push_back(Point{x, y});
  EXPECT_EQ(exterior_boundary(ring, 2).size(), 12u);
}

TEST(RandomHeight, ZeroFieldKeepsH) {
  CapacityField f(3, kZero);
  RandomHeight r = random_height(box3(3), 7, f);
  EXPECT_DOUBLE_EQ(r.value, 7.0);
  EXPECT_THROW(random_height(box3(3), 5, f), ValidationError);
  HeightOptions boundary;
  boundary.allow_boundary_height = true;
  EXPECT_DOUBLE_EQ(random_height(box3(3), 6, f, boundary).value, 6.0);
  EXPECT_THROW(random_height(box3(3), 5.5, f, boundary), ValidationError);
}

TEST(RandomHeight, PlantedVerticalPath) {
  const int L = 9;
  OverrideField<CapacityField> f(CapacityField(3, kZero));
  for (int z = 0; z < L; ++z) f.set(EdgeKey{{1, 1, z}, 2}, Capacity(1));
  const double h = 7;
  RandomHeight r = random_height(box3(3), h, f);
  EXPECT_GT(r.value, h);
  EXPECT_LE(r.value, h + L + 2);
  EXPECT_DOUBLE_EQ(r.value, L + 1.0);
  std::vector<ClusterReport> cs = r.contributing_clusters;
  EXPECT_DOUBLE_EQ(height_by_scan(box3(3), h, cs), r.value);
  for (const auto& c : cs)
    for (const Point& p : c.vertices) EXPECT_FALSE(in_top_layer(box3(3), r.value, p));
}

TEST(RandomHeight, ExtentsAgreeWithScanOnRandomFields) {
  CapacityDistribution g = CapacityDistribution::bernoulli(Rational(2, 10));
  HyperRectangle tilted(Direction{1, 1, 2}, Vec{}, {3, 3});
  for (std::uint64_t s = 0; s < 40; ++s) {
    CapacityField f(s, g);
    for (const auto& a : {box3(4), tilted}) {
      RandomHeight r = random_height(a, 7, f);
      EXPECT_GE(r.value, 7.0);
      EXPECT_NEAR(height_by_scan(a, 7, r.contributing_clusters), r.value, 1e-9);
    }
  }
}

TEST(RandomHeight, FullFieldIsRegimeError) {
  CapacityField f(3, kOne);
  HeightOptions opt;
  opt.cluster_cap = 2000;
  EXPECT_THROW(random_height(box3(3), 7, f, opt), RegimeError);
}

TEST(LemmaCutset, ZeroFieldIsEdgeSetOfThickenedBase) {
  CapacityField f(3, kZero);
  LemmaCutset lc = lemma_cutset(box3(3), 7, f);
  // every edge with an endpoint in [0,3]^2 x [0,3]
  std::set<EdgeKey> expect;
  for (int x = 0; x <= 3; ++x)
    for (int y = 0; y <= 3; ++y)
      for (int z = 0; z <= 3; ++z)
        for_each_neighbor(Point{x, y, z}, 3, [&](const Point& q) { expect.insert(edge_between(Point{x, y, z}, q, 3)); });
  EXPECT_EQ(std::set<EdgeKey>(lc.edges.begin(), lc.edges.end()), expect);
  EXPECT_EQ(lc.edges.size(), 240u);
}

TEST(LemmaCutset, RandomFieldsAreNullSeparatingAndBounded) {
  CapacityDistribution g({{Capacity(0), Rational(88, 100)}, {Capacity(1), Rational(6, 100)}, {Capacity::infinity(), Rational(6, 100)}});
  HyperRectangle a = box3(3);
  auto base = thicken(a).lattice_points();
  for (std::uint64_t s = 0; s < 100; ++s) {
    CapacityField f(1000 + s, g);
    LemmaCutset lc = lemma_cutset(a, 7, f);
    for (const EdgeKey& e : lc.edges) ASSERT_TRUE(f.capacity(e).is_zero());
    EXPECT_LE(lc.edges.size(), 6 * lc.cluster_vertex_total);
    EXPECT_TRUE(separates_in_slab(a, lc.height.value, base, lc.edges));
    EXPECT_FALSE(slab_path_exists(a, lc.height.value, base, lc.edges, 40));
  }
}

TEST(LemmaCutset, MonotoneInBase) {
  CapacityDistribution g = CapacityDistribution::bernoulli(Rational(1, 10));
  for (std::uint64_t s = 0; s < 20; ++s) {
    CapacityField f(s, g);
    LemmaCutset small = lemma_cutset(box3(3), 8, f);
    LemmaCutset large = lemma_cutset(box3(5), 8, f);
    EXPECT_TRUE(std::includes(large.edges.begin(), large.edges.end(), small.edges.begin(), small.edges.end()));
  }
}

TEST(SeparatesInSlab, DetectsMissingWall) {
  HyperRectangle a = box3(2);
  auto base = thicken(a).lattice_points();
  EXPECT_FALSE(separates_in_slab(a, 7, base, {}));
}

TEST(TailFit, RecoversGeometricTail) {
  // P[S > k] = q^k for S geometric on {1,2,...}: kappa2 = -log q
  const double q = 0.7;
  std::mt19937_64 rng(9);
  std::geometric_distribution<std::size_t> geo(1 - q);
  std::vector<std::size_t> sizes;
  for (int i = 0; i < 200'000; ++i) sizes.push_back(geo(rng) + 1);
  TailFit fit = fit_tail(sizes);
  ASSERT_TRUE(fit.valid);
  EXPECT_NEAR(fit.kappa2_hat, -std::log(q), 0.02);
  EXPECT_GT(fit.r_squared, 0.99);
}

TEST(TailFit, TrivialAndRegimeCases) {
  TailFit zero = tail_fit(Rational(0), 3, 200, 1);
  for (std::size_t s : zero.sizes) EXPECT_EQ(s, 1u);
  EXPECT_EQ(survival_curve(zero.sizes)[1], 0.0);
  EXPECT_THROW(tail_fit(Rational(3, 10), 3, 10, 1), RegimeError);
  EXPECT_THROW(tail_fit(Rational(1, 2), 2, 10, 1), RegimeError);
}

TEST(TailFit, SubcriticalSimulation) {
  TailFit fit = tail_fit(Rational(15, 100), 3, 10'000, 5);
  ASSERT_TRUE(fit.valid);
  EXPECT_GT(fit.kappa2_hat, 0.0);
  for (std::size_t k = 1; k < fit.points.size(); ++k) EXPECT_LE(fit.points[k].empirical, fit.points[k - 1].empirical);

  TailFit planar = tail_fit(Rational(1, 4), 2, 10'000, 6);
  auto surv = survival_curve(planar.sizes);
  double tail50 = surv.size() > 49 ? surv[49] : 0.0;  // P[card >= 50]
  EXPECT_LT(tail50, 1e-2);
}
