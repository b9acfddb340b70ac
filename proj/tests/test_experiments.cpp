#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fppflow/experiments.hpp"
#include "fppflow/io.hpp"

using namespace fppflow;

namespace {

const CapacityDistribution kZero = CapacityDistribution::point_mass(Capacity(0));

HyperRectangle unit_base(int d) {
  return HyperRectangle(Direction::straight(d), Vec{}, std::vector<double>(d - 1, 1.0));
}

Campaign small_campaign(CapacityDistribution g, std::vector<int> scales, std::size_t reps, std::uint64_t seed) {
  Campaign c(std::move(g), unit_base(3));
  c.scales = std::move(scales);
  c.replicates = reps;
  c.seed = seed;
  c.thresholds.bootstrap_resamples = 2000;
  return c;
}

}  // namespace

TEST(Summary, MomentsAndDegenerateSamples) {
  std::vector<double> xs{1, 2, 3, 4};
  Summary s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.variance, 5.0 / 3.0);
  std::vector<double> flat(10, 0.3);
  Summary f = summarize(flat);
  EXPECT_EQ(f.mean, 0.3);
  EXPECT_EQ(f.variance, 0.0);
  Interval ci = bootstrap_mean_ci(flat, 1000, 1);
  EXPECT_EQ(ci.lo, 0.3);
  EXPECT_EQ(ci.hi, 0.3);
}

TEST(Bootstrap, ContainsMeanAndIsDeterministic) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(2.0, 1.0);
  std::vector<double> xs(200);
  for (double& x : xs) x = nd(rng);
  Interval a = bootstrap_mean_ci(xs, 10'000, 77), b = bootstrap_mean_ci(xs, 10'000, 77);
  EXPECT_EQ(a.lo, b.lo);
  EXPECT_EQ(a.hi, b.hi);
  EXPECT_TRUE(a.contains(summarize(xs).mean));
  // normal-theory width 2 * 1.96 * s / sqrt(n)
  double expect = 2 * 1.96 * std::sqrt(summarize(xs).variance / 200.0);
  EXPECT_NEAR(a.width(), expect, 0.15 * expect);
}

TEST(Bootstrap, WidthHalvesWhenSamplesQuadruple) {
  std::mt19937_64 rng(8);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> big(800);
  for (double& x : big) x = ex(rng);
  std::vector<double> small(big.begin(), big.begin() + 200);
  double ratio = bootstrap_mean_ci(big, 10'000, 1).width() / bootstrap_mean_ci(small, 10'000, 1).width();
  EXPECT_GT(ratio, 0.3);
  EXPECT_LT(ratio, 0.8);
}

TEST(HeightSchedule, FormsAndValidation) {
  HeightSchedule s;
  EXPECT_EQ(s(16), 4);
  EXPECT_EQ(s(8), 3);
  EXPECT_EQ(s(20), 5);
  HeightSchedule p{ScheduleForm::power, 2.0, 0.5, 2.0};
  EXPECT_EQ(p(9), 6);
  HeightSchedule l{ScheduleForm::polylog, 1.0, 0.5, 2.0};
  EXPECT_EQ(l(1), static_cast<int>(std::ceil(std::pow(std::log(2.0), 2))));
  EXPECT_THROW((HeightSchedule{ScheduleForm::power, 1.0, 1.0, 2.0}).validate(), ValidationError);
  EXPECT_THROW((HeightSchedule{ScheduleForm::polylog, 1.0, 0.5, 1.0}).validate(), ValidationError);
  EXPECT_THROW((HeightSchedule{ScheduleForm::sqrt, 0.0, 0.5, 2.0}).validate(), ValidationError);
  // flat-cylinder condition: h/log n grows and h/n shrinks along a geometric sequence of n
  for (const auto& f : {s, p, l}) {
    double prev_log = 0, prev_lin = 1e9;
    for (int n = 1 << 10; n <= (1 << 26); n <<= 4) {
      double h = f(n);
      EXPECT_GT(h / std::log(n), prev_log);
      EXPECT_LT(h / n, prev_lin);
      prev_log = h / std::log(n);
      prev_lin = h / n;
    }
  }
}

TEST(ParallelMap, OrderAndErrors) {
  auto sq = parallel_map<int>(100, 8, [](std::size_t i) { return static_cast<int>(i * i); });
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sq[i], i * i);
  EXPECT_THROW(parallel_map<int>(10, 4,
                                 [](std::size_t i) -> int {
                                   if (i == 7) throw RegimeError("boom");
                                   return 0;
                                 }),
               RegimeError);
}

TEST(EstimateZeta, ZeroFieldIsExact) {
  Campaign c = small_campaign(kZero, {8, 16}, 5, 1);
  EstimateReport r = estimate_zeta(c);
  for (const auto& s : r.scales) {
    double expect = std::pow(s.n + 1.0, 2) / (s.n * s.n);
    EXPECT_DOUBLE_EQ(s.psi_ratio.mean, expect);
    EXPECT_EQ(s.psi_ratio.variance, 0.0);
    EXPECT_EQ(s.psi_ci.lo, expect);
    EXPECT_EQ(s.psi_ci.hi, expect);
  }
  EXPECT_DOUBLE_EQ(r.zeta_hat, std::pow(1.0 + 1.0 / 16, 2));
  EXPECT_EQ(r.nu_hat, 0.0);
  EXPECT_FALSE(r.outside_theorem_scope);
}

TEST(EstimateZeta, RejectsSubcriticalZeroMass) {
  Campaign c = small_campaign(CapacityDistribution::bernoulli(Rational(1, 2)), {4}, 2, 1);
  EXPECT_THROW(estimate_zeta(c), RegimeError);
  Campaign bad = small_campaign(kZero, {}, 2, 1);
  EXPECT_THROW(estimate_zeta(bad), ValidationError);
}

TEST(EstimateZeta, PlanarRunsAreLabelled) {
  Campaign c(kZero, unit_base(2));
  c.scales = {4};
  c.replicates = 2;
  EstimateReport r = estimate_zeta(c);
  EXPECT_TRUE(r.outside_theorem_scope);
  EXPECT_FALSE(r.notes.empty());
  EXPECT_DOUBLE_EQ(r.zeta_hat, 5.0 / 4.0);
}

TEST(EstimateZeta, WorkerCountDoesNotChangeOutput) {
  Campaign c = small_campaign(CapacityDistribution::bernoulli(Rational(1, 10)), {4, 6}, 12, 9);
  c.with_chi = true;
  c.workers = 1;
  std::string one = to_csv(estimate_zeta(c)).str();
  c.workers = 4;
  std::string four = to_csv(estimate_zeta(c)).str();
  EXPECT_EQ(one, four);
}

TEST(EstimateZeta, ReportsAreConsistent) {
  Campaign c = small_campaign(CapacityDistribution::bernoulli(Rational(1, 10)), {4, 6}, 20, 3);
  EstimateReport r = estimate_zeta(c);
  for (const auto& s : r.scales) {
    EXPECT_TRUE(s.psi_ci.contains(s.psi_ratio.mean));
    EXPECT_TRUE(s.phi_ci.contains(s.phi_ratio.mean));
    EXPECT_GE(s.psi_ratio.mean, 0.0);
  }
  std::set<std::uint64_t> seeds;
  for (const auto& s : r.samples) seeds.insert(s.seed);
  EXPECT_EQ(seeds.size(), r.samples.size());
}

TEST(EstimateZeta, CouplingAuditHolds) {
  CapacityDistribution g({{Capacity(0), Rational(9, 10)}, {Capacity(Rational(1, 2)), Rational(1, 20)}, {Capacity(4), Rational(1, 20)}});
  Campaign c = small_campaign(g, {6}, 30, 5);
  c.schedule.c = 3;
  EstimateReport r = estimate_zeta(c);
  EXPECT_EQ(r.hard_failures, 0u);
  EXPECT_GT(r.scales[0].coupling_checked, 0u);
  for (const auto& s : r.samples)
    if (s.coupling_checked) {
      EXPECT_EQ(s.psi, s.psi_coupled);
    }
}

TEST(PositivityScan, DegenerateEnds) {
  std::vector<Rational> grid{Rational(1), Rational(0)};
  auto rows = positivity_scan(unit_base(3), 6, 3, grid, 3, 1);
  EXPECT_EQ(rows[0].phi_ratio.mean, 0.0);
  EXPECT_DOUBLE_EQ(rows[1].phi_ratio.mean, std::pow(7.0 / 6.0, 2));
  EXPECT_EQ(rows[1].phi_ratio.variance, 0.0);
}

TEST(Concentration, ZeroFieldHasNoVariance) {
  ConcentrationReport r = concentration_diagnostic(small_campaign(kZero, {4, 8}, 4, 1));
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.var_psi, 0.0);
    EXPECT_TRUE(row.bound_ok);
  }
  EXPECT_TRUE(r.bound_audit);
}

TEST(Subadditivity, ZeroFieldNoFlag) {
  SubadditivityReport r = subadditivity_diagnostic(small_campaign(kZero, {}, 2, 1), 4, 8);
  // chi = (n+1)^2 + 4 (n+1) (d+1) for an all-zero field and straight base [0,n]^2
  auto exact = [](int n) { return ((n + 1.0) * (n + 1.0) + 16.0 * (n + 1.0)) / (n * n); };
  EXPECT_DOUBLE_EQ(r.campaign.at(4).chi_ratio->mean, exact(4));
  EXPECT_DOUBLE_EQ(r.campaign.at(8).chi_ratio->mean, exact(8));
  EXPECT_FALSE(r.violation);
  EXPECT_THROW(subadditivity_diagnostic(small_campaign(kZero, {}, 2, 1), 8, 8), ValidationError);
}

TEST(Events, ZeroFieldAlwaysHolds) {
  Campaign c = small_campaign(kZero, {16, 25}, 3, 1);
  EventReport r = event_probabilities(c);
  for (const auto& [n, e] : r.rates) {
    EXPECT_EQ(e.e, 1.0);
    EXPECT_EQ(e.g, 1.0);
    EXPECT_EQ(e.h, 1.0);
  }
  EXPECT_EQ(r.implication_failed, 0u);
  EXPECT_EQ(r.implication_checked, 6u);
}
