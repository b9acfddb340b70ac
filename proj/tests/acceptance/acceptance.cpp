// Acceptance suite: one PASS/FAIL line per criterion.
//
//   fppflow_acceptance            run every criterion
//   fppflow_acceptance 3 8        run the listed criteria only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "fppflow/fppflow.hpp"
#include "../oracles.hpp"

using namespace fppflow;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

HyperRectangle unit_base(int d) {
  return HyperRectangle(Direction::straight(d), Vec{}, std::vector<double>(d - 1, 1.0));
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

//---------------------------------------------------------------------------//

Outcome duality() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> dim(2, 3), coin(0, 9);
  const int total = 500;
  int ok = 0;
  std::size_t max_edges = 0;
  for (int i = 0; i < total; ++i) {
    const int d = dim(rng);
    // mostly small instances with a tail of large ones up to ~5e4 edges
    int side_max = d == 2 ? (coin(rng) == 0 ? 150 : 40) : (coin(rng) == 0 ? 24 : 10);
    std::uniform_int_distribution<int> side(1, side_max);
    std::vector<double> sides(d - 1);
    for (double& s : sides) s = side(rng);
    int h = side(rng);
    std::uniform_int_distribution<int> num(1, 9), den(1, 7), w(1, 6);
    int w0 = w(rng), w1 = w(rng), w2 = w(rng), winf = coin(rng) < 5 ? 1 : 0;
    int sum = w0 + w1 + w2 + winf;
    std::vector<Atom> atoms{{Capacity(0), Rational(w0, sum)},
                            {Capacity(Rational(num(rng), den(rng))), Rational(w1, sum)},
                            {Capacity(num(rng) + 10), Rational(w2, sum)}};
    if (winf) atoms.push_back({Capacity::infinity(), Rational(winf, sum)});
    CapacityField field(rng(), CapacityDistribution(atoms));
    FlowProblem p = cylinder_problem(HyperRectangle(Direction::straight(d), Vec{}, sides), h, field);
    FlowGraph g = p.graph();
    max_edges = std::max(max_edges, g.edges.size());
    CutResult r = max_flow(g);
    bool exact = r.flow_value == r.cut_capacity;
    std::vector<char> in_cut(g.edges.size(), 0);
    for (int e : r.cut_edges) in_cut[e] = 1;
    std::vector<std::pair<int, int>> rest;
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      if (!in_cut[e]) rest.push_back(g.edges[e]);
    bool separated = !oracle::connects(g.vertex_count, rest, g.sources, g.sinks);
    ok += exact && separated && g.edges.size() <= 50'000;
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " instances exact and separating, largest " +
                           std::to_string(max_edges) + " edges"};
}

Outcome exhaustive() {
  std::mt19937 rng(2);
  int ok = 0;
  for (int i = 0; i < 100; ++i) {
    FlowGraph g = oracle::random_small_graph(rng, 14);
    CutResult r = lexi_min_cut(g);
    auto b = oracle::brute_lexi_cut(g);
    bool same = r.cut_capacity == b.capacity && (b.capacity.is_infinite() || r.cut_cardinality == b.cardinality);
    ok += same;
  }
  return {ok == 100, std::to_string(ok) + "/100 match exhaustive enumeration"};
}

Outcome menger() {
  std::ostringstream os;
  bool all = true;
  for (int n : {4, 8, 16}) {
    HyperRectangle a = unit_base(3).scaled(n);
    int h = static_cast<int>(std::ceil(std::sqrt(n)));
    auto psi0 = psi(a, h, CapacityField(1, CapacityDistribution::point_mass(Capacity(0)))).cardinality;
    auto phi1 = phi(a, h, CapacityField(1, CapacityDistribution::point_mass(Capacity(1)))).flow_value;
    std::int64_t expect = (n + 1) * (n + 1);
    bool ok = psi0 == expect && phi1 == Capacity(expect) &&
              std::abs(static_cast<double>(psi0) / (n * n) - 1.0) <= 3.0 / n;
    all = all && ok;
    os << "n=" << n << " psi=" << psi0 << " phi=" << phi1.to_string() << " ";
  }
  return {all, os.str()};
}

Outcome lemma_witness() {
  HeightSchedule sched{ScheduleForm::sqrt, 3.0, 0.5, 2.0};
  int ok = 0, total = 0;
  std::int64_t slack_min = INT64_MAX;
  for (Rational g0 : {Rational(85, 100), Rational(95, 100)})
    for (int n : {6, 10})
      for (std::uint64_t r = 0; r < 50; ++r) {
        ++total;
        CapacityField f(derive_seed(4, r, n), CapacityDistribution::bernoulli(Rational(1) - g0));
        HyperRectangle a = unit_base(3).scaled(n);
        int h = sched(n);
        LemmaCutset lc = lemma_cutset(a, h, f);
        bool null = true;
        for (const EdgeKey& e : lc.edges) null = null && f.capacity(e).is_zero();
        bool cuts = separates_in_slab(a, lc.height.value, thicken(a).lattice_points(), lc.edges);
        ChiResult x = chi(a, h, f);
        auto card = static_cast<std::int64_t>(lc.edges.size());
        slack_min = std::min(slack_min, card - x.cardinality);
        ok += null && cuts && card >= x.cardinality;
      }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) +
                           " null, separating, card >= chi (min gap " + std::to_string(slack_min) + ")"};
}

Outcome coupling() {
  CapacityDistribution g({{Capacity(0), Rational(9, 10)}, {Capacity(Rational(1, 2)), Rational(1, 20)},
                          {Capacity::infinity(), Rational(1, 20)}});
  Campaign c(g, unit_base(3));
  c.schedule = {ScheduleForm::sqrt, 8.0, 0.5, 2.0};
  c.scales = {8, 12};
  c.replicates = 100;
  c.seed = 5;
  c.workers = workers();
  c.thresholds.bootstrap_resamples = 100;
  EstimateReport r = estimate_zeta(c);
  std::size_t checked = 0, failed = 0;
  for (const auto& s : r.scales) {
    checked += s.coupling_checked;
    failed += s.coupling_failed;
  }
  return {failed == 0 && checked > 0,
          std::to_string(checked - failed) + "/" + std::to_string(checked) + " qualifying samples agree (of " +
              std::to_string(r.samples.size()) + ")"};
}

Campaign campaign6(unsigned w) {
  Campaign c(CapacityDistribution::bernoulli(Rational(1, 10)), unit_base(3));
  c.schedule = {ScheduleForm::sqrt, 1.0, 0.5, 2.0};
  c.scales = {8, 12, 16, 20};
  c.replicates = 200;
  c.seed = 1;
  c.workers = w;
  c.with_chi = true;
  return c;
}

Outcome convergence() {
  EstimateReport r = estimate_zeta(campaign6(workers()));
  const auto& s8 = r.at(8);
  const auto& s16 = r.at(16);
  const auto& s20 = r.at(20);
  bool overlap = s16.psi_ci.overlaps(s20.psi_ci);
  bool var = s20.psi_ratio.variance < s8.psi_ratio.variance;
  std::ostringstream os;
  os << "CI16=[" << fmt(s16.psi_ci.lo) << "," << fmt(s16.psi_ci.hi) << "] CI20=[" << fmt(s20.psi_ci.lo) << ","
     << fmt(s20.psi_ci.hi) << "] overlap=" << overlap << " var8=" << fmt(s8.psi_ratio.variance)
     << " var20=" << fmt(s20.psi_ratio.variance) << " zeta_hat=" << fmt(r.zeta_hat);
  return {overlap && var, os.str()};
}

Outcome efron_stein() {
  ConcentrationReport r = concentration_diagnostic(campaign6(workers()));
  std::ostringstream os;
  for (const auto& row : r.rows)
    os << "n=" << row.n << " var=" << fmt(row.var_psi) << "<=" << fmt(row.bound) << "+" << fmt(row.slack)
       << (row.bound_ok ? " " : "(violated) ");
  return {r.bound_audit, os.str()};
}

Outcome tails() {
  TailFit f = tail_fit(Rational(15, 100), 3, 10'000, 8);
  bool ok = f.valid && f.kappa2_hat > 0.0 && f.r_squared >= 0.95;
  return {ok, "kappa1=" + fmt(f.kappa1_hat) + " kappa2=" + fmt(f.kappa2_hat) + " R2=" + fmt(f.r_squared) +
                  " range=[" + std::to_string(f.fit_lo) + "," + std::to_string(f.fit_hi) + "]"};
}

Outcome positivity() {
  std::vector<Rational> grid{Rational(3, 10), Rational(7, 10)};
  auto rows = positivity_scan(unit_base(2), 24, 24, grid, 100, 9, workers());
  double lo = rows[0].phi_ratio.mean, hi = rows[1].phi_ratio.mean;
  return {hi < 0.1 * lo, "mean phi/area at G0=0.3: " + fmt(lo) + ", at G0=0.7: " + fmt(hi)};
}

Outcome chi_psi() {
  EstimateReport r = estimate_zeta(campaign6(workers()));
  const auto& s = r.at(20);
  double gap = std::abs(s.chi_ratio->mean - s.psi_ratio.mean);
  double width = s.chi_ci->width() + s.psi_ci.width();
  return {gap <= width, "n=20 chi/area=" + fmt(s.chi_ratio->mean) + " psi/area=" + fmt(s.psi_ratio.mean) +
                            " gap=" + fmt(gap) + " combined CI width=" + fmt(width)};
}

Outcome determinism() {
  std::string one = to_csv(estimate_zeta(campaign6(1))).str();
  std::string eight = to_csv(estimate_zeta(campaign6(8))).str();
  return {one == eight, one == eight ? "workers 1 and 8 give identical CSV (" + std::to_string(one.size()) + " bytes)"
                                     : "CSV differs between workers 1 and 8"};
}

struct Criterion {
  const char* name;
  double budget_s;  // 0: no time limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::map<int, Criterion> all{
      {1, {"duality and validity", 60, duality}},
      {2, {"exhaustive-oracle equivalence", 30, exhaustive}},
      {3, {"Menger anchors", 10, menger}},
      {4, {"null cutset witness", 300, lemma_witness}},
      {5, {"coupling identity", 300, coupling}},
      {6, {"convergence stability", 1800, convergence}},
      {7, {"Efron-Stein audit", 0, efron_stein}},
      {8, {"cluster tails", 120, tails}},
      {9, {"positivity transition", 300, positivity}},
      {10, {"chi-psi agreement", 0, chi_psi}},
      {11, {"determinism", 0, determinism}},
  };
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  if (pick.empty())
    for (const auto& [k, v] : all) pick.push_back(k);

  int failures = 0;
  for (int k : pick) {
    auto it = all.find(k);
    if (it == all.end()) {
      std::printf("criterion %d FAIL: no such criterion\n", k);
      ++failures;
      continue;
    }
    const Criterion& c = it->second;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = c.budget_s == 0 || secs <= c.budget_s;
    bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("criterion %d %s: %s: %s (%.1f s%s)\n", k, pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                in_time ? "" : ", over time budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
