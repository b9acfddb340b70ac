// Monte Carlo campaigns over growing cylinders nA: estimates of the
// cutset-size constant, flow positivity scans, variance audits,
// subadditivity checks and cluster-event frequencies.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "fppflow/capacity_field.hpp"
#include "fppflow/geometry.hpp"
#include "fppflow/mincut.hpp"
#include "fppflow/seeds.hpp"
#include "fppflow/statistics.hpp"
#include "fppflow/zero_clusters.hpp"

namespace fppflow {

//---------------------------------------------------------------------------//
// Height schedules
//---------------------------------------------------------------------------//

enum class ScheduleForm { sqrt, power, polylog };

inline const char* to_string(ScheduleForm f) {
  switch (f) {
    case ScheduleForm::sqrt: return "sqrt";
    case ScheduleForm::power: return "power";
    case ScheduleForm::polylog: return "polylog";
  }
  return "?";
}

/// h(n) with h(n)/log n -> inf and h(n)/n -> 0:
///   sqrt    ceil(c sqrt n)
///   power   ceil(c n^alpha), 0 < alpha < 1
///   polylog ceil(c log(n+1)^beta), beta > 1
struct HeightSchedule {
  ScheduleForm form = ScheduleForm::sqrt;
  double c = 1.0;
  double alpha = 0.5;
  double beta = 2.0;

  void validate() const {
    if (!(c > 0.0)) throw ValidationError("schedule constant c must be positive");
    if (form == ScheduleForm::power && !(alpha > 0.0 && alpha < 1.0))
      throw ValidationError("power schedule needs alpha in (0,1)");
    if (form == ScheduleForm::polylog && !(beta > 1.0))
      throw ValidationError("polylog schedule needs beta > 1");
  }

  int operator()(int n) const {
    double x = 0.0;
    switch (form) {
      case ScheduleForm::sqrt: x = c * std::sqrt(static_cast<double>(n)); break;
      case ScheduleForm::power: x = c * std::pow(static_cast<double>(n), alpha); break;
      case ScheduleForm::polylog: x = c * std::pow(std::log(static_cast<double>(n) + 1.0), beta); break;
    }
    // guard against c*sqrt(n) landing a hair above an integer
    return std::max(1, static_cast<int>(std::ceil(x - 1e-9)));
  }
};

//---------------------------------------------------------------------------//
// Deterministic parallel map
//---------------------------------------------------------------------------//

/// Evaluates fn(i) for i in [0, count) on `workers` threads. Results land
/// in index order; the first exception by index is rethrown.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned workers, Fn&& fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

//---------------------------------------------------------------------------//
// Cluster-size events
//---------------------------------------------------------------------------//

/// Memoized "card_v(C(x)) <= bound" over many start points.
template <EdgeField F>
class ClusterBoundCheck {
 public:
  ClusterBoundCheck(int dim, const F& field) : dim_(dim), field_(field) {}

  /// True iff every point's cluster has at most `bound` vertices.
  bool all_at_most(std::span<const Point> pts, std::size_t bound) {
    if (bound == 0) return pts.empty();
    for (const Point& x : pts) {
      auto it = size_.find(x);
      std::size_t s;
      if (it != size_.end()) {
        s = it->second;
      } else {
        bool truncated = false;
        std::size_t cap = std::max(bound, explored_cap_);
        auto c = cluster_vertices(x, dim_, field_, cap, truncated);
        if (truncated) {
          s = cap + 1;  // lower bound suffices to decide
        } else {
          s = c.size();
          for (const Point& p : c) size_.emplace(p, s);
        }
      }
      if (s > bound) return false;
    }
    return true;
  }

 private:
  int dim_;
  const F& field_;
  std::size_t explored_cap_ = 64;
  std::unordered_map<Point, std::size_t, PointHash> size_;
};

struct EventFlags {
  bool e = false;  ///< all x in cyl(nA,h/2): card < h/2
  bool g = false;  ///< all x in cyl(nA,h):   card <= min(h/4, n^{1/4})
  bool h = false;  ///< all x in B(nA,h):     card <= h/2
};

inline std::size_t floor_size(double x) { return x <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(x + 1e-12)); }

template <EdgeField F>
EventFlags check_events(const HyperRectangle& na, int n, int h, std::span<const Point> bottom, const F& field) {
  ClusterBoundCheck<F> check(na.dim(), field);
  EventFlags ev;
  double half = h / 2.0;
  // card < h/2  <=>  card <= ceil(h/2) - 1
  std::size_t e_bound = static_cast<std::size_t>(std::ceil(half - 1e-12)) - 1;
  ev.e = check.all_at_most(cylinder_prism(na, 0.0, half).lattice_points(), e_bound);
  double g_cap = std::min(h / 4.0, std::pow(static_cast<double>(n), 0.25));
  ev.g = check.all_at_most(cylinder_prism(na, 0.0, h).lattice_points(), floor_size(g_cap));
  ev.h = check.all_at_most(bottom, floor_size(half));
  return ev;
}

template <EdgeField F>
bool holds_h_event(std::span<const Point> bottom, int dim, int h, const F& field) {
  ClusterBoundCheck<F> check(dim, field);
  return check.all_at_most(bottom, floor_size(h / 2.0));
}

//---------------------------------------------------------------------------//
// Campaign machinery
//---------------------------------------------------------------------------//

struct Thresholds {
  double ci_level = 0.95;
  double sigma_slack = 3.0;
  std::size_t bootstrap_resamples = 10'000;
};

struct Campaign {
  Campaign(CapacityDistribution dist, HyperRectangle shape) : distribution(std::move(dist)), base(std::move(shape)) {}

  CapacityDistribution distribution;
  HyperRectangle base;  ///< unit shape A; scale n uses nA
  HeightSchedule schedule;
  std::vector<int> scales;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  Thresholds thresholds;
  RegimeConstants constants;
  std::size_t cluster_cap = kDefaultClusterCap;
  bool couple = false;          ///< solve on couple_bernoulli(field)
  bool with_chi = false;
  bool with_events = false;
  bool coupling_audit = true;
  ChiOptions chi;
};

/// Height used for null-capacity slab cuts at scale n: the schedule value
/// raised to 2d + 1 when smaller, since the random height needs h > 2d.
inline int chi_height(const HeightSchedule& s, int n, int d) { return std::max(s(n), 2 * d + 1); }

struct Sample {
  int n = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  int h = 0;
  Capacity phi;
  std::int64_t psi = 0;
  bool h_event = false;
  bool coupling_checked = false;
  bool coupling_ok = true;
  std::int64_t psi_coupled = 0;
  std::optional<std::int64_t> chi;
  double chi_height_value = 0.0;
  std::optional<EventFlags> events;
};

struct EventRates {
  double e = 0.0;
  double g = 0.0;
  double h = 0.0;
};

struct ScaleReport {
  int n = 0;
  int h = 0;
  double area = 0.0;
  std::size_t replicates = 0;
  Summary psi_ratio;   ///< psi / area
  Interval psi_ci;
  Summary psi;         ///< raw psi
  Summary phi_ratio;   ///< phi / area
  Interval phi_ci;
  std::optional<Summary> chi_ratio;
  std::optional<Interval> chi_ci;
  int chi_h = 0;
  std::optional<EventRates> events;
  std::size_t coupling_checked = 0;
  std::size_t coupling_failed = 0;
};

struct EstimateReport {
  std::vector<ScaleReport> scales;
  double zeta_hat = 0.0;  ///< largest-scale mean of psi/area
  double nu_hat = 0.0;    ///< largest-scale mean of phi/area
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  bool outside_theorem_scope = false;  ///< d = 2
  std::vector<Sample> samples;
  std::size_t hard_failures = 0;
  std::vector<std::string> notes;

  const ScaleReport& at(int n) const {
    for (const auto& s : scales)
      if (s.n == n) return s;
    throw ValidationError("scale " + std::to_string(n) + " not in report");
  }
};

namespace detail {

inline double to_double(const Capacity& c) {
  return c.is_infinite() ? std::numeric_limits<double>::infinity() : c.value().to_double();
}

inline bool only_zero_one_atoms(const CapacityDistribution& d) {
  for (const Atom& a : d.atoms())
    if (!(a.value.is_zero() || a.value == Capacity(1))) return false;
  return true;
}

template <EdgeField F>
Sample run_sample(const Campaign& c, int n, std::size_t r, const F& field) {
  Sample s;
  s.n = n;
  s.replicate = r;
  s.h = c.schedule(n);
  HyperRectangle na = c.base.scaled(n);
  FlowProblem prob = cylinder_problem(na, s.h, field);
  CutResult cut = lexi_min_cut(prob);
  s.phi = cut.flow_value;
  s.psi = cut.cut_cardinality;

  std::vector<Point> bottom;
  for (int v : prob.marked.sinks) bottom.push_back(prob.marked.region.vertex(v));
  if (c.coupling_audit) {
    s.h_event = holds_h_event(bottom, na.dim(), s.h, field);
    if (s.h_event && s.phi.is_zero()) {
      s.coupling_checked = true;
      if constexpr (std::is_same_v<F, CapacityField>) {
        if (field.coupled() || only_zero_one_atoms(field.base_distribution())) {
          s.psi_coupled = s.psi;
        } else {
          s.psi_coupled = lexi_min_cut(cylinder_problem(na, s.h, couple_bernoulli(field))).cut_cardinality;
        }
      } else {
        s.psi_coupled = s.psi;
      }
      s.coupling_ok = s.psi_coupled == s.psi;
    }
  }
  if (c.with_events) s.events = check_events(na, n, s.h, bottom, field);
  if (c.with_chi) {
    ChiOptions opt = c.chi;
    opt.height.cluster_cap = c.cluster_cap;
    ChiResult x = fppflow::chi(na, chi_height(c.schedule, n, na.dim()), field, opt);
    s.chi = x.cardinality;
    s.chi_height_value = x.height.value;
  }
  return s;
}

}  // namespace detail

/// Runs every (scale, replicate) pair and aggregates per scale.
/// Replicate r at scale n uses the field seeded by derive_seed(seed, r, n);
/// results are independent of the worker count.
inline EstimateReport run_campaign(const Campaign& c) {
  c.schedule.validate();
  if (c.scales.empty()) throw ValidationError("campaign needs at least one scale");
  if (c.replicates < 1) throw ValidationError("campaign needs at least one replicate");
  for (int n : c.scales)
    if (n < 1) throw ValidationError("scales must be positive");

  const std::size_t jobs = c.scales.size() * c.replicates;
  auto samples = parallel_map<Sample>(jobs, c.workers, [&](std::size_t j) {
    int n = c.scales[j / c.replicates];
    std::size_t r = j % c.replicates;
    std::uint64_t seed = derive_seed(c.seed, r, static_cast<std::uint64_t>(n));
    CapacityField field(seed, c.distribution);
    Sample s = c.couple ? detail::run_sample(c, n, r, couple_bernoulli(field)) : detail::run_sample(c, n, r, field);
    s.seed = seed;
    return s;
  });

  EstimateReport rep;
  rep.replicates = c.replicates;
  rep.seed = c.seed;
  rep.outside_theorem_scope = c.base.dim() == 2;
  if (rep.outside_theorem_scope) rep.notes.push_back("d = 2: outside the scope of the a.s. convergence theorem (d >= 3)");
  for (std::size_t k = 0; k < c.scales.size(); ++k) {
    const int n = c.scales[k];
    ScaleReport sr;
    sr.n = n;
    sr.h = c.schedule(n);
    sr.area = c.base.scaled(n).area();
    sr.replicates = c.replicates;
    std::vector<double> psi_ratio, psi_raw, phi_ratio, chi_ratio, ev_e, ev_g, ev_h;
    for (std::size_t r = 0; r < c.replicates; ++r) {
      const Sample& s = samples[k * c.replicates + r];
      psi_ratio.push_back(static_cast<double>(s.psi) / sr.area);
      psi_raw.push_back(static_cast<double>(s.psi));
      phi_ratio.push_back(detail::to_double(s.phi) / sr.area);
      if (s.chi) chi_ratio.push_back(static_cast<double>(*s.chi) / sr.area);
      if (s.events) {
        ev_e.push_back(s.events->e);
        ev_g.push_back(s.events->g);
        ev_h.push_back(s.events->h);
      }
      if (s.coupling_checked) {
        ++sr.coupling_checked;
        if (!s.coupling_ok) ++sr.coupling_failed;
      }
    }
    const auto& t = c.thresholds;
    auto boot_seed = [&](std::uint64_t stat) { return derive_seed(c.seed, stat, static_cast<std::uint64_t>(n)); };
    sr.psi_ratio = summarize(psi_ratio);
    sr.psi_ci = bootstrap_mean_ci(psi_ratio, t.bootstrap_resamples, boot_seed(0xB001), t.ci_level);
    sr.psi = summarize(psi_raw);
    sr.phi_ratio = summarize(phi_ratio);
    sr.phi_ci = bootstrap_mean_ci(phi_ratio, t.bootstrap_resamples, boot_seed(0xB002), t.ci_level);
    if (!chi_ratio.empty()) {
      sr.chi_ratio = summarize(chi_ratio);
      sr.chi_ci = bootstrap_mean_ci(chi_ratio, t.bootstrap_resamples, boot_seed(0xB003), t.ci_level);
      sr.chi_h = chi_height(c.schedule, n, c.base.dim());
    }
    if (!ev_e.empty()) sr.events = EventRates{summarize(ev_e).mean, summarize(ev_g).mean, summarize(ev_h).mean};
    rep.hard_failures += sr.coupling_failed;
    rep.scales.push_back(sr);
  }
  auto largest = std::max_element(rep.scales.begin(), rep.scales.end(),
                                  [](const ScaleReport& a, const ScaleReport& b) { return a.n < b.n; });
  rep.zeta_hat = largest->psi_ratio.mean;
  rep.nu_hat = largest->phi_ratio.mean;
  rep.samples = std::move(samples);
  return rep;
}

inline void require_supercritical_zero(const Campaign& c) {
  RegimeConstants k = c.constants.d == c.base.dim() ? c.constants : RegimeConstants::defaults(c.base.dim());
  auto reg = regime_of(c.distribution, k);
  if (reg.zero != ZeroRegime::supercritical)
    throw RegimeError(std::string("campaign needs G({0}) > 1 - p_c(d); distribution is ") + to_string(reg.zero));
}

/// Per-scale estimates of psi/area (and chi/area when enabled); the zeta
/// estimate is the largest-scale mean.
inline EstimateReport estimate_zeta(const Campaign& c) {
  require_supercritical_zero(c);
  return run_campaign(c);
}

//---------------------------------------------------------------------------//

struct ScanRow {
  Rational zero_mass;
  Summary phi_ratio;
  Interval phi_ci;
};

/// Mean Phi/area of cyl(nA,h) for G = g0 delta_0 + (1 - g0) delta_1, for
/// each g0 in the grid. Replicates share seeds across grid points.
inline std::vector<ScanRow> positivity_scan(const HyperRectangle& base, int n, int h,
                                            std::span<const Rational> zero_masses, std::size_t replicates,
                                            std::uint64_t seed, unsigned workers = 1,
                                            const Thresholds& t = {}) {
  if (n < 1 || replicates < 1 || h < 1) throw ValidationError("positivity scan needs n, h, replicates >= 1");
  HyperRectangle na = base.scaled(n);
  const double area = na.area();
  std::vector<ScanRow> rows;
  for (const Rational& g0 : zero_masses) {
    auto law = CapacityDistribution::bernoulli(Rational(1) - g0);
    auto vals = parallel_map<double>(replicates, workers, [&](std::size_t r) {
      CapacityField field(derive_seed(seed, r, static_cast<std::uint64_t>(n)), law);
      return detail::to_double(phi(na, h, field).flow_value) / area;
    });
    rows.push_back({g0, summarize(vals),
                    bootstrap_mean_ci(vals, t.bootstrap_resamples, derive_seed(seed, 0xB004, n), t.ci_level)});
  }
  return rows;
}

//---------------------------------------------------------------------------//

struct VarianceRow {
  int n = 0;
  double var_psi = 0.0;        ///< Var(psi)
  double var_ratio = 0.0;      ///< Var(psi/area)
  double mean_psi = 0.0;
  double bound = 0.0;          ///< 4 sqrt(n) mean(psi)
  double slack = 0.0;          ///< sigma_slack * SE(Var(psi))
  bool bound_ok = false;
};

struct ConcentrationReport {
  EstimateReport campaign;
  std::vector<VarianceRow> rows;
  bool bound_audit = true;      ///< Var(psi) <= 4 sqrt(n) mean(psi) + slack at every scale
  bool decreasing_audit = true; ///< Var(psi/area) decreasing across the upper half of scales
};

/// Variance of psi_{G_p} (coupled field) per scale against the bound
/// 4 sqrt(n) E[psi].
inline ConcentrationReport concentration_diagnostic(Campaign c) {
  require_supercritical_zero(c);
  c.couple = true;
  ConcentrationReport out;
  out.campaign = run_campaign(c);
  for (const auto& s : out.campaign.scales) {
    VarianceRow row;
    row.n = s.n;
    row.var_psi = s.psi.variance;
    row.var_ratio = s.psi_ratio.variance;
    row.mean_psi = s.psi.mean;
    row.bound = 4.0 * std::sqrt(static_cast<double>(s.n)) * s.psi.mean;
    row.slack = c.thresholds.sigma_slack * s.psi.variance_std_error();
    row.bound_ok = row.var_psi <= row.bound + row.slack;
    out.bound_audit = out.bound_audit && row.bound_ok;
    out.rows.push_back(row);
  }
  std::vector<VarianceRow> sorted = out.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
  for (std::size_t i = (sorted.size() - 1) / 2; i + 1 < sorted.size(); ++i)
    if (!(sorted[i + 1].var_ratio < sorted[i].var_ratio) && sorted[i].var_ratio > 0.0)
      out.decreasing_audit = false;
  return out;
}

//---------------------------------------------------------------------------//

struct SubadditivityReport {
  EstimateReport campaign;
  int n_small = 0;
  int n_large = 0;
  double difference = 0.0;       ///< mean chi/area at N minus at n
  double combined_width = 0.0;   ///< sum of the two CI widths
  bool violation = false;
  double chi_psi_gap = 0.0;      ///< |mean chi/area - mean psi/area| at N
  double chi_psi_width = 0.0;    ///< combined CI width of chi/area and psi/area at N
};

/// Compares E[chi]/area at a small and a large scale. Only a difference
/// larger than the combined CI width is flagged.
inline SubadditivityReport subadditivity_diagnostic(Campaign c, int n_small, int n_large) {
  if (!(n_small < n_large)) throw ValidationError("subadditivity needs n_small < N_large");
  require_supercritical_zero(c);
  c.scales = {n_small, n_large};
  c.with_chi = true;
  SubadditivityReport out;
  out.campaign = run_campaign(c);
  out.n_small = n_small;
  out.n_large = n_large;
  const auto& s = out.campaign.at(n_small);
  const auto& l = out.campaign.at(n_large);
  out.difference = l.chi_ratio->mean - s.chi_ratio->mean;
  out.combined_width = l.chi_ci->width() + s.chi_ci->width();
  out.violation = out.difference > out.combined_width;
  out.chi_psi_gap = std::abs(l.chi_ratio->mean - l.psi_ratio.mean);
  out.chi_psi_width = l.chi_ci->width() + l.psi_ci.width();
  return out;
}

//---------------------------------------------------------------------------//

struct EventReport {
  EstimateReport campaign;
  std::vector<std::pair<int, EventRates>> rates;
  std::size_t implication_checked = 0;
  std::size_t implication_failed = 0;
};

/// Empirical frequencies of the three cluster-size events per scale, plus
/// the per-sample check psi_G == psi_{G_p} on samples where the bottom
/// event holds and the flow is zero.
inline EventReport event_probabilities(Campaign c) {
  require_supercritical_zero(c);
  c.with_events = true;
  c.coupling_audit = true;
  EventReport out;
  out.campaign = run_campaign(c);
  for (const auto& s : out.campaign.scales) {
    out.rates.emplace_back(s.n, *s.events);
    out.implication_checked += s.coupling_checked;
    out.implication_failed += s.coupling_failed;
  }
  return out;
}

}  // namespace fppflow
