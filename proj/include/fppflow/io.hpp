// JSON configs and reports, CSV tables.
#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fppflow/experiments.hpp"

namespace fppflow {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

//---------------------------------------------------------------------------//
// Scalars
//---------------------------------------------------------------------------//

/// Decimal or 0x-prefixed hexadecimal 64-bit integer.
inline std::uint64_t parse_seed(std::string_view s) {
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ValidationError("bad seed: '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t seed_from_json(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_string()) return parse_seed(j.get<std::string>());
  throw ValidationError("seed must be a non-negative integer or a string");
}

/// Shortest round-trip decimal form.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.contains(it.key())) throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T get_as(const json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ValidationError("bad value for " + what + ": " + j.dump());
  }
}

inline Rational rational_from_json(const json& j, const std::string& what) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_string()) {
    try {
      return Rational::parse(j.get<std::string>());
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ValidationError("bad rational for " + what + ": " + j.dump());
    }
  }
  throw ValidationError(what + " must be a \"p/q\" string");
}

}  // namespace detail

//---------------------------------------------------------------------------//
// Distributions
//---------------------------------------------------------------------------//

inline json to_json(const CapacityDistribution& d) {
  json atoms = json::array();
  for (const Atom& a : d.atoms()) atoms.push_back({{"value", a.value.to_string()}, {"prob", a.prob.to_string()}});
  return {{"atoms", atoms}};
}

inline CapacityDistribution distribution_from_json(const json& j) {
  detail::reject_unknown(j, {"atoms"}, "distribution");
  if (!j.contains("atoms") || !j["atoms"].is_array()) throw ValidationError("distribution needs an \"atoms\" array");
  std::vector<Atom> atoms;
  for (const json& a : j["atoms"]) {
    detail::reject_unknown(a, {"value", "prob"}, "atom");
    if (!a.contains("value") || !a.contains("prob")) throw ValidationError("atom needs value and prob");
    Capacity v = a["value"].is_string() ? Capacity::parse(a["value"].get<std::string>())
                                        : Capacity(detail::rational_from_json(a["value"], "atom value"));
    if (!v.is_infinite() && v.value() < Rational(0)) throw ValidationError("negative capacity atom");
    atoms.push_back({v, detail::rational_from_json(a["prob"], "atom prob")});
  }
  return CapacityDistribution(std::move(atoms));
}

//---------------------------------------------------------------------------//
// Geometry
//---------------------------------------------------------------------------//

/// Hyperrectangle as written in configs: integer normal, base corner and
/// side lengths along the hyperplane frame.
struct GeometrySpec {
  std::vector<int> normal;
  std::vector<double> base;
  std::vector<double> sides;

  HyperRectangle rect() const {
    Direction dir{std::span<const int>(normal)};
    Vec b{};
    if (!base.empty() && static_cast<int>(base.size()) != dir.dim())
      throw InvalidGeometry("base corner needs " + std::to_string(dir.dim()) + " coordinates");
    for (std::size_t i = 0; i < base.size(); ++i) b[i] = base[i];
    return HyperRectangle(dir, b, sides);
  }
};

inline json to_json(const GeometrySpec& g) {
  json j = {{"normal", g.normal}, {"sides", g.sides}};
  if (!g.base.empty()) j["base"] = g.base;
  return j;
}

inline GeometrySpec geometry_from_json(const json& j) {
  detail::reject_unknown(j, {"normal", "base", "sides"}, "geometry");
  if (!j.contains("normal") || !j.contains("sides")) throw ValidationError("geometry needs normal and sides");
  GeometrySpec g;
  g.normal = detail::get_as<std::vector<int>>(j["normal"], "geometry.normal");
  g.sides = detail::get_as<std::vector<double>>(j["sides"], "geometry.sides");
  if (j.contains("base")) g.base = detail::get_as<std::vector<double>>(j["base"], "geometry.base");
  g.rect();
  return g;
}

//---------------------------------------------------------------------------//
// Schedules and thresholds
//---------------------------------------------------------------------------//

inline json to_json(const HeightSchedule& s) {
  json j = {{"form", to_string(s.form)}, {"c", s.c}};
  if (s.form == ScheduleForm::power) j["alpha"] = s.alpha;
  if (s.form == ScheduleForm::polylog) j["beta"] = s.beta;
  return j;
}

inline HeightSchedule schedule_from_json(const json& j) {
  detail::reject_unknown(j, {"form", "c", "alpha", "beta"}, "schedule");
  HeightSchedule s;
  std::string form = j.contains("form") ? detail::get_as<std::string>(j["form"], "schedule.form") : "sqrt";
  if (form == "sqrt") s.form = ScheduleForm::sqrt;
  else if (form == "power") s.form = ScheduleForm::power;
  else if (form == "polylog") s.form = ScheduleForm::polylog;
  else throw ValidationError("unknown schedule form '" + form + "'");
  if (j.contains("c")) s.c = detail::get_as<double>(j["c"], "schedule.c");
  if (j.contains("alpha")) s.alpha = detail::get_as<double>(j["alpha"], "schedule.alpha");
  if (j.contains("beta")) s.beta = detail::get_as<double>(j["beta"], "schedule.beta");
  s.validate();
  return s;
}

inline json to_json(const Thresholds& t) {
  return {{"ci_level", t.ci_level}, {"sigma_slack", t.sigma_slack}, {"bootstrap_resamples", t.bootstrap_resamples}};
}

inline Thresholds thresholds_from_json(const json& j) {
  detail::reject_unknown(j, {"ci_level", "sigma_slack", "bootstrap_resamples"}, "thresholds");
  Thresholds t;
  if (j.contains("ci_level")) t.ci_level = detail::get_as<double>(j["ci_level"], "thresholds.ci_level");
  if (j.contains("sigma_slack")) t.sigma_slack = detail::get_as<double>(j["sigma_slack"], "thresholds.sigma_slack");
  if (j.contains("bootstrap_resamples"))
    t.bootstrap_resamples = detail::get_as<std::size_t>(j["bootstrap_resamples"], "thresholds.bootstrap_resamples");
  if (!(t.ci_level > 0.0 && t.ci_level < 1.0)) throw ValidationError("ci_level must lie in (0,1)");
  if (!(t.sigma_slack >= 0.0)) throw ValidationError("sigma_slack must be non-negative");
  return t;
}

//---------------------------------------------------------------------------//
// Run configuration
//---------------------------------------------------------------------------//

struct TailSpec {
  Rational p;
  std::size_t samples = 10'000;
};

/// Union of every subcommand's inputs. Each subcommand checks that the
/// fields it needs are present.
struct RunConfig {
  std::optional<CapacityDistribution> distribution;
  std::optional<GeometrySpec> geometry;
  std::optional<double> h;
  std::optional<int> n;
  std::optional<HeightSchedule> schedule;
  std::vector<int> scales;
  std::optional<std::size_t> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<Thresholds> thresholds;
  std::optional<double> pc;
  std::optional<std::size_t> cluster_cap;
  std::vector<Rational> zero_masses;
  std::optional<std::vector<int>> point;
  std::optional<TailSpec> tail;
  std::optional<int> n_small;
  std::optional<int> n_large;
  std::optional<bool> with_chi;
  std::optional<std::string> out;

  template <class T>
  static const T& need(const std::optional<T>& v, const char* key) {
    if (!v) throw ValidationError(std::string("config is missing \"") + key + "\"");
    return *v;
  }

  HyperRectangle shape() const {
    HyperRectangle a = need(geometry, "geometry").rect();
    return n ? a.scaled(*n) : a;
  }

  RegimeConstants constants(int d) const {
    RegimeConstants k = RegimeConstants::defaults(d);
    if (pc) k.pc = *pc;
    k.validate();
    return k;
  }
};

inline json to_json(const RunConfig& c) {
  json j = {{"schema", kSchemaVersion}};
  if (c.distribution) j["distribution"] = to_json(*c.distribution);
  if (c.geometry) j["geometry"] = to_json(*c.geometry);
  if (c.h) j["h"] = *c.h;
  if (c.n) j["n"] = *c.n;
  if (c.schedule) j["schedule"] = to_json(*c.schedule);
  if (!c.scales.empty()) j["scales"] = c.scales;
  if (c.replicates) j["replicates"] = *c.replicates;
  if (c.seed) j["seed"] = *c.seed;
  if (c.workers) j["workers"] = *c.workers;
  if (c.thresholds) j["thresholds"] = to_json(*c.thresholds);
  if (c.pc) j["pc"] = *c.pc;
  if (c.cluster_cap) j["cluster_cap"] = *c.cluster_cap;
  if (!c.zero_masses.empty()) {
    json g = json::array();
    for (const auto& r : c.zero_masses) g.push_back(r.to_string());
    j["zero_masses"] = g;
  }
  if (c.point) j["point"] = *c.point;
  if (c.tail) j["tail"] = {{"p", c.tail->p.to_string()}, {"samples", c.tail->samples}};
  if (c.n_small) j["n_small"] = *c.n_small;
  if (c.n_large) j["n_large"] = *c.n_large;
  if (c.with_chi) j["with_chi"] = *c.with_chi;
  if (c.out) j["out"] = *c.out;
  return j;
}

inline RunConfig config_from_json(const json& j) {
  detail::reject_unknown(j, {"schema", "distribution", "geometry", "h", "n", "schedule", "scales", "replicates",
                             "seed", "workers", "thresholds", "pc", "cluster_cap", "zero_masses", "point", "tail",
                             "n_small", "n_large", "with_chi", "out"},
                         "config");
  if (!j.contains("schema")) throw ValidationError("config is missing \"schema\"");
  if (j["schema"] != kSchemaVersion) throw ValidationError("unsupported schema version " + j["schema"].dump());
  RunConfig c;
  using detail::get_as;
  if (j.contains("distribution")) c.distribution = distribution_from_json(j["distribution"]);
  if (j.contains("geometry")) c.geometry = geometry_from_json(j["geometry"]);
  if (j.contains("h")) c.h = get_as<double>(j["h"], "h");
  if (j.contains("n")) c.n = get_as<int>(j["n"], "n");
  if (j.contains("schedule")) c.schedule = schedule_from_json(j["schedule"]);
  if (j.contains("scales")) c.scales = get_as<std::vector<int>>(j["scales"], "scales");
  if (j.contains("replicates")) c.replicates = get_as<std::size_t>(j["replicates"], "replicates");
  if (j.contains("seed")) c.seed = seed_from_json(j["seed"]);
  if (j.contains("workers")) c.workers = get_as<unsigned>(j["workers"], "workers");
  if (j.contains("thresholds")) c.thresholds = thresholds_from_json(j["thresholds"]);
  if (j.contains("pc")) c.pc = get_as<double>(j["pc"], "pc");
  if (j.contains("cluster_cap")) c.cluster_cap = get_as<std::size_t>(j["cluster_cap"], "cluster_cap");
  if (j.contains("zero_masses")) {
    if (!j["zero_masses"].is_array()) throw ValidationError("zero_masses must be an array");
    for (const json& g : j["zero_masses"]) c.zero_masses.push_back(detail::rational_from_json(g, "zero_masses"));
  }
  if (j.contains("point")) c.point = get_as<std::vector<int>>(j["point"], "point");
  if (j.contains("tail")) {
    const json& t = j["tail"];
    detail::reject_unknown(t, {"p", "samples"}, "tail");
    if (!t.contains("p")) throw ValidationError("tail needs p");
    c.tail = TailSpec{detail::rational_from_json(t["p"], "tail.p"),
                      t.contains("samples") ? get_as<std::size_t>(t["samples"], "tail.samples") : 10'000};
  }
  if (j.contains("n_small")) c.n_small = get_as<int>(j["n_small"], "n_small");
  if (j.contains("n_large")) c.n_large = get_as<int>(j["n_large"], "n_large");
  if (j.contains("with_chi")) c.with_chi = get_as<bool>(j["with_chi"], "with_chi");
  if (j.contains("out")) c.out = get_as<std::string>(j["out"], "out");
  if (c.n && *c.n < 1) throw ValidationError("n must be positive");
  if (c.h && !(*c.h > 0.0)) throw ValidationError("h must be positive");
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

//---------------------------------------------------------------------------//
// Results
//---------------------------------------------------------------------------//

inline json point_json(const Point& p, int dim) { return std::vector<int>(p.begin(), p.begin() + dim); }

inline json to_json(const FlowProblem& p) {
  const LatticeRegion& r = p.marked.region;
  json edges = json::array(), caps = json::array();
  for (const auto& e : r.edges()) edges.push_back({e.u, e.v});
  for (const auto& c : p.capacities) caps.push_back(c.to_string());
  return {{"vertex_count", r.vertex_count()},
          {"edges", edges},
          {"capacities", caps},
          {"sources", p.marked.sources},
          {"sinks", p.marked.sinks}};
}

inline json to_json(const CutResult& r) {
  return {{"flow_value", r.flow_value.to_string()},
          {"cut_capacity", r.cut_capacity.to_string()},
          {"cut_cardinality", r.cut_cardinality},
          {"cut_edges", r.cut_edges},
          {"lexicographic", r.lexicographic}};
}

inline json to_json(const ClusterReport& c, int dim) {
  json verts = json::array(), bd = json::array();
  for (const Point& p : c.vertices) verts.push_back(point_json(p, dim));
  for (const EdgeKey& e : c.boundary) bd.push_back({point_json(e.lo, dim), point_json(e.hi(), dim)});
  return {{"root", point_json(c.root, dim)},
          {"card_v", c.card_v()},
          {"truncated", c.truncated},
          {"diameter", c.diameter},
          {"vertices", verts},
          {"boundary", bd}};
}

inline json to_json(const TailFit& f) {
  json pts = json::array();
  for (const auto& p : f.points) pts.push_back({{"size", p.size}, {"empirical", p.empirical}, {"fitted", p.fitted}});
  auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  return {{"kappa1_hat", num(f.kappa1_hat)}, {"kappa2_hat", num(f.kappa2_hat)}, {"r_squared", num(f.r_squared)},
          {"valid", f.valid}, {"samples", f.samples}, {"fit_lo", f.fit_lo}, {"fit_hi", f.fit_hi}, {"survival", pts}};
}

inline json to_json(const Summary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"variance", s.variance}};
}
inline json to_json(const Interval& i) { return {{"lo", i.lo}, {"hi", i.hi}}; }

inline json to_json(const ScaleReport& s) {
  json j = {{"n", s.n},
            {"h", s.h},
            {"area", s.area},
            {"replicates", s.replicates},
            {"psi_ratio", to_json(s.psi_ratio)},
            {"psi_ci", to_json(s.psi_ci)},
            {"psi", to_json(s.psi)},
            {"phi_ratio", to_json(s.phi_ratio)},
            {"phi_ci", to_json(s.phi_ci)},
            {"coupling_checked", s.coupling_checked},
            {"coupling_failed", s.coupling_failed}};
  if (s.chi_ratio) {
    j["chi_ratio"] = to_json(*s.chi_ratio);
    j["chi_ci"] = to_json(*s.chi_ci);
    j["chi_h"] = s.chi_h;
  }
  if (s.events) j["events"] = {{"E", s.events->e}, {"G", s.events->g}, {"H", s.events->h}};
  return j;
}

inline json to_json(const EstimateReport& r) {
  json scales = json::array(), seeds = json::array();
  for (const auto& s : r.scales) scales.push_back(to_json(s));
  for (const auto& s : r.samples)
    seeds.push_back({{"n", s.n}, {"replicate", s.replicate}, {"seed", s.seed}, {"psi", s.psi}, {"phi", s.phi.to_string()}});
  return {{"schema", kSchemaVersion},
          {"zeta_hat", r.zeta_hat},
          {"nu_hat", r.nu_hat},
          {"replicates", r.replicates},
          {"seed", r.seed},
          {"outside_theorem_scope", r.outside_theorem_scope},
          {"hard_failures", r.hard_failures},
          {"notes", r.notes},
          {"scales", scales},
          {"samples", seeds}};
}

//---------------------------------------------------------------------------//
// CSV
//---------------------------------------------------------------------------//

/// Long-format table: n,statistic,kind,value. kind is "exact" for integers
/// and rationals, "float" for statistics.
class CsvTable {
 public:
  void exact(const std::string& key, const std::string& stat, const std::string& value) {
    rows_.push_back(key + "," + stat + ",exact," + value);
  }
  void exact(const std::string& key, const std::string& stat, std::int64_t value) {
    exact(key, stat, std::to_string(value));
  }
  void real(const std::string& key, const std::string& stat, double value) {
    rows_.push_back(key + "," + stat + ",float," + format_double(value));
  }

  std::string str(const std::string& key_name = "n") const {
    std::string s = key_name + ",statistic,kind,value\n";
    for (const auto& r : rows_) s += r + "\n";
    return s;
  }

 private:
  std::vector<std::string> rows_;
};

inline CsvTable to_csv(const EstimateReport& r) {
  CsvTable t;
  for (const auto& s : r.scales) {
    std::string n = std::to_string(s.n);
    t.exact(n, "h", s.h);
    t.exact(n, "replicates", static_cast<std::int64_t>(s.replicates));
    t.real(n, "area", s.area);
    t.real(n, "psi_ratio_mean", s.psi_ratio.mean);
    t.real(n, "psi_ratio_var", s.psi_ratio.variance);
    t.real(n, "psi_ratio_ci_lo", s.psi_ci.lo);
    t.real(n, "psi_ratio_ci_hi", s.psi_ci.hi);
    t.real(n, "psi_mean", s.psi.mean);
    t.real(n, "psi_var", s.psi.variance);
    t.real(n, "phi_ratio_mean", s.phi_ratio.mean);
    t.real(n, "phi_ratio_ci_lo", s.phi_ci.lo);
    t.real(n, "phi_ratio_ci_hi", s.phi_ci.hi);
    if (s.chi_ratio) {
      t.exact(n, "chi_h", s.chi_h);
      t.real(n, "chi_ratio_mean", s.chi_ratio->mean);
      t.real(n, "chi_ratio_var", s.chi_ratio->variance);
      t.real(n, "chi_ratio_ci_lo", s.chi_ci->lo);
      t.real(n, "chi_ratio_ci_hi", s.chi_ci->hi);
    }
    if (s.events) {
      t.real(n, "prob_E", s.events->e);
      t.real(n, "prob_G", s.events->g);
      t.real(n, "prob_H", s.events->h);
    }
    t.exact(n, "coupling_checked", static_cast<std::int64_t>(s.coupling_checked));
    t.exact(n, "coupling_failed", static_cast<std::int64_t>(s.coupling_failed));
  }
  return t;
}

/// Cut edges as coordinate pairs, one edge per row.
inline std::string cut_csv(std::span<const EdgeKey> edges, int dim) {
  std::ostringstream os;
  for (int k = 0; k < dim; ++k) os << (k ? "," : "") << "u" << k;
  for (int k = 0; k < dim; ++k) os << ",v" << k;
  os << "\n";
  for (const EdgeKey& e : edges) {
    Point hi = e.hi();
    for (int k = 0; k < dim; ++k) os << (k ? "," : "") << e.lo[k];
    for (int k = 0; k < dim; ++k) os << "," << hi[k];
    os << "\n";
  }
  return os.str();
}

}  // namespace fppflow
