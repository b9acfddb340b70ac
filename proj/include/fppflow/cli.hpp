// Command-line front end: fppflow <subcommand> --config PATH [flags].
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fppflow/io.hpp"

namespace fppflow::cli {

enum ExitCode : int { ok = 0, validation = 2, regime = 3, assertion = 4 };

struct Flags {
  std::string subcommand;
  std::string config_path;
  std::optional<std::string> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  bool emit_cut = false;
};

/// Everything a subcommand produces: one summary line, files keyed by name.
struct Output {
  std::string summary;
  std::vector<std::pair<std::string, std::string>> files;
  bool hard_failure = false;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string error_json(const std::string& kind, const std::string& message, int code) {
  return json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump();
}

namespace detail {

inline std::string point_str(const Point& p, int d) {
  std::string s = "(";
  for (int k = 0; k < d; ++k) s += (k ? "," : "") + std::to_string(p[k]);
  return s + ")";
}

inline CapacityField field_of(const RunConfig& c) {
  return CapacityField(c.seed.value_or(0), RunConfig::need(c.distribution, "distribution"));
}

inline Campaign campaign_of(const RunConfig& c) {
  HyperRectangle a = RunConfig::need(c.geometry, "geometry").rect();
  Campaign k{RunConfig::need(c.distribution, "distribution"), a};
  k.schedule = c.schedule.value_or(HeightSchedule{});
  k.scales = c.scales;
  k.replicates = RunConfig::need(c.replicates, "replicates");
  k.seed = c.seed.value_or(0);
  k.workers = c.workers.value_or(1);
  k.thresholds = c.thresholds.value_or(Thresholds{});
  k.constants = c.constants(a.dim());
  k.cluster_cap = c.cluster_cap.value_or(kDefaultClusterCap);
  k.with_chi = c.with_chi.value_or(false);
  k.chi.height.cluster_cap = k.cluster_cap;
  return k;
}

inline HeightOptions height_options(const RunConfig& c) {
  HeightOptions o;
  o.cluster_cap = c.cluster_cap.value_or(kDefaultClusterCap);
  return o;
}

inline Output flow_cmd(const RunConfig& c, const Flags&) {
  HyperRectangle a = c.shape();
  double h = RunConfig::need(c.h, "h");
  FlowProblem p = cylinder_problem(a, h, field_of(c));
  CutResult r = max_flow(p);
  Output o;
  o.summary = "flow value=" + r.flow_value.to_string() + " vertices=" + std::to_string(p.marked.region.vertex_count()) +
              " edges=" + std::to_string(p.marked.region.edge_count());
  o.files.emplace_back("flow.json", json{{"schema", kSchemaVersion}, {"problem", to_json(p)}, {"result", to_json(r)}}.dump(2) + "\n");
  return o;
}

inline Output cut_cmd(const RunConfig& c, const Flags& f) {
  HyperRectangle a = c.shape();
  double h = RunConfig::need(c.h, "h");
  FlowProblem p = cylinder_problem(a, h, field_of(c));
  CutResult r = lexi_min_cut(p);
  Output o;
  o.summary = "cut capacity=" + r.cut_capacity.to_string() + " cardinality=" + std::to_string(r.cut_cardinality);
  o.files.emplace_back("cut.json", json{{"schema", kSchemaVersion}, {"problem", to_json(p)}, {"result", to_json(r)}}.dump(2) + "\n");
  if (f.emit_cut) {
    std::vector<EdgeKey> keys;
    for (int e : r.cut_edges) keys.push_back(p.marked.region.edge_key(e));
    o.files.emplace_back("cut_edges.csv", cut_csv(keys, a.dim()));
  }
  return o;
}

inline Output chi_cmd(const RunConfig& c, const Flags& f) {
  HyperRectangle a = c.shape();
  double h = RunConfig::need(c.h, "h");
  ChiOptions opt;
  opt.height = height_options(c);
  ChiResult r = chi(a, h, field_of(c), opt);
  Output o;
  o.summary = "chi cardinality=" + std::to_string(r.cardinality) + " height=" + format_double(r.height.value) +
              " margin=" + format_double(r.window.margin);
  o.files.emplace_back("chi.json", json{{"schema", kSchemaVersion},
                                        {"cardinality", r.cardinality},
                                        {"height", r.height.value},
                                        {"margin", r.window.margin},
                                        {"result", to_json(r.cut)}}.dump(2) + "\n");
  if (f.emit_cut) o.files.emplace_back("cut_edges.csv", cut_csv(r.cut_keys, a.dim()));
  return o;
}

inline Output clusters_cmd(const RunConfig& c, const Flags&) {
  Output o;
  if (c.tail) {
    int d = RunConfig::need(c.geometry, "geometry").rect().dim();
    TailFit fit = tail_fit(c.tail->p, d, c.tail->samples, c.seed.value_or(0), c.constants(d),
                           c.cluster_cap.value_or(kDefaultClusterCap));
    o.summary = "tail kappa1=" + format_double(fit.kappa1_hat) + " kappa2=" + format_double(fit.kappa2_hat) +
                " r2=" + format_double(fit.r_squared) + " samples=" + std::to_string(fit.samples);
    o.files.emplace_back("tail.json", json{{"schema", kSchemaVersion}, {"fit", to_json(fit)}}.dump(2) + "\n");
    CsvTable t;
    for (const auto& p : fit.points) {
      t.real(std::to_string(p.size), "survival", p.empirical);
      t.real(std::to_string(p.size), "fitted", p.fitted);
    }
    o.files.emplace_back("tail.csv", t.str("size"));
    return o;
  }
  const auto& pt = RunConfig::need(c.point, "point");
  int d = static_cast<int>(pt.size());
  if (d < kMinDim || d > kMaxDim) throw InvalidGeometry("point must have 2 to 5 coordinates");
  Point x{};
  for (int k = 0; k < d; ++k) x[k] = pt[k];
  ClusterReport r = cluster_of(x, d, field_of(c), c.cluster_cap.value_or(kDefaultClusterCap));
  o.summary = "cluster root=" + point_str(x, d) + " card_v=" + std::to_string(r.card_v()) +
              " boundary=" + std::to_string(r.boundary.size()) + (r.truncated ? " truncated" : "");
  o.files.emplace_back("cluster.json", json{{"schema", kSchemaVersion}, {"cluster", to_json(r, d)}}.dump(2) + "\n");
  return o;
}

inline Output height_cmd(const RunConfig& c, const Flags& f) {
  HyperRectangle a = c.shape();
  double h = RunConfig::need(c.h, "h");
  CapacityField field = field_of(c);
  LemmaCutset lc = lemma_cutset(a, h, field, height_options(c));
  Output o;
  o.summary = "height H=" + format_double(lc.height.value) + " h=" + format_double(h) +
              " clusters=" + std::to_string(lc.height.contributing_clusters.size()) +
              " null_cutset=" + std::to_string(lc.edges.size());
  o.files.emplace_back("height.json", json{{"schema", kSchemaVersion},
                                           {"h", h},
                                           {"height", lc.height.value},
                                           {"clusters", lc.height.contributing_clusters.size()},
                                           {"null_cutset_size", lc.edges.size()},
                                           {"cluster_vertex_total", lc.cluster_vertex_total}}.dump(2) + "\n");
  if (f.emit_cut) o.files.emplace_back("cut_edges.csv", cut_csv(lc.edges, a.dim()));
  return o;
}

inline Output zeta_cmd(const RunConfig& c, const Flags&) {
  EstimateReport r = estimate_zeta(campaign_of(c));
  Output o;
  o.summary = "zeta zeta_hat=" + format_double(r.zeta_hat) + " nu_hat=" + format_double(r.nu_hat) +
              " scales=" + std::to_string(r.scales.size()) + " replicates=" + std::to_string(r.replicates) +
              (r.outside_theorem_scope ? " (d=2: outside theorem scope)" : "");
  o.files.emplace_back("zeta.csv", to_csv(r).str());
  o.files.emplace_back("zeta.json", to_json(r).dump(2) + "\n");
  o.hard_failure = r.hard_failures > 0;
  return o;
}

inline Output scan_cmd(const RunConfig& c, const Flags&) {
  HyperRectangle a = RunConfig::need(c.geometry, "geometry").rect();
  if (c.zero_masses.empty()) throw ValidationError("config is missing \"zero_masses\"");
  auto rows = positivity_scan(a, RunConfig::need(c.n, "n"), static_cast<int>(RunConfig::need(c.h, "h")),
                              c.zero_masses, RunConfig::need(c.replicates, "replicates"), c.seed.value_or(0),
                              c.workers.value_or(1), c.thresholds.value_or(Thresholds{}));
  CsvTable t;
  json j = json::array();
  for (const auto& r : rows) {
    std::string g = r.zero_mass.to_string();
    t.real(g, "phi_ratio_mean", r.phi_ratio.mean);
    t.real(g, "phi_ratio_var", r.phi_ratio.variance);
    t.real(g, "phi_ratio_ci_lo", r.phi_ci.lo);
    t.real(g, "phi_ratio_ci_hi", r.phi_ci.hi);
    j.push_back({{"zero_mass", g}, {"phi_ratio", to_json(r.phi_ratio)}, {"phi_ci", to_json(r.phi_ci)}});
  }
  Output o;
  o.summary = "scan rows=" + std::to_string(rows.size());
  for (const auto& r : rows) o.summary += " G0=" + r.zero_mass.to_string() + ":" + format_double(r.phi_ratio.mean);
  o.files.emplace_back("scan.csv", t.str("zero_mass"));
  o.files.emplace_back("scan.json", json{{"schema", kSchemaVersion}, {"rows", j}}.dump(2) + "\n");
  return o;
}

inline Output diag_cmd(const RunConfig& c, const Flags&) {
  Campaign k = campaign_of(c);
  ConcentrationReport cr = concentration_diagnostic(k);
  Output o;
  CsvTable t;
  json rows = json::array();
  for (const auto& r : cr.rows) {
    std::string n = std::to_string(r.n);
    t.real(n, "var_psi", r.var_psi);
    t.real(n, "var_psi_ratio", r.var_ratio);
    t.real(n, "mean_psi", r.mean_psi);
    t.real(n, "efron_stein_bound", r.bound);
    t.real(n, "slack", r.slack);
    t.exact(n, "bound_ok", r.bound_ok ? 1 : 0);
    rows.push_back({{"n", r.n}, {"var_psi", r.var_psi}, {"var_psi_ratio", r.var_ratio}, {"mean_psi", r.mean_psi},
                    {"bound", r.bound}, {"slack", r.slack}, {"bound_ok", r.bound_ok}});
  }
  json j = {{"schema", kSchemaVersion},
            {"bound_audit", cr.bound_audit},
            {"decreasing_audit", cr.decreasing_audit},
            {"rows", rows},
            {"campaign", to_json(cr.campaign)}};
  o.summary = std::string("diag bound_audit=") + (cr.bound_audit ? "pass" : "fail") +
              " decreasing_audit=" + (cr.decreasing_audit ? "pass" : "fail");
  if (c.n_small || c.n_large) {
    SubadditivityReport sr =
        subadditivity_diagnostic(k, RunConfig::need(c.n_small, "n_small"), RunConfig::need(c.n_large, "n_large"));
    j["subadditivity"] = {{"n_small", sr.n_small}, {"n_large", sr.n_large}, {"difference", sr.difference},
                          {"combined_width", sr.combined_width}, {"violation", sr.violation},
                          {"chi_psi_gap", sr.chi_psi_gap}, {"chi_psi_width", sr.chi_psi_width}};
    t.real(std::to_string(sr.n_large), "chi_ratio_minus_small", sr.difference);
    t.real(std::to_string(sr.n_large), "chi_combined_ci_width", sr.combined_width);
    t.exact(std::to_string(sr.n_large), "subadditivity_violation", sr.violation ? 1 : 0);
    o.summary += std::string(" subadditivity=") + (sr.violation ? "flagged" : "ok");
    o.hard_failure = o.hard_failure || sr.campaign.hard_failures > 0;
  }
  o.hard_failure = o.hard_failure || cr.campaign.hard_failures > 0;
  o.files.emplace_back("diag.csv", t.str());
  o.files.emplace_back("diag.json", j.dump(2) + "\n");
  return o;
}

inline Output events_cmd(const RunConfig& c, const Flags&) {
  EventReport r = event_probabilities(campaign_of(c));
  CsvTable t;
  json rows = json::array();
  Output o;
  o.summary = "events";
  for (const auto& [n, e] : r.rates) {
    std::string s = std::to_string(n);
    t.real(s, "prob_E", e.e);
    t.real(s, "prob_G", e.g);
    t.real(s, "prob_H", e.h);
    rows.push_back({{"n", n}, {"E", e.e}, {"G", e.g}, {"H", e.h}});
    o.summary += " n=" + s + ":E=" + format_double(e.e) + ",G=" + format_double(e.g) + ",H=" + format_double(e.h);
  }
  o.summary += " implication=" + std::to_string(r.implication_checked - r.implication_failed) + "/" +
               std::to_string(r.implication_checked);
  o.files.emplace_back("events.csv", t.str());
  o.files.emplace_back("events.json", json{{"schema", kSchemaVersion},
                                           {"rates", rows},
                                           {"implication_checked", r.implication_checked},
                                           {"implication_failed", r.implication_failed}}.dump(2) + "\n");
  o.hard_failure = r.implication_failed > 0;
  return o;
}

inline Output dispatch(const RunConfig& c, const Flags& f) {
  const std::string& s = f.subcommand;
  if (s == "flow") return flow_cmd(c, f);
  if (s == "cut") return cut_cmd(c, f);
  if (s == "chi") return chi_cmd(c, f);
  if (s == "clusters") return clusters_cmd(c, f);
  if (s == "height") return height_cmd(c, f);
  if (s == "zeta") return zeta_cmd(c, f);
  if (s == "scan") return scan_cmd(c, f);
  if (s == "diag") return diag_cmd(c, f);
  if (s == "events") return events_cmd(c, f);
  throw ValidationError("unknown subcommand '" + s + "'");
}

inline void write_outputs(const Output& o, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, body] : o.files) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + (dir / name).string() + "'");
    out << body;
  }
}

}  // namespace detail

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"flow", "cut", "chi", "clusters", "height", "zeta", "scan", "diag", "events"};
  return s;
}

/// Runs one invocation; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Max-flow and null-cutset experiments on first-passage percolation lattices", "fppflow"};
  app.require_subcommand(1);
  Flags f;
  for (const auto& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", f.config_path, "JSON config")->required();
    sub->add_option("--seed", f.seed, "master seed, decimal or 0x hex");
    sub->add_option("--workers", f.workers, "worker threads");
    sub->add_option("--out", f.out, "output directory");
    sub->add_flag("--emit-cut", f.emit_cut, "write cut edges as CSV");
    sub->callback([&f, name] { f.subcommand = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << error_json("usage", e.what(), validation) << "\n";
    return validation;
  }

  try {
    RunConfig cfg = parse_config(read_file(f.config_path));
    if (f.seed) cfg.seed = parse_seed(*f.seed);
    if (f.workers) cfg.workers = *f.workers;
    if (f.out) cfg.out = *f.out;
    Output o = detail::dispatch(cfg, f);
    if (cfg.out) detail::write_outputs(o, *cfg.out);
    out << o.summary << "\n";
    if (o.hard_failure) {
      err << error_json("assertion", "campaign recorded hard-assert failures", assertion) << "\n";
      return assertion;
    }
    return ok;
  } catch (const ValidationError& e) {
    err << error_json(e.kind(), e.what(), validation) << "\n";
    return validation;
  } catch (const RegimeError& e) {
    err << error_json(e.kind(), e.what(), regime) << "\n";
    return regime;
  } catch (const WindowOverflow& e) {
    err << error_json(e.kind(), e.what(), regime) << "\n";
    return regime;
  } catch (const AssertionFailure& e) {
    err << error_json(e.kind(), e.what(), assertion) << "\n";
    return assertion;
  } catch (const std::exception& e) {
    err << error_json("internal", e.what(), assertion) << "\n";
    return assertion;
  }
}

}  // namespace fppflow::cli
