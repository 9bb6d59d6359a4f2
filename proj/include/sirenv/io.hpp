#pragma once

// File formats: run summaries (JSON), trajectories (CSV), sweep tables
// (CSV + JSON) and the key/value form of ExperimentConfig.
//
// Numbers are written in shortest round-trip form and no field depends on the
// wall clock, so identical inputs give byte-identical files.

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "sirenv/config.hpp"
#include "sirenv/dynamics.hpp"
#include "sirenv/experiment.hpp"
#include "sirenv/meanfield.hpp"

namespace sirenv {

inline constexpr std::string_view kVersion = "1.0.0";

using ojson = nlohmann::ordered_json;

namespace io {

inline std::string num(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return detail::format_double(x);
}

inline ojson jnum(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

inline std::string seed_hex(std::uint64_t s) {
  char buf[17];
  auto res = std::to_chars(buf, buf + 16, s, 16);
  std::string hex(buf, res.ptr);
  return "0x" + std::string(16 - hex.size(), '0') + hex;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error(errc::io_failure, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw error(errc::io_failure, "failed writing '" + path.string() + "'");
}

}  // namespace io

// ---- ExperimentConfig <-> key/value text ----------------------------------

inline KeyValueDoc to_doc(const ExperimentConfig& c) {
  KeyValueDoc d;
  std::vector<std::string> ns, ls;
  for (auto n : c.n_grid) ns.push_back(std::to_string(n));
  for (auto l : c.lambda_grid) ls.push_back(io::num(l));
  d.set("xi_spec", c.xi_spec.to_string());
  d.set("rho_spec", c.rho_spec.to_string());
  d.set("n_grid", kv::join(ns));
  d.set("lambda_grid", kv::join(ls));
  d.set("lambda_units", std::string(to_string(c.lambda_units)));
  d.set("replications", std::to_string(c.replications));
  d.set("engine", std::string(to_string(c.engine)));
  d.set("measure", std::string(to_string(c.measure)));
  d.set("epsilon", io::num(c.epsilon));
  d.set("master_seed", std::to_string(c.master_seed));
  d.set("confidence", io::num(c.confidence));
  d.set("method", std::string(to_string(c.method)));
  d.set("percolation_mode", std::string(to_string(c.percolation_mode)));
  return d;
}

inline Engine parse_engine(std::string_view v) {
  if (v == "dynamic") return Engine::dynamic;
  if (v == "percolation") return Engine::percolation;
  throw error(errc::parse_error, "engine must be dynamic or percolation, got '" + std::string(v) + "'");
}

inline Measure parse_measure(std::string_view v) {
  if (v == "annealed") return Measure::annealed;
  if (v == "quenched") return Measure::quenched;
  throw error(errc::parse_error, "measure must be annealed or quenched, got '" + std::string(v) + "'");
}

inline Method parse_method(std::string_view v) {
  if (v == "direct") return Method::direct;
  if (v == "thinning") return Method::thinning;
  throw error(errc::parse_error, "method must be direct or thinning, got '" + std::string(v) + "'");
}

inline PercolationMode parse_percolation_mode(std::string_view v) {
  if (v == "clock") return PercolationMode::clock;
  if (v == "skip") return PercolationMode::skip;
  throw error(errc::parse_error, "percolation_mode must be clock or skip, got '" + std::string(v) + "'");
}

inline LambdaUnits parse_lambda_units(std::string_view v) {
  if (v == "absolute") return LambdaUnits::absolute;
  if (v == "critical") return LambdaUnits::critical;
  throw error(errc::parse_error, "lambda_units must be absolute or critical, got '" + std::string(v) + "'");
}

// Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentConfig experiment_from_doc(const KeyValueDoc& d, ExperimentConfig c = {}) {
  for (const auto& [key, value] : d.entries()) {
    if (key == "xi_spec") {
      c.xi_spec = parse_spec(value, Role::recovery);
    } else if (key == "rho_spec") {
      c.rho_spec = parse_spec(value, Role::weight);
    } else if (key == "n_grid") {
      c.n_grid.clear();
      for (auto t : kv::list(value)) c.n_grid.push_back(kv::to_u64(t, key));
    } else if (key == "lambda_grid") {
      c.lambda_grid.clear();
      for (auto t : kv::list(value)) c.lambda_grid.push_back(kv::to_double(t, key));
    } else if (key == "lambda_units") {
      c.lambda_units = parse_lambda_units(value);
    } else if (key == "replications") {
      c.replications = kv::to_u64(value, key);
    } else if (key == "engine") {
      c.engine = parse_engine(value);
    } else if (key == "measure") {
      c.measure = parse_measure(value);
    } else if (key == "epsilon") {
      c.epsilon = kv::to_double(value, key);
    } else if (key == "master_seed") {
      c.master_seed = kv::to_u64(value, key);
    } else if (key == "confidence") {
      c.confidence = kv::to_double(value, key);
    } else if (key == "method") {
      c.method = parse_method(value);
    } else if (key == "percolation_mode") {
      c.percolation_mode = parse_percolation_mode(value);
    } else {
      throw error(errc::parse_error, "unknown config key '" + key + "'");
    }
  }
  validate(c);
  return c;
}

// ---- Run summaries and trajectories ---------------------------------------

inline ojson to_json(const RunResult& r) {
  ojson j;
  j["engine"] = std::string(to_string(r.engine));
  j["method"] = r.method;
  j["n"] = r.n;
  j["lambda"] = r.lambda;
  j["r_infinity"] = r.r_infinity;
  j["final_fraction"] = static_cast<double>(r.r_infinity) / static_cast<double>(r.n);
  j["extinction_time"] = io::jnum(r.extinction_time);
  j["events_executed"] = r.events_executed;
  j["proposals_rejected"] = r.proposals_rejected;
  j["truncated"] = r.truncated;
  j["provenance"] = {{"env_seed", io::seed_hex(r.provenance.env_seed)},
                     {"run_seed", io::seed_hex(r.provenance.run_seed)}};
  return j;
}

inline std::string trajectory_csv(const std::vector<TrajectoryRow>& rows) {
  std::string out = "time,event,vertex,s_count,i_count,r_count\n";
  for (const auto& row : rows) {
    out += io::num(row.time) + "," + std::string(to_string(row.kind)) + "," + std::to_string(row.vertex) + "," +
           std::to_string(row.s_count) + "," + std::to_string(row.i_count) + "," + std::to_string(row.r_count) +
           "\n";
  }
  return out;
}

inline std::string meanfield_csv(const std::vector<meanfield::State>& rows) {
  std::string out = "t,s,i,r\n";
  for (const auto& st : rows)
    out += io::num(st.t) + "," + io::num(st.s) + "," + io::num(st.i) + "," + io::num(st.r) + "\n";
  return out;
}

// ---- Sweep outputs ----------------------------------------------------------

inline std::string sweep_csv(const SweepResult& s) {
  std::string out =
      "n,lambda,lambda_over_lambda_c,mean_r_inf,ci_lo,ci_hi,exceed_prob,exceed_lo,exceed_hi,p_no_spread,"
      "analytic_no_spread,bound_eq34\n";
  for (const auto& b : s.rows) {
    const double bound = std::isfinite(b.subcritical_bound) ? b.subcritical_bound : std::nan("");
    out += std::to_string(b.n) + "," + io::num(b.lambda) + "," + io::num(b.lambda_over_lambda_c) + "," +
           io::num(b.mean_r_inf) + "," + io::num(b.mean_r_inf_ci.lo) + "," + io::num(b.mean_r_inf_ci.hi) + "," +
           io::num(b.exceed_probability) + "," + io::num(b.exceed_ci.lo) + "," + io::num(b.exceed_ci.hi) + "," +
           io::num(b.p_no_spread) + "," + io::num(b.analytic_no_spread) + "," + io::num(bound) + "\n";
  }
  return out;
}

inline ojson to_json(const BatchStats& b) {
  ojson j;
  j["n"] = b.n;
  j["lambda"] = b.lambda;
  j["lambda_over_lambda_c"] = b.lambda_over_lambda_c;
  j["grid_index"] = b.grid_index;
  j["replications"] = b.tally.runs;
  j["failures"] = b.tally.failures;
  j["truncated"] = b.tally.truncated;
  j["mean_r_inf"] = {{"estimate", b.mean_r_inf}, {"ci_lo", b.mean_r_inf_ci.lo}, {"ci_hi", b.mean_r_inf_ci.hi}};
  j["mean_final_fraction"] = {{"estimate", b.mean_final_fraction},
                              {"ci_lo", b.mean_final_fraction_ci.lo},
                              {"ci_hi", b.mean_final_fraction_ci.hi}};
  j["exceed_probability"] = {
      {"estimate", b.exceed_probability}, {"ci_lo", b.exceed_ci.lo}, {"ci_hi", b.exceed_ci.hi}, {"count", b.tally.exceed}};
  j["p_no_spread"] = {{"estimate", b.p_no_spread},
                      {"ci_lo", b.p_no_spread_ci.lo},
                      {"ci_hi", b.p_no_spread_ci.hi},
                      {"count", b.tally.no_spread}};
  j["p_spread"] = b.p_spread;
  j["conditional_exceed_fraction"] = io::jnum(b.conditional_exceed_fraction);
  j["references"] = {{"lambda_c", b.lambda_c},
                     {"subcritical_mean_bound", io::jnum(b.subcritical_bound)},
                     {"chebyshev_exceed_bound", io::jnum(b.chebyshev_bound)},
                     {"analytic_no_spread", b.analytic_no_spread},
                     {"limit_no_spread", b.limit_no_spread}};
  return j;
}

inline ojson config_json(const ExperimentConfig& c) {
  const KeyValueDoc doc = to_doc(c);
  ojson j;
  for (const auto& [k, v] : doc.entries()) j[k] = v;
  return j;
}

inline ojson to_json(const SweepResult& s) {
  const std::string text = to_doc(s.config).to_string();
  ojson j;
  j["provenance"] = {{"config_hash", content_hash(text)},
                     {"master_seed", s.config.master_seed},
                     {"engine", std::string(to_string(s.config.engine))},
                     {"measure", std::string(to_string(s.config.measure))},
                     {"version", std::string(kVersion)},
                     {"config_text", text}};
  j["config"] = config_json(s.config);
  j["lambda_c"] = s.lambda_c;
  j["rows"] = ojson::array();
  for (const auto& b : s.rows) j["rows"].push_back(to_json(b));
  j["supercritical_witnesses"] = ojson::array();
  for (const auto& w : s.witnesses)
    j["supercritical_witnesses"].push_back({{"lambda", w.lambda}, {"c", w.c}, {"b", w.b}, {"b_lo", w.b_lo}});
  j["subcritical_checks"] = ojson::array();
  for (const auto& chk : s.subcritical)
    j["subcritical_checks"].push_back({{"lambda", chk.lambda},
                                       {"exceed_by_n", chk.exceed_by_n},
                                       {"nonincreasing", chk.nonincreasing},
                                       {"strictly_decreasing", chk.strictly_decreasing}});
  return j;
}

}  // namespace sirenv
