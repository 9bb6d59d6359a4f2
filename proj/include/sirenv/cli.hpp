#pragma once

// Command-line front end. Every subcommand resolves its configuration in the
// same way: defaults, then the --config file, then explicit flags. The
// resolved key/value text is embedded in every output file and hashed to name
// the default output directory out/<hash>/.
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sirenv/analytics.hpp"
#include "sirenv/config.hpp"
#include "sirenv/distribution.hpp"
#include "sirenv/dynamics.hpp"
#include "sirenv/environment.hpp"
#include "sirenv/erdos_renyi.hpp"
#include "sirenv/experiment.hpp"
#include "sirenv/io.hpp"
#include "sirenv/meanfield.hpp"
#include "sirenv/percolation.hpp"

namespace sirenv::cli {

namespace detail {

// Flag name -> config key, with the raw string captured by CLI11.
struct FlagTable {
  struct Entry {
    std::string key;
    std::string value;
    CLI::Option* option = nullptr;
  };
  std::vector<std::unique_ptr<Entry>> entries;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto e = std::make_unique<Entry>();
    e->key = key;
    e->option = app->add_option(flag, e->value, help);
    entries.push_back(std::move(e));
  }

  void apply(KeyValueDoc& doc) const {
    for (const auto& e : entries)
      if (e->option->count() > 0) doc.set(e->key, e->value);
  }
};

struct Common {
  std::string config_path;
  std::string out_dir;
  unsigned jobs = 0;
};

inline KeyValueDoc merge(KeyValueDoc defaults, const Common& common, const FlagTable& flags) {
  if (!common.config_path.empty()) {
    const KeyValueDoc file = KeyValueDoc::load(common.config_path);
    for (const auto& [k, v] : file.entries()) {
      if (!defaults.find(k)) throw error(errc::parse_error, "unknown config key '" + k + "'");
      defaults.set(k, v);
    }
  }
  flags.apply(defaults);
  return defaults;
}

inline std::filesystem::path output_dir(const Common& common, const std::string& config_text) {
  if (!common.out_dir.empty()) return common.out_dir;
  return std::filesystem::path("out") / content_hash(config_text);
}

inline std::string comment_block(const std::string& config_text) {
  std::string out;
  std::size_t start = 0;
  while (start < config_text.size()) {
    auto end = config_text.find('\n', start);
    if (end == std::string::npos) end = config_text.size();
    out += "# " + config_text.substr(start, end - start) + "\n";
    start = end + 1;
  }
  return out;
}

inline ojson header(const std::string& command, const KeyValueDoc& doc) {
  ojson j;
  j["command"] = command;
  j["version"] = std::string(kVersion);
  j["config_hash"] = content_hash(doc.to_string());
  j["config_text"] = doc.to_string();
  ojson cfg;
  for (const auto& [k, v] : doc.entries()) cfg[k] = v;
  j["config"] = cfg;
  return j;
}

inline bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw error(errc::parse_error, key + " expects true or false, got '" + v + "'");
}

inline std::uint64_t u64(const KeyValueDoc& d, const std::string& key) { return kv::to_u64(*d.find(key), key); }
inline double dbl(const KeyValueDoc& d, const std::string& key) { return kv::to_double(*d.find(key), key); }
inline const std::string& str(const KeyValueDoc& d, const std::string& key) { return *d.find(key); }

inline void require_lambda(double lambda) {
  if (!(lambda >= 0.0)) throw error(errc::param_violation, "infection rate requires lambda ≥ 0");
}

// ---- subcommands -------------------------------------------------------------

inline KeyValueDoc simulate_defaults() {
  KeyValueDoc d;
  d.set("n", "100");
  d.set("lambda", "1");
  d.set("xi_spec", "constant:1");
  d.set("rho_spec", "constant:1");
  d.set("seed", "1");
  d.set("method", "direct");
  d.set("max_events", "0");
  d.set("trajectory", "false");
  return d;
}

inline int run_simulate(const KeyValueDoc& raw, const Common& common, std::ostream& out) {
  const std::uint64_t n = u64(raw, "n");
  const double lambda = dbl(raw, "lambda");
  require_lambda(lambda);
  const DistSpec xi = parse_spec(str(raw, "xi_spec"), Role::recovery);
  const DistSpec rho = parse_spec(str(raw, "rho_spec"), Role::weight);
  const std::uint64_t seed = u64(raw, "seed");
  SimParams p;
  p.lambda = lambda;
  p.method = parse_method(str(raw, "method"));
  p.max_events = u64(raw, "max_events");
  p.record_trajectory = to_bool(str(raw, "trajectory"), "trajectory");
  p.run_seed = derive_key(seed, stream_tag::run);

  KeyValueDoc doc = raw;  // canonicalize spec text
  doc.set("xi_spec", xi.to_string());
  doc.set("rho_spec", rho.to_string());
  doc.set("lambda", io::num(lambda));
  doc.set("trajectory", p.record_trajectory ? "true" : "false");
  const std::string text = doc.to_string();

  const Environment env(n, derive_key(seed, stream_tag::env), xi, rho);
  const RunResult res = gillespie_run(env, p);
  ojson j = header("simulate", doc);
  j["result"] = to_json(res);
  const auto dir = output_dir(common, text);
  io::write_file(dir / "run.json", j.dump(2) + "\n");
  if (p.record_trajectory) io::write_file(dir / "trajectory.csv", comment_block(text) + trajectory_csv(res.trajectory));
  out << j.dump(2) << "\n";
  return 0;
}

inline KeyValueDoc percolate_defaults() {
  KeyValueDoc d;
  d.set("n", "100");
  d.set("lambda", "1");
  d.set("xi_spec", "constant:1");
  d.set("rho_spec", "constant:1");
  d.set("seed", "1");
  d.set("percolation_mode", "skip");
  return d;
}

inline int run_percolate(const KeyValueDoc& raw, const Common& common, std::ostream& out) {
  const std::uint64_t n = u64(raw, "n");
  const double lambda = dbl(raw, "lambda");
  require_lambda(lambda);
  const DistSpec xi = parse_spec(str(raw, "xi_spec"), Role::recovery);
  const DistSpec rho = parse_spec(str(raw, "rho_spec"), Role::weight);
  const std::uint64_t seed = u64(raw, "seed");
  const PercolationMode mode = parse_percolation_mode(str(raw, "percolation_mode"));
  KeyValueDoc doc = raw;
  doc.set("xi_spec", xi.to_string());
  doc.set("rho_spec", rho.to_string());
  doc.set("lambda", io::num(lambda));

  const Environment env(n, derive_key(seed, stream_tag::env), xi, rho);
  const std::uint64_t run_seed = derive_key(seed, stream_tag::run);
  const ReachResult reach = percolation_final_size(env, lambda, run_seed, mode);
  RunResult res;
  res.n = n;
  res.lambda = lambda;
  res.r_infinity = reach.r_infinity;
  res.engine = Engine::percolation;
  res.method = std::string(to_string(mode));
  res.provenance = {env.seed(), run_seed};
  ojson j = header("percolate", doc);
  j["result"] = to_json(res);
  j["result"]["frontier_history"] = reach.frontier_history;
  io::write_file(output_dir(common, doc.to_string()) / "run.json", j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return 0;
}

inline KeyValueDoc sweep_defaults() { return to_doc(ExperimentConfig{}); }

inline int run_sweep(const KeyValueDoc& raw, const Common& common, std::ostream& out) {
  const ExperimentConfig cfg = experiment_from_doc(raw);
  const SweepResult res = sweep(cfg, common.jobs ? common.jobs : default_jobs());
  const std::string text = to_doc(cfg).to_string();
  const auto dir = output_dir(common, text);
  const ojson j = to_json(res);
  io::write_file(dir / "sweep.csv", comment_block(text) + sweep_csv(res));
  io::write_file(dir / "sweep.json", j.dump(2) + "\n");
  out << sweep_csv(res);
  return 0;
}

inline KeyValueDoc no_spread_defaults() {
  ExperimentConfig c;
  c.replications = 10000;
  KeyValueDoc d = to_doc(c);
  return d;
}

inline int run_no_spread(const KeyValueDoc& raw, const Common& common, std::ostream& out) {
  const ExperimentConfig cfg = experiment_from_doc(raw);
  const std::string text = to_doc(cfg).to_string();
  ojson j = header("no-spread", to_doc(cfg));
  j["rows"] = ojson::array();
  std::uint64_t g = 0;
  for (double raw_lambda : cfg.lambda_grid) {
    const double lambda = resolve_lambda(cfg, raw_lambda);
    for (std::uint64_t n : cfg.n_grid) {
      const NoSpreadEstimate e = estimate_p_no_spread(cfg, n, lambda, g++, common.jobs ? common.jobs : default_jobs());
      j["rows"].push_back({{"n", n},
                           {"lambda", lambda},
                           {"estimate", e.estimate},
                           {"ci_lo", e.ci.lo},
                           {"ci_hi", e.ci.hi},
                           {"trials", e.trials},
                           {"finite_n_analytic", e.finite_n_analytic},
                           {"limit_analytic", e.limit_analytic}});
    }
  }
  io::write_file(output_dir(common, text) / "no_spread.json", j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return 0;
}

inline KeyValueDoc meanfield_defaults() {
  KeyValueDoc d;
  d.set("lambda", "2");
  d.set("s0", "0.999");
  d.set("i0", "0.001");
  d.set("horizon", "50");
  d.set("step", "0.001");
  d.set("stride", "100");
  d.set("xi_spec", "constant:1");
  d.set("rho_spec", "constant:1");
  return d;
}

inline int run_meanfield(const KeyValueDoc& raw, const Common& common, std::ostream& out) {
  const double lambda = dbl(raw, "lambda");
  require_lambda(lambda);
  const DistSpec xi = parse_spec(str(raw, "xi_spec"), Role::recovery);
  const DistSpec rho = parse_spec(str(raw, "rho_spec"), Role::weight);
  meanfield::require_classic(xi, rho);
  meanfield::State init;
  init.s = dbl(raw, "s0");
  init.i = dbl(raw, "i0");
  init.r = 1.0 - init.s - init.i;
  if (init.r < 0 && init.r > -1e-12) init.r = 0;
  const auto traj = meanfield::ode_solve(lambda, init, dbl(raw, "horizon"), dbl(raw, "step"), u64(raw, "stride"));
  const auto fp = meanfield::final_size_fixed_point(lambda, init.s, init.i);
  double drift = 0;
  for (const auto& st : traj) drift = std::max(drift, std::abs(st.s + st.i + st.r - 1.0));

  KeyValueDoc doc = raw;
  doc.set("xi_spec", xi.to_string());
  doc.set("rho_spec", rho.to_string());
  const std::string text = doc.to_string();
  ojson j = header("meanfield", doc);
  const auto& last = traj.back();
  j["terminal"] = {{"t", last.t}, {"s", last.s}, {"i", last.i}, {"r", last.r}};
  j["fixed_point"] = {{"r", fp.value}, {"bracketed", fp.bracketed}};
  j["max_conservation_error"] = drift;
  const auto dir = output_dir(common, text);
  io::write_file(dir / "meanfield.csv", comment_block(text) + meanfield_csv(traj));
  io::write_file(dir / "meanfield.json", j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return 0;
}

inline KeyValueDoc er_defaults() {
  KeyValueDoc d;
  d.set("n", "100000");
  d.set("mu", "2");
  d.set("seed", "1");
  return d;
}

inline int run_er(const KeyValueDoc& raw, const Common& common, std::ostream& out) {
  const std::uint64_t n = u64(raw, "n");
  const double mu = dbl(raw, "mu");
  const std::uint64_t seed = u64(raw, "seed");
  const std::uint64_t giant = er_giant_component(n, mu, seed);
  ojson j = header("er", raw);
  j["largest_component"] = giant;
  j["fraction"] = static_cast<double>(giant) / static_cast<double>(n);
  j["reference_fraction"] = meanfield::final_size_fixed_point(mu, 1.0, 0.0).value;
  io::write_file(output_dir(common, raw.to_string()) / "er.json", j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  return 0;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"SIR epidemics with random recovery rates and edge weights on complete graphs"};
  app.require_subcommand(1, 1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "key = value config file; flags override it");
    sub->add_option("--out-dir", common.out_dir, "output directory (default out/<config-hash>)");
  };

  struct Sub {
    CLI::App* app;
    KeyValueDoc (*defaults)();
    int (*body)(const KeyValueDoc&, const Common&, std::ostream&);
    FlagTable flags;
  };
  std::map<std::string, Sub> subs;

  auto make = [&](const std::string& name, const std::string& help, KeyValueDoc (*defaults)(),
                  int (*body)(const KeyValueDoc&, const Common&, std::ostream&)) -> Sub& {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help);
    s.defaults = defaults;
    s.body = body;
    add_common(s.app);
    return s;
  };

  auto spec_flags = [](Sub& s) {
    s.flags.add(s.app, "--xi", "xi_spec", "recovery-rate law, e.g. constant:1, two_point:1:0.5:2");
    s.flags.add(s.app, "--rho", "rho_spec", "edge-weight law, e.g. uniform:0:1");
  };

  {
    Sub& s = make("simulate", "exact continuous-time run (dynamic engine)", simulate_defaults, run_simulate);
    s.flags.add(s.app, "--n", "n", "vertex count");
    s.flags.add(s.app, "--lambda", "lambda", "infection rate");
    spec_flags(s);
    s.flags.add(s.app, "--seed", "seed", "master seed");
    s.flags.add(s.app, "--method", "method", "direct | thinning");
    s.flags.add(s.app, "--max-events", "max_events", "event cap (0 = 50 n)");
    s.flags.add(s.app, "--trajectory", "trajectory", "true | false: write trajectory.csv");
  }
  {
    Sub& s = make("percolate", "final size through the clock coupling", percolate_defaults, run_percolate);
    s.flags.add(s.app, "--n", "n", "vertex count");
    s.flags.add(s.app, "--lambda", "lambda", "infection rate");
    spec_flags(s);
    s.flags.add(s.app, "--seed", "seed", "master seed");
    s.flags.add(s.app, "--mode", "percolation_mode", "clock | skip");
  }
  auto experiment_flags = [&](Sub& s) {
    s.flags.add(s.app, "--n", "n_grid", "comma-separated vertex counts");
    s.flags.add(s.app, "--lambda", "lambda_grid", "comma-separated infection rates");
    s.flags.add(s.app, "--lambda-units", "lambda_units", "absolute | critical (multiples of lambda_c)");
    spec_flags(s);
    s.flags.add(s.app, "--reps", "replications", "replications per grid point");
    s.flags.add(s.app, "--engine", "engine", "dynamic | percolation");
    s.flags.add(s.app, "--measure", "measure", "annealed | quenched");
    s.flags.add(s.app, "--epsilon", "epsilon", "threshold fraction for P(r_inf/n >= epsilon)");
    s.flags.add(s.app, "--seed", "master_seed", "master seed");
    s.flags.add(s.app, "--confidence", "confidence", "confidence level of intervals");
    s.flags.add(s.app, "--method", "method", "dynamic engine method: direct | thinning");
    s.flags.add(s.app, "--mode", "percolation_mode", "percolation engine mode: clock | skip");
    s.app->add_option("--jobs", common.jobs, "worker threads (default: available parallelism)");
  };
  experiment_flags(make("sweep", "lambda x n grid of batch statistics", sweep_defaults, run_sweep));
  experiment_flags(make("no-spread", "P(r_inf = 1) against its analytic values", no_spread_defaults, run_no_spread));
  {
    Sub& s = make("meanfield", "deterministic limit for xi = rho = 1", meanfield_defaults, run_meanfield);
    s.flags.add(s.app, "--lambda", "lambda", "infection rate");
    s.flags.add(s.app, "--s0", "s0", "initial susceptible fraction");
    s.flags.add(s.app, "--i0", "i0", "initial infective fraction");
    s.flags.add(s.app, "--horizon", "horizon", "integration horizon");
    s.flags.add(s.app, "--step", "step", "RK4 step");
    s.flags.add(s.app, "--stride", "stride", "write every k-th step");
    spec_flags(s);
  }
  {
    Sub& s = make("er", "largest component of G(n, mu/n)", er_defaults, run_er);
    s.flags.add(s.app, "--n", "n", "vertex count");
    s.flags.add(s.app, "--mu", "mu", "mean degree");
    s.flags.add(s.app, "--seed", "seed", "seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  for (auto& [name, s] : subs) {
    if (!s.app->parsed()) continue;
    try {
      const KeyValueDoc doc = merge(s.defaults(), common, s.flags);
      return s.body(doc, common, out);
    } catch (const error& e) {
      err << "error: " << e.what() << "\n";
      return is_validation(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}

}  // namespace sirenv::cli
