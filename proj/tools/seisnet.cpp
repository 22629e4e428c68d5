// seisnet: command-line front end for network reliability and fragility studies.
//
// Exit codes: 0 ok, 1 user error (bad input, refused request), 2 internal error.

#include "seisnet/builtin.hpp"
#include "seisnet/error.hpp"
#include "seisnet/fragility.hpp"
#include "seisnet/io.hpp"
#include "seisnet/reference.hpp"
#include "seisnet/subset_sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace seisnet;
using nlohmann::json;

namespace {

struct UsageError : Error {
  using Error::Error;
};

struct NetworkOptions {
  std::string network;
  std::string ls = "rp";
  std::string agg;
  std::size_t k = 0;
  std::string rp_weights = "sample";
};

void add_network_options(CLI::App* cmd, NetworkOptions& o) {
  cmd->add_option("--network", o.network,
                  "network JSON (default: built-in two-component parallel system)");
  cmd->add_option("--ls", o.ls, "limit state: rp, sp or binary")
      ->check(CLI::IsMember({"rp", "sp", "binary"}));
  cmd->add_option("--agg", o.agg, "single-od, k-terminal or k-out-of-n (default from the file)");
  cmd->add_option("--k", o.k, "k for k-out-of-n");
  cmd->add_option("--rp-weights", o.rp_weights, "rp node weights: sample or marginal")
      ->check(CLI::IsMember({"sample", "marginal"}));
}

NetworkFile load_network(const NetworkOptions& o) {
  if (!o.network.empty()) return load_network_file(o.network);
  Scenario s = two_component_system(SystemKind::parallel);
  return {s.network, s.model, s.spec.terminals, {}};
}

LimitStateSpec make_spec(const NetworkOptions& o, const NetworkFile& file) {
  LimitStateSpec spec;
  spec.kind = parse_limit_state_kind(o.ls);
  spec.rp_weighting = parse_rp_weighting(o.rp_weights);
  if (file.terminals) spec.terminals = *file.terminals;
  spec.od_pairs = file.od_pairs;
  if (!o.agg.empty()) {
    spec.aggregation = parse_aggregation(o.agg);
  } else if (!file.terminals) {
    spec.aggregation = Aggregation::k_out_of_n;
  } else if (file.terminals->origins.size() > 1 || file.terminals->destinations.size() > 1) {
    spec.aggregation = Aggregation::k_terminal;
  } else {
    spec.aggregation = Aggregation::single_od;
  }
  if (spec.aggregation == Aggregation::k_out_of_n) {
    if (o.k == 0) throw UsageError("k-out-of-n needs --k");
    spec.k = o.k;
  }
  spec.validate(file.network);
  return spec;
}

json spec_json(const LimitStateSpec& spec) {
  return {{"kind", to_string(spec.kind)},
          {"aggregation", to_string(spec.aggregation)},
          {"k", spec.k},
          {"rp_weights", to_string(spec.rp_weighting)}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

std::string fmt(double v) { return format_number(v); }

void configure_threads(std::optional<int> threads) {
  if (threads) {
    if (*threads < 1) throw UsageError("--threads must be at least 1");
    omp_set_num_threads(*threads);
    return;
  }
  if (const char* env = std::getenv("SEISNET_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) omp_set_num_threads(n);
  }
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& path) {
  json doc;
  try {
    doc = read_json_file(path);
  } catch (const ValidationError& e) {
    std::cout << "error: " << e.what() << "\n";
    return 1;
  }
  const auto errs = validate_network_json(doc);
  if (!errs.empty()) {
    for (const auto& e : errs) std::cout << "error: " << e << "\n";
    return 1;
  }
  try {
    const NetworkFile f = parse_network_json(doc);
    std::cout << "ok: " << f.network.node_count() << " nodes (" << f.network.random_count()
              << " failure-prone), " << f.network.edge_count() << " edges\n";
  } catch (const Error& e) {
    std::cout << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// ------------------------------------------------------------- reliability

struct ReliabilityOptions {
  NetworkOptions net;
  double mw = 0.0;
  std::size_t reps = 1;
  std::string method = "ss";
  std::optional<std::size_t> n;
  double p0 = 0.1;
  std::size_t max_levels = 20;
  std::uint64_t seed = 1;
  std::string out_csv;
  std::string out_json;
  bool json_stdout = false;
};

int cmd_reliability(const ReliabilityOptions& o) {
  const NetworkFile file = load_network(o.net);
  const LimitStateSpec spec = make_spec(o.net, file);
  if (o.method == "ss" && spec.kind == LimitStateKind::binary) {
    throw UsageError(
        "the binary limit state cannot drive subset simulation: it takes only the values 0 and "
        "1, so every intermediate p0-quantile is degenerate. Use --ls rp|sp or --method mcs.");
  }
  if (o.reps == 0) throw UsageError("--reps must be at least 1");

  const MarginDistribution dist = build_margin_distribution(file.network, file.model, o.mw);
  const LimitStateFactory factory = make_limit_state_factory(file.network, spec, dist);
  const GaussianMap map(dist, o.mw);

  json settings = {{"command", "reliability"},
                   {"network", to_json(file)},
                   {"limit_state", spec_json(spec)},
                   {"mw", o.mw},
                   {"method", o.method},
                   {"reps", o.reps},
                   {"seed", o.seed}};

  json record;
  double p = 0.0;
  double cov = NAN;
  double n_g = 0.0;
  double wall = 0.0;
  std::size_t failed = 0;
  const auto start = std::chrono::steady_clock::now();

  if (o.method == "ss") {
    SsConfig cfg;
    cfg.n = o.n.value_or(1000);
    cfg.p0 = o.p0;
    cfg.max_levels = o.max_levels;
    cfg.seed = o.seed;
    cfg.validate();
    settings["ss"] = {{"n", cfg.n}, {"p0", cfg.p0}, {"t_f", cfg.t_f}, {"max_levels", cfg.max_levels}};
    const LimitStateFn g = factory(o.mw);
    if (o.reps == 1) {
      SsResult r;
      try {
        r = run_ss(g, map, cfg);
      } catch (const NoConvergenceError& e) {
        throw UsageError(std::string(e.what()) + " (raise --max-levels)");
      }
      p = r.p_hat;
      n_g = static_cast<double>(r.n_g);
      wall = r.wall_seconds;
      json levels = json::array();
      for (const auto& l : r.levels) {
        levels.push_back({{"threshold", l.threshold},
                          {"conditional_probability", l.conditional_probability},
                          {"evaluations", l.evaluations},
                          {"acceptance_rate", l.acceptance_rate}});
      }
      record["levels"] = levels;
      record["zero_failures"] = r.zero_failures;
    } else {
      const RepeatSummary s = repeat_ss(g, map, cfg, o.reps);
      p = s.mean_p;
      cov = s.cov;
      n_g = s.mean_n_g;
      wall = s.mean_wall_seconds;
      failed = s.failed_runs;
      record["failed_runs"] = failed;
    }
  } else {
    const std::size_t n = o.n.value_or(1'000'000);
    McsTarget target;
    target.n = n;
    settings["mcs"] = {{"n", n}};
    const LimitStateFn g = factory(o.mw);
    std::vector<double> estimates;
    for (std::size_t r = 0; r < o.reps; ++r) {
      const std::uint64_t seed = o.reps == 1 ? o.seed : repetition_seed(o.seed, r);
      estimates.push_back(crude_mcs(g, map, target, seed).p_hat);
    }
    for (const double e : estimates) p += e;
    p /= static_cast<double>(estimates.size());
    if (estimates.size() > 1) {
      double ss = 0.0;
      for (const double e : estimates) ss += (e - p) * (e - p);
      cov = p > 0.0 ? std::sqrt(ss / static_cast<double>(estimates.size() - 1)) / p : 0.0;
    }
    n_g = static_cast<double>(n);
    wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
           static_cast<double>(o.reps);
  }

  const std::string hash = content_hash(settings);
  record["p_hat"] = p;
  if (o.reps > 1) {
    record["cov"] = cov;
    record["eff"] = cov * std::sqrt(n_g);
  }
  record["N_G"] = n_g;
  record["wall_seconds_per_run"] = wall;
  record["mw"] = o.mw;
  record["limit_state"] = spec_json(spec);
  record["method"] = o.method;
  record["reps"] = o.reps;
  record["seed"] = o.seed;
  record["config_hash"] = hash;

  if (o.json_stdout) {
    std::cout << record.dump(2) << "\n";
  } else {
    std::printf("Mw       %s\n", fmt(o.mw).c_str());
    std::printf("method   %s (%s, %s)\n", o.method.c_str(), to_string(spec.kind).c_str(),
                to_string(spec.aggregation).c_str());
    std::printf("p_hat    %.6e\n", p);
    if (o.reps > 1) {
      std::printf("c.o.v.   %.4f\n", cov);
      std::printf("eff      %.3f\n", cov * std::sqrt(n_g));
    }
    std::printf("N_G      %.1f\n", n_g);
    std::printf("wall     %.4f s/run\n", wall);
    if (failed) std::printf("failed   %zu run(s) hit max_levels (excluded)\n", failed);
  }
  if (!o.out_json.empty()) write_text(o.out_json, record.dump(2) + "\n");
  if (!o.out_csv.empty()) {
    std::ostringstream csv;
    CsvWriter w(csv, {"Mw", "limit_state", "aggregation", "method", "reps", "p_hat", "cov", "N_G",
                      "eff", "seed", "config_hash"});
    w.row({fmt(o.mw), to_string(spec.kind), to_string(spec.aggregation), o.method,
           std::to_string(o.reps), fmt(p), o.reps > 1 ? fmt(cov) : "", fmt(n_g),
           o.reps > 1 ? fmt(cov * std::sqrt(n_g)) : "", std::to_string(o.seed), hash});
    write_text(o.out_csv, csv.str());
  }
  return 0;
}

// --------------------------------------------------------------- fragility

struct FragilityOptions {
  NetworkOptions net;
  std::string grid = "9.0:3.0:0.5";
  std::string intervals;
  std::string damage_states;
  std::size_t reps = 1;
  std::size_t n = 1000;
  double p0 = 0.1;
  std::size_t max_levels = 20;
  std::uint64_t seed = 1;
  std::optional<double> mw_ref;
  std::string out_csv;
  std::string out_json;
};

int cmd_fragility(const FragilityOptions& o) {
  const NetworkFile file = load_network(o.net);
  const LimitStateSpec spec = make_spec(o.net, file);
  if (spec.kind == LimitStateKind::binary) {
    throw UsageError("the binary limit state cannot drive subset simulation; use --ls rp|sp");
  }
  if (o.reps == 0) throw UsageError("--reps must be at least 1");
  const MagnitudeGrid grid = parse_grid(o.grid, o.intervals);
  const double mw_ref = o.mw_ref.value_or(grid.mw_max());

  SsConfig cfg;
  cfg.n = o.n;
  cfg.p0 = o.p0;
  cfg.max_levels = o.max_levels;
  cfg.seed = o.seed;
  cfg.validate();

  std::vector<DamageState> states;
  if (o.damage_states.empty()) {
    states.push_back({"", 0.0, 0.0});
  } else {
    states = parse_damage_states(o.damage_states).states;
  }

  json settings = {{"command", "fragility"},
                   {"network", to_json(file)},
                   {"limit_state", spec_json(spec)},
                   {"grid", {{"mw_max", grid.mw_max()}, {"mw_min", grid.mw_min()}, {"step", grid.step()}}},
                   {"ss", {{"n", cfg.n}, {"p0", cfg.p0}, {"t_f", cfg.t_f}, {"max_levels", cfg.max_levels}}},
                   {"reps", o.reps},
                   {"seed", o.seed},
                   {"mw_ref", mw_ref}};
  settings["grid"]["intervals"] = json::array();
  for (const auto& iv : grid.intervals()) settings["grid"]["intervals"].push_back({iv.hi, iv.lo});
  settings["damage_states"] = json::array();
  for (const auto& d : states) {
    settings["damage_states"].push_back(
        {{"label", d.label}, {"c_median", d.capacity_median}, {"zeta", d.capacity_log_std}});
  }
  const std::string hash = content_hash(settings);

  std::ostringstream csv;
  CsvWriter w(csv, {"damage_state", "Mw", "p_hat", "cov", "N_G_cum", "p_lo", "p_hi", "seed",
                    "config_hash"});
  json diagnostics = {{"config_hash", hash}, {"seed", o.seed}, {"curves", json::array()}};

  for (const DamageState& ds : states) {
    const Network net = ds.label.empty()
                            ? file.network
                            : file.network.with_capacity(ds.capacity_median, ds.capacity_log_std);
    const MarginDistribution dist = build_margin_distribution(net, file.model, mw_ref);
    const LimitStateFactory factory = make_limit_state_factory(net, spec, dist);
    const CurveRunner runner = [&](const SsConfig& c) {
      return run_divided(factory, dist, grid, c);
    };
    std::vector<FragilityCurve> curves;
    if (o.reps == 1) {
      curves.push_back(runner(cfg));
    } else {
      curves = repeat_curves(runner, cfg, o.reps);
    }
    const std::vector<CurveStatistics> stats = curve_statistics(curves);
    std::size_t reevaluations = 0;
    for (const auto& c : curves) reevaluations += c.reevaluations;
    for (const auto& s : stats) {
      w.row({ds.label, fmt(s.mw), fmt(s.mean_p), o.reps > 1 ? fmt(s.cov) : "",
             fmt(s.mean_n_g_cum), fmt(s.p_lo), fmt(s.p_hi), std::to_string(o.seed), hash});
    }
    diagnostics["curves"].push_back(
        {{"damage_state", ds.label},
         {"mean_total_N_G", stats.empty() ? 0.0 : stats.back().mean_n_g_cum},
         {"mean_reevaluations",
          static_cast<double>(reevaluations) / static_cast<double>(curves.size())}});
  }

  if (o.out_csv.empty()) {
    std::cout << csv.str();
  } else {
    write_text(o.out_csv, csv.str());
  }
  if (!o.out_json.empty()) write_text(o.out_json, diagnostics.dump(2) + "\n");
  return 0;
}

// --------------------------------------------------------------------- mcs

struct McsOptions {
  NetworkOptions net;
  double mw = 7.0;
  std::optional<std::size_t> n;
  std::optional<double> target_cov;
  std::size_t cap = 100'000'000;
  std::uint64_t seed = 1;
  bool json_stdout = false;
};

int cmd_mcs(McsOptions o) {
  if (o.net.ls == "rp" && o.net.agg.empty() && o.net.network.empty()) o.net.ls = "binary";
  const NetworkFile file = load_network(o.net);
  const LimitStateSpec spec = make_spec(o.net, file);
  const MarginDistribution dist = build_margin_distribution(file.network, file.model, o.mw);
  const GaussianMap map(dist, o.mw);
  McsTarget target;
  target.cap = o.cap;
  if (o.n) {
    target.n = *o.n;
  } else if (o.target_cov) {
    target.cov = *o.target_cov;
  } else {
    target.n = 1'000'000;
  }
  const McsResult r = crude_mcs(make_limit_state_factory(file.network, spec, dist)(o.mw), map,
                                target, o.seed);
  json record = {{"mw", o.mw},         {"p_hat", r.p_hat},
                 {"n", r.n_used},      {"failures", r.failures},
                 {"standard_error", r.standard_error},
                 {"cov", r.cov()},     {"cap_reached", r.cap_reached},
                 {"seed", o.seed}};
  if (o.json_stdout) {
    std::cout << record.dump(2) << "\n";
  } else {
    std::printf("Mw        %s\n", fmt(o.mw).c_str());
    std::printf("p_hat     %.6e\n", r.p_hat);
    std::printf("n         %zu\n", r.n_used);
    std::printf("failures  %zu\n", r.failures);
    std::printf("s.e.      %.6e\n", r.standard_error);
    std::printf("c.o.v.    %.6f\n", r.cov());
    if (r.cap_reached) std::printf("note      target c.o.v. not reached within the cap\n");
  }
  return 0;
}

// ------------------------------------------------------------------ oracle

struct OracleOptions {
  std::string system = "parallel";
  bool example_system = false;
  std::vector<double> mw;
  std::vector<double> beta;
  std::optional<double> rho;
};

int cmd_oracle(const OracleOptions& o) {
  const SystemKind kind = o.system == "series" ? SystemKind::series : SystemKind::parallel;
  if (!o.beta.empty() || o.rho) {
    if (o.beta.size() != 2 || !o.rho) throw UsageError("--beta needs two values and --rho");
    const double p = exact_two_component({kind, o.beta[0], o.beta[1], *o.rho});
    std::printf("%.10g\n", p);
    return 0;
  }
  if (o.mw.empty()) throw UsageError("give --mw (example system) or --beta/--rho");
  for (const double mw : o.mw) {
    const TwoComponentSystem sys = two_component_reliability(kind, mw);
    std::printf("Mw %-4s beta1 %.6f beta2 %.6f rho %.6f  Pf %.6e\n", fmt(mw).c_str(), sys.beta1,
                sys.beta2, sys.rho, exact_two_component(sys));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seismic reliability and fragility of lifeline networks"};
  app.require_subcommand(1);
  std::optional<int> threads;
  app.add_option("--threads", threads, "worker threads (default: SEISNET_THREADS or all cores)");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a network JSON file");
  validate->add_option("file", validate_path, "network JSON")->required();

  ReliabilityOptions rel;
  auto* reliability = app.add_subcommand("reliability", "failure probability at one magnitude");
  add_network_options(reliability, rel.net);
  reliability->add_option("--mw", rel.mw, "moment magnitude")->required();
  reliability->add_option("--reps", rel.reps, "independent repetitions");
  reliability->add_option("--method", rel.method, "ss or mcs")
      ->check(CLI::IsMember({"ss", "mcs"}));
  reliability->add_option("--n", rel.n, "samples per level (ss) or total samples (mcs)");
  reliability->add_option("--p0", rel.p0, "conditional level probability");
  reliability->add_option("--max-levels", rel.max_levels, "level cap for ss");
  reliability->add_option("--seed", rel.seed, "master seed");
  reliability->add_option("--out-csv", rel.out_csv, "write a CSV record");
  reliability->add_option("--out-json", rel.out_json, "write a JSON record");
  reliability->add_flag("--json", rel.json_stdout, "print the JSON record instead of text");

  FragilityOptions fra;
  auto* fragility = app.add_subcommand("fragility", "fragility curve over a magnitude grid");
  add_network_options(fragility, fra.net);
  fragility->add_option("--grid", fra.grid, "Mw_max:Mw_min:step");
  fragility->add_option("--intervals", fra.intervals,
                        "divided run, e.g. 9.0:7.0,7.0:5.0,5.0:3.0, or one-span");
  fragility->add_option("--damage-states", fra.damage_states,
                        "hazus-4 or label=median:zeta,...");
  fragility->add_option("--reps", fra.reps, "independent repetitions");
  fragility->add_option("--n", fra.n, "samples per level");
  fragility->add_option("--p0", fra.p0, "conditional level probability");
  fragility->add_option("--max-levels", fra.max_levels, "level cap per grid step");
  fragility->add_option("--seed", fra.seed, "master seed");
  fragility->add_option("--mw-ref", fra.mw_ref, "magnitude of the sampling distribution");
  fragility->add_option("--out-csv", fra.out_csv, "curve CSV (default: stdout)");
  fragility->add_option("--out-json", fra.out_json, "diagnostics JSON");

  McsOptions mcs;
  auto* mcs_cmd = app.add_subcommand("mcs", "crude Monte Carlo reference");
  add_network_options(mcs_cmd, mcs.net);
  mcs_cmd->add_option("--mw", mcs.mw, "moment magnitude");
  auto* mcs_n = mcs_cmd->add_option("--n", mcs.n, "sample size");
  mcs_cmd->add_option("--target-cov", mcs.target_cov, "stop once the c.o.v. is reached")
      ->excludes(mcs_n);
  mcs_cmd->add_option("--cap", mcs.cap, "sample cap for --target-cov");
  mcs_cmd->add_option("--seed", mcs.seed, "seed");
  mcs_cmd->add_flag("--json", mcs.json_stdout, "print JSON");

  OracleOptions ora;
  auto* oracle = app.add_subcommand("oracle", "exact two-component probabilities");
  oracle->add_option("--system", ora.system, "parallel or series")
      ->check(CLI::IsMember({"parallel", "series"}));
  oracle->add_flag("--example-system,--appendix-a", ora.example_system,
                   "use the built-in two-component geometry (default when --mw is given)");
  oracle->add_option("--mw", ora.mw, "one or more magnitudes")->expected(1, -1);
  oracle->add_option("--beta", ora.beta, "two reliability indices")->expected(2);
  oracle->add_option("--rho", ora.rho, "correlation of the two margins");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    configure_threads(threads);
    if (*validate) return cmd_validate(validate_path);
    if (*reliability) return cmd_reliability(rel);
    if (*fragility) return cmd_fragility(fra);
    if (*mcs_cmd) return cmd_mcs(mcs);
    if (*oracle) return cmd_oracle(ora);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
