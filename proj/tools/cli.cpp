#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fmie/chain.hpp"
#include "fmie/error.hpp"
#include "fmie/experiments.hpp"
#include "fmie/geometry.hpp"
#include "fmie/models.hpp"
#include "fmie/parallel.hpp"

namespace fmie::cli {

namespace {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct GeometryArgs {
  std::string kind = "complete";
  std::string file;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t d = 2;
  double gamma = 2.0;
  double density = 1.0;
  double alpha = 1.0;
  double rate = 1.0;
  std::vector<double> degrees;
  std::optional<std::uint64_t> seed;
  bool standardize = false;
};

void add_geometry_options(CLI::App* app, GeometryArgs& g, bool with_kind_option) {
  if (with_kind_option) {
    app->add_option("--geometry", g.kind,
                    "complete|torus|hamming|small-world|config-model|long-range-torus|"
                    "two-scale-torus|path|cycle|star|file");
  }
  app->add_option("--geometry-file", g.file, "geometry JSON (with --geometry file)");
  app->add_option("--n", g.n, "number of agents");
  app->add_option("--m", g.m, "torus side");
  app->add_option("--d", g.d, "torus or cube dimension");
  app->add_option("--gamma", g.gamma, "power-law exponent");
  app->add_option("--density", g.density, "small-world long-edge density");
  app->add_option("--alpha", g.alpha, "two-scale torus exponent");
  app->add_option("--rate", g.rate, "edge rate for path/cycle/star");
  app->add_option("--degrees", g.degrees, "config-model degree law p_0 p_1 ...")->delimiter(',');
  app->add_flag("--standardize", g.standardize, "rescale so the largest row sum is 1");
}

std::size_t require(std::size_t v, const char* name, const std::string& kind) {
  if (v == 0) throw InvalidArgument("geometry '" + kind + "' needs --" + name);
  return v;
}

Geometry build_geometry(const GeometryArgs& a) {
  const std::string& k = a.kind;
  auto seed = [&] {
    if (!a.seed) throw InvalidArgument("geometry '" + k + "' is random: --seed is required");
    return *a.seed;
  };
  Geometry g = [&]() -> Geometry {
    if (k == "file") {
      if (a.file.empty()) throw InvalidArgument("--geometry file needs --geometry-file");
      return load_geometry(a.file);
    }
    if (k == "complete") return build_complete(require(a.n, "n", k));
    if (k == "torus") return build_torus(require(a.m, "m", k), a.d);
    if (k == "hamming") return build_hamming_cube(a.d);
    if (k == "small-world") {
      return build_small_world(require(a.m, "m", k), a.d, a.gamma, a.density, seed());
    }
    if (k == "config-model") {
      if (a.degrees.empty()) throw InvalidArgument("config-model needs --degrees");
      return build_config_model(a.degrees, require(a.n, "n", k), seed());
    }
    if (k == "long-range-torus") return build_long_range_torus(require(a.m, "m", k), a.d, a.gamma);
    if (k == "two-scale-torus") return build_two_scale_torus(require(a.m, "m", k), a.alpha);
    if (k == "path") return build_path(require(a.n, "n", k), a.rate);
    if (k == "cycle") return build_cycle(require(a.n, "n", k), a.rate);
    if (k == "star") return build_star(require(a.n, "n", k), a.rate);
    throw InvalidArgument("unknown geometry '" + k + "'");
  }();
  if (a.standardize) g = standardize(g).geometry;
  return g;
}

GeometryArgs geometry_args_from_json(const json& node) {
  GeometryArgs a;
  if (node.contains("path")) {
    a.kind = "file";
    a.file = node.at("path").get<std::string>();
  } else {
    a.kind = node.at("builder").get<std::string>();
  }
  auto read = [&](const char* key, auto& field) {
    if (node.contains(key)) field = node.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("n", a.n);
  read("m", a.m);
  read("d", a.d);
  read("gamma", a.gamma);
  read("density", a.density);
  read("alpha", a.alpha);
  read("rate", a.rate);
  read("degrees", a.degrees);
  read("standardize", a.standardize);
  if (node.contains("seed")) a.seed = node.at("seed").get<std::uint64_t>();
  return a;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot write '" + path + "'");
  f << text;
}

std::vector<double> parse_times(const json& node) {
  if (node.is_array()) return node.get<std::vector<double>>();
  const double start = node.value("start", 0.0);
  const double stop = node.at("stop").get<double>();
  const double step = node.at("step").get<double>();
  if (!(step > 0.0)) throw InvalidArgument("sample_times.step must be positive");
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double t = start + step * static_cast<double>(k);
    if (t > stop + 1e-12 * std::max(1.0, std::abs(stop))) break;
    out.push_back(t);
  }
  return out;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(); }

// ---- geometry ------------------------------------------------------------------------

void geometry_inspect(const Geometry& g, bool spectrum, std::ostream& out) {
  const auto rows = g.row_sums();
  const auto [lo, hi] = std::minmax_element(rows.begin(), rows.end());
  json j;
  j["schema"] = kSchemaVersion;
  j["label"] = g.label();
  j["n"] = g.n();
  j["edges"] = g.edges().size();
  j["row_sum_min"] = *lo;
  j["row_sum_max"] = *hi;
  j["total_rate"] = g.total_rate();
  j["connected"] = is_connected(g.n(), g.edges());
  if (spectrum) j["spectral_gap"] = spectral_gap(generator(g));
  out << j.dump(2) << '\n';
}

void geometry_bottleneck(const Geometry& g, std::ostream& out) {
  const auto profile = bottleneck_profile(g);
  out << "n " << g.n() << '\n';
  out << std::setprecision(12);
  out << "kappa " << kappa(g) << '\n';
  out << "m phi kappa_m\n";
  const double n = static_cast<double>(g.n());
  for (const auto& r : profile) {
    const double m = static_cast<double>(r.m);
    out << r.m << ' ' << r.phi << ' ' << n * (n - 1.0) * r.phi / (m * (n - m)) << '\n';
  }
}

// ---- run -----------------------------------------------------------------------------

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<double> horizon;
  std::string trajectory;
  std::string summary;
};

int command_run(const std::string& config_path, const RunOverrides& ov, std::ostream& out) {
  std::ifstream f(config_path);
  if (!f) throw InvalidArgument("cannot read config '" + config_path + "'");
  json cfg;
  try {
    cfg = json::parse(f);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    if (!cfg.contains("geometry")) throw InvalidArgument("config needs a 'geometry' object");
    if (!cfg.contains("rule")) throw InvalidArgument("config needs a 'rule'");
    const std::string rule = cfg.at("rule").get<std::string>();
    const LongRunBehavior behavior = long_run_behavior(rule);

    std::optional<std::uint64_t> seed = ov.seed;
    if (!seed && cfg.contains("seed")) seed = cfg.at("seed").get<std::uint64_t>();
    if (!seed) throw InvalidArgument("a seed is required (config 'seed' or --seed)");
    std::size_t replicas = ov.replicas.value_or(cfg.value("replicas", std::size_t{1}));
    if (replicas < 1) throw InvalidArgument("replicas must be >= 1");

    GeometryArgs ga = geometry_args_from_json(cfg.at("geometry"));
    if (!ga.seed) ga.seed = seed;
    const Geometry g = build_geometry(ga);

    std::vector<double> times;
    if (cfg.contains("sample_times")) times = parse_times(cfg.at("sample_times"));
    double horizon = kForever;
    if (cfg.contains("horizon") && !cfg.at("horizon").is_null()) {
      horizon = cfg.at("horizon").get<double>();
    }
    if (ov.horizon) horizon = *ov.horizon;
    if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be >= 0");
    if (!std::isfinite(horizon) && behavior == LongRunBehavior::Stationary) {
      if (times.empty()) {
        throw InvalidArgument("rule '" + rule + "' never absorbs: give a horizon or sample_times");
      }
      horizon = times.back();
    }

    RuleParams p;
    const json params = cfg.value("params", json::object());
    p.source = params.value("source", AgentId{0});
    p.second = params.value("second", p.source);
    p.k = params.value("k", std::uint32_t{1});
    p.lambda = params.value("lambda", 1.0);
    if (params.contains("x0")) p.x0 = params.at("x0").get<std::vector<double>>();

    const json output = cfg.value("output", json::object());
    const std::string traj_path = !ov.trajectory.empty() ? ov.trajectory
                                                         : output.value("trajectory", std::string());
    const std::string summary_path =
        !ov.summary.empty() ? ov.summary : output.value("summary", std::string());

    std::ostringstream traj;
    const auto sampler = std::make_shared<const MeetingSampler>(g);
    json runs = json::array();
    std::size_t absorbed = 0;
    for (std::size_t r = 0; r < replicas; ++r) {
      EventStream stream(sampler, replica_key(*seed, r), horizon);
      std::ostringstream lines;
      const auto s = trajectory(rule, p, g, stream, times, lines);
      // Tag each record with its replica.
      std::istringstream in(lines.str());
      for (std::string line; std::getline(in, line);) {
        json rec = json::parse(line);
        rec["replica"] = r;
        traj << rec.dump() << '\n';
      }
      absorbed += s.absorbed ? 1 : 0;
      runs.push_back({{"replica", r},
                      {"absorbed", s.absorbed},
                      {"absorption_time", number(s.absorption_time)},
                      {"events", s.events}});
    }
    if (!traj_path.empty()) write_text(traj_path, traj.str(), out);

    json summary;
    summary["schema"] = kSchemaVersion;
    summary["rule"] = rule;
    summary["geometry"] = g.label();
    summary["n"] = g.n();
    summary["seed"] = *seed;
    summary["replicas"] = replicas;
    summary["horizon"] = number(horizon);
    summary["classification"] = std::string(to_string(behavior));
    summary["absorbed_fraction"] = static_cast<double>(absorbed) / static_cast<double>(replicas);
    summary["runs"] = runs;
    write_text(summary_path, summary.dump(2) + "\n", out);
    return kExitOk;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("invalid config: ") + e.what());
  }
}

// ---- suites --------------------------------------------------------------------------

const std::vector<std::string> kSuites{"averaging",     "pandemic-limits", "voter",
                                       "deference-fashionista", "window-profile", "wlln"};

struct SuiteArgs {
  std::string name;
  std::optional<std::uint64_t> seed;
  GeometryArgs geometry;
  std::optional<std::size_t> replicas;
  std::vector<double> times;
  std::vector<double> x0;
  std::optional<double> duality_time;
  std::vector<double> survival_times;
  // pandemic / deference (n comes from the geometry --n)
  std::vector<std::size_t> ks;
  std::size_t fashion_n = 0;
  std::vector<double> lambdas;
  std::optional<std::size_t> fashion_replicas;
  bool no_deference = false;
  bool no_fashionista = false;
  bool torus_scan = false;
  std::optional<bool> limit_tests;
  // window profile
  WindowProfileOptions window;
  // wlln
  double epsilon = 0.1;
  std::optional<double> max_failing;
  std::optional<double> min_failing;
  std::string out;
  std::string csv;
};

SuiteReport run_suite(SuiteArgs& a) {
  const std::string& s = a.name;
  if (std::find(kSuites.begin(), kSuites.end(), s) == kSuites.end()) {
    throw InvalidArgument("unknown suite '" + s + "'");
  }
  if (s == "window-profile") return window_profile_suite(a.window);
  if (!a.seed) throw InvalidArgument("suite '" + s + "' is stochastic: --seed is required");
  const std::uint64_t seed = *a.seed;
  if (!a.geometry.seed) a.geometry.seed = seed;

  if (s == "averaging") {
    AveragingSuiteOptions o;
    o.geometry = build_geometry(a.geometry);
    o.seed = seed;
    if (a.replicas) o.replicas = *a.replicas;
    if (!a.times.empty()) o.times = a.times;
    o.x0 = a.x0;
    o.duality_time = a.duality_time;
    return averaging_suite(o);
  }
  if (s == "pandemic-limits") {
    PandemicLimitOptions o;
    o.seed = seed;
    if (a.geometry.n > 0) o.n = a.geometry.n;
    if (a.replicas) o.replicas = *a.replicas;
    o.limit_tests = a.limit_tests;
    return pandemic_limit_suite(o);
  }
  if (s == "voter") {
    VoterSuiteOptions o;
    o.geometry = build_geometry(a.geometry);
    o.seed = seed;
    if (a.replicas) o.replicas = *a.replicas;
    if (!a.times.empty()) o.times = a.times;
    o.duality_time = a.duality_time;
    if (!a.survival_times.empty()) o.survival_times = a.survival_times;
    return voter_suite(o);
  }
  if (s == "deference-fashionista") {
    DeferenceFashionistaOptions o;
    o.seed = seed;
    if (a.geometry.n > 0) o.n = a.geometry.n;
    if (a.replicas) o.replicas = *a.replicas;
    if (!a.ks.empty()) o.ks = a.ks;
    if (a.fashion_n > 0) o.fashion_n = a.fashion_n;
    if (!a.lambdas.empty()) o.lambdas = a.lambdas;
    if (a.fashion_replicas) o.fashion_replicas = *a.fashion_replicas;
    o.deference = !a.no_deference;
    o.fashionista = !a.no_fashionista;
    o.torus_scan = a.torus_scan;
    return deference_fashionista_suite(o);
  }
  // wlln
  const Geometry g = build_geometry(a.geometry);
  return wlln_suite(g, a.epsilon, a.replicas.value_or(200), seed, a.max_failing, a.min_failing);
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fmie: simulation and exact analytics for FMIE processes", "fmie"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "replica threads (default: FMIE_THREADS or 1)");

  // geometry
  auto* geo = app.add_subcommand("geometry", "build, inspect or measure a geometry");
  geo->require_subcommand(1);
  GeometryArgs build_args;
  std::string build_out;
  std::uint64_t build_seed = 0;
  auto* build = geo->add_subcommand("build", "build a named geometry and write its JSON");
  build->add_option("kind", build_args.kind, "geometry kind")->required();
  add_geometry_options(build, build_args, false);
  auto* build_seed_opt = build->add_option("--seed", build_seed, "seed for random geometries");
  build->add_option("-o,--out", build_out, "output path (default stdout)");

  std::string inspect_path;
  bool inspect_spectrum = false;
  auto* inspect = geo->add_subcommand("inspect", "summarize a geometry file");
  inspect->add_option("path", inspect_path, "geometry JSON")->required();
  inspect->add_flag("--spectrum", inspect_spectrum, "also compute the spectral gap");

  std::string bottleneck_path;
  auto* bneck = geo->add_subcommand("bottleneck", "print kappa and the phi(m) table (n <= 22)");
  bneck->add_option("path", bottleneck_path, "geometry JSON")->required();

  // run
  std::string config_path;
  RunOverrides ov;
  std::uint64_t run_seed = 0;
  std::size_t run_replicas = 0;
  double run_horizon = 0.0;
  auto* run_cmd = app.add_subcommand("run", "run a configured model and write trajectories");
  run_cmd->add_option("config", config_path, "config JSON")->required();
  auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "master seed (overrides config)");
  auto* run_rep_opt = run_cmd->add_option("--replicas", run_replicas, "replica count");
  auto* run_hor_opt = run_cmd->add_option("--horizon", run_horizon, "time horizon");
  run_cmd->add_option("--trajectory", ov.trajectory, "JSONL trajectory path");
  run_cmd->add_option("--summary", ov.summary, "summary JSON path (default stdout)");

  // suite
  SuiteArgs sa;
  std::uint64_t suite_seed = 0;
  std::size_t suite_replicas = 0;
  std::size_t suite_fash_reps = 0;
  double suite_duality = 0.0;
  double max_failing = 0.0;
  double min_failing = 0.0;
  auto* suite = app.add_subcommand("suite", "run a verification suite and write its report");
  suite->add_option("name", sa.name,
                    "averaging|pandemic-limits|voter|deference-fashionista|window-profile|wlln")
      ->required();
  auto* suite_seed_opt = suite->add_option("--seed", suite_seed, "master seed");
  add_geometry_options(suite, sa.geometry, true);
  auto* suite_rep_opt = suite->add_option("--replicas", suite_replicas, "replica count");
  suite->add_option("--times", sa.times, "sample times")->delimiter(',');
  suite->add_option("--x0", sa.x0, "initial averaging configuration")->delimiter(',');
  auto* dual_opt = suite->add_option("--duality-time", suite_duality, "time of duality checks");
  suite->add_option("--survival-times", sa.survival_times)->delimiter(',');
  suite->add_option("--ks", sa.ks, "deference k values")->delimiter(',');
  suite->add_option("--fashion-n", sa.fashion_n, "complete-graph size for Fashionista");
  suite->add_option("--lambdas", sa.lambdas, "Fashionista origination rates")->delimiter(',');
  auto* fash_rep_opt = suite->add_option("--fashion-replicas", suite_fash_reps);
  suite->add_flag("--no-deference", sa.no_deference);
  suite->add_flag("--no-fashionista", sa.no_fashionista);
  suite->add_flag("--torus-scan", sa.torus_scan, "exploratory torus exponent scan");
  bool limit_on = false;
  bool limit_off = false;
  suite->add_flag("--limit-tests", limit_on, "force the pandemic limit-law checks on");
  suite->add_flag("--no-limit-tests", limit_off, "force the pandemic limit-law checks off");
  suite->add_option("--left", sa.window.left);
  suite->add_option("--right", sa.window.right);
  suite->add_option("--step", sa.window.step);
  suite->add_option("--tolerance", sa.window.tolerance);
  suite->add_option("--epsilon", sa.epsilon, "WLLN epsilon");
  auto* maxf_opt = suite->add_option("--max-failing", max_failing);
  auto* minf_opt = suite->add_option("--min-failing", min_failing);
  suite->add_option("-o,--out", sa.out, "report JSON path (default stdout)");
  suite->add_option("--csv", sa.csv, "flat CSV report path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "fmie: " << e.what() << '\n';
    return kExitUsage;
  }
  if (threads > 0) set_default_threads(threads);

  try {
    if (geo->parsed()) {
      if (build->parsed()) {
        if (*build_seed_opt) build_args.seed = build_seed;
        write_text(build_out, to_json(build_geometry(build_args)) + "\n", out);
        return kExitOk;
      }
      if (inspect->parsed()) {
        geometry_inspect(load_geometry(inspect_path), inspect_spectrum, out);
        return kExitOk;
      }
      geometry_bottleneck(load_geometry(bottleneck_path), out);
      return kExitOk;
    }
    if (run_cmd->parsed()) {
      if (*run_seed_opt) ov.seed = run_seed;
      if (*run_rep_opt) ov.replicas = run_replicas;
      if (*run_hor_opt) ov.horizon = run_horizon;
      return command_run(config_path, ov, out);
    }
    // suite
    if (*suite_seed_opt) sa.seed = suite_seed;
    if (*suite_rep_opt) sa.replicas = suite_replicas;
    if (*fash_rep_opt) sa.fashion_replicas = suite_fash_reps;
    if (*dual_opt) sa.duality_time = suite_duality;
    if (*maxf_opt) sa.max_failing = max_failing;
    if (*minf_opt) sa.min_failing = min_failing;
    if (limit_on) sa.limit_tests = true;
    if (limit_off) sa.limit_tests = false;
    const SuiteReport rep = run_suite(sa);
    write_text(sa.out, rep.to_json().dump(2) + "\n", out);
    if (!sa.csv.empty()) {
      std::ostringstream csv;
      rep.write_csv(csv);
      write_text(sa.csv, csv.str(), out);
    }
    return rep.passed() ? kExitOk : kExitCheckFailure;
  } catch (const UnsupportedSize& e) {
    err << "fmie: unsupported size: " << e.what() << '\n';
    return kExitUnsupported;
  } catch (const NumericError& e) {
    err << "fmie: numeric error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kExitNumeric;
  } catch (const InvalidArgument& e) {
    err << "fmie: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace fmie::cli
