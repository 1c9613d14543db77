// stochmatch command-line front end. Talks to the library only through the C
// interface in include/stochmatch/stochmatch.h.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spdlog/sinks/stdout_color_sinks.h"
#include "spdlog/spdlog.h"
#include "stochmatch/stochmatch.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitCheckFailed = 2;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(sm_status s, const char* what) {
  if (s != SM_OK) throw CliError(std::string(what) + ": " + sm_last_error());
}

std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

nlohmann::ordered_json jnum(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(num(x));
}

// Takes ownership of a string returned by the library.
std::string take(char* s) {
  std::string out = s ? s : "";
  sm_string_free(s);
  return out;
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using InstancePtr = std::unique_ptr<sm_instance, Deleter<sm_instance, sm_instance_free>>;
using GainPtr = std::unique_ptr<sm_gain, Deleter<sm_gain, sm_gain_free>>;

struct Common {
  std::optional<std::uint64_t> seed;
  std::uint64_t trials = 10000;
  std::string out;
  std::string format = "json";
  int jobs = 0;

  sm_format fmt() const { return format == "csv" ? SM_FORMAT_CSV : SM_FORMAT_JSON; }
  std::uint64_t need_seed(const char* command) const {
    if (!seed) throw CliError(std::string(command) + " is stochastic and needs an explicit --seed");
    return *seed;
  }
};

struct Source {
  std::string path;
  std::string gen;
  int k = 4;
  double p = 0.5;
  int m = 4;
  int n = 6;
  double density = 0.5;
  double p_low = 0.1;
  double p_high = 0.5;
};

void add_common(CLI::App* app, Common& c, bool stochastic, bool trials) {
  if (stochastic) app->add_option("--seed", c.seed, "random seed");
  if (trials) app->add_option("--trials", c.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output path (stdout when absent)");
  app->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--jobs", c.jobs, "worker threads (default: logical cores)")->check(CLI::NonNegativeNumber);
}

void add_source(CLI::App* app, Source& s) {
  auto* file = app->add_option("--instance", s.path, "instance JSON file")->check(CLI::ExistingFile);
  auto* gen = app->add_option("--gen", s.gen, "generator")->check(CLI::IsMember({"upper-triangular", "random"}));
  file->excludes(gen);
  app->add_option("--k", s.k, "upper-triangular size");
  app->add_option("--p", s.p, "upper-triangular edge probability");
  app->add_option("--m", s.m, "random: offline vertices");
  app->add_option("--n", s.n, "random: online vertices");
  app->add_option("--density", s.density, "random: edge density");
  app->add_option("--p-low", s.p_low, "random: smallest edge probability");
  app->add_option("--p-high", s.p_high, "random: largest edge probability");
}

InstancePtr load(const Source& s, const Common& c) {
  sm_instance* inst = nullptr;
  if (!s.path.empty()) {
    check(sm_instance_read(s.path.c_str(), &inst), "reading instance");
  } else if (s.gen == "upper-triangular") {
    check(sm_instance_gen_upper_triangular(s.k, s.p, &inst), "generating instance");
  } else if (s.gen == "random") {
    check(sm_instance_gen_random(s.m, s.n, s.density, s.p_low, s.p_high, c.need_seed("--gen random"), &inst),
          "generating instance");
  } else {
    throw CliError("an instance is required: --instance FILE or --gen upper-triangular|random");
  }
  spdlog::info("instance with m={} n={} edges={}", sm_instance_num_offline(inst), sm_instance_num_online(inst),
               sm_instance_num_edges(inst));
  return InstancePtr(inst);
}

int jobs_of(const Common& c) { return c.jobs > 0 ? c.jobs : sm_default_jobs(); }

sm_algorithm parse_alg(const std::string& name) {
  sm_algorithm alg;
  check(sm_algorithm_parse(name.c_str(), &alg), "algorithm");
  return alg;
}

// Artifacts go to --out (followed by the manifest) or to stdout.
class Output {
 public:
  Output(const Common& c, const std::vector<std::string>& argv, std::string command)
      : common_(c), argv_(argv), command_(std::move(command)) {}

  void artifact(const std::string& text) {
    if (common_.out.empty()) {
      std::cout << text;
      if (!text.empty() && text.back() != '\n') std::cout << '\n';
      return;
    }
    write_file(common_.out, text);
    nlohmann::ordered_json m;
    m["tool"] = "stochmatch";
    m["version"] = sm_version();
    m["command"] = command_;
    m["argv"] = argv_;
    m["seed"] = common_.seed ? nlohmann::ordered_json(*common_.seed) : nlohmann::ordered_json(nullptr);
    m["config"] = config;
    write_file(common_.out + ".manifest.json", m.dump(2) + "\n");
    spdlog::info("wrote {} and its manifest", common_.out);
  }

  nlohmann::ordered_json config;

 private:
  static void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CliError("cannot write " + path);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
    if (!f) throw CliError("cannot write " + path);
  }

  const Common& common_;
  std::vector<std::string> argv_;
  std::string command_;
};

// Summary lines for humans: stdout when the artifact goes to a file, stderr
// otherwise so that stdout stays machine-readable.
std::ostream& summary(const Common& c) { return c.out.empty() ? std::cerr : std::cout; }

nlohmann::ordered_json source_config(const Source& s) {
  nlohmann::ordered_json j;
  if (!s.path.empty()) {
    j["instance"] = s.path;
  } else if (s.gen == "upper-triangular") {
    j["gen"] = s.gen;
    j["k"] = s.k;
    j["p"] = s.p;
  } else {
    j["gen"] = s.gen;
    j["m"] = s.m;
    j["n"] = s.n;
    j["density"] = s.density;
    j["p_low"] = s.p_low;
    j["p_high"] = s.p_high;
  }
  return j;
}

int cmd_gen(const Source& s, const Common& c, Output& out) {
  InstancePtr inst = load(s, c);
  out.config = source_config(s);
  if (c.fmt() == SM_FORMAT_JSON) {
    char* text = nullptr;
    check(sm_instance_to_json(inst.get(), &text), "exporting instance");
    out.artifact(take(text));
    return kExitOk;
  }
  std::string csv = "u,v,p\n";
  const int m = sm_instance_num_offline(inst.get());
  const int n = sm_instance_num_online(inst.get());
  for (int u = 0; u < m; ++u) {
    for (int v = 0; v < n; ++v) {
      double p = 0.0;
      check(sm_instance_prob(inst.get(), u, v, &p), "reading instance");
      if (p > 0.0) csv += std::to_string(u) + ',' + std::to_string(v) + ',' + num(p) + '\n';
    }
  }
  out.artifact(csv);
  return kExitOk;
}

int cmd_run(const Source& s, const Common& c, const std::string& alg_name, Output& out) {
  InstancePtr inst = load(s, c);
  const sm_algorithm alg = parse_alg(alg_name);
  const std::uint64_t seed = c.need_seed("run");
  out.config = source_config(s);
  out.config["algorithm"] = alg_name;
  sm_trace* trace = nullptr;
  check(sm_run(inst.get(), alg, seed, nullptr, &trace), "running algorithm");
  char* text = nullptr;
  const sm_status st = sm_trace_export(trace, c.fmt(), &text);
  const double value = sm_trace_value(trace);
  sm_trace_free(trace);
  check(st, "exporting trace");
  out.artifact(take(text));
  summary(c) << sm_algorithm_name(alg) << " value " << num(value) << '\n';
  return kExitOk;
}

int cmd_bench(const Source& s, const Common& c, const std::vector<std::string>& algs, bool no_exact,
              Output& out) {
  InstancePtr inst = load(s, c);
  std::vector<sm_algorithm> list;
  for (const auto& a : algs) list.push_back(parse_alg(a));
  sm_bench_options o;
  sm_bench_options_init(&o);
  o.algorithms = list.empty() ? nullptr : list.data();
  o.num_algorithms = list.size();
  o.trials = c.trials;
  o.seed = c.need_seed("bench");
  o.jobs = jobs_of(c);
  o.prefer_exact = no_exact ? 0 : 1;
  out.config = source_config(s);
  out.config["algorithms"] = algs;
  out.config["trials"] = c.trials;
  out.config["exact"] = !no_exact;
  sm_bench_report* report = nullptr;
  check(sm_bench(inst.get(), &o, &report), "bench");
  char* text = nullptr;
  const sm_status st = sm_bench_report_export(report, c.fmt(), &text);
  double lp = 0.0;
  sm_bench_report_get(report, "matching_lp", &lp, nullptr);
  sm_bench_report_free(report);
  check(st, "exporting report");
  out.artifact(take(text));
  summary(c) << "matching_lp " << num(lp) << '\n';
  return kExitOk;
}

int cmd_duals(const Source& s, const Common& c, const std::string& alg_name, std::string gain,
              const std::string& check_name, std::optional<double> gamma, Output& out) {
  InstancePtr inst = load(s, c);
  const sm_algorithm alg = parse_alg(alg_name);
  const bool reduced = check_name == "reduced";
  if (gain.empty()) {
    if (alg == SM_ALG_RANKING) {
      gain = reduced ? "ranking-stochastic" : "ranking";
    } else {
      gain = "balance-equal";
    }
  }
  sm_gain* g = nullptr;
  if (gain == "ranking") {
    sm_ranking_constant rc;
    check(sm_solve_ranking_constant(&rc), "solving the Ranking constant");
    check(sm_gain_ranking(rc.c, &g), "gain function");
    if (!gamma) gamma = 0.572;
  } else if (gain == "ranking-stochastic") {
    check(sm_gain_ranking_stochastic(&g), "gain function");
    if (!gamma) gamma = 1.0 - std::exp(-1.0);
  } else {
    check(sm_gain_balance_equal(&g), "gain function");
    if (!gamma) gamma = sm_balance_equal_gamma();
  }
  GainPtr gp(g);
  out.config = source_config(s);
  out.config["algorithm"] = alg_name;
  out.config["gain"] = gain;
  out.config["check"] = check_name;
  out.config["gamma"] = *gamma;
  out.config["trials"] = c.trials;
  sm_duals* duals = nullptr;
  check(sm_estimate_duals(inst.get(), alg, g, c.trials, c.need_seed("duals"), jobs_of(c), &duals),
        "estimating duals");
  sm_feasibility_report* report = nullptr;
  const sm_status st = sm_check_feasibility(inst.get(), duals, reduced ? SM_CHECK_REDUCED : SM_CHECK_CONFIG,
                                            *gamma, &report);
  sm_duals_free(duals);
  check(st, "feasibility check");
  char* text = nullptr;
  const sm_status ex = sm_feasibility_export(report, c.fmt(), &text);
  const int violations = sm_feasibility_violations(report);
  const int inconclusive = sm_feasibility_inconclusive(report);
  const double worst = sm_feasibility_worst_ratio(report);
  sm_feasibility_report_free(report);
  check(ex, "exporting report");
  out.artifact(take(text));
  summary(c) << check_name << " feasibility at gamma " << num(*gamma) << ": violations " << violations
             << ", inconclusive " << inconclusive << ", worst ratio " << num(worst) << '\n';
  if (violations > 0) {
    spdlog::error("{} pairs violate the condition beyond 3 stderr", violations);
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_solve_ranking(const Common& c, Output& out) {
  sm_ranking_constant rc;
  check(sm_solve_ranking_constant(&rc), "solving the Ranking constant");
  std::cout << "c " << num(rc.c) << "\ngamma " << num(rc.gamma) << "\nmu_low " << num(rc.mu_low)
            << "\nresidual " << num(rc.residual) << '\n';
  if (!c.out.empty()) {
    sm_gain* g = nullptr;
    check(sm_gain_ranking(rc.c, &g), "gain function");
    GainPtr gp(g);
    char* text = nullptr;
    check(sm_gain_to_json(g, rc.gamma, &text), "exporting gain function");
    out.artifact(take(text));
  }
  return kExitOk;
}

int cmd_balance_equal(const Common& c, int grid, Output& out) {
  const double gamma = sm_balance_equal_gamma();
  double residual = 0.0;
  check(sm_verify_balance_equal_ode(grid, &residual), "verifying the ODE");
  std::cout << "gamma " << num(gamma) << "\node_residual " << num(residual) << '\n';
  out.config["grid"] = grid;
  if (!c.out.empty()) {
    sm_gain* g = nullptr;
    check(sm_gain_balance_equal(&g), "gain function");
    GainPtr gp(g);
    char* text = nullptr;
    check(sm_gain_to_json(g, gamma, &text), "exporting gain function");
    out.artifact(take(text));
  }
  return residual <= 1e-6 ? kExitOk : kExitCheckFailed;
}

int cmd_balance_general(const Common& c, double step, double lmax, int rounds, Output& out) {
  out.config["step"] = step;
  out.config["lmax"] = lmax;
  out.config["rounds"] = rounds;
  sm_altopt* state = nullptr;
  check(sm_alternate_optimize(step, lmax, rounds, &state), "alternating optimization");
  std::unique_ptr<sm_altopt, Deleter<sm_altopt, sm_altopt_free>> guard(state);
  for (int r = 0; r < sm_altopt_rounds(state); ++r) {
    double g = 0.0;
    check(sm_altopt_round_gamma(state, r, &g), "round gamma");
    std::cout << "round " << r + 1 << " gamma " << num(g) << '\n';
  }
  const double min_slack = sm_altopt_min_slack(state);
  std::cout << "gamma " << num(sm_altopt_gamma(state)) << "\nmin_slack " << num(min_slack)
            << "\nmax_duality_gap " << num(sm_altopt_max_duality_gap(state)) << '\n';
  if (!c.out.empty()) {
    char* text = nullptr;
    check(sm_altopt_export(state, c.fmt(), &text), "exporting certificate");
    out.artifact(take(text));
  }
  if (min_slack < -1e-8) {
    spdlog::error("certificate check failed: min slack {}", num(min_slack));
    return kExitCheckFailed;
  }
  return kExitOk;
}

struct CheckRow {
  std::string name;
  double value;
  double threshold;
  bool pass;
};

int emit_rows(const std::vector<CheckRow>& rows, const std::string& label, const Common& c, Output& out) {
  bool ok = true;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  std::string csv = "check," + label + ",threshold,pass\n";
  for (const CheckRow& r : rows) {
    ok = ok && r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ' ' << num(r.value) << " (" << label << ' '
              << num(r.threshold) << ")\n";
    nlohmann::ordered_json j;
    j["check"] = r.name;
    j[label] = jnum(r.value);
    j["threshold"] = jnum(r.threshold);
    j["pass"] = r.pass;
    arr.push_back(std::move(j));
    csv += r.name + ',' + num(r.value) + ',' + num(r.threshold) + ',' + (r.pass ? "1" : "0") + '\n';
  }
  if (!c.out.empty()) out.artifact(c.fmt() == SM_FORMAT_CSV ? csv : arr.dump(2));
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_verify(const Common& c, int res, Output& out) {
  out.config["res"] = res;
  std::vector<CheckRow> rows;
  sm_ranking_constant rc;
  check(sm_solve_ranking_constant(&rc), "solving the Ranking constant");
  rows.push_back({"ranking_gamma", rc.gamma, 0.572, rc.gamma >= 0.572});
  double fmin = 0.0;
  check(sm_ranking_final_inequality_min(200, rc.c, &fmin), "final inequality");
  rows.push_back({"ranking_final_inequality_min", fmin, 0.572, fmin >= 0.572});
  double star_dev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    double s = 0.0;
    check(sm_star_constant(i / 100.0, &s), "star constant");
    star_dev = std::max(star_dev, std::fabs(s - (1.0 - std::exp(-1.0))));
  }
  rows.push_back({"star_constant_max_deviation", star_dev, 1e-12, star_dev <= 1e-12});
  double ode = 0.0;
  check(sm_verify_balance_equal_ode(1000, &ode), "verifying the ODE");
  rows.push_back({"balance_equal_ode_residual", ode, 1e-6, ode <= 1e-6});
  for (int n = 1; n <= 3; ++n) {
    for (double mu0 : {0.0, 0.2}) {
      sm_brute_min b;
      check(sm_brute_min_f(n, res, mu0, rc.c, jobs_of(c), &b, nullptr), "brute-force minimum");
      const std::string tag = "n" + std::to_string(n) + "_mu0_" + num(mu0);
      rows.push_back({"brute_min_" + tag, b.min_value, 0.572 - b.slack, b.min_value >= 0.572 - b.slack});
      rows.push_back({"brute_min_all_equal_" + tag, static_cast<double>(b.all_equal), 1.0, b.all_equal != 0});
    }
  }
  return emit_rows(rows, "value", c, out);
}

int cmd_reproduce(const Common& c, double step, double lmax, int rounds, Output& out) {
  out.config["step"] = step;
  out.config["lmax"] = lmax;
  out.config["rounds"] = rounds;
  sm_ranking_constant rc;
  check(sm_solve_ranking_constant(&rc), "solving the Ranking constant");
  sm_altopt* state = nullptr;
  check(sm_alternate_optimize(step, lmax, rounds, &state), "alternating optimization");
  const double general = sm_altopt_gamma(state);
  const double slack = sm_altopt_min_slack(state);
  sm_altopt_free(state);
  double star = 0.0;
  check(sm_star_constant(0.5, &star), "star constant");
  // Published values are rounded; the 0.001 tolerance is the discretization
  // allowance of the factor-revealing LP.
  const struct {
    const char* name;
    double published;
    double computed;
  } table[] = {
      {"ranking_vs_opt", 0.572, rc.gamma},
      {"balance_equal_vs_opt", 0.613, sm_balance_equal_gamma()},
      {"balance_general_vs_opt", 0.611, general},
      {"ranking_vs_s_opt", 0.632, star},
  };
  std::vector<CheckRow> rows;
  for (const auto& t : table) rows.push_back({t.name, t.computed, t.published, t.computed >= t.published - 1e-3});
  rows.push_back({"balance_general_certificate_min_slack", slack, -1e-8, slack >= -1e-8});
  return emit_rows(rows, "computed", c, out);
}

int cmd_replay(const std::string& manifest, const std::string& out_override, std::vector<std::string>& argv) {
  std::ifstream f(manifest);
  if (!f) throw CliError("cannot read " + manifest);
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(f);
    argv = m.at("argv").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CliError("bad manifest " + manifest + ": " + e.what());
  }
  if (!argv.empty() && argv.front() == "replay") throw CliError("a manifest cannot replay another manifest");
  if (!out_override.empty()) {
    bool found = false;
    for (std::size_t i = 0; i < argv.size(); ++i) {
      if (argv[i] == "--out" && i + 1 < argv.size()) {
        argv[i + 1] = out_override;
        found = true;
      } else if (argv[i].rfind("--out=", 0) == 0) {
        argv[i] = "--out=" + out_override;
        found = true;
      }
    }
    if (!found) {
      argv.push_back("--out");
      argv.push_back(out_override);
    }
  }
  return 0;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("stochmatch");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("stochmatch: %l: %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("STOCHMATCH_LOG")) {
    const std::string level = env;
    if (level == "error" || level == "warn" || level == "info" || level == "debug") {
      spdlog::set_level(spdlog::level::from_str(level));
    } else {
      spdlog::warn("ignoring STOCHMATCH_LOG={}; expected error, warn, info or debug", level);
    }
  }
}

int run(std::vector<std::string> args, int depth = 0) {
  CLI::App app{"Online matching with stochastic rewards: simulation, benchmarks and certificates", "stochmatch"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sm_version()));

  Common common;
  Source source;
  std::string alg = "ranking";
  std::vector<std::string> algs;
  bool no_exact = false;
  std::string gain;
  std::string check_name = "config";
  std::optional<double> gamma;
  int grid = 1000;
  double step = 0.005;
  double lmax = 6.0;
  int rounds = 3;
  int res = 21;
  std::string manifest;
  std::string replay_out;

  auto* gen = app.add_subcommand("gen", "generate an instance file");
  add_source(gen, source);
  add_common(gen, common, true, false);

  auto* run_cmd = app.add_subcommand("run", "run one algorithm on one random draw and export the trace");
  add_source(run_cmd, source);
  add_common(run_cmd, common, true, false);
  run_cmd->add_option("--alg", alg, "ranking, balance_equal, greedy or balance_fractional");

  auto* bench = app.add_subcommand("bench", "benchmarks and algorithm values");
  add_source(bench, source);
  add_common(bench, common, true, true);
  bench->add_option("--alg", algs, "algorithms (default: all applicable)");
  bench->add_flag("--no-exact", no_exact, "always use Monte Carlo");

  auto* duals = app.add_subcommand("duals", "estimate duals and check approximate feasibility");
  add_source(duals, source);
  add_common(duals, common, true, true);
  duals->add_option("--alg", alg, "algorithm whose duals are estimated");
  duals->add_option("--gain", gain, "gain function")
      ->check(CLI::IsMember({"ranking", "ranking-stochastic", "balance-equal"}));
  duals->add_option("--check", check_name, "config or reduced")->check(CLI::IsMember({"config", "reduced"}));
  duals->add_option("--gamma", gamma, "target ratio");

  auto* gain_cmd = app.add_subcommand("gain", "gain functions and their constants");
  gain_cmd->require_subcommand(1);
  auto* solve = gain_cmd->add_subcommand("solve-ranking", "solve for c, Gamma and mu_low");
  add_common(solve, common, false, false);
  auto* beq = gain_cmd->add_subcommand("balance-equal", "closed form and ODE residual");
  add_common(beq, common, false, false);
  beq->add_option("--grid", grid, "grid points for the residual")->check(CLI::PositiveNumber);
  auto* bgen = gain_cmd->add_subcommand("balance-general", "alternating factor-revealing LP");
  add_common(bgen, common, false, false);
  bgen->add_option("--step", step, "grid step")->check(CLI::PositiveNumber);
  bgen->add_option("--lmax", lmax, "grid end")->check(CLI::PositiveNumber);
  bgen->add_option("--rounds", rounds, "rounds")->check(CLI::PositiveNumber);
  auto* verify = gain_cmd->add_subcommand("verify", "grid checks of the constant-deriving inequalities");
  add_common(verify, common, false, false);
  verify->add_option("--res", res, "points of the brute-force grid")->check(CLI::Range(2, 401));

  auto* repro = app.add_subcommand("reproduce", "reproduce published constants");
  repro->require_subcommand(1);
  auto* table1 = repro->add_subcommand("table1-constants", "compare computed constants with the published ones");
  add_common(table1, common, false, false);
  table1->add_option("--step", step, "grid step of the general-p LP")->check(CLI::PositiveNumber);
  table1->add_option("--lmax", lmax, "grid end")->check(CLI::PositiveNumber);
  table1->add_option("--rounds", rounds, "rounds")->check(CLI::PositiveNumber);

  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("manifest", manifest, "manifest file")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", replay_out, "write to this path instead of the recorded one");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (replay->parsed()) {
    if (depth > 0) throw CliError("nested replay");
    std::vector<std::string> recorded;
    cmd_replay(manifest, replay_out, recorded);
    return run(recorded, depth + 1);
  }

  std::string command;
  for (const CLI::App* sub = &app; !sub->get_subcommands().empty();) {
    sub = sub->get_subcommands().front();
    command += (command.empty() ? "" : " ") + sub->get_name();
  }
  spdlog::debug("command: {}", command);
  Output out(common, args, command);

  if (gen->parsed()) return cmd_gen(source, common, out);
  if (run_cmd->parsed()) return cmd_run(source, common, alg, out);
  if (bench->parsed()) return cmd_bench(source, common, algs, no_exact, out);
  if (duals->parsed()) return cmd_duals(source, common, alg, gain, check_name, gamma, out);
  if (solve->parsed()) return cmd_solve_ranking(common, out);
  if (beq->parsed()) return cmd_balance_equal(common, grid, out);
  if (bgen->parsed()) return cmd_balance_general(common, step, lmax, rounds, out);
  if (verify->parsed()) return cmd_verify(common, res, out);
  if (table1->parsed()) return cmd_reproduce(common, step, lmax, rounds, out);
  return kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  try {
    return run(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const CliError& e) {
    spdlog::error("{}", e.what());
    return kExitInvalid;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitInvalid;
  }
}
