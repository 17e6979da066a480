#pragma once

// Command-line front end. Needs the vendored CLI11.hpp and json.hpp on the
// include path.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dantzig_kit/asymptotics.hpp"
#include "dantzig_kit/csv.hpp"
#include "dantzig_kit/dantzig.hpp"
#include "dantzig_kit/kkt.hpp"
#include "dantzig_kit/lasso.hpp"
#include "dantzig_kit/uniqueness.hpp"

#ifndef DANTZIG_KIT_VERSION
#define DANTZIG_KIT_VERSION "0.0.0"
#endif

namespace dantzig_kit::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitParse = 2,
  kExitNumerical = 3,
  kExitRefused = 4,
  kExitInvalidConfig = 5,
};

inline constexpr const char* kSchema = "dantzig-kit/1";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Refused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// JSON encoding. Index sets are written 1-based.

inline json to_json(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(to_json(m.row(i)));
  return rows;
}

inline json to_json(const IndexSet& s) {
  json out = json::array();
  for (std::size_t i : s) out.push_back(i + 1);
  return out;
}

inline json to_json(const ParallelismWitness& w) {
  return {{"A", to_json(w.a)}, {"B", to_json(w.b)}, {"w", to_json(w.w)}, {"s", w.s}};
}

inline json to_json(const ParallelismReport& r) {
  json wit = json::array();
  for (const auto& w : r.witnesses) wit.push_back(to_json(w));
  return {{"parallel", r.parallel},
          {"witnesses", wit},
          {"pairs_examined", r.pairs_examined},
          {"p_cap_respected", r.p_cap_respected}};
}

inline json to_json(const CoordinateSummary& s) {
  return {{"mean", s.mean},
          {"sd", s.sd},
          {"quantile_levels", kSummaryLevels},
          {"quantiles", s.quantiles},
          {"atom_mass", s.atom_mass}};
}

inline std::string witness_text(const ParallelismWitness& w) { return to_json(w).dump(); }

// ---------------------------------------------------------------------------
// Settings resolution: explicit flag, then config file, then default.

struct ConfigFile {
  json data = json::object();
  std::set<std::string> allowed;

  static ConfigFile load(const std::string& path, std::set<std::string> allowed) {
    ConfigFile c;
    c.allowed = std::move(allowed);
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    try {
      c.data = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError("config file " + path + ": " + e.what());
    }
    if (!c.data.is_object()) throw UsageError("config file " + path + ": top level must be an object");
    for (const auto& [key, value] : c.data.items())
      if (!c.allowed.count(key)) throw UsageError("config file " + path + ": unknown key '" + key + "'");
    return c;
  }

  template <class T>
  std::optional<T> get(const std::string& key) const {
    if (!data.contains(key)) return std::nullopt;
    try {
      return data.at(key).get<T>();
    } catch (const json::exception& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
};

template <class T>
T resolve(const CLI::Option* flag, const T& flag_value, const ConfigFile& cfg,
          const std::string& key, const T& fallback) {
  if (flag && flag->count() > 0) return flag_value;
  if (auto v = cfg.get<T>(key)) return *v;
  return fallback;
}

inline std::optional<double> resolve_required(const CLI::Option* flag, double flag_value,
                                              const ConfigFile& cfg, const std::string& key) {
  if (flag && flag->count() > 0) return flag_value;
  return cfg.get<double>(key);
}

inline std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t flag_value,
                                  const ConfigFile& cfg) {
  if (flag && flag->count() > 0) return flag_value;
  if (auto v = cfg.get<std::uint64_t>("seed")) return *v;
  if (const char* env = std::getenv("DANTZIG_KIT_SEED")) {
    const std::string s(env);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
      throw UsageError("DANTZIG_KIT_SEED is not a nonnegative integer: '" + s + "'");
    return value;
  }
  return 0;
}

inline Matrix matrix_from_json(const json& j, const std::string& key) {
  try {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw UsageError("config key '" + key + "': empty matrix");
    std::vector<double> e;
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) throw UsageError("config key '" + key + "': ragged rows");
      e.insert(e.end(), r.begin(), r.end());
    }
    return Matrix(rows.size(), rows.front().size(), std::move(e));
  } catch (const json::exception& e) {
    throw UsageError("config key '" + key + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError("config key '" + key + "': " + e.what());
  }
}

inline void emit(const json& report, const std::string& output, std::ostream& out) {
  if (output.empty() || output == "-") {
    out << report.dump(2) << '\n';
    return;
  }
  std::ofstream f(output);
  if (!f) throw UsageError("cannot write output file: " + output);
  f << report.dump(2) << '\n';
}

inline json envelope(const std::string& command, json config, json result) {
  return {{"schema", kSchema},
          {"version", DANTZIG_KIT_VERSION},
          {"command", command},
          {"config", std::move(config)},
          {"result", std::move(result)}};
}

// ---------------------------------------------------------------------------
// solve

struct SolveFlags {
  std::string config, output, x, y, method = "dantzig";
  double lambda = 0.0, tol = 1e-10;
  std::size_t max_sweeps = 100'000;
  bool header = false, diameter = false;
  CLI::Option *o_x{}, *o_y{}, *o_method{}, *o_lambda{}, *o_tol{}, *o_sweeps{}, *o_header{},
      *o_diameter{};
};

inline void add_solve(CLI::App& app, SolveFlags& f) {
  f.o_method = app.add_option("--method", f.method, "dantzig, lasso or both")
                   ->check(CLI::IsMember({"dantzig", "lasso", "both"}));
  f.o_x = app.add_option("--x", f.x, "design matrix CSV (n rows, p columns)");
  f.o_y = app.add_option("--y", f.y, "response CSV (one column)");
  f.o_lambda = app.add_option("--lambda", f.lambda, "tuning parameter, >= 0");
  f.o_header = app.add_flag("--header", f.header, "skip one header line in each CSV");
  f.o_diameter = app.add_flag("--diameter", f.diameter, "report the Dantzig solution-set diameter");
  f.o_sweeps = app.add_option("--max-sweeps", f.max_sweeps, "lasso sweep limit");
  f.o_tol = app.add_option("--tol", f.tol, "lasso coordinate-change tolerance");
  app.add_option("--config", f.config, "JSON file with any of the above settings");
  app.add_option("--output,-o", f.output, "write the JSON report here instead of stdout");
}

inline int run_solve(const SolveFlags& f, std::ostream& out) {
  const ConfigFile cfg = ConfigFile::load(
      f.config, {"method", "x", "y", "lambda", "header", "diameter", "max_sweeps", "tol"});
  const std::string method = resolve(f.o_method, f.method, cfg, "method", std::string("dantzig"));
  if (method != "dantzig" && method != "lasso" && method != "both")
    throw UsageError("method must be dantzig, lasso or both");
  const std::string xpath = resolve(f.o_x, f.x, cfg, "x", std::string());
  const std::string ypath = resolve(f.o_y, f.y, cfg, "y", std::string());
  if (xpath.empty() || ypath.empty()) throw UsageError("solve needs --x and --y");
  const auto lambda = resolve_required(f.o_lambda, f.lambda, cfg, "lambda");
  if (!lambda) throw UsageError("solve needs --lambda");
  if (!(*lambda >= 0.0) || !std::isfinite(*lambda)) throw UsageError("lambda must be finite and >= 0");
  const bool header = resolve(f.o_header, f.header, cfg, "header", false);
  const bool diameter = resolve(f.o_diameter, f.diameter, cfg, "diameter", false);
  const auto sweeps = resolve(f.o_sweeps, f.max_sweeps, cfg, "max_sweeps", std::size_t{100'000});
  const double tol = resolve(f.o_tol, f.tol, cfg, "tol", 1e-10);

  DesignData data{csv::read_matrix(xpath, header), csv::read_vector(ypath, header)};
  try {
    data.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  json config{{"method", method}, {"x", xpath},          {"y", ypath},
              {"lambda", *lambda}, {"header", header},   {"diameter", diameter},
              {"max_sweeps", sweeps}, {"tol", tol},      {"n", data.n()},
              {"p", data.p()}};
  json result = json::object();
  if (method != "lasso") {
    const DantzigEstimate est = dantzig_select(data, *lambda);
    if (!est.optimal()) throw NumericalFailure("Dantzig selector problem is infeasible");
    const KktCertificate cert = dantzig_certificate(data, *lambda, est.beta_hat);
    json d{{"status", to_string(est.status)},
           {"beta_hat", to_json(est.beta_hat)},
           {"l1_norm", est.l1_norm},
           {"active_set", to_json(est.active_set)},
           {"kkt",
            {{"found", cert.found},
             {"mu_hat", to_json(cert.mu_hat)},
             {"primal_residual", cert.primal_residual},
             {"dual_norm", cert.dual_norm},
             {"gap_c", cert.gap_c},
             {"gap_d", cert.gap_d}}}};
    if (diameter) {
      const SolutionSetSpread s = solution_set_diameter(DantzigProblem::from_data(data, *lambda));
      json ranges = json::array();
      for (const Range& r : s.per_coord) ranges.push_back({r.min, r.max});
      d["diameter"] = {{"diameter_inf", s.diameter_inf},
                       {"per_coord", ranges},
                       {"unique", s.diameter_inf <= kUniqueDiameter},
                       {"multiple", s.diameter_inf > kMultipleDiameter}};
    }
    result["dantzig"] = d;
  }
  if (method != "dantzig") {
    LassoOptions opt;
    opt.max_sweeps = sweeps;
    opt.tol = tol;
    const LassoEstimate est = lasso_solve(data, *lambda, opt);
    result["lasso"] = {{"beta_hat", to_json(est.beta_hat)},
                       {"objective", est.objective},
                       {"kkt_residual", est.kkt_residual},
                       {"sweeps", est.sweeps}};
  }
  emit(envelope("solve", config, result), f.output, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// uniqueness

struct ParallelFlags {
  std::string config, output, matrix, x;
  bool header = false;
  double tol = 1e-8;
  std::size_t p_cap = 10, max_witnesses = 16;
  unsigned jobs = 1;
  CLI::Option *o_matrix{}, *o_x{}, *o_header{}, *o_tol{}, *o_cap{}, *o_max{}, *o_jobs{};
};

inline void add_parallel(CLI::App& app, ParallelFlags& f) {
  f.o_matrix = app.add_option("--matrix", f.matrix, "symmetric matrix C as CSV");
  f.o_x = app.add_option("--x", f.x, "design CSV; C = X'X/n");
  f.o_header = app.add_flag("--header", f.header, "skip one header line in the CSV");
  f.o_tol = app.add_option("--tol", f.tol, "witness tolerance");
  f.o_cap = app.add_option("--p-cap", f.p_cap, "largest p accepted for enumeration");
  f.o_max = app.add_option("--max-witnesses", f.max_witnesses, "witnesses kept in the report");
  f.o_jobs = app.add_option("--jobs,-j", f.jobs, "worker threads");
  app.add_option("--config", f.config, "JSON file with any of the above settings");
  app.add_option("--output,-o", f.output, "write the JSON report here instead of stdout");
}

inline int run_parallel(const std::string& command, const ParallelFlags& f, bool lasso,
                        std::ostream& out) {
  const ConfigFile cfg = ConfigFile::load(
      f.config, {"matrix", "x", "header", "tol", "p_cap", "max_witnesses", "jobs"});
  const std::string mpath = resolve(f.o_matrix, f.matrix, cfg, "matrix", std::string());
  const std::string xpath = resolve(f.o_x, f.x, cfg, "x", std::string());
  if (mpath.empty() == xpath.empty()) throw UsageError(command + " needs exactly one of --matrix, --x");
  const bool header = resolve(f.o_header, f.header, cfg, "header", false);
  ParallelismOptions opt;
  opt.tol = resolve(f.o_tol, f.tol, cfg, "tol", 1e-8);
  opt.p_cap = resolve(f.o_cap, f.p_cap, cfg, "p_cap", std::size_t{10});
  opt.max_witnesses = resolve(f.o_max, f.max_witnesses, cfg, "max_witnesses", std::size_t{16});
  opt.jobs = resolve(f.o_jobs, f.jobs, cfg, "jobs", 1u);
  if (!(opt.tol > 0.0)) throw UsageError("tol must be > 0");
  if (opt.max_witnesses == 0) throw UsageError("max_witnesses must be >= 1");

  const Matrix c = mpath.empty() ? scaled_gram(csv::read_matrix(xpath, header))
                                 : csv::read_matrix(mpath, header);
  if (!c.is_square()) throw UsageError("C must be square");
  if (!is_symmetric(c, 1e-10)) throw UsageError("C must be symmetric");
  const ParallelismReport r = lasso ? lasso_parallelism_check(c, opt) : is_parallel(c, opt);
  json config{{"matrix", mpath},       {"x", xpath},         {"header", header},
              {"tol", opt.tol},        {"p_cap", opt.p_cap}, {"max_witnesses", opt.max_witnesses},
              {"jobs", opt.jobs},      {"p", c.rows()}};
  emit(envelope(command, config, to_json(r)), f.output, out);
  return kExitOk;
}

struct Prop2Flags {
  std::string config, output, generator = "normal";
  std::size_t n = 10, p = 3, reps = 200, p_cap = 10;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  CLI::Option *o_n{}, *o_p{}, *o_reps{}, *o_seed{}, *o_gen{}, *o_cap{}, *o_jobs{};
};

inline void add_prop2(CLI::App& app, Prop2Flags& f) {
  f.o_n = app.add_option("--n", f.n, "observations per design");
  f.o_p = app.add_option("--p", f.p, "predictors");
  f.o_reps = app.add_option("--reps", f.reps, "number of designs");
  f.o_seed = app.add_option("--seed", f.seed, "random seed (falls back to DANTZIG_KIT_SEED)");
  f.o_gen = app.add_option("--generator", f.generator, "normal or duplicated")
                ->check(CLI::IsMember({"normal", "duplicated"}));
  f.o_cap = app.add_option("--p-cap", f.p_cap, "largest p accepted for enumeration");
  f.o_jobs = app.add_option("--jobs,-j", f.jobs, "worker threads");
  app.add_option("--config", f.config, "JSON file with any of the above settings");
  app.add_option("--output,-o", f.output, "write the JSON report here instead of stdout");
}

inline int run_prop2(const Prop2Flags& f, std::ostream& out) {
  const ConfigFile cfg =
      ConfigFile::load(f.config, {"n", "p", "reps", "seed", "generator", "p_cap", "jobs"});
  const auto n = resolve(f.o_n, f.n, cfg, "n", std::size_t{10});
  const auto p = resolve(f.o_p, f.p, cfg, "p", std::size_t{3});
  const auto reps = resolve(f.o_reps, f.reps, cfg, "reps", std::size_t{200});
  const auto gen = resolve(f.o_gen, f.generator, cfg, "generator", std::string("normal"));
  if (gen != "normal" && gen != "duplicated") throw UsageError("generator must be normal or duplicated");
  const std::uint64_t seed = resolve_seed(f.o_seed, f.seed, cfg);
  ParallelismOptions opt;
  opt.p_cap = resolve(f.o_cap, f.p_cap, cfg, "p_cap", std::size_t{10});
  opt.jobs = resolve(f.o_jobs, f.jobs, cfg, "jobs", 1u);
  if (n == 0 || p == 0 || reps == 0) throw UsageError("n, p and reps must be >= 1");
  const Prop2Result r = prop2_experiment(
      n, p, reps, seed, gen == "normal" ? DesignGenerator(standard_normal_design)
                                        : DesignGenerator(duplicated_column_design),
      opt);
  json config{{"n", n},       {"p", p},         {"reps", reps}, {"seed", seed},
              {"generator", gen}, {"p_cap", opt.p_cap}, {"jobs", opt.jobs}};
  json result{{"fraction_parallel", r.fraction_parallel},
              {"parallel_count", r.parallel_count},
              {"reps", r.reps}};
  emit(envelope("uniqueness prop2", config, result), f.output, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// asymptotics

struct ScenarioFlags {
  std::string config, output, samples_dir, c_target, lambda_rule, noise;
  std::vector<double> beta_star;
  std::vector<std::size_t> n_grid;
  double sigma = 1.0, lambda0 = 0.0, ks_threshold = 0.05, cov_threshold = 0.15;
  std::size_t reps = 0, kkt_every = 50;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  CLI::Option *o_beta{}, *o_c{}, *o_sigma{}, *o_lambda{}, *o_rule{}, *o_grid{}, *o_reps{},
      *o_seed{}, *o_noise{}, *o_kkt{}, *o_jobs{}, *o_samples{}, *o_ks{}, *o_cov{};
};

inline void add_scenario(CLI::App& app, ScenarioFlags& f, bool cor2) {
  f.o_beta = app.add_option("--beta-star", f.beta_star, "true coefficients, comma separated")
                 ->delimiter(',');
  f.o_c = app.add_option("--c-target", f.c_target, "CSV with the design covariance C");
  f.o_sigma = app.add_option("--sigma", f.sigma, "noise standard deviation");
  f.o_lambda = app.add_option(cor2 ? "--lambda-tilde,--lambda0" : "--lambda0", f.lambda0,
                              cor2 ? "lambda_n = lambda_tilde / sqrt(n)" : "fixed lambda");
  f.o_rule = app.add_option("--lambda-rule", f.lambda_rule, "fixed or root-n")
                 ->check(CLI::IsMember({"fixed", "root-n"}));
  f.o_grid = app.add_option("--n-grid", f.n_grid, "sample sizes, comma separated")->delimiter(',');
  f.o_reps = app.add_option("--reps", f.reps, "replicates per n");
  f.o_seed = app.add_option("--seed", f.seed, "random seed (falls back to DANTZIG_KIT_SEED)");
  f.o_noise = app.add_option("--noise", f.noise, "gaussian, two-point or laplace")
                  ->check(CLI::IsMember({"gaussian", "two-point", "laplace"}));
  f.o_kkt = app.add_option("--kkt-every", f.kkt_every, "certify every k-th replicate");
  f.o_jobs = app.add_option("--jobs,-j", f.jobs, "worker threads");
  f.o_samples = app.add_option("--samples-dir", f.samples_dir, "directory for CSV sample dumps");
  if (cor2) {
    f.o_ks = app.add_option("--ks-threshold", f.ks_threshold, "pass bound on each KS statistic");
    f.o_cov = app.add_option("--cov-threshold", f.cov_threshold,
                             "pass bound on the covariance error when lambda_tilde = 0");
  }
  app.add_option("--config", f.config, "scenario JSON");
  app.add_option("--output,-o", f.output, "write the JSON report here instead of stdout");
}

inline Matrix default_c_target() {
  return Matrix{{1.0, 0.3, 0.1}, {0.3, 1.0, 0.2}, {0.1, 0.2, 1.0}};
}

struct ResolvedScenario {
  ScenarioConfig cfg;
  std::string samples_dir;
  double ks_threshold = 0.05, cov_threshold = 0.15;
  json config;
};

inline ResolvedScenario resolve_scenario(const ScenarioFlags& f, bool cor2) {
  const ConfigFile file = ConfigFile::load(
      f.config, {"beta_star", "c_target", "sigma", "lambda0", "lambda_tilde", "lambda_rule",
                 "n_grid", "reps", "seed", "noise", "kkt_every", "jobs", "samples_dir",
                 "ks_threshold", "cov_threshold"});
  ResolvedScenario out;
  ScenarioConfig& c = out.cfg;
  c.beta_star = resolve(f.o_beta, f.beta_star, file, "beta_star", Vector{1.0, -0.5, 0.0});
  if (f.o_c && f.o_c->count() > 0)
    c.c_target = csv::read_matrix(f.c_target);
  else if (file.data.contains("c_target"))
    c.c_target = matrix_from_json(file.data.at("c_target"), "c_target");
  else
    c.c_target = default_c_target();
  c.sigma = resolve(f.o_sigma, f.sigma, file, "sigma", 1.0);
  const double lambda_file_default = file.get<double>(cor2 ? "lambda_tilde" : "lambda0")
                                         .value_or(file.get<double>("lambda0").value_or(0.0));
  c.lambda0 = (f.o_lambda && f.o_lambda->count() > 0) ? f.lambda0 : lambda_file_default;
  const std::string rule =
      resolve(f.o_rule, f.lambda_rule, file, "lambda_rule", std::string(cor2 ? "root-n" : "fixed"));
  if (rule != "fixed" && rule != "root-n") throw UsageError("lambda_rule must be fixed or root-n");
  c.lambda_rule = rule == "fixed" ? LambdaRule::Fixed : LambdaRule::RootN;
  c.n_grid = resolve(f.o_grid, f.n_grid, file, "n_grid",
                     cor2 ? std::vector<std::size_t>{2000}
                          : std::vector<std::size_t>{250, 1000, 4000});
  c.reps = resolve(f.o_reps, f.reps, file, "reps", std::size_t{cor2 ? 2000u : 200u});
  c.seed = resolve_seed(f.o_seed, f.seed, file);
  const std::string noise = resolve(f.o_noise, f.noise, file, "noise", std::string("gaussian"));
  if (noise == "gaussian")
    c.noise = NoiseKind::Gaussian;
  else if (noise == "two-point")
    c.noise = NoiseKind::TwoPoint;
  else if (noise == "laplace")
    c.noise = NoiseKind::Laplace;
  else
    throw UsageError("noise must be gaussian, two-point or laplace");
  c.kkt_every = resolve(f.o_kkt, f.kkt_every, file, "kkt_every", std::size_t{50});
  c.jobs = resolve(f.o_jobs, f.jobs, file, "jobs", 1u);
  out.samples_dir = resolve(f.o_samples, f.samples_dir, file, "samples_dir", std::string());
  out.ks_threshold = resolve(f.o_ks, f.ks_threshold, file, "ks_threshold", 0.05);
  out.cov_threshold = resolve(f.o_cov, f.cov_threshold, file, "cov_threshold", 0.15);
  out.config = {{"beta_star", to_json(c.beta_star)},
                {"c_target", to_json(c.c_target)},
                {"sigma", c.sigma},
                {cor2 ? "lambda_tilde" : "lambda0", c.lambda0},
                {"lambda_rule", to_string(c.lambda_rule)},
                {"n_grid", c.n_grid},
                {"reps", c.reps},
                {"seed", c.seed},
                {"noise", to_string(c.noise)},
                {"kkt_every", c.kkt_every},
                {"jobs", c.jobs},
                {"samples_dir", out.samples_dir},
                {"design", "random rows N(0, C_target); reports condition on the realized X'X/n"}};
  if (cor2) {
    out.config["ks_threshold"] = out.ks_threshold;
    out.config["cov_threshold"] = out.cov_threshold;
  }
  return out;
}

inline std::string sample_path(const std::string& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create samples directory " + dir + ": " + ec.message());
  return (std::filesystem::path(dir) / name).string();
}

inline std::vector<std::string> coord_header(const std::string& prefix, std::size_t p) {
  std::vector<std::string> h;
  for (std::size_t j = 1; j <= p; ++j) h.push_back(prefix + std::to_string(j));
  return h;
}

inline int run_cor1(const ScenarioFlags& f, std::ostream& out) {
  const ResolvedScenario rs = resolve_scenario(f, false);
  const Cor1Report r = simulate_corollary1(rs.cfg);
  json rows = json::array();
  Matrix curve(r.rows.size(), 5);
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    const Cor1Row& row = r.rows[k];
    rows.push_back({{"n", row.n},
                    {"lambda", row.lambda},
                    {"median_error_to_limit", row.median_error_to_limit},
                    {"median_error_to_truth", row.median_error_to_truth},
                    {"mean_lindeberg", row.mean_lindeberg},
                    {"kkt_checked", row.kkt_checked},
                    {"kkt_failed", row.kkt_failed}});
    curve(k, 0) = static_cast<double>(row.n);
    curve(k, 1) = row.lambda;
    curve(k, 2) = row.median_error_to_limit;
    curve(k, 3) = row.median_error_to_truth;
    curve(k, 4) = row.mean_lindeberg;
  }
  json result{{"beta_limit", to_json(r.beta_limit)},
              {"limit_gap", r.limit_gap},
              {"rows", rows},
              {"lindeberg_decreasing", r.lindeberg_decreasing},
              {"kkt_all_found", r.kkt_all_found}};
  if (!rs.samples_dir.empty()) {
    const std::string path = sample_path(rs.samples_dir, "cor1_curve.csv");
    csv::write_matrix(path, curve,
                      {"n", "lambda", "median_error_to_limit", "median_error_to_truth",
                       "mean_lindeberg"});
    result["files"] = {path};
  }
  emit(envelope("asymptotics cor1", rs.config, result), f.output, out);
  return kExitOk;
}

inline int run_cor2(const ScenarioFlags& f, std::ostream& out) {
  const ResolvedScenario rs = resolve_scenario(f, true);
  Cor2Options opt;
  opt.ks_threshold = rs.ks_threshold;
  opt.cov_threshold = rs.cov_threshold;
  const Cor2Report r = simulate_corollary2(rs.cfg, opt);
  const std::size_t p = rs.cfg.p();
  json rows = json::array();
  for (const Cor2Row& row : r.rows)
    rows.push_back({{"n", row.n},
                    {"lambda", row.lambda},
                    {"ks", to_json(row.ks)},
                    {"ks_p_value", to_json(row.ks_p_value)},
                    {"covariance_error", row.covariance_error},
                    {"atom_mass", to_json(row.atom_mass)},
                    {"mean_lindeberg", row.mean_lindeberg},
                    {"kkt_checked", row.kkt_checked},
                    {"kkt_failed", row.kkt_failed}});
  json coords = json::array();
  for (std::size_t j = 0; j < p; ++j)
    coords.push_back({{"coordinate", j + 1},
                      {"empirical", to_json(r.empirical_summary[j])},
                      {"limiting", to_json(r.limiting_summary[j])},
                      {"ks", r.rows.back().ks[j]},
                      {"limiting_jarque_bera",
                       {{"statistic", r.limiting_normality[j].statistic},
                        {"p_value", r.limiting_normality[j].p_value}}}});
  const bool pass = r.ks_pass && (!r.reference_is_closed_form || r.covariance_pass) && r.kkt_all_found;
  json result{{"final_n", r.final_n},
              {"rows", rows},
              {"coordinates", coords},
              {"zero_coordinates", to_json(r.zero_coordinates)},
              {"empirical_covariance", to_json(r.empirical_covariance)},
              {"reference_covariance", to_json(r.reference_covariance)},
              {"reference_is_closed_form", r.reference_is_closed_form},
              {"covariance_error", r.covariance_error},
              {"ks_pass", r.ks_pass},
              {"covariance_pass", r.covariance_pass},
              {"non_normal_zero_coordinate", r.non_normal_zero_coordinate},
              {"lindeberg_decreasing", r.lindeberg_decreasing},
              {"kkt_all_found", r.kkt_all_found},
              {"pass", pass}};
  if (!rs.samples_dir.empty()) {
    const std::string e = sample_path(rs.samples_dir, "cor2_empirical.csv");
    const std::string l = sample_path(rs.samples_dir, "cor2_limiting.csv");
    csv::write_matrix(e, r.empirical, coord_header("u", p));
    csv::write_matrix(l, r.limiting, coord_header("u", p));
    result["files"] = {e, l};
  }
  emit(envelope("asymptotics cor2", rs.config, result), f.output, out);
  return kExitOk;
}

struct ContinuityFlags {
  std::string config, output, preset = "random", branch = "positive";
  std::size_t p = 3;
  std::uint64_t seed = 0;
  std::vector<double> eps_grid;
  CLI::Option *o_preset{}, *o_branch{}, *o_p{}, *o_seed{}, *o_eps{};
};

inline void add_continuity(CLI::App& app, ContinuityFlags& f) {
  f.o_preset = app.add_option("--preset", f.preset, "random, or config (read from --config)")
                   ->check(CLI::IsMember({"random", "config"}));
  f.o_branch = app.add_option("--branch", f.branch, "positive (lambda > 0) or zero")
                   ->check(CLI::IsMember({"positive", "zero"}));
  f.o_p = app.add_option("--p", f.p, "dimension of the random instance");
  f.o_seed = app.add_option("--seed", f.seed, "random seed (falls back to DANTZIG_KIT_SEED)");
  f.o_eps = app.add_option("--eps-grid", f.eps_grid, "decreasing step sizes, comma separated")
                ->delimiter(',');
  app.add_option("--config", f.config, "JSON with c, v, lambda, dc, dv, dlambda, eps_grid");
  app.add_option("--output,-o", f.output, "write the JSON report here instead of stdout");
}

inline int run_continuity(const ContinuityFlags& f, std::ostream& out) {
  const ConfigFile file = ConfigFile::load(
      f.config, {"preset", "branch", "p", "seed", "eps_grid", "c", "v", "lambda", "dc", "dv",
                 "dlambda"});
  const std::string preset = resolve(f.o_preset, f.preset, file, "preset",
                                     std::string(file.data.contains("c") ? "config" : "random"));
  const std::vector<double> eps =
      resolve(f.o_eps, f.eps_grid, file, "eps_grid", default_eps_grid());
  const std::uint64_t seed = resolve_seed(f.o_seed, f.seed, file);
  json config{{"preset", preset}, {"seed", seed}, {"eps_grid", eps}};
  ContinuityInstance inst;
  if (preset == "random") {
    const std::string branch = resolve(f.o_branch, f.branch, file, "branch", std::string("positive"));
    if (branch != "positive" && branch != "zero") throw UsageError("branch must be positive or zero");
    const auto p = resolve(f.o_p, f.p, file, "p", std::size_t{3});
    if (p == 0) throw UsageError("p must be >= 1");
    inst = random_continuity_instance(p, seed, branch == "positive");
    config["branch"] = branch;
    config["p"] = p;
  } else if (preset == "config") {
    for (const char* key : {"c", "v", "lambda", "dc", "dv"})
      if (!file.data.contains(key)) throw UsageError(std::string("config preset needs key '") + key + "'");
    inst.c = matrix_from_json(file.data.at("c"), "c");
    inst.v = *file.get<Vector>("v");
    inst.lambda = *file.get<double>("lambda");
    inst.direction.dc = matrix_from_json(file.data.at("dc"), "dc");
    inst.direction.dv = *file.get<Vector>("dv");
    inst.direction.dlambda = file.get<double>("dlambda").value_or(0.0);
  } else {
    throw UsageError("preset must be random or config");
  }
  config["c"] = to_json(inst.c);
  config["v"] = to_json(inst.v);
  config["lambda"] = inst.lambda;
  config["dc"] = to_json(inst.direction.dc);
  config["dv"] = to_json(inst.direction.dv);
  config["dlambda"] = inst.direction.dlambda;

  const ContinuityReport r = continuity_probe(inst.c, inst.v, inst.lambda, inst.direction, eps);
  json rows = json::array();
  for (const ContinuityRow& row : r.rows) {
    json j{{"eps", row.eps}, {"distance", row.distance}, {"skipped", row.skipped}};
    if (row.skipped) j["reason"] = row.reason;
    rows.push_back(j);
  }
  json result{{"base", to_json(r.base)},
              {"rows", rows},
              {"final_distance", r.final_distance},
              {"pass", r.pass}};
  emit(envelope("asymptotics continuity", config, result), f.output, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// polygon

struct PolygonFlags {
  std::string config, output, matrix, v, x, y, csv_out;
  double lambda = 0.0, box = 10.0;
  bool header = false;
  CLI::Option *o_matrix{}, *o_v{}, *o_x{}, *o_y{}, *o_lambda{}, *o_box{}, *o_header{}, *o_csv{};
};

inline void add_polygon(CLI::App& app, PolygonFlags& f) {
  f.o_matrix = app.add_option("--matrix", f.matrix, "2×2 matrix C as CSV");
  f.o_v = app.add_option("--v", f.v, "vector v as a one-column CSV");
  f.o_x = app.add_option("--x", f.x, "design CSV (alternative to --matrix/--v)");
  f.o_y = app.add_option("--y", f.y, "response CSV (with --x)");
  f.o_lambda = app.add_option("--lambda", f.lambda, "tuning parameter, >= 0");
  f.o_box = app.add_option("--box", f.box, "half-width w of the clipping square [-w, w]^2");
  f.o_header = app.add_flag("--header", f.header, "skip one header line in each CSV");
  f.o_csv = app.add_option("--csv", f.csv_out, "also write the vertex list as CSV here");
  app.add_option("--config", f.config, "JSON file with any of the above settings");
  app.add_option("--output,-o", f.output, "write the JSON report here instead of stdout");
}

inline int run_polygon(const PolygonFlags& f, std::ostream& out) {
  const ConfigFile file = ConfigFile::load(
      f.config, {"matrix", "v", "x", "y", "lambda", "box", "header", "csv"});
  const bool header = resolve(f.o_header, f.header, file, "header", false);
  const std::string mpath = resolve(f.o_matrix, f.matrix, file, "matrix", std::string());
  const std::string vpath = resolve(f.o_v, f.v, file, "v", std::string());
  const std::string xpath = resolve(f.o_x, f.x, file, "x", std::string());
  const std::string ypath = resolve(f.o_y, f.y, file, "y", std::string());
  const auto lambda = resolve_required(f.o_lambda, f.lambda, file, "lambda");
  const double box = resolve(f.o_box, f.box, file, "box", 10.0);
  const std::string csv_out = resolve(f.o_csv, f.csv_out, file, "csv", std::string());
  if (!lambda) throw UsageError("polygon needs --lambda");
  if (!(*lambda >= 0.0) || !std::isfinite(*lambda)) throw UsageError("lambda must be finite and >= 0");
  if (!(box > 0.0)) throw UsageError("box must be > 0");

  DantzigProblem prob;
  prob.lambda = *lambda;
  if (!mpath.empty() && !vpath.empty() && xpath.empty() && ypath.empty()) {
    prob.c = csv::read_matrix(mpath, header);
    prob.v = csv::read_vector(vpath, header);
  } else if (mpath.empty() && vpath.empty() && !xpath.empty() && !ypath.empty()) {
    DesignData d{csv::read_matrix(xpath, header), csv::read_vector(ypath, header)};
    try {
      prob = DantzigProblem::from_data(d, *lambda);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else {
    throw UsageError("polygon needs either --matrix and --v, or --x and --y");
  }
  if (prob.c.rows() != 2 || prob.c.cols() != 2 || prob.v.size() != 2)
    throw Refused("polygon requires p = 2 (got C " + std::to_string(prob.c.rows()) + "×" +
                  std::to_string(prob.c.cols()) + ", v of length " + std::to_string(prob.v.size()) +
                  ")");
  try {
    prob.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::vector<Point2> poly = polygon_2d(prob, box);
  const DantzigEstimate est = g_map(prob);
  if (poly.empty() || !est.optimal()) throw NumericalFailure("feasible set is empty");

  json vertices = json::array();
  Matrix vm(poly.size(), 2);
  for (std::size_t k = 0; k < poly.size(); ++k) {
    vertices.push_back({poly[k].x, poly[k].y});
    vm(k, 0) = poly[k].x;
    vm(k, 1) = poly[k].y;
  }
  json config{{"matrix", mpath}, {"v", vpath},           {"x", xpath},     {"y", ypath},
              {"lambda", *lambda}, {"box", box},         {"header", header}, {"csv", csv_out},
              {"c", to_json(prob.c)}, {"v_value", to_json(prob.v)}};
  json result{{"vertices", vertices},
              {"t0", est.l1_norm},
              {"beta_hat", to_json(est.beta_hat)},
              {"box_halfwidth", box}};
  if (!csv_out.empty()) csv::write_matrix(csv_out, vm);
  emit(envelope("polygon", config, result), f.output, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dantzig selector and lasso: solvers, uniqueness checks, asymptotics"};
  app.name("dantzig-kit");
  app.set_version_flag("--version", DANTZIG_KIT_VERSION);
  app.require_subcommand(1);

  SolveFlags solve_f;
  auto* solve_cmd = app.add_subcommand("solve", "Dantzig selector and/or lasso on CSV data");
  add_solve(*solve_cmd, solve_f);

  auto* uniq = app.add_subcommand("uniqueness", "parallelism checks");
  uniq->require_subcommand(1);
  ParallelFlags check_f, lasso_f;
  auto* check_cmd = uniq->add_subcommand("check", "is C parallel to the l1-ball?");
  add_parallel(*check_cmd, check_f);
  auto* lasso_cmd = uniq->add_subcommand("lasso-check", "parallelism with B = {1..p}");
  add_parallel(*lasso_cmd, lasso_f);
  Prop2Flags prop2_f;
  auto* prop2_cmd = uniq->add_subcommand("prop2", "fraction of random designs that are parallel");
  add_prop2(*prop2_cmd, prop2_f);

  auto* asym = app.add_subcommand("asymptotics", "Monte Carlo large-sample experiments");
  asym->require_subcommand(1);
  ScenarioFlags cor1_f, cor2_f;
  auto* cor1_cmd = asym->add_subcommand("cor1", "almost-sure limit under fixed lambda");
  add_scenario(*cor1_cmd, cor1_f, false);
  auto* cor2_cmd = asym->add_subcommand("cor2", "limiting distribution under lambda_tilde/sqrt(n)");
  add_scenario(*cor2_cmd, cor2_f, true);
  ContinuityFlags cont_f;
  auto* cont_cmd = asym->add_subcommand("continuity", "continuity of the solution map");
  add_continuity(*cont_cmd, cont_f);

  PolygonFlags poly_f;
  auto* poly_cmd = app.add_subcommand("polygon", "feasible-set polygon for p = 2");
  add_polygon(*poly_cmd, poly_f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << DANTZIG_KIT_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  }

  // Help for a nested subcommand is requested through that subcommand.
  try {
    if (*solve_cmd) return run_solve(solve_f, out);
    if (*check_cmd) return run_parallel("uniqueness check", check_f, false, out);
    if (*lasso_cmd) return run_parallel("uniqueness lasso-check", lasso_f, true, out);
    if (*prop2_cmd) return run_prop2(prop2_f, out);
    if (*cor1_cmd) return run_cor1(cor1_f, out);
    if (*cor2_cmd) return run_cor2(cor2_f, out);
    if (*cont_cmd) return run_continuity(cont_f, out);
    if (*poly_cmd) return run_polygon(poly_f, out);
    err << "error: no command given\n";
    return kExitParse;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const csv::CsvError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kExitRefused;
  } catch (const Refused& e) {
    err << "error: " << e.what() << '\n';
    return kExitRefused;
  } catch (const InvalidScenario& e) {
    err << "error: " << e.what() << '\n';
    if (e.witness()) err << "witness: " << witness_text(*e.witness()) << '\n';
    return kExitInvalidConfig;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConvergenceFailure& e) {
    err << "error: " << e.what() << " (best KKT residual " << e.best_iterate().kkt_residual
        << ")\n";
    return kExitNumerical;
  } catch (const SolverStalled& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace dantzig_kit::cli
