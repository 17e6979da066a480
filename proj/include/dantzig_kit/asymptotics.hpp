#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dantzig_kit/dantzig.hpp"
#include "dantzig_kit/kkt.hpp"
#include "dantzig_kit/linalg.hpp"
#include "dantzig_kit/lp.hpp"
#include "dantzig_kit/parallel.hpp"
#include "dantzig_kit/random.hpp"
#include "dantzig_kit/stats.hpp"
#include "dantzig_kit/uniqueness.hpp"

namespace dantzig_kit {

// A scenario that breaks an invariant the asymptotic results depend on. When
// the target matrix is parallel, the offending witness is attached.
class InvalidScenario : public std::invalid_argument {
 public:
  explicit InvalidScenario(const std::string& what,
                           std::optional<ParallelismWitness> witness = std::nullopt)
      : std::invalid_argument(what), witness_(std::move(witness)) {}
  const std::optional<ParallelismWitness>& witness() const noexcept { return witness_; }

 private:
  std::optional<ParallelismWitness> witness_;
};

enum class NoiseKind { Gaussian, TwoPoint, Laplace };

inline const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::TwoPoint: return "two-point";
    case NoiseKind::Laplace: return "laplace";
  }
  return "?";
}

// Draws with mean 0 and variance 1.
using NoiseGenerator = std::function<double(std::mt19937_64&)>;

inline NoiseGenerator make_noise(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::TwoPoint:
      return [](std::mt19937_64& rng) { return (rng() >> 63) ? 1.0 : -1.0; };
    case NoiseKind::Laplace:
      return [](std::mt19937_64& rng) {
        std::exponential_distribution<double> e(std::sqrt(2.0));
        return e(rng) - e(rng);
      };
    case NoiseKind::Gaussian:
      break;
  }
  return [](std::mt19937_64& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); };
}

enum class LambdaRule { Fixed, RootN };

inline const char* to_string(LambdaRule r) { return r == LambdaRule::Fixed ? "fixed" : "root-n"; }

struct ScenarioConfig {
  Vector beta_star;
  Matrix c_target;
  double sigma = 1.0;
  LambdaRule lambda_rule = LambdaRule::Fixed;
  double lambda0 = 0.0;  // λ₀ for the fixed rule, λ̃₀ for λ_n = λ̃₀/√n
  std::vector<std::size_t> n_grid;
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  NoiseKind noise = NoiseKind::Gaussian;
  NoiseGenerator noise_override;  // replaces `noise` when set
  unsigned jobs = 1;
  std::size_t kkt_every = 50;  // certificate checked on replicates r ≡ 0 mod kkt_every
  ParallelismOptions parallelism;

  std::size_t p() const noexcept { return beta_star.size(); }

  double lambda_at(std::size_t n) const {
    return lambda_rule == LambdaRule::Fixed ? lambda0
                                            : lambda0 / std::sqrt(static_cast<double>(n));
  }

  void validate() const {
    const std::size_t p = beta_star.size();
    if (p == 0) throw InvalidScenario("scenario: beta_star is empty");
    if (!std::all_of(beta_star.begin(), beta_star.end(), [](double b) { return std::isfinite(b); }))
      throw InvalidScenario("scenario: beta_star must be finite");
    if (c_target.rows() != p || c_target.cols() != p)
      throw InvalidScenario("scenario: C_target must be p×p with p = |beta_star|");
    if (!is_symmetric(c_target, 1e-10)) throw InvalidScenario("scenario: C_target not symmetric");
    if (!is_positive_definite(c_target))
      throw InvalidScenario("scenario: C_target must be positive definite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidScenario("scenario: sigma must be > 0");
    if (!(lambda0 >= 0.0) || !std::isfinite(lambda0))
      throw InvalidScenario("scenario: lambda must be finite and >= 0");
    if (n_grid.empty()) throw InvalidScenario("scenario: n_grid is empty");
    for (std::size_t k = 0; k < n_grid.size(); ++k) {
      if (n_grid[k] < p) throw InvalidScenario("scenario: every n must be >= p");
      if (k > 0 && n_grid[k] <= n_grid[k - 1])
        throw InvalidScenario("scenario: n_grid must be strictly increasing");
    }
    if (reps < 2) throw InvalidScenario("scenario: reps must be >= 2");
    if (kkt_every == 0) throw InvalidScenario("scenario: kkt_every must be >= 1");
    const ParallelismReport par = is_parallel(c_target, parallelism);
    if (par.parallel)
      throw InvalidScenario("scenario: C_target is parallel to the l1-ball", par.witnesses.front());
  }
};

// ---------------------------------------------------------------------------
// Limiting problem

// minimize ||u_{Ā*}||₁ + sign(β*)_{A*}ᵀu_{A*} subject to ||Cu − v⁰||_∞ <= λ̃.
// Each u_j is split as u⁺ − u⁻; for j ∈ A* the two halves carry costs
// ±sign(β*_j), which is the same as a free variable with linear cost.
inline Vector limiting_problem_solve(const Matrix& c, std::span<const double> v0,
                                     double lambda_tilde, std::span<const double> beta_star,
                                     const LpTolerances& tol = {}) {
  const std::size_t p = v0.size();
  if (beta_star.size() != p) throw std::invalid_argument("limiting_problem_solve: size mismatch");
  const DantzigProblem prob{c, Vector(v0.begin(), v0.end()), lambda_tilde};
  prob.validate();
  LinearProgram lp = split_lp(prob);
  for (std::size_t j = 0; j < p; ++j) {
    if (beta_star[j] == 0.0) continue;
    const double s = beta_star[j] > 0.0 ? 1.0 : -1.0;
    lp.objective[j] = s;
    lp.objective[p + j] = -s;
  }
  const LpSolution sol = solve(lp, tol);
  if (sol.status == LpStatus::Unbounded)
    throw std::runtime_error("limiting_problem_solve: unbounded (C is parallel to the l1-ball?)");
  if (sol.status == LpStatus::Infeasible)
    throw std::runtime_error("limiting_problem_solve: infeasible");
  Vector u(p);
  for (std::size_t j = 0; j < p; ++j) u[j] = sol.x[j] - sol.x[p + j];
  return u;
}

// ---------------------------------------------------------------------------
// Simulation plumbing

struct CoordinateSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::array<double, 5> quantiles{};  // 5%, 25%, 50%, 75%, 95%
  double atom_mass = 0.0;             // fraction with |x| < atom tolerance
};

inline constexpr std::array<double, 5> kSummaryLevels{0.05, 0.25, 0.5, 0.75, 0.95};
inline constexpr double kAtomTolerance = 1e-6;

inline CoordinateSummary summarize(const Vector& x, double atom_tol = kAtomTolerance) {
  CoordinateSummary s;
  s.mean = stats::mean(x);
  s.sd = stats::stddev(x);
  for (std::size_t k = 0; k < kSummaryLevels.size(); ++k)
    s.quantiles[k] = stats::quantile(x, kSummaryLevels[k]);
  s.atom_mass = stats::atom_mass(x, atom_tol);
  return s;
}

namespace detail {

struct Replicate {
  DesignData data;
  double lindeberg = 0.0;  // n⁻¹ max_i ||x_i||²
};

// Rows of X are N(0, Σ) with Σ = LLᵀ; y = Xβ* + σε.
inline Replicate draw_replicate(const ScenarioConfig& cfg, const Matrix& chol_l,
                                const NoiseGenerator& noise, std::size_t n, std::size_t r) {
  const std::size_t p = cfg.p();
  auto rng = replicate_stream(cfg.seed, n, r, 0xC0);
  const Matrix z = standard_normal_matrix(n, p, rng);
  Replicate rep;
  rep.data.x = z * chol_l.transpose();
  rep.data.y = rep.data.x * cfg.beta_star;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rep.data.y[i] += cfg.sigma * noise(rng);
    worst = std::max(worst, dot(rep.data.x.row(i), rep.data.x.row(i)));
  }
  rep.lindeberg = worst / static_cast<double>(n);
  return rep;
}

inline NoiseGenerator noise_of(const ScenarioConfig& cfg) {
  return cfg.noise_override ? cfg.noise_override : make_noise(cfg.noise);
}

struct ReplicateOutcome {
  Vector beta_hat;
  double lindeberg = 0.0;
  bool kkt_checked = false;
  bool kkt_found = false;
};

inline std::vector<ReplicateOutcome> run_replicates(const ScenarioConfig& cfg, const Matrix& chol_l,
                                                    std::size_t n) {
  const NoiseGenerator noise = noise_of(cfg);
  const double lambda = cfg.lambda_at(n);
  std::vector<ReplicateOutcome> out(cfg.reps);
  parallel_for(cfg.reps, cfg.jobs, [&](std::size_t r) {
    const Replicate rep = draw_replicate(cfg, chol_l, noise, n, r);
    const DantzigEstimate est = dantzig_select(rep.data, lambda);
    if (!est.optimal())
      throw std::runtime_error("simulation: Dantzig selector infeasible on replicate " +
                               std::to_string(r));
    ReplicateOutcome& o = out[r];
    o.beta_hat = est.beta_hat;
    o.lindeberg = rep.lindeberg;
    if (r % cfg.kkt_every == 0) {
      o.kkt_checked = true;
      o.kkt_found = dantzig_certificate(rep.data, lambda, est.beta_hat).found;
    }
  });
  return out;
}

// Relative Frobenius error, or the absolute one against a zero reference.
inline double covariance_gap(const Matrix& a, const Matrix& ref) {
  if (frobenius(ref) == 0.0) return frobenius(a);
  return stats::relative_frobenius(a, ref);
}

inline bool nonincreasing(const std::vector<double>& x) {
  for (std::size_t k = 1; k < x.size(); ++k)
    if (x[k] > x[k - 1]) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Almost-sure limit

struct Cor1Row {
  std::size_t n = 0;
  double lambda = 0.0;
  double median_error_to_limit = 0.0;  // median over reps of ||β̂ − β⁰||_∞
  double median_error_to_truth = 0.0;  // median over reps of ||β̂ − β*||_∞
  double mean_lindeberg = 0.0;
  std::size_t kkt_checked = 0;
  std::size_t kkt_failed = 0;
};

struct Cor1Report {
  Vector beta_limit;          // β⁰ = G(C, Cβ*, λ₀)
  double limit_gap = 0.0;     // ||β⁰ − β*||_∞
  std::vector<Cor1Row> rows;  // one per n in n_grid
  bool lindeberg_decreasing = false;
  bool kkt_all_found = false;
};

inline Cor1Report simulate_corollary1(const ScenarioConfig& cfg) {
  cfg.validate();
  const Matrix chol_l = cholesky(cfg.c_target);
  Cor1Report rep;
  const DantzigEstimate limit =
      g_map({cfg.c_target, cfg.c_target * cfg.beta_star, cfg.lambda_rule == LambdaRule::Fixed
                                                              ? cfg.lambda0
                                                              : 0.0});
  rep.beta_limit = limit.beta_hat;
  rep.limit_gap = max_abs_diff(rep.beta_limit, cfg.beta_star);
  std::vector<double> lind;
  rep.kkt_all_found = true;
  for (std::size_t n : cfg.n_grid) {
    const auto outcomes = detail::run_replicates(cfg, chol_l, n);
    Cor1Row row;
    row.n = n;
    row.lambda = cfg.lambda_at(n);
    std::vector<double> e0, es;
    double lsum = 0.0;
    for (const auto& o : outcomes) {
      e0.push_back(max_abs_diff(o.beta_hat, rep.beta_limit));
      es.push_back(max_abs_diff(o.beta_hat, cfg.beta_star));
      lsum += o.lindeberg;
      row.kkt_checked += o.kkt_checked;
      row.kkt_failed += o.kkt_checked && !o.kkt_found;
    }
    row.median_error_to_limit = stats::median(e0);
    row.median_error_to_truth = stats::median(es);
    row.mean_lindeberg = lsum / static_cast<double>(outcomes.size());
    lind.push_back(row.mean_lindeberg);
    rep.kkt_all_found = rep.kkt_all_found && row.kkt_failed == 0;
    rep.rows.push_back(row);
  }
  rep.lindeberg_decreasing = detail::nonincreasing(lind);
  return rep;
}

// ---------------------------------------------------------------------------
// Limiting distribution

struct Cor2Options {
  double ks_threshold = 0.05;
  double cov_threshold = 0.15;
  double normality_level = 0.01;
  double atom_tol = kAtomTolerance;
  std::size_t min_final_n = 2000;
};

struct Cor2Row {
  std::size_t n = 0;
  double lambda = 0.0;
  Vector ks;                      // per coordinate, empirical vs limiting sample
  Vector ks_p_value;
  double covariance_error = 0.0;  // relative Frobenius error (absolute if the reference is 0)
  Vector atom_mass;               // per coordinate, empirical sample
  double mean_lindeberg = 0.0;
  std::size_t kkt_checked = 0;
  std::size_t kkt_failed = 0;
};

struct Cor2Report {
  std::vector<Cor2Row> rows;
  std::size_t final_n = 0;
  Matrix empirical;  // reps × p, √n(β̂ − β*) at final_n
  Matrix limiting;   // reps × p, u⁰ draws
  std::vector<CoordinateSummary> empirical_summary;
  std::vector<CoordinateSummary> limiting_summary;
  Matrix empirical_covariance;
  Matrix reference_covariance;  // σ²C⁻¹ when λ̃₀ = 0, else the limiting-sample covariance
  bool reference_is_closed_form = false;
  double covariance_error = 0.0;
  std::vector<stats::TestResult> limiting_normality;  // Jarque–Bera per coordinate
  IndexSet zero_coordinates;                          // Ā*
  bool lindeberg_decreasing = false;
  bool kkt_all_found = false;
  bool ks_pass = false;
  bool covariance_pass = false;  // only meaningful when the reference is closed form
  bool non_normal_zero_coordinate = false;
};

// Draws u⁰ = argmin of the limiting problem with v⁰ ~ N(0, σ²C).
inline Matrix limiting_sample(const ScenarioConfig& cfg) {
  const std::size_t p = cfg.p();
  const Matrix chol_l = cholesky(cfg.c_target);
  Matrix out(cfg.reps, p);
  parallel_for(cfg.reps, cfg.jobs, [&](std::size_t r) {
    auto rng = replicate_stream(cfg.seed, 0, r, 0x11);
    const Matrix z = standard_normal_matrix(p, 1, rng);
    const Vector v0 = scaled(chol_l * z.entries(), cfg.sigma);
    const Vector u = limiting_problem_solve(cfg.c_target, v0, cfg.lambda0, cfg.beta_star);
    for (std::size_t j = 0; j < p; ++j) out(r, j) = u[j];
  });
  return out;
}

inline Cor2Report simulate_corollary2(const ScenarioConfig& cfg, const Cor2Options& opt = {}) {
  cfg.validate();
  if (cfg.lambda_rule != LambdaRule::RootN)
    throw InvalidScenario("root-n simulation requires the root-n lambda rule");
  if (cfg.n_grid.back() < opt.min_final_n)
    throw InvalidScenario("root-n simulation requires the largest n >= " +
                          std::to_string(opt.min_final_n));
  const std::size_t p = cfg.p();
  const Matrix chol_l = cholesky(cfg.c_target);

  Cor2Report rep;
  rep.limiting = limiting_sample(cfg);
  rep.reference_is_closed_form = cfg.lambda0 == 0.0;
  rep.reference_covariance = rep.reference_is_closed_form
                                 ? (cfg.sigma * cfg.sigma) * inverse(cfg.c_target)
                                 : stats::covariance(rep.limiting);
  std::vector<std::size_t> zeros;
  for (std::size_t j = 0; j < p; ++j)
    if (cfg.beta_star[j] == 0.0) zeros.push_back(j);
  rep.zero_coordinates = IndexSet(zeros, p);

  std::vector<double> lind;
  rep.kkt_all_found = true;
  for (std::size_t n : cfg.n_grid) {
    const auto outcomes = detail::run_replicates(cfg, chol_l, n);
    const double root_n = std::sqrt(static_cast<double>(n));
    Matrix emp(cfg.reps, p);
    Cor2Row row;
    row.n = n;
    row.lambda = cfg.lambda_at(n);
    double lsum = 0.0;
    for (std::size_t r = 0; r < cfg.reps; ++r) {
      for (std::size_t j = 0; j < p; ++j)
        emp(r, j) = root_n * (outcomes[r].beta_hat[j] - cfg.beta_star[j]);
      lsum += outcomes[r].lindeberg;
      row.kkt_checked += outcomes[r].kkt_checked;
      row.kkt_failed += outcomes[r].kkt_checked && !outcomes[r].kkt_found;
    }
    for (std::size_t j = 0; j < p; ++j) {
      const auto ks = stats::ks_two_sample(emp.column(j), rep.limiting.column(j));
      row.ks.push_back(ks.statistic);
      row.ks_p_value.push_back(ks.p_value);
      row.atom_mass.push_back(stats::atom_mass(emp.column(j), opt.atom_tol));
    }
    row.covariance_error = detail::covariance_gap(stats::covariance(emp), rep.reference_covariance);
    row.mean_lindeberg = lsum / static_cast<double>(cfg.reps);
    lind.push_back(row.mean_lindeberg);
    rep.kkt_all_found = rep.kkt_all_found && row.kkt_failed == 0;
    rep.rows.push_back(row);
    if (n == cfg.n_grid.back()) {
      rep.final_n = n;
      rep.empirical = std::move(emp);
    }
  }
  rep.lindeberg_decreasing = detail::nonincreasing(lind);
  rep.empirical_covariance = stats::covariance(rep.empirical);
  rep.covariance_error = rep.rows.back().covariance_error;
  for (std::size_t j = 0; j < p; ++j) {
    rep.empirical_summary.push_back(summarize(rep.empirical.column(j), opt.atom_tol));
    rep.limiting_summary.push_back(summarize(rep.limiting.column(j), opt.atom_tol));
    rep.limiting_normality.push_back(stats::jarque_bera(rep.limiting.column(j)));
  }
  rep.ks_pass = norm_inf(rep.rows.back().ks) < opt.ks_threshold;
  rep.covariance_pass = rep.reference_is_closed_form && rep.covariance_error < opt.cov_threshold;
  for (std::size_t j : rep.zero_coordinates) {
    const double pv = rep.limiting_normality[j].p_value;
    if (std::isfinite(pv) && pv < opt.normality_level) rep.non_normal_zero_coordinate = true;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Continuity of G

struct Perturbation {
  Matrix dc;  // symmetric
  Vector dv;
  double dlambda = 0.0;
};

struct ContinuityRow {
  double eps = 0.0;
  double distance = 0.0;  // ||G(perturbed) − G(base)||_∞
  bool skipped = false;
  std::string reason;
};

struct ContinuityReport {
  Vector base;
  std::vector<ContinuityRow> rows;
  double final_distance = 0.0;
  bool pass = false;
};

inline constexpr double kContinuityFinalBound = 1e-4;
inline constexpr double kContinuityGrowthFactor = 10.0;
inline constexpr double kContinuityFloor = 1e-12;

inline std::vector<double> default_eps_grid() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

inline ContinuityReport continuity_probe(const Matrix& c, std::span<const double> v, double lambda,
                                         const Perturbation& dir, const std::vector<double>& eps_grid,
                                         const ParallelismOptions& par = {}) {
  const std::size_t p = v.size();
  const DantzigProblem base{c, Vector(v.begin(), v.end()), lambda};
  base.validate();
  if (dir.dc.rows() != p || dir.dc.cols() != p || dir.dv.size() != p)
    throw std::invalid_argument("continuity_probe: perturbation shape mismatch");
  if (!is_symmetric(dir.dc, 1e-12))
    throw std::invalid_argument("continuity_probe: perturbation of C must be symmetric");
  if (eps_grid.empty()) throw std::invalid_argument("continuity_probe: empty eps grid");
  for (std::size_t k = 0; k < eps_grid.size(); ++k)
    if (!(eps_grid[k] > 0.0) || (k > 0 && eps_grid[k] >= eps_grid[k - 1]))
      throw std::invalid_argument("continuity_probe: eps grid must be positive and decreasing");
  if (!is_positive_definite(c)) throw InvalidScenario("continuity_probe: C must be invertible");
  if (const auto r = is_parallel(c, par); r.parallel)
    throw InvalidScenario("continuity_probe: C is parallel to the l1-ball", r.witnesses.front());

  ContinuityReport rep;
  const DantzigEstimate g0 = g_map(base);
  rep.base = g0.beta_hat;
  bool ok = true;
  std::optional<double> last;
  for (double eps : eps_grid) {
    ContinuityRow row;
    row.eps = eps;
    DantzigProblem q{c + eps * dir.dc, base.v, std::max(0.0, lambda + eps * dir.dlambda)};
    for (std::size_t j = 0; j < p; ++j) q.v[j] += eps * dir.dv[j];
    if (!is_positive_definite(q.c)) {
      row.skipped = true;
      row.reason = "perturbed C not positive definite";
    } else if (is_parallel(q.c, par).parallel) {
      row.skipped = true;
      row.reason = "perturbed C parallel to the l1-ball";
    } else {
      const DantzigEstimate g = g_map(q);
      if (!g.optimal()) {
        row.skipped = true;
        row.reason = "perturbed problem infeasible";
      } else {
        row.distance = max_abs_diff(g.beta_hat, rep.base);
        if (last && row.distance > kContinuityGrowthFactor * std::max(*last, kContinuityFloor))
          ok = false;
        last = row.distance;
      }
    }
    rep.rows.push_back(row);
  }
  rep.final_distance = last.value_or(std::numeric_limits<double>::infinity());
  rep.pass = ok && last.has_value() && *last < kContinuityFinalBound;
  return rep;
}

struct ContinuityInstance {
  Matrix c;
  Vector v;
  double lambda = 0.0;
  Perturbation direction;
};

// Well-conditioned random instance: C = n⁻¹ZᵀZ + ½I from a 2p×p Gaussian Z,
// v = Cβ + noise, and a unit-scale symmetric direction. With
// lambda_positive the base λ is a third of ||v||_∞ and δλ is random;
// otherwise λ = 0 and δλ = 0.
inline ContinuityInstance random_continuity_instance(std::size_t p, std::uint64_t seed,
                                                     bool lambda_positive) {
  if (p == 0) throw std::invalid_argument("random_continuity_instance: p must be >= 1");
  auto rng = replicate_stream(seed, p, 0, 0xC7);
  std::normal_distribution<double> z(0.0, 1.0);
  ContinuityInstance inst;
  inst.c = scaled_gram(standard_normal_matrix(2 * p, p, rng)) + 0.5 * Matrix::identity(p);
  Vector beta(p);
  for (double& b : beta) b = z(rng);
  inst.v = inst.c * beta;
  for (double& x : inst.v) x += 0.5 * z(rng);
  inst.lambda = lambda_positive ? norm_inf(inst.v) / 3.0 : 0.0;
  inst.direction.dc = Matrix(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) inst.direction.dc(i, j) = inst.direction.dc(j, i) = z(rng);
  inst.direction.dv.resize(p);
  for (double& x : inst.direction.dv) x = z(rng);
  inst.direction.dlambda = lambda_positive ? z(rng) : 0.0;
  return inst;
}

}  // namespace dantzig_kit
