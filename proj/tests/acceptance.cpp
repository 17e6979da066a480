// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dantzig_kit.hpp"
#include "oracles.hpp"

using namespace dantzig_kit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

oracle::Mat to_rows(const Matrix& m) {
  oracle::Mat out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

DesignData random_design(std::size_t n, std::size_t p, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  DesignData d{standard_normal_matrix(n, p, rng), Vector(n)};
  for (double& v : d.y) v = z(rng);
  return d;
}

constexpr double kLambdaFractions[] = {0.0, 0.1, 0.3, 0.6, 0.9};

Matrix well_conditioned() { return Matrix{{1.0, 0.3, 0.1}, {0.3, 1.0, 0.2}, {0.1, 0.2, 1.0}}; }

// 40 designs × 5 λ values, p <= 5, n <= 20.
Outcome solver_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::size_t instances = 0, mismatches = 0;
  double worst = 0.0;
  for (int t = 0; t < 40; ++t) {
    const std::size_t p = 1 + rng() % 5, n = p + rng() % (21 - p);
    const DesignData d = random_design(n, p, rng);
    const double lmax = norm_inf(DantzigProblem::from_data(d, 0.0).v);
    for (double frac : kLambdaFractions) {
      const DantzigProblem prob = DantzigProblem::from_data(d, frac * lmax);
      const DantzigEstimate e = g_map(prob);
      const oracle::VertexResult o = oracle::l1_min_over_slab(to_rows(prob.c), prob.v, prob.lambda);
      ++instances;
      if (!e.optimal() || !o.feasible) {
        ++mismatches;
        continue;
      }
      const double gap = std::abs(e.l1_norm - o.best);
      worst = std::max(worst, gap);
      if (gap > 1e-8) ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << instances << " instances, max |objective - oracle| = " << worst << ", " << mismatches
     << " mismatches, " << secs << " s";
  return {instances == 200 && mismatches == 0 && secs < 30.0, os.str()};
}

Outcome kkt_equivalence() {
  std::mt19937_64 rng(1002);
  std::normal_distribution<double> z(0.0, 1.0);
  std::size_t certified = 0, solver_outputs = 0, perturbed = 0, wrongly_accepted = 0;
  std::size_t lasso_runs = 0, lasso_failed = 0;
  double lasso_worst = 0.0;
  for (int t = 0; perturbed < 200 || t < 40; ++t) {
    const std::size_t p = 1 + rng() % 5, n = p + 1 + rng() % (20 - p);
    const DesignData d = random_design(n, p, rng);
    const DantzigProblem base = DantzigProblem::from_data(d, 0.0);
    const double lmax = norm_inf(base.v);
    const Vector ols = solve_linear(base.c, base.v);
    for (double frac : kLambdaFractions) {
      const double lambda = frac * lmax;
      const DantzigEstimate e = dantzig_select(d, lambda);
      if (t < 40) {
        ++solver_outputs;
        if (e.optimal() && dantzig_certificate(d, lambda, e.beta_hat).found) ++certified;
        const LassoEstimate l = lasso_solve(d, lambda, LassoOptions{});
        const KktCheck k = lasso_kkt_check(d, lambda, l.beta_hat, 1e-6);
        ++lasso_runs;
        lasso_worst = std::max(lasso_worst, k.max_violation);
        if (!k.ok) ++lasso_failed;
      }
      if (lambda == 0.0 || perturbed >= 200 || !e.optimal()) continue;
      // A random step, pulled back into the feasible set towards OLS; kept
      // only if the ℓ¹ norm is clearly above the optimum.
      Vector b = e.beta_hat;
      Vector dir(p);
      for (double& x : dir) x = z(rng);
      const double s = 1e-2 / norm2(dir);
      for (std::size_t j = 0; j < p; ++j) b[j] += s * dir[j];
      DantzigProblem prob = base;
      prob.lambda = lambda;
      const double worst = norm_inf(subtract(prob.v, prob.c * b));
      const double theta = std::max(0.0, 1.0 - lambda / worst);
      for (std::size_t j = 0; j < p; ++j) b[j] += theta * (ols[j] - b[j]);
      if (norm1(b) <= e.l1_norm + 1e-6) continue;
      if (norm_inf(subtract(prob.v, prob.c * b)) > lambda + 1e-9) continue;
      ++perturbed;
      if (dantzig_certificate(prob, b).found) ++wrongly_accepted;
    }
  }
  std::ostringstream os;
  os << certified << "/" << solver_outputs << " solver outputs certified; " << wrongly_accepted
     << "/" << perturbed << " perturbed feasible points accepted; lasso " << lasso_runs - lasso_failed
     << "/" << lasso_runs << " within 1e-6 (max violation " << lasso_worst << ")";
  return {certified == solver_outputs && perturbed == 200 && wrongly_accepted == 0 &&
              lasso_failed == 0,
          os.str()};
}

Outcome random_designs_not_parallel() {
  const auto t0 = Clock::now();
  struct Shape {
    std::size_t n, p, reps;
  };
  bool ok = true;
  std::ostringstream os;
  for (const Shape s : {Shape{10, 3, 200}, Shape{10, 4, 100}, Shape{20, 5, 50}}) {
    const Prop2Result r = prop2_experiment(s.n, s.p, s.reps, 2024);
    os << "(" << s.n << "," << s.p << "," << s.reps << ") -> " << r.fraction_parallel << "; ";
    ok = ok && r.fraction_parallel == 0.0;
  }
  const Matrix dup = scaled_gram(Matrix{{1.0, 1.0}, {0.0, 0.0}});
  const ParallelismReport rep = is_parallel(dup);
  const bool witness_ok = rep.parallel && !rep.witnesses.empty() &&
                          std::all_of(rep.witnesses.begin(), rep.witnesses.end(),
                                      [&](const auto& w) { return verify_witness(dup, w); });
  const double secs = seconds_since(t0);
  os << "duplicated columns parallel=" << rep.parallel << " with " << rep.witnesses.size()
     << " verified witnesses; " << secs << " s";
  return {ok && witness_ok && secs < 120.0, os.str()};
}

Outcome uniqueness_chain() {
  std::mt19937_64 rng(1004);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Matrix> candidates{Matrix::identity(3), well_conditioned()};
  for (std::size_t p : {2, 3, 4, 4, 5}) candidates.push_back(scaled_gram(standard_normal_matrix(3 * p, p, rng)));
  std::size_t instances = 0, probes = 0, over = 0;
  double worst = 0.0;
  for (const Matrix& c : candidates) {
    if (is_parallel(c).parallel) continue;
    ++instances;
    const std::size_t p = c.rows();
    for (int iv = 0; iv < 5; ++iv) {
      Vector v(p);
      for (double& x : v) x = z(rng);
      for (double frac : kLambdaFractions) {
        const SolutionSetSpread s = solution_set_diameter({c, v, frac * norm_inf(v)});
        ++probes;
        worst = std::max(worst, s.diameter_inf);
        if (s.diameter_inf > kUniqueDiameter) ++over;
      }
    }
  }
  const MultInstance inst = duplicated_column_instance();
  const MultVerdict verdict = verify_mult(inst);
  const double diam =
      solution_set_diameter(DantzigProblem::from_data(inst.data, inst.lambda)).diameter_inf;
  std::ostringstream os;
  os << instances << " non-parallel C, " << probes << " probes, max diameter " << worst
     << "; duplicated-column fixture: verify_mult holds=" << verdict.holds << ", diameter " << diam;
  return {instances == candidates.size() && probes == 25 * instances && over == 0 && verdict.holds &&
              std::abs(diam - 1.0) <= 1e-6,
          os.str()};
}

ScenarioConfig base_scenario() {
  ScenarioConfig cfg;
  cfg.beta_star = {1.0, -0.5, 0.0};
  cfg.c_target = well_conditioned();
  cfg.sigma = 1.0;
  cfg.reps = 200;
  cfg.seed = 1005;
  return cfg;
}

std::string curve(const Cor1Report& r, bool to_limit) {
  std::ostringstream os;
  for (const Cor1Row& row : r.rows)
    os << " n=" << row.n << ":" << (to_limit ? row.median_error_to_limit : row.median_error_to_truth);
  return os.str();
}

Outcome fixed_lambda_limit() {
  ScenarioConfig consistent = base_scenario();
  consistent.n_grid = {250, 1000, 4000};
  const Cor1Report a = simulate_corollary1(consistent);

  ScenarioConfig biased = consistent;
  biased.lambda0 = 0.5;
  const Cor1Report b = simulate_corollary1(biased);
  const double floor = 0.5 * b.limit_gap;
  bool above_floor = b.limit_gap > 0.0;
  for (const Cor1Row& row : b.rows) above_floor = above_floor && row.median_error_to_truth > floor;

  std::ostringstream os;
  os << "lambda0=0 error to beta*:" << curve(a, false) << " | lambda0=0.5 error to beta0:"
     << curve(b, true) << ", error to beta*:" << curve(b, false) << " (floor " << floor << ")";
  return {a.rows.back().median_error_to_truth < 0.05 && b.rows.back().median_error_to_limit < 0.05 &&
              above_floor,
          os.str()};
}

Outcome root_n_covariance() {
  const auto t0 = Clock::now();
  ScenarioConfig cfg = base_scenario();
  cfg.lambda_rule = LambdaRule::RootN;
  cfg.lambda0 = 0.0;
  cfg.n_grid = {2000};
  cfg.reps = 2000;
  cfg.jobs = 1;
  const Cor2Report r = simulate_corollary2(cfg);
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "relative Frobenius error " << r.covariance_error << " vs sigma^2 C^-1 (closed form="
     << r.reference_is_closed_form << "), single-threaded " << secs << " s";
  return {r.reference_is_closed_form && r.covariance_error < 0.15 && secs < 300.0, os.str()};
}

Outcome root_n_non_normal() {
  ScenarioConfig cfg = base_scenario();
  cfg.lambda_rule = LambdaRule::RootN;
  cfg.lambda0 = 1.0;
  cfg.n_grid = {5000};
  cfg.reps = 5000;
  cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
  const Cor2Report r = simulate_corollary2(cfg);
  const Vector& ks = r.rows.back().ks;
  std::ostringstream os;
  os << "KS per coordinate:";
  for (double k : ks) os << " " << k;
  bool rejects = false;
  os << "; Jarque-Bera p on zero coordinates:";
  for (std::size_t j : r.zero_coordinates) {
    os << " " << j + 1 << ":" << r.limiting_normality[j].p_value;
    rejects = rejects || r.limiting_normality[j].p_value < 0.01;
  }
  return {norm_inf(ks) < 0.05 && !r.zero_coordinates.empty() && rejects, os.str()};
}

Outcome continuity() {
  std::size_t passed = 0, total = 0;
  double worst_final = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (bool positive : {false, true}) {
      const ContinuityInstance inst = random_continuity_instance(3, seed, positive);
      const ContinuityReport r =
          continuity_probe(inst.c, inst.v, inst.lambda, inst.direction, default_eps_grid());
      ++total;
      worst_final = std::max(worst_final, r.final_distance);
      if (r.pass && r.final_distance < 1e-4) ++passed;
    }
  }
  // λ = 0 and a δv-only direction: d(ε) = ||C⁻¹δv||_∞·ε. Checked on every
  // grid point; at ε = 1e-6 one rounding step of β̂ is already ~1e-10 of d.
  const std::vector<double> grid = default_eps_grid();
  std::vector<double> worst_rel(grid.size(), 0.0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ContinuityInstance inst = random_continuity_instance(3, seed, false);
    const Perturbation dv_only{Matrix(3, 3), inst.direction.dv, 0.0};
    const ContinuityReport r = continuity_probe(inst.c, inst.v, 0.0, dv_only, grid);
    const double slope = norm_inf(solve_linear(inst.c, inst.direction.dv));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double expect = slope * grid[k];
      worst_rel[k] = std::max(worst_rel[k], std::abs(r.rows[k].distance - expect) / expect);
    }
  }
  std::ostringstream os;
  os << passed << "/" << total << " instances pass, max d(1e-6) = " << worst_final
     << "; closed-form max relative error by eps:";
  for (std::size_t k = 0; k < grid.size(); ++k) os << " " << grid[k] << ":" << worst_rel[k];
  const double worst = *std::max_element(worst_rel.begin(), worst_rel.end());
  return {passed == total && total == 20 && worst <= 1e-10, os.str()};
}

Outcome rank_probe() {
  struct Shape {
    std::size_t n, p, q;
  };
  bool ok = true;
  std::ostringstream os;
  for (const Shape s : {Shape{10, 3, 3}, Shape{5, 1, 1}, Shape{20, 5, 2}, Shape{8, 8, 8},
                        Shape{12, 4, 9}, Shape{6, 2, 5}}) {
    const double f = lemma_a3_probe(s.n, s.p, s.q, 200, 1009);
    os << "(" << s.n << "," << s.p << "," << s.q << ") -> " << f << "; ";
    ok = ok && f == 1.0;
  }
  os << "reps 200";
  return {ok, os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"solver matches vertex-enumeration oracle", solver_oracle},
      {"KKT certificate equivalence, lasso KKT", kkt_equivalence},
      {"random designs are never parallel", random_designs_not_parallel},
      {"non-parallel gives unique solutions; multiple-solution fixture", uniqueness_chain},
      {"fixed-lambda almost-sure limit", fixed_lambda_limit},
      {"root-n limit covariance at lambda_tilde = 0", root_n_covariance},
      {"root-n limit law at lambda_tilde > 0 is not normal", root_n_non_normal},
      {"continuity of the solution map", continuity},
      {"rank of X'W is full almost surely", rank_probe},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %zu. %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
