#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dantzig_kit/halfplane.hpp"
#include "dantzig_kit/linalg.hpp"
#include "dantzig_kit/lp.hpp"

namespace dantzig_kit {

// One regression instance: n×p predictors X and outcomes y.
struct DesignData {
  Matrix x;
  Vector y;

  std::size_t n() const noexcept { return x.rows(); }
  std::size_t p() const noexcept { return x.cols(); }

  void validate() const {
    if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("DesignData: empty X");
    if (y.size() != x.rows())
      throw std::invalid_argument("DesignData: y has " + std::to_string(y.size()) +
                                  " entries, X has " + std::to_string(x.rows()) + " rows");
    if (!x.all_finite() ||
        !std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }))
      throw std::invalid_argument("DesignData: non-finite entry");
  }
};

// minimize ||u||₁ subject to ||Cu − v||_∞ <= lambda.
struct DantzigProblem {
  Matrix c;
  Vector v;
  double lambda = 0.0;

  std::size_t p() const noexcept { return v.size(); }

  static DantzigProblem from_data(const DesignData& data, double lambda) {
    data.validate();
    const double inv_n = 1.0 / static_cast<double>(data.n());
    return {scaled_gram(data.x), scaled(transpose_times(data.x, data.y), inv_n), lambda};
  }

  void validate() const {
    if (!c.is_square() || c.rows() != v.size() || v.empty())
      throw std::invalid_argument("DantzigProblem: C must be p×p with p = |v| >= 1");
    if (!is_symmetric(c, 1e-10)) throw std::invalid_argument("DantzigProblem: C not symmetric");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("DantzigProblem: lambda must be finite and >= 0");
    if (!c.all_finite() ||
        !std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); }))
      throw std::invalid_argument("DantzigProblem: non-finite entry");
  }
};

enum class EstimateStatus { Optimal, Infeasible };

inline const char* to_string(EstimateStatus s) {
  return s == EstimateStatus::Optimal ? "optimal" : "infeasible";
}

struct DantzigEstimate {
  Vector beta_hat;
  double l1_norm = 0.0;
  IndexSet active_set;  // j with |Cβ̂ − v|_j = lambda
  EstimateStatus status = EstimateStatus::Infeasible;

  bool optimal() const noexcept { return status == EstimateStatus::Optimal; }
};

inline constexpr double kActiveSetTolerance = 1e-7;

// Coordinates where the constraint |Cβ − v|_j <= lambda binds.
inline IndexSet binding_constraints(const DantzigProblem& prob, std::span<const double> beta,
                                    double tol = kActiveSetTolerance) {
  const Vector cb = prob.c * beta;
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < prob.p(); ++j)
    if (std::abs(std::abs(cb[j] - prob.v[j]) - prob.lambda) <= tol * std::max(1.0, prob.lambda))
      idx.push_back(j);
  return IndexSet(std::move(idx), prob.p());
}

// u = u⁺ − u⁻ with u± >= 0; objective Σ(u⁺ + u⁻); rows ±(v − Cu) <= lambda.
inline LinearProgram split_lp(const DantzigProblem& prob) {
  const std::size_t p = prob.p();
  LinearProgram lp = LinearProgram::nonnegative(Vector(2 * p, 1.0));
  Vector row(2 * p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = 0; k < p; ++k) {
      row[k] = prob.c(j, k);
      row[p + k] = -prob.c(j, k);
    }
    lp.add_le(row, prob.v[j] + prob.lambda);
    for (double& r : row) r = -r;
    lp.add_le(row, prob.lambda - prob.v[j]);
  }
  return lp;
}

// The solution operator G(C, v, lambda). Reports the simplex's basic optimum,
// which is reproducible for fixed input; multiplicity is surfaced by
// solution_set_diameter, not hidden here.
inline DantzigEstimate g_map(const DantzigProblem& prob, const LpTolerances& tol = {}) {
  prob.validate();
  const std::size_t p = prob.p();
  const LpSolution s = solve(split_lp(prob), tol);
  DantzigEstimate est;
  if (s.status != LpStatus::Optimal) {
    // The objective is bounded below by zero, so only infeasibility remains.
    est.status = EstimateStatus::Infeasible;
    est.active_set = IndexSet({}, p);
    return est;
  }
  est.status = EstimateStatus::Optimal;
  est.beta_hat.resize(p);
  for (std::size_t j = 0; j < p; ++j) est.beta_hat[j] = s.x[j] - s.x[p + j];
  est.l1_norm = norm1(est.beta_hat);
  est.active_set = binding_constraints(prob, est.beta_hat);
  return est;
}

// Dantzig selector on (X, y): G(n⁻¹XᵀX, n⁻¹Xᵀy, lambda).
inline DantzigEstimate dantzig_select(const DesignData& data, double lambda,
                                      const LpTolerances& tol = {}) {
  return g_map(DantzigProblem::from_data(data, lambda), tol);
}

struct SolutionSetSpread {
  double diameter_inf = 0.0;  // max_j (max_j − min_j)
  std::vector<Range> per_coord;
};

inline constexpr double kUniqueDiameter = 1e-7;
inline constexpr double kMultipleDiameter = 1e-6;

// Per-coordinate extent of the optimal face F ∩ t₀B₁.
inline SolutionSetSpread solution_set_diameter(const DantzigProblem& prob,
                                               const LpTolerances& tol = {}) {
  prob.validate();
  const std::size_t p = prob.p();
  const LinearProgram lp = split_lp(prob);
  if (!solve(lp, tol).optimal())
    throw std::invalid_argument("solution_set_diameter: problem is infeasible");
  SolutionSetSpread out;
  Vector dir(2 * p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    std::fill(dir.begin(), dir.end(), 0.0);
    dir[j] = 1.0;
    dir[p + j] = -1.0;
    const Range r = objective_range_on_optimal_face(lp, dir, tol);
    out.per_coord.push_back(r);
    out.diameter_inf = std::max(out.diameter_inf, r.width());
  }
  return out;
}

// Vertices of F ∩ [−w, w]² for a two-predictor problem.
inline std::vector<Point2> polygon_2d(const DantzigProblem& prob, double box_halfwidth) {
  prob.validate();
  if (prob.p() != 2) throw std::invalid_argument("polygon_2d: requires p = 2");
  if (!(box_halfwidth > 0.0)) throw std::invalid_argument("polygon_2d: halfwidth must be > 0");
  std::vector<HalfPlane> planes;
  for (std::size_t j = 0; j < 2; ++j) {
    planes.push_back({prob.c(j, 0), prob.c(j, 1), prob.v[j] + prob.lambda});
    planes.push_back({-prob.c(j, 0), -prob.c(j, 1), prob.lambda - prob.v[j]});
  }
  return intersect_halfplanes(planes, box_halfwidth);
}

}  // namespace dantzig_kit
